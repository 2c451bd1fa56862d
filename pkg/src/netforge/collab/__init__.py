"""Collaborative editing: ordered events, shared state, history, revert."""

from netforge.collab.events import (
    EVENT_KINDS,
    LAYER_ADD,
    LAYER_DELETE,
    LAYER_HIGHLIGHT,
    MUTATING_KINDS,
    PARAM_UPDATE,
    REVERT,
    UpdateEvent,
    apply_event,
    event_from_doc,
    event_summary,
    event_to_doc,
)
from netforge.collab.hub import (
    WHOLE_MODEL,
    CollabHub,
    Comment,
    HistoryEntry,
    Session,
    SharedModel,
)
from netforge.collab.reassembly import EventReassembler

__all__ = [
    "EVENT_KINDS", "MUTATING_KINDS",
    "PARAM_UPDATE", "LAYER_ADD", "LAYER_DELETE", "LAYER_HIGHLIGHT", "REVERT",
    "UpdateEvent", "apply_event", "event_from_doc", "event_summary", "event_to_doc",
    "WHOLE_MODEL", "CollabHub", "Comment", "HistoryEntry", "Session", "SharedModel",
    "EventReassembler",
]
