"""Update events: the operational vocabulary of collaborative editing."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from netforge.errors import MalformedDocument, NotFound
from netforge.ir.model import (
    IRModel,
    add_layer,
    delete_layer,
    model_from_doc,
    new_layer,
    update_param,
)

__all__ = [
    "PARAM_UPDATE", "LAYER_ADD", "LAYER_DELETE", "LAYER_HIGHLIGHT", "REVERT",
    "EVENT_KINDS", "MUTATING_KINDS",
    "UpdateEvent", "apply_event", "event_summary", "event_to_doc", "event_from_doc",
]

PARAM_UPDATE = "param_update"
LAYER_ADD = "layer_add"
LAYER_DELETE = "layer_delete"
LAYER_HIGHLIGHT = "layer_highlight"
# Revert is not one of the four client-facing update kinds: the server mints
# it when asked to restore an earlier version, embedding the restored state
# so replay stays a single forward pass.
REVERT = "revert"

EVENT_KINDS = (PARAM_UPDATE, LAYER_ADD, LAYER_DELETE, LAYER_HIGHLIGHT, REVERT)
MUTATING_KINDS = (PARAM_UPDATE, LAYER_ADD, LAYER_DELETE, REVERT)


@dataclass(frozen=True)
class UpdateEvent:
    kind: str
    payload: dict
    author: str
    base_version: int
    timestamp: float
    event_id: Optional[int] = None  # server-assigned; None until applied


def _field(payload: dict, key: str):
    try:
        return payload[key]
    except KeyError:
        raise MalformedDocument(f"event payload missing {key!r}") from None


def apply_event(model: IRModel, event: UpdateEvent) -> IRModel:
    """Apply one event to a model state, returning the next state.

    Pure: highlight events return the input unchanged. Raises NotFound when
    the target layer no longer exists, SchemaViolation on bad values, and
    MalformedDocument when the payload lacks a required field, the same
    checks the interactive editor performs.
    """
    payload = event.payload
    if event.kind == PARAM_UPDATE:
        return update_param(model, _field(payload, "layer_id"),
                            _field(payload, "key"), _field(payload, "new_value"))
    if event.kind == LAYER_ADD:
        layer_doc = _field(payload, "layer")
        layer = new_layer(
            _field(layer_doc, "id"),
            _field(layer_doc, "type"),
            display_name=layer_doc.get("name", ""),
            params=layer_doc.get("params"),
            position_hint=tuple(layer_doc["position"]) if layer_doc.get("position") else None,
        )
        connections = [tuple(pair) for pair in payload.get("connections", [])]
        return add_layer(model, layer, connections=connections)
    if event.kind == LAYER_DELETE:
        return delete_layer(model, _field(payload, "layer_id"))
    if event.kind == LAYER_HIGHLIGHT:
        layer_id = _field(payload, "layer_id")
        if layer_id not in model.layers:
            raise NotFound(f"no layer {layer_id!r}")
        return model
    if event.kind == REVERT:
        return model_from_doc(_field(payload, "model"))
    raise MalformedDocument(f"unknown event kind {event.kind!r}")


def event_summary(event: UpdateEvent) -> str:
    payload = event.payload
    if event.kind == PARAM_UPDATE:
        return f"set {payload['layer_id']}.{payload['key']} = {payload['new_value']!r}"
    if event.kind == LAYER_ADD:
        return f"add layer {payload['layer']['id']}"
    if event.kind == LAYER_DELETE:
        return f"delete layer {payload['layer_id']}"
    if event.kind == LAYER_HIGHLIGHT:
        return f"highlight {payload['layer_id']}"
    if event.kind == REVERT:
        return f"revert to version {payload['to_version']}"
    return event.kind


def event_to_doc(event: UpdateEvent) -> dict:
    return {
        "event_id": event.event_id,
        "kind": event.kind,
        "payload": event.payload,
        "author": event.author,
        "base_version": event.base_version,
        "timestamp": event.timestamp,
    }


def event_from_doc(doc: dict) -> UpdateEvent:
    try:
        kind = doc["kind"]
        if kind not in EVENT_KINDS:
            raise MalformedDocument(f"unknown event kind {kind!r}")
        return UpdateEvent(
            kind=kind,
            payload=dict(doc["payload"]),
            author=str(doc.get("author", "")),
            base_version=int(doc.get("base_version", 0)),
            timestamp=float(doc.get("timestamp", 0.0)),
            event_id=None if doc.get("event_id") is None else int(doc["event_id"]),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise MalformedDocument(f"bad event document: {exc}") from exc
