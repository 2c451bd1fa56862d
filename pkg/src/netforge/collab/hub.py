"""The collaboration hub: one authoritative copy per model, totally ordered."""
from __future__ import annotations

import itertools
import threading
import time
import uuid
from dataclasses import dataclass, field
from typing import Callable, Optional

from netforge.errors import NetforgeError, NotFound, VersionOutOfRange
from netforge.collab.events import (
    LAYER_ADD,
    LAYER_DELETE,
    LAYER_HIGHLIGHT,
    REVERT,
    UpdateEvent,
    apply_event,
    event_summary,
    event_to_doc,
)
from netforge.ir.model import IRModel, model_from_doc, model_to_doc

__all__ = ["Comment", "HistoryEntry", "SharedModel", "Session", "CollabHub"]

WHOLE_MODEL = "model"


@dataclass
class Comment:
    comment_id: str
    model_id: str
    anchor: str  # layer id, or WHOLE_MODEL
    text: str
    author: str
    timestamp: float
    orphaned: bool = False

    def to_doc(self) -> dict:
        return {
            "comment_id": self.comment_id,
            "model_id": self.model_id,
            "anchor": self.anchor,
            "text": self.text,
            "author": self.author,
            "timestamp": self.timestamp,
            "orphaned": self.orphaned,
        }


@dataclass(frozen=True)
class HistoryEntry:
    event_id: int
    kind: str
    author: str
    timestamp: float
    summary: str


@dataclass
class SharedModel:
    """Authoritative state of one collaboratively edited model."""

    model_id: str
    initial: IRModel
    current: IRModel
    version: int = 0
    log: list = field(default_factory=list)  # applied mutating UpdateEvents
    comments: list = field(default_factory=list)
    lock: threading.RLock = field(default_factory=threading.RLock)


@dataclass
class Session:
    session_id: str
    model_id: str
    user: str
    deliver: Callable[[dict], None]


class CollabHub:
    """Registry of shared models plus the per-model serialization point.

    All event application for one model happens under that model's lock, so
    versions are dense and every session observes the same order. Delivery
    callbacks run inside the lock to keep per-session ordering; they must not
    call back into the hub.
    """

    def __init__(self, check_replay: bool = False, on_event=None, on_comment=None):
        self._models: dict = {}
        self._sessions: dict = {}  # model_id -> list of Session
        self._registry_lock = threading.Lock()
        # Re-derives state from the log after every event; test builds only.
        self._check_replay = check_replay
        # Persistence hooks, invoked after apply and before broadcast so an
        # acknowledged event is already durable.
        self._on_event = on_event
        self._on_comment = on_comment

    # -- registry ---------------------------------------------------------

    def create_model(self, model: IRModel, model_id: Optional[str] = None) -> SharedModel:
        model_id = model_id or uuid.uuid4().hex[:12]
        shared = SharedModel(model_id=model_id, initial=model, current=model)
        with self._registry_lock:
            if model_id in self._models:
                raise NetforgeError(f"model id {model_id!r} already registered")
            self._models[model_id] = shared
            self._sessions[model_id] = []
        return shared

    def restore_model(self, model_id: str, initial: IRModel, events: list,
                      comments: Optional[list] = None) -> SharedModel:
        """Rebuild a shared model from a snapshot and its logged events."""
        shared = self.create_model(initial, model_id=model_id)
        for event in events:
            shared.current = apply_event(shared.current, event)
            shared.version = event.event_id
            shared.log.append(event)
        for comment in comments or []:
            comment.orphaned = (
                comment.anchor != WHOLE_MODEL
                and comment.anchor not in shared.current.layers
            )
            shared.comments.append(comment)
        return shared

    def get(self, model_id: str) -> SharedModel:
        with self._registry_lock:
            try:
                return self._models[model_id]
            except KeyError:
                raise NotFound(f"no model {model_id!r}") from None

    def model_ids(self) -> list:
        with self._registry_lock:
            return list(self._models)

    # -- sessions ---------------------------------------------------------

    def join(self, model_id: str, user: str, deliver: Callable[[dict], None]) -> Session:
        """Attach a session and send it the joining snapshot."""
        shared = self.get(model_id)
        session = Session(uuid.uuid4().hex[:12], model_id, user, deliver)
        with shared.lock:
            self._sessions[model_id].append(session)
            deliver({
                "type": "snapshot",
                "version": shared.version,
                "payload": {"model": model_to_doc(shared.current)},
            })
        return session

    def leave(self, session: Session):
        shared = self.get(session.model_id)
        with shared.lock:
            sessions = self._sessions[session.model_id]
            if session in sessions:
                sessions.remove(session)

    def _broadcast(self, model_id: str, message: dict):
        for session in self._sessions[model_id]:
            session.deliver(message)

    # -- events -----------------------------------------------------------

    def submit_event(self, model_id: str, event: UpdateEvent) -> UpdateEvent:
        """Validate, apply, version, log, and broadcast one event.

        Highlights are broadcast with the current version but neither bump
        it nor enter the log. Last-writer-wins: a stale base_version is not
        rejected as long as the target still exists.
        """
        shared = self.get(model_id)
        with shared.lock:
            next_state = apply_event(shared.current, event)
            if event.kind == LAYER_HIGHLIGHT:
                applied = UpdateEvent(
                    kind=event.kind, payload=event.payload, author=event.author,
                    base_version=event.base_version, timestamp=event.timestamp,
                    event_id=shared.version,
                )
                self._broadcast(model_id, {
                    "type": "event", "version": shared.version,
                    "payload": event_to_doc(applied),
                })
                return applied
            applied = UpdateEvent(
                kind=event.kind, payload=event.payload, author=event.author,
                base_version=event.base_version, timestamp=event.timestamp,
                event_id=shared.version + 1,
            )
            shared.current = next_state
            shared.version = applied.event_id
            shared.log.append(applied)
            if event.kind == LAYER_DELETE:
                self._set_orphaned(shared, event.payload["layer_id"], True)
            elif event.kind == LAYER_ADD:
                # A re-added id revives its comments; orphaned mirrors whether
                # the anchor currently exists.
                self._set_orphaned(shared, event.payload["layer"]["id"], False)
            if self._on_event is not None:
                self._on_event(model_id, applied)
            if self._check_replay:
                assert model_to_doc(self.replay(model_id, shared.version)) == \
                    model_to_doc(shared.current), "log replay diverged from state"
            self._broadcast(model_id, {
                "type": "event", "version": applied.event_id,
                "payload": event_to_doc(applied),
            })
            return applied

    def replay(self, model_id: str, upto_version: int) -> IRModel:
        """Fold the first ``upto_version`` logged events over the snapshot."""
        shared = self.get(model_id)
        with shared.lock:
            if not 0 <= upto_version <= shared.version:
                raise VersionOutOfRange(upto_version, shared.version)
            log_prefix = list(itertools.takewhile(
                lambda e: e.event_id <= upto_version, shared.log))
        state = shared.initial
        for event in log_prefix:
            state = apply_event(state, event)
        return state

    def revert(self, model_id: str, to_version: int, author: str = "") -> UpdateEvent:
        """Append a composite event restoring an earlier version."""
        shared = self.get(model_id)
        with shared.lock:
            if not 0 <= to_version < shared.version:
                raise VersionOutOfRange(to_version, shared.version)
            restored = self.replay(model_id, to_version)
            event = UpdateEvent(
                kind=REVERT,
                payload={"to_version": to_version, "model": model_to_doc(restored)},
                author=author,
                base_version=shared.version,
                timestamp=time.time(),
            )
            return self.submit_event(model_id, event)

    def history(self, model_id: str) -> list:
        """Ordered log metadata; highlights never enter the log."""
        shared = self.get(model_id)
        with shared.lock:
            return [
                HistoryEntry(e.event_id, e.kind, e.author, e.timestamp, event_summary(e))
                for e in shared.log
            ]

    # -- comments ---------------------------------------------------------

    def add_comment(self, model_id: str, anchor: str, text: str, author: str) -> Comment:
        shared = self.get(model_id)
        with shared.lock:
            if anchor != WHOLE_MODEL and anchor not in shared.current.layers:
                raise NotFound(f"no layer {anchor!r} to comment on")
            comment = Comment(
                comment_id=uuid.uuid4().hex[:12],
                model_id=model_id,
                anchor=anchor,
                text=text,
                author=author,
                timestamp=time.time(),
            )
            shared.comments.append(comment)
            if self._on_comment is not None:
                self._on_comment(model_id, comment)
            self._broadcast(model_id, {
                "type": "comment", "version": shared.version,
                "payload": comment.to_doc(),
            })
            return comment

    def comments(self, model_id: str) -> list:
        shared = self.get(model_id)
        with shared.lock:
            return list(shared.comments)

    def _set_orphaned(self, shared: SharedModel, layer_id: str, flag: bool):
        for comment in shared.comments:
            if comment.anchor == layer_id:
                comment.orphaned = flag

    # -- out-of-band notifications ----------------------------------------

    def notify(self, model_id: str, message_type: str, payload: dict):
        """Push a non-event message (job completion etc.) to live sessions."""
        shared = self.get(model_id)
        with shared.lock:
            self._broadcast(model_id, {
                "type": message_type, "version": shared.version, "payload": payload,
            })
