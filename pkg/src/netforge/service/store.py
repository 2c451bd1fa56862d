"""Persistence backends: snapshots, event logs, comments, and share links."""
from __future__ import annotations

import json
import os
from pathlib import Path

from netforge.collab.events import UpdateEvent, event_from_doc, event_to_doc
from netforge.collab.hub import Comment
from netforge.ir.model import model_from_doc, model_to_doc

__all__ = ["InMemoryStore", "FileStore"]


class InMemoryStore:
    """Volatile store for tests; same interface as the file backend."""

    def __init__(self):
        self._snapshots = {}
        self._events = {}
        self._comments = {}
        self._shares = {}

    def save_model(self, model_id, model):
        self._snapshots[model_id] = model_to_doc(model)
        self._events.setdefault(model_id, [])
        self._comments.setdefault(model_id, [])

    def append_event(self, model_id, event: UpdateEvent):
        self._events[model_id].append(event_to_doc(event))

    def append_comment(self, model_id, comment: Comment):
        self._comments[model_id].append(comment.to_doc())

    def save_share(self, token, model_id):
        self._shares[token] = model_id

    def model_ids(self):
        return sorted(self._snapshots)

    def load_model(self, model_id):
        initial = model_from_doc(self._snapshots[model_id])
        events = [event_from_doc_with_id(doc) for doc in self._events[model_id]]
        comments = [comment_from_doc(doc) for doc in self._comments[model_id]]
        return initial, events, comments

    def shares(self):
        return dict(self._shares)


def event_from_doc_with_id(doc: dict) -> UpdateEvent:
    event = event_from_doc(doc)
    return UpdateEvent(
        kind=event.kind, payload=event.payload, author=event.author,
        base_version=event.base_version, timestamp=event.timestamp,
        event_id=int(doc["event_id"]),
    )


def comment_from_doc(doc: dict) -> Comment:
    return Comment(
        comment_id=doc["comment_id"],
        model_id=doc["model_id"],
        anchor=doc["anchor"],
        text=doc["text"],
        author=doc["author"],
        timestamp=doc["timestamp"],
        orphaned=bool(doc.get("orphaned", False)),
    )


class FileStore:
    """Append-only files per model under a root directory.

    Layout: {root}/{model_id}/snapshot.json, events.log, comments.log, and a
    shared {root}/shares.log. Log lines are single JSON documents. Appends
    flush and fsync before returning: once an event is broadcast it survives
    a crash, and recovery replays (snapshot, log) back to the live state.
    """

    def __init__(self, root):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)

    def _model_dir(self, model_id) -> Path:
        safe = model_id.replace(os.sep, "_")
        path = self.root / safe
        path.mkdir(parents=True, exist_ok=True)
        return path

    def _append_line(self, path: Path, doc: dict):
        with open(path, "a", encoding="utf-8") as fh:
            fh.write(json.dumps(doc, sort_keys=True) + "\n")
            fh.flush()
            os.fsync(fh.fileno())

    def save_model(self, model_id, model):
        target = self._model_dir(model_id) / "snapshot.json"
        tmp = target.with_suffix(".json.tmp")
        tmp.write_text(json.dumps(model_to_doc(model), sort_keys=True), encoding="utf-8")
        os.replace(tmp, target)

    def append_event(self, model_id, event: UpdateEvent):
        self._append_line(self._model_dir(model_id) / "events.log", event_to_doc(event))

    def append_comment(self, model_id, comment: Comment):
        self._append_line(self._model_dir(model_id) / "comments.log", comment.to_doc())

    def save_share(self, token, model_id):
        self._append_line(self.root / "shares.log", {"token": token, "model_id": model_id})

    def model_ids(self):
        return sorted(
            entry.name for entry in self.root.iterdir()
            if entry.is_dir() and (entry / "snapshot.json").exists()
        )

    def _read_log(self, path: Path):
        if not path.exists():
            return []
        docs = []
        for line in path.read_text(encoding="utf-8").splitlines():
            line = line.strip()
            if line:
                docs.append(json.loads(line))
        return docs

    def load_model(self, model_id):
        base = self._model_dir(model_id)
        initial = model_from_doc(json.loads((base / "snapshot.json").read_text(encoding="utf-8")))
        events = [event_from_doc_with_id(doc) for doc in self._read_log(base / "events.log")]
        comments = [comment_from_doc(doc) for doc in self._read_log(base / "comments.log")]
        return initial, events, comments

    def shares(self):
        return {
            doc["token"]: doc["model_id"]
            for doc in self._read_log(self.root / "shares.log")
        }
