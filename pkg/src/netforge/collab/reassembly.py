"""Client-side event reassembly: exactly-once, in-order over a lossy feed."""
from __future__ import annotations

__all__ = ["EventReassembler"]


class EventReassembler:
    """Reorders and deduplicates a versioned event feed.

    The server assigns dense event ids, so the client can buffer out-of-order
    arrivals and release a contiguous run as soon as the next expected id
    shows up. Duplicates (already applied or already buffered) are dropped.
    """

    def __init__(self, last_applied: int = 0):
        self._next = last_applied + 1
        self._pending = {}

    @property
    def next_expected(self) -> int:
        return self._next

    def push(self, event_id: int, event) -> list:
        """Feed one arrival; return the events now ready to apply, in order."""
        if event_id < self._next or event_id in self._pending:
            return []
        self._pending[event_id] = event
        ready = []
        while self._next in self._pending:
            ready.append(self._pending.pop(self._next))
            self._next += 1
        return ready

    def gap(self) -> bool:
        """True when arrivals are stalled behind a missing event id."""
        return bool(self._pending)

    def reset(self, last_applied: int):
        """Drop buffered state after a snapshot refetch."""
        self._next = last_applied + 1
        self._pending.clear()
