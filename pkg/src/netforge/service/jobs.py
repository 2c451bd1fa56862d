"""In-process export job queue: submit returns immediately, workers convert."""
from __future__ import annotations

import queue
import threading
import time
import uuid
from dataclasses import dataclass, field
from typing import Callable, Optional

from netforge.errors import NotFound

__all__ = ["ExportJob", "JobQueue", "PENDING", "RUNNING", "DONE", "FAILED"]

PENDING = "pending"
RUNNING = "running"
DONE = "done"
FAILED = "failed"

_TRANSITIONS = {PENDING: {RUNNING}, RUNNING: {DONE, FAILED}, DONE: set(), FAILED: set()}


@dataclass
class ExportJob:
    job_id: str
    model_id: str
    target: str
    state: str = PENDING
    result: Optional[str] = None
    error: Optional[str] = None
    created: float = field(default_factory=time.time)
    started: Optional[float] = None
    finished: Optional[float] = None

    def to_doc(self) -> dict:
        return {
            "job_id": self.job_id,
            "model_id": self.model_id,
            "target": self.target,
            "state": self.state,
            "error": self.error,
            "created": self.created,
            "started": self.started,
            "finished": self.finished,
        }


class JobQueue:
    """Fixed worker pool draining a FIFO of conversion thunks.

    Submission only enqueues, so its latency does not depend on the size of
    the model being exported. The optional notify callback fires after the
    terminal state is recorded, letting the service push completion to live
    sessions.
    """

    def __init__(self, workers: int = 2,
                 notify: Optional[Callable[[ExportJob], None]] = None):
        if workers < 1:
            raise ValueError("workers must be >= 1")
        self._jobs: dict = {}
        self._lock = threading.Lock()
        self._queue: queue.Queue = queue.Queue()
        self._notify = notify
        self._stopping = False
        self._threads = [
            threading.Thread(target=self._worker, name=f"export-worker-{i}", daemon=True)
            for i in range(workers)
        ]
        for thread in self._threads:
            thread.start()

    def submit(self, model_id: str, target: str, thunk: Callable[[], str]) -> ExportJob:
        """Enqueue a conversion and return its pending job immediately."""
        job = ExportJob(job_id=uuid.uuid4().hex, model_id=model_id, target=target)
        with self._lock:
            self._jobs[job.job_id] = job
        self._queue.put((job.job_id, thunk))
        return job

    def get(self, job_id: str) -> ExportJob:
        with self._lock:
            try:
                return self._jobs[job_id]
            except KeyError:
                raise NotFound(f"no job {job_id!r}") from None

    def _advance(self, job: ExportJob, state: str):
        if state not in _TRANSITIONS[job.state]:
            raise RuntimeError(f"illegal job transition {job.state} -> {state}")
        job.state = state

    def _worker(self):
        while True:
            item = self._queue.get()
            if item is None:
                return
            job_id, thunk = item
            job = self.get(job_id)
            with self._lock:
                self._advance(job, RUNNING)
                job.started = time.time()
            try:
                result = thunk()
            except Exception as exc:  # failure is a job outcome, not a crash
                with self._lock:
                    job.error = f"{type(exc).__name__}: {exc}"
                    self._advance(job, FAILED)
                    job.finished = time.time()
            else:
                with self._lock:
                    job.result = result
                    self._advance(job, DONE)
                    job.finished = time.time()
            if self._notify is not None:
                self._notify(job)

    def join(self, timeout: Optional[float] = None):
        """Block until the queue drains; test helper."""
        deadline = None if timeout is None else time.monotonic() + timeout
        while True:
            with self._lock:
                busy = any(j.state in (PENDING, RUNNING) for j in self._jobs.values())
            if not busy:
                return True
            if deadline is not None and time.monotonic() > deadline:
                return False
            time.sleep(0.005)

    def shutdown(self):
        self._stopping = True
        for _ in self._threads:
            self._queue.put(None)
        for thread in self._threads:
            thread.join(timeout=5)
