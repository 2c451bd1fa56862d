"""HTTP service: REST endpoints, async export jobs, persistence, sharing."""

from netforge.service.app import create_app
from netforge.service.jobs import DONE, FAILED, PENDING, RUNNING, ExportJob, JobQueue
from netforge.service.store import FileStore, InMemoryStore

__all__ = [
    "create_app",
    "DONE", "FAILED", "PENDING", "RUNNING", "ExportJob", "JobQueue",
    "FileStore", "InMemoryStore",
]
