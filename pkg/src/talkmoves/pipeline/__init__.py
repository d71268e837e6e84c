"""Asynchronous lesson-processing pipeline: store, workers, HTTP service."""

from .config import ServiceConfig, load_config
from .store import Job, JobStore
from .worker import WorkerPool, worker_step

__all__ = ["Job", "JobStore", "ServiceConfig", "WorkerPool", "load_config", "worker_step"]
