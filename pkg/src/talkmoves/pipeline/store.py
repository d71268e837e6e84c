"""File-system job store with atomic artifact writes.

Layout: ``<root>/jobs/<id>/{job.json, transcript.json, predictions.csv,
feedback.json, report.html}``. Every write lands via write-temp-then-rename,
so readers (and crash recovery) never observe partial files. Job ids embed a
content hash plus a submission timestamp, making accidental duplicate
uploads observable but permitted.
"""

from __future__ import annotations

import hashlib
import json
import os
import threading
import time
from dataclasses import asdict, dataclass, replace
from datetime import datetime, timezone
from pathlib import Path

from ..ingest import Transcript, parse_transcript, serialize_transcript

QUEUED = "queued"
CLASSIFYING = "classifying"
ANALYZING = "analyzing"
DONE = "done"
FAILED = "failed"

IN_FLIGHT = (CLASSIFYING, ANALYZING)

ARTIFACTS = ("transcript.json", "predictions.csv", "feedback.json", "report.html")


class CorruptState(RuntimeError):
    """job.json unreadable; the job is parked as failed."""


@dataclass(frozen=True)
class Job:
    id: str
    lesson_id: str
    teacher: str
    state: str
    submitted_at_ns: int
    submitted_at: str
    finished_at: str | None = None
    reason: str | None = None


def _now_iso() -> str:
    return datetime.now(timezone.utc).isoformat()


class JobStore:
    def __init__(self, root: str | os.PathLike):
        self.root = Path(root)
        self.jobs_dir = self.root / "jobs"
        self.jobs_dir.mkdir(parents=True, exist_ok=True)
        self._lock = threading.Lock()

    # --- paths ---------------------------------------------------------

    def job_dir(self, job_id: str) -> Path:
        return self.jobs_dir / job_id

    def artifact_path(self, job_id: str, name: str) -> Path:
        return self.job_dir(job_id) / name

    # --- atomic io -----------------------------------------------------

    def _atomic_write(self, path: Path, data: bytes):
        tmp = path.parent / f".{path.name}.tmp-{os.getpid()}-{threading.get_ident()}"
        tmp.write_bytes(data)
        os.replace(tmp, path)

    def write_artifact(self, job_id: str, name: str, data: bytes):
        self._atomic_write(self.artifact_path(job_id, name), data)

    def _write_job(self, job: Job):
        payload = json.dumps(asdict(job), ensure_ascii=False, indent=1).encode("utf-8")
        self._atomic_write(self.artifact_path(job.id, "job.json"), payload)

    def _read_job(self, job_id: str) -> Job:
        raw = self.artifact_path(job_id, "job.json").read_bytes()
        data = json.loads(raw)
        return Job(**data)

    # --- lifecycle -----------------------------------------------------

    def enqueue(
        self,
        data: bytes,
        format: str,
        lesson_id: str | None = None,
        teacher: str = "default",
    ) -> Job:
        """Validate and persist an upload; returns the queued job.

        Parse errors propagate synchronously and nothing is stored.
        """
        transcript = parse_transcript(data, format, lesson_id=lesson_id)
        now_ns = time.time_ns()
        digest = hashlib.sha256(data).hexdigest()[:12]
        job_id = f"{digest}-{now_ns:x}"
        job = Job(
            id=job_id,
            lesson_id=transcript.lesson_id,
            teacher=teacher,
            state=QUEUED,
            submitted_at_ns=now_ns,
            submitted_at=_now_iso(),
        )
        with self._lock:
            self.job_dir(job_id).mkdir(parents=True, exist_ok=True)
            self.write_artifact(job_id, "transcript.json", serialize_transcript(transcript))
            self._write_job(job)
        return job

    def list_jobs(self) -> list[Job]:
        jobs = []
        for path in self.jobs_dir.iterdir() if self.jobs_dir.exists() else ():
            if not path.is_dir():
                continue
            try:
                jobs.append(self._read_job(path.name))
            except (OSError, ValueError, TypeError, KeyError):
                continue
        jobs.sort(key=lambda j: (j.submitted_at_ns, j.id))
        return jobs

    def get_job(self, job_id: str) -> Job | None:
        try:
            return self._read_job(job_id)
        except FileNotFoundError:
            return None
        except (ValueError, TypeError, KeyError) as e:
            raise CorruptState(f"job {job_id}: {e}") from None

    def claim_next(self) -> Job | None:
        """Pop the oldest queued job into ``classifying``; None when idle."""
        with self._lock:
            for job in self.list_jobs():
                if job.state == QUEUED:
                    claimed = replace(job, state=CLASSIFYING)
                    self._write_job(claimed)
                    return claimed
        return None

    def mark(self, job: Job, state: str, reason: str | None = None) -> Job:
        finished = _now_iso() if state in (DONE, FAILED) else None
        updated = replace(job, state=state, reason=reason, finished_at=finished)
        with self._lock:
            self._write_job(updated)
        return updated

    def load_transcript(self, job_id: str) -> Transcript:
        data = self.artifact_path(job_id, "transcript.json").read_bytes()
        return parse_transcript(data, "json")

    def recover(self) -> int:
        """Startup pass: requeue in-flight jobs, sweep temp files, park corrupt ones.

        Returns the number of requeued jobs.
        """
        requeued = 0
        with self._lock:
            for path in sorted(self.jobs_dir.iterdir()) if self.jobs_dir.exists() else ():
                if not path.is_dir():
                    continue
                for stray in path.glob(".*.tmp-*"):
                    stray.unlink(missing_ok=True)
                try:
                    job = self._read_job(path.name)
                except FileNotFoundError:
                    continue
                except (ValueError, TypeError, KeyError):
                    broken = Job(
                        id=path.name,
                        lesson_id="",
                        teacher="",
                        state=FAILED,
                        submitted_at_ns=0,
                        submitted_at="",
                        finished_at=_now_iso(),
                        reason="CorruptState",
                    )
                    self._write_job(broken)
                    continue
                if job.state in IN_FLIGHT:
                    self._write_job(replace(job, state=QUEUED))
                    requeued += 1
        return requeued
