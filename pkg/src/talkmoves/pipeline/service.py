"""HTTP surface of the lesson-processing service.

Uploads are validated synchronously, queued, and processed by the worker
pool; reads only ever see complete artifacts thanks to the store's atomic
renames.
"""

from __future__ import annotations

import json
from dataclasses import asdict

from fastapi import FastAPI, Request, Response
from fastapi.responses import HTMLResponse, JSONResponse

from .. import __version__
from ..analytics import feedback_from_json, trends, trends_to_json
from ..ingest import BadTimestamps, EmptyTranscript, MalformedInput
from .config import ServiceConfig
from .store import DONE, JobStore
from .worker import WorkerPool


def create_app(store: JobStore, cfg: ServiceConfig) -> FastAPI:
    app = FastAPI(title="talkmoves", version=__version__)

    @app.get("/health")
    def health():
        return {"status": "ok", "version": __version__}

    @app.post("/lessons")
    async def upload(request: Request):
        body = await request.body()
        format = request.query_params.get("format", "json")
        lesson_id = request.query_params.get("lesson_id") or None
        teacher = request.query_params.get("teacher", "default")
        try:
            job = store.enqueue(body, format, lesson_id=lesson_id, teacher=teacher)
        except (MalformedInput, BadTimestamps, EmptyTranscript) as e:
            return JSONResponse({"error": f"{type(e).__name__}: {e}"}, status_code=400)
        return {"job_id": job.id}

    @app.get("/lessons")
    def list_lessons():
        return [asdict(job) for job in store.list_jobs()]

    @app.get("/lessons/{job_id}/status")
    def status(job_id: str):
        job = store.get_job(job_id)
        if job is None:
            return JSONResponse({"error": "unknown job"}, status_code=404)
        return asdict(job)

    def _artifact_or_state(job_id: str, name: str):
        job = store.get_job(job_id)
        if job is None:
            return None, JSONResponse({"error": "unknown job"}, status_code=404)
        if job.state != DONE:
            body = {"state": job.state}
            if job.reason:
                body["reason"] = job.reason
            return None, JSONResponse(body, status_code=404)
        return store.artifact_path(job_id, name).read_bytes(), None

    @app.get("/lessons/{job_id}/feedback")
    def feedback(job_id: str):
        data, error = _artifact_or_state(job_id, "feedback.json")
        if error is not None:
            return error
        return Response(data, media_type="application/json")

    @app.get("/lessons/{job_id}/report")
    def report(job_id: str):
        data, error = _artifact_or_state(job_id, "report.html")
        if error is not None:
            return error
        return HTMLResponse(data.decode("utf-8"))

    @app.get("/teachers/{teacher_id}/trends")
    def teacher_trends(teacher_id: str):
        feedbacks = []
        for job in store.list_jobs():
            if job.teacher != teacher_id or job.state != DONE:
                continue
            payload = json.loads(store.artifact_path(job.id, "feedback.json").read_bytes())
            feedbacks.append(feedback_from_json(payload))
        return trends_to_json(trends(feedbacks))

    return app


def serve(cfg: ServiceConfig):
    """Run the service: recover the store, start workers, listen for HTTP."""
    import uvicorn

    store = JobStore(cfg.store)
    requeued = store.recover()
    if requeued:
        print(f"recovered {requeued} in-flight job(s) back to queued")
    pool = WorkerPool(store, cfg)
    pool.start()
    app = create_app(store, cfg)
    try:
        uvicorn.run(app, host=cfg.host, port=cfg.port, log_level="warning")
    finally:
        pool.stop()
