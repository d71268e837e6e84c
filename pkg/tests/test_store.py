import json
import time

import pytest

from conftest import transcript_json_bytes
from talkmoves.ingest import MalformedInput
from talkmoves.pipeline.config import ServiceConfig
from talkmoves.pipeline.store import ANALYZING, CLASSIFYING, DONE, FAILED, QUEUED, JobStore
from talkmoves.pipeline.worker import build_analytics_config, build_classifier, worker_step


@pytest.fixture
def store(tmp_path):
    return JobStore(tmp_path / "store")


@pytest.fixture
def rule_worker():
    cfg = ServiceConfig(classifier="rule")
    return build_classifier(cfg), build_analytics_config(cfg)


def test_enqueue_returns_queued_job(store, lesson_transcript):
    job = store.enqueue(transcript_json_bytes(lesson_transcript), "json")
    assert job.state == QUEUED
    assert job.lesson_id == "lesson-12"
    assert store.get_job(job.id).state == QUEUED
    assert store.artifact_path(job.id, "transcript.json").exists()


def test_enqueue_rejects_malformed_synchronously(store):
    with pytest.raises(MalformedInput):
        store.enqueue(b"{broken", "json")
    assert store.list_jobs() == []


def test_fifo_ids_and_order(store, lesson_transcript):
    first = store.enqueue(transcript_json_bytes(lesson_transcript), "json")
    second = store.enqueue(transcript_json_bytes(lesson_transcript), "json")
    assert first.id != second.id
    assert [j.id for j in store.list_jobs()] == [first.id, second.id]
    claimed = store.claim_next()
    assert claimed.id == first.id and claimed.state == CLASSIFYING


def test_worker_step_processes_to_done(store, lesson_transcript, rule_worker):
    classify, analytics_cfg = rule_worker
    job = store.enqueue(transcript_json_bytes(lesson_transcript), "json")
    processed = worker_step(store, classify, analytics_cfg)
    assert processed.id == job.id and processed.state == DONE
    for artifact in ("transcript.json", "predictions.csv", "feedback.json", "report.html"):
        assert store.artifact_path(job.id, artifact).exists()
    payload = json.loads(store.artifact_path(job.id, "feedback.json").read_bytes())
    assert payload["lesson_id"] == "lesson-12"
    assert payload["created_at"] == processed.submitted_at


def test_worker_step_idle_on_empty_queue(store, rule_worker):
    classify, analytics_cfg = rule_worker
    assert worker_step(store, classify, analytics_cfg) is None


def test_worker_marks_failed_and_continues(store, lesson_transcript, rule_worker):
    _, analytics_cfg = rule_worker

    def exploding(pairs):
        raise RuntimeError("classifier unavailable")

    job = store.enqueue(transcript_json_bytes(lesson_transcript), "json")
    processed = worker_step(store, exploding, analytics_cfg)
    assert processed.state == FAILED
    assert "classifier unavailable" in processed.reason
    # next step is a clean idle, not a crash
    assert worker_step(store, exploding, analytics_cfg) is None


def test_adapter_unreachable_marks_failed(store, lesson_transcript):
    cfg = ServiceConfig(
        classifier="adapter", adapter="http://127.0.0.1:9", adapter_timeout_s=0.2, adapter_retries=0
    )
    classify = build_classifier(cfg)
    analytics_cfg = build_analytics_config(cfg)
    store.enqueue(transcript_json_bytes(lesson_transcript), "json")
    processed = worker_step(store, classify, analytics_cfg)
    assert processed.state == FAILED
    assert "AdapterUnreachable" in processed.reason


def test_reprocessing_is_byte_identical(store, lesson_transcript, rule_worker):
    classify, analytics_cfg = rule_worker
    job = store.enqueue(transcript_json_bytes(lesson_transcript), "json")
    worker_step(store, classify, analytics_cfg)
    first = {
        name: store.artifact_path(job.id, name).read_bytes()
        for name in ("predictions.csv", "feedback.json")
    }
    # requeue the done job manually and reprocess
    store.mark(store.get_job(job.id), QUEUED)
    worker_step(store, classify, analytics_cfg)
    second = {
        name: store.artifact_path(job.id, name).read_bytes()
        for name in ("predictions.csv", "feedback.json")
    }
    assert first == second


def test_recover_requeues_in_flight_jobs(store, lesson_transcript):
    job_a = store.enqueue(transcript_json_bytes(lesson_transcript), "json")
    job_b = store.enqueue(transcript_json_bytes(lesson_transcript), "json")
    job_c = store.enqueue(transcript_json_bytes(lesson_transcript), "json")
    store.mark(job_a, CLASSIFYING)
    store.mark(job_b, ANALYZING)
    store.mark(job_c, DONE)
    assert store.recover() == 2
    states = {j.id: j.state for j in store.list_jobs()}
    assert states[job_a.id] == QUEUED
    assert states[job_b.id] == QUEUED
    assert states[job_c.id] == DONE


def test_recover_sweeps_stray_tmp_files(store, lesson_transcript):
    job = store.enqueue(transcript_json_bytes(lesson_transcript), "json")
    stray = store.job_dir(job.id) / ".feedback.json.tmp-123-456"
    stray.write_bytes(b"partial")
    store.recover()
    assert not stray.exists()


def test_recover_parks_corrupt_job(store, lesson_transcript):
    job = store.enqueue(transcript_json_bytes(lesson_transcript), "json")
    store.artifact_path(job.id, "job.json").write_bytes(b"{definitely not json")
    assert store.recover() == 0
    recovered = store.get_job(job.id)
    assert recovered.state == FAILED
    assert recovered.reason == "CorruptState"


def test_worker_pool_drains_queue(tmp_path, lesson_transcript):
    from talkmoves.pipeline.worker import WorkerPool

    cfg = ServiceConfig(classifier="rule", parallelism=2, store=str(tmp_path / "pool-store"))
    store = JobStore(cfg.store)
    jobs = [store.enqueue(transcript_json_bytes(lesson_transcript), "json") for _ in range(6)]
    pool = WorkerPool(store, cfg, poll_interval=0.01)
    pool.start()
    try:
        deadline = time.monotonic() + 30
        while time.monotonic() < deadline:
            states = {j.id: j.state for j in store.list_jobs()}
            if all(states[j.id] == DONE for j in jobs):
                break
            time.sleep(0.02)
    finally:
        pool.stop()
    assert all(store.get_job(j.id).state == DONE for j in jobs)
