"""Queue worker: segment -> pair -> classify -> feedback -> render.

A stage failure marks the job failed(reason) and the worker moves on; the
loop itself never dies. With the default single executor, jobs complete in
strict submission order.
"""

from __future__ import annotations

import csv
import io
import threading
import traceback

from ..analytics import AnalyticsConfig, compute_feedback, load_stopwords
from ..classifier import (
    AdapterConfig,
    external_classify,
    load_model_file,
    predict_batch,
    rule_classify,
)
from ..ingest import build_pairs, segment_transcript
from ..report_html import render_report
from ..taxonomy import LABELS, format_label
from .config import ServiceConfig
from .store import ANALYZING, DONE, FAILED, Job, JobStore

PREDICTIONS_HEADER = (
    ["sentence_index", "student_context", "teacher_sentence", "label"]
    + [f"p_{format_label(l)}" for l in LABELS]
)


def build_classifier(cfg: ServiceConfig):
    """Classification callable (pairs -> predictions) for the configured engine."""
    if cfg.classifier == "rule":
        return lambda pairs: [rule_classify(p) for p in pairs]
    if cfg.classifier == "trained":
        model = load_model_file(cfg.model)
        return lambda pairs: predict_batch(model, pairs)
    adapter = AdapterConfig(
        base_url=cfg.adapter, timeout_s=cfg.adapter_timeout_s, retries=cfg.adapter_retries
    )
    return lambda pairs: external_classify(adapter, pairs)


def build_analytics_config(cfg: ServiceConfig) -> AnalyticsConfig:
    return AnalyticsConfig(stopwords=load_stopwords(cfg.stopwords), top_words_n=cfg.top_words)


def predictions_csv(pairs, predictions) -> bytes:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(PREDICTIONS_HEADER)
    for pair, pred in zip(pairs, predictions):
        writer.writerow(
            [
                pair.teacher_sentence_index,
                pair.student_context,
                pair.teacher_sentence,
                format_label(pred.label),
            ]
            + [repr(p) for p in pred.probs]
        )
    return out.getvalue().encode("utf-8")


def worker_step(store: JobStore, classify, analytics_cfg: AnalyticsConfig) -> Job | None:
    """Process the oldest queued job; returns it (done or failed), or None when idle."""
    job = store.claim_next()
    if job is None:
        return None
    try:
        transcript = store.load_transcript(job.id)
        sentences = segment_transcript(transcript)
        pairs = build_pairs(sentences)
        predictions = classify(pairs)
        store.write_artifact(job.id, "predictions.csv", predictions_csv(pairs, predictions))
        job = store.mark(job, ANALYZING)
        feedback = compute_feedback(
            transcript, predictions, analytics_cfg, created_at=job.submitted_at
        )
        feedback_json, report_html = render_report(feedback)
        store.write_artifact(job.id, "feedback.json", feedback_json)
        store.write_artifact(job.id, "report.html", report_html)
        return store.mark(job, DONE)
    except Exception as e:  # stage errors land in the job, never kill the worker
        reason = f"{type(e).__name__}: {e}"
        try:
            return store.mark(job, FAILED, reason=reason)
        except Exception:
            traceback.print_exc()
            return job


class WorkerPool:
    """K executor threads (default 1) polling the store until stopped."""

    def __init__(self, store: JobStore, cfg: ServiceConfig, poll_interval: float = 0.05):
        self.store = store
        self.classify = build_classifier(cfg)
        self.analytics_cfg = build_analytics_config(cfg)
        self.poll_interval = poll_interval
        self.parallelism = cfg.parallelism
        self._stop = threading.Event()
        self._threads: list[threading.Thread] = []

    def _loop(self):
        while not self._stop.is_set():
            job = worker_step(self.store, self.classify, self.analytics_cfg)
            if job is None:
                self._stop.wait(self.poll_interval)

    def start(self):
        for i in range(self.parallelism):
            t = threading.Thread(target=self._loop, name=f"talkmoves-worker-{i}", daemon=True)
            t.start()
            self._threads.append(t)

    def stop(self):
        self._stop.set()
        for t in self._threads:
            t.join(timeout=5)
