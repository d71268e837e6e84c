"""HTTP adapter for an externally hosted classifier.

Wire contract: POST {base}/classify with
``{"pairs": [{"student_context": s, "teacher_sentence": t}, ...]}``
returning ``{"predictions": [{"probs": [7 numbers]}, ...]}`` in order.
"""

from __future__ import annotations

from dataclasses import dataclass

import requests

from ..ingest import SentencePair
from ..taxonomy import NUM_LABELS
from .model import Prediction

PROB_SUM_TOLERANCE = 1e-6


class AdapterUnreachable(RuntimeError):
    """Endpoint could not be reached within the configured retries."""


class BadResponse(ValueError):
    """Endpoint answered with something outside the wire contract."""


@dataclass(frozen=True)
class AdapterConfig:
    base_url: str
    timeout_s: float = 10.0
    retries: int = 2


def external_classify(cfg: AdapterConfig, pairs: list[SentencePair]) -> list[Prediction]:
    """Classify pairs through the remote endpoint, preserving order."""
    if not pairs:
        return []
    payload = {
        "pairs": [
            {"student_context": p.student_context, "teacher_sentence": p.teacher_sentence}
            for p in pairs
        ]
    }
    url = cfg.base_url.rstrip("/") + "/classify"
    last_error = None
    for _ in range(max(1, cfg.retries + 1)):
        try:
            response = requests.post(url, json=payload, timeout=cfg.timeout_s)
            break
        except (requests.ConnectionError, requests.Timeout) as e:
            last_error = e
    else:
        raise AdapterUnreachable(f"{url}: {last_error}")

    if response.status_code != 200:
        raise BadResponse(f"{url}: HTTP {response.status_code}")
    try:
        body = response.json()
    except ValueError as e:
        raise BadResponse(f"{url}: not json: {e}") from None
    predictions = body.get("predictions") if isinstance(body, dict) else None
    if not isinstance(predictions, list) or len(predictions) != len(pairs):
        got = len(predictions) if isinstance(predictions, list) else "missing"
        raise BadResponse(f"expected {len(pairs)} predictions, got {got}")

    out = []
    for i, entry in enumerate(predictions):
        probs = entry.get("probs") if isinstance(entry, dict) else None
        if not isinstance(probs, list) or len(probs) != NUM_LABELS:
            raise BadResponse(f"prediction {i}: need a {NUM_LABELS}-length probs vector")
        try:
            vec = [float(p) for p in probs]
        except (TypeError, ValueError):
            raise BadResponse(f"prediction {i}: non-numeric probability") from None
        if any(p < 0 for p in vec):
            raise BadResponse(f"prediction {i}: negative probability")
        total = sum(vec)
        if abs(total - 1.0) > PROB_SUM_TOLERANCE:
            raise BadResponse(f"prediction {i}: probs sum to {total}")
        out.append(Prediction.from_probs([p / total for p in vec]))
    return out
