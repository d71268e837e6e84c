"""Hot numeric kernels for training and batch prediction.

Two interchangeable implementations over the same CSR layout
(indices, values, offsets):

* numba ``@njit`` loops (default): compiled once, cached on disk;
* vectorized numpy: selected with ``TALKMOVES_NO_NUMBA=1`` or when numba
  is not importable.

Each path is deterministic on its own (fixed iteration order, no fastmath),
which is what the bit-reproducibility contract requires; across paths the
float summation order differs, so results agree only to ~1e-9.
``benchmarks/bench_kernels.py`` compares their throughput.
"""

from __future__ import annotations

import os

import numpy as np

USE_NUMBA = os.environ.get("TALKMOVES_NO_NUMBA", "").strip().lower() not in ("1", "true", "yes")


def _csr_logits_np(indices, values, offsets, weights, bias):
    n = offsets.shape[0] - 1
    logits = np.tile(bias, (n, 1))
    if indices.shape[0]:
        counts = np.diff(offsets)
        sample_of = np.repeat(np.arange(n), counts)
        contrib = (weights[:, indices] * values).T
        np.add.at(logits, sample_of, contrib)
    return logits


def _softmax_rows_np(logits):
    shifted = logits - logits.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=1, keepdims=True)


def _epoch_sgd_np(indices, values, offsets, labels, sample_w, order, weights, bias, lr, l2, batch_size):
    with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
        return _epoch_sgd_np_inner(
            indices, values, offsets, labels, sample_w, order, weights, bias, lr, l2, batch_size
        )


def _epoch_sgd_np_inner(indices, values, offsets, labels, sample_w, order, weights, bias, lr, l2, batch_size):
    # overflow/log(0) here signals divergence; the trainer checks the loss
    n = labels.shape[0]
    total_loss = 0.0
    for start in range(0, n, batch_size):
        batch = order[start : start + batch_size]
        bs = batch.shape[0]
        spans = [np.arange(offsets[i], offsets[i + 1]) for i in batch]
        flat = np.concatenate(spans) if spans else np.zeros(0, dtype=np.int64)
        counts = np.array([s.shape[0] for s in spans], dtype=np.int64)
        sample_of = np.repeat(np.arange(bs), counts)
        cols = indices[flat]
        vals = values[flat]

        logits = np.tile(bias, (bs, 1))
        np.add.at(logits, sample_of, (weights[:, cols] * vals).T)
        probs = _softmax_rows_np(logits)

        batch_labels = labels[batch]
        batch_w = sample_w[batch]
        picked = probs[np.arange(bs), batch_labels]
        total_loss += float(np.sum(batch_w * -np.log(picked)))

        coefs = probs.copy()
        coefs[np.arange(bs), batch_labels] -= 1.0
        coefs *= (batch_w / bs)[:, None]

        if l2 != 0.0:
            weights *= 1.0 - lr * l2
        update = (lr * vals)[:, None] * coefs[sample_of]
        np.subtract.at(weights.T, cols, update)
        bias -= lr * coefs.sum(axis=0)
    return total_loss / n


def _csr_logits_loops(indices, values, offsets, weights, bias):
    n = offsets.shape[0] - 1
    k = weights.shape[0]
    logits = np.empty((n, k))
    for i in range(n):
        for c in range(k):
            logits[i, c] = bias[c]
        for j in range(offsets[i], offsets[i + 1]):
            col = indices[j]
            v = values[j]
            for c in range(k):
                logits[i, c] += weights[c, col] * v
    return logits


def _softmax_rows_loops(logits):
    n, k = logits.shape
    probs = np.empty_like(logits)
    for i in range(n):
        m = logits[i, 0]
        for c in range(1, k):
            if logits[i, c] > m:
                m = logits[i, c]
        z = 0.0
        for c in range(k):
            probs[i, c] = np.exp(logits[i, c] - m)
            z += probs[i, c]
        for c in range(k):
            probs[i, c] /= z
    return probs


def _epoch_sgd_loops(indices, values, offsets, labels, sample_w, order, weights, bias, lr, l2, batch_size):
    n = labels.shape[0]
    k = weights.shape[0]
    total_loss = 0.0
    probs = np.empty((batch_size, k))
    for start in range(0, n, batch_size):
        end = min(start + batch_size, n)
        bs = end - start
        # forward pass with pre-update weights
        for bi in range(bs):
            row = order[start + bi]
            for c in range(k):
                z = bias[c]
                for j in range(offsets[row], offsets[row + 1]):
                    z += weights[c, indices[j]] * values[j]
                probs[bi, c] = z
            m = probs[bi, 0]
            for c in range(1, k):
                if probs[bi, c] > m:
                    m = probs[bi, c]
            s = 0.0
            for c in range(k):
                probs[bi, c] = np.exp(probs[bi, c] - m)
                s += probs[bi, c]
            for c in range(k):
                probs[bi, c] /= s
        if l2 != 0.0:
            decay = 1.0 - lr * l2
            for c in range(k):
                for col in range(weights.shape[1]):
                    weights[c, col] *= decay
        for bi in range(bs):
            row = order[start + bi]
            w_i = sample_w[row]
            y = labels[row]
            total_loss += w_i * -np.log(probs[bi, y])
            for c in range(k):
                coef = probs[bi, c]
                if c == y:
                    coef -= 1.0
                coef *= w_i / bs
                step = lr * coef
                for j in range(offsets[row], offsets[row + 1]):
                    weights[c, indices[j]] -= step * values[j]
                bias[c] -= step
    return total_loss / n


if USE_NUMBA:
    try:
        from numba import njit

        _jit = njit(cache=True, fastmath=False)
        csr_logits = _jit(_csr_logits_loops)
        softmax_rows = _jit(_softmax_rows_loops)
        epoch_sgd = _jit(_epoch_sgd_loops)
    except ImportError:
        USE_NUMBA = False
        csr_logits = _csr_logits_np
        softmax_rows = _softmax_rows_np
        epoch_sgd = _epoch_sgd_np
else:
    csr_logits = _csr_logits_np
    softmax_rows = _softmax_rows_np
    epoch_sgd = _epoch_sgd_np
