"""Hashed sparse features for sentence pairs.

Teacher unigrams and bigrams (prefix ``t:``), student-context unigrams
(prefix ``s:``), and two real-valued token-overlap features. Feature ids are
FNV-1a 64-bit hashes of the feature string masked to the (power-of-two)
table size, so ids are identical across platforms.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..hashing import fnv1a64
from ..ingest import SentencePair

NO_CONTEXT = "-"


@dataclass(frozen=True)
class FeatureConfig:
    dim: int = 1 << 15
    teacher_bigrams: bool = True
    student_unigrams: bool = True
    overlap: bool = True
    max_tokens: int = 128

    def __post_init__(self):
        if self.dim <= 0 or self.dim & (self.dim - 1):
            raise ValueError(f"dim must be a power of two, got {self.dim}")
        if self.max_tokens < 1:
            raise ValueError("max_tokens must be >= 1")


def feature_id(feature: str, dim: int) -> int:
    return fnv1a64(feature) & (dim - 1)


def featurize(pair: SentencePair, cfg: FeatureConfig) -> dict[int, float]:
    """Sparse feature-id -> weight map for one pair. Deterministic."""
    mask = cfg.dim - 1
    vec: dict[int, float] = {}

    def bump(feature: str, weight: float):
        fid = fnv1a64(feature) & mask
        vec[fid] = vec.get(fid, 0.0) + weight

    teacher_tokens = pair.teacher_sentence.split()[: cfg.max_tokens]
    for tok in teacher_tokens:
        bump(f"t:{tok}", 1.0)
    if cfg.teacher_bigrams:
        for a, b in zip(teacher_tokens, teacher_tokens[1:]):
            bump(f"t:{a} {b}", 1.0)

    has_context = pair.student_context != NO_CONTEXT
    student_tokens = pair.student_context.split()[: cfg.max_tokens] if has_context else []
    if cfg.student_unigrams:
        for tok in student_tokens:
            bump(f"s:{tok}", 1.0)

    if cfg.overlap:
        t_set, s_set = set(teacher_tokens), set(student_tokens)
        shared = len(t_set & s_set)
        if has_context and shared:
            bump("ov:t", shared / len(t_set))
            bump("ov:s", shared / len(s_set))
    return vec


def featurize_batch(pairs: list[SentencePair], cfg: FeatureConfig):
    """CSR arrays (indices, values, offsets) for the numeric kernels."""
    indices: list[int] = []
    values: list[float] = []
    offsets = np.zeros(len(pairs) + 1, dtype=np.int64)
    for i, pair in enumerate(pairs):
        vec = featurize(pair, cfg)
        for fid in sorted(vec):
            indices.append(fid)
            values.append(vec[fid])
        offsets[i + 1] = len(indices)
    return (
        np.asarray(indices, dtype=np.int64),
        np.asarray(values, dtype=np.float64),
        offsets,
    )
