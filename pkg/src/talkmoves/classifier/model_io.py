"""Versioned binary model container.

Layout (little-endian):

    magic "TMV1" | version u32 | dim u32 | weights 7*dim f64 row-major |
    bias 7 f64 | config-json length u32 | config json bytes | crc32 u32

The CRC covers every byte before it. load(save(m)) reproduces the model
exactly, so predictions are identical after a round-trip.
"""

from __future__ import annotations

import json
import struct
import zlib

import numpy as np

from ..taxonomy import NUM_LABELS
from .features import FeatureConfig
from .model import ModelParams

MAGIC = b"TMV1"
VERSION = 1


class VersionMismatch(ValueError):
    """Wrong magic bytes or unsupported container version."""


class CorruptModel(ValueError):
    """Truncated container or checksum failure."""


def save_model(model: ModelParams) -> bytes:
    cfg = model.feature_config
    config_json = json.dumps(
        {
            "teacher_bigrams": cfg.teacher_bigrams,
            "student_unigrams": cfg.student_unigrams,
            "overlap": cfg.overlap,
            "max_tokens": cfg.max_tokens,
        },
        sort_keys=True,
    ).encode("utf-8")
    body = b"".join(
        [
            MAGIC,
            struct.pack("<II", VERSION, cfg.dim),
            np.ascontiguousarray(model.weights, dtype="<f8").tobytes(),
            np.ascontiguousarray(model.bias, dtype="<f8").tobytes(),
            struct.pack("<I", len(config_json)),
            config_json,
        ]
    )
    return body + struct.pack("<I", zlib.crc32(body))


def load_model(data: bytes) -> ModelParams:
    if len(data) < 4 or data[:4] != MAGIC:
        raise VersionMismatch("not a TMV1 model file")
    if len(data) < 16:
        raise CorruptModel("truncated header")
    body, (stored_crc,) = data[:-4], struct.unpack("<I", data[-4:])
    if zlib.crc32(body) != stored_crc:
        raise CorruptModel("checksum mismatch")
    version, dim = struct.unpack_from("<II", data, 4)
    if version != VERSION:
        raise VersionMismatch(f"unsupported model version {version}")
    cursor = 12
    weights_bytes = NUM_LABELS * dim * 8
    if len(data) < cursor + weights_bytes + NUM_LABELS * 8 + 4:
        raise CorruptModel("file too short for declared dimension")
    weights = np.frombuffer(data, dtype="<f8", count=NUM_LABELS * dim, offset=cursor).reshape(
        NUM_LABELS, dim
    )
    cursor += weights_bytes
    bias = np.frombuffer(data, dtype="<f8", count=NUM_LABELS, offset=cursor)
    cursor += NUM_LABELS * 8
    (config_len,) = struct.unpack_from("<I", data, cursor)
    cursor += 4
    expected = cursor + config_len + 4
    if len(data) != expected:
        raise CorruptModel(f"expected {expected} bytes, got {len(data)}")
    try:
        config_raw = json.loads(data[cursor : cursor + config_len].decode("utf-8"))
        cfg = FeatureConfig(dim=dim, **config_raw)
    except (UnicodeDecodeError, json.JSONDecodeError, TypeError) as e:
        raise CorruptModel(f"bad feature-config block: {e}") from None
    return ModelParams(weights=weights.copy(), bias=bias.copy(), feature_config=cfg)


def save_model_file(model: ModelParams, path):
    with open(path, "wb") as fh:
        fh.write(save_model(model))


def load_model_file(path) -> ModelParams:
    with open(path, "rb") as fh:
        return load_model(fh.read())
