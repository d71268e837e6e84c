"""Trainable softmax classifier over hashed sentence-pair features.

Multinomial logistic regression, class-weighted cross-entropy, mini-batch
gradient descent. Training is single-threaded and bit-reproducible for a
fixed config and seed: zero initialization, seeded shuffles, fixed batch
order.
"""

from __future__ import annotations

import itertools
from dataclasses import asdict, dataclass

import numpy as np

from ..corpus import Dataset, EmptyDataset, class_weights, distribution
from ..ingest import SentencePair
from ..metrics import confusion, macro_f1_ex_none, mcc_multiclass
from ..taxonomy import NUM_LABELS, TalkMoveLabel
from . import kernels
from .features import FeatureConfig, featurize, featurize_batch


class DivergenceError(RuntimeError):
    """Training loss became non-finite (learning rate too hot)."""


@dataclass(frozen=True)
class Prediction:
    probs: tuple[float, ...]
    label: TalkMoveLabel

    @classmethod
    def from_probs(cls, probs) -> "Prediction":
        vec = tuple(float(p) for p in probs)
        if len(vec) != NUM_LABELS:
            raise ValueError(f"expected {NUM_LABELS} probabilities, got {len(vec)}")
        if any(p < 0 for p in vec) or abs(sum(vec) - 1.0) > 1e-9:
            raise ValueError(f"probabilities must be non-negative and sum to 1, got {vec}")
        # argmax with ties broken by smallest label code
        best = max(range(NUM_LABELS), key=lambda i: (vec[i], -i))
        return cls(vec, TalkMoveLabel(best))


@dataclass
class ModelParams:
    weights: np.ndarray  # (7, dim) float64
    bias: np.ndarray  # (7,) float64
    feature_config: FeatureConfig

    def __post_init__(self):
        self.weights = np.ascontiguousarray(self.weights, dtype=np.float64)
        self.bias = np.ascontiguousarray(self.bias, dtype=np.float64)
        if self.weights.shape != (NUM_LABELS, self.feature_config.dim):
            raise ValueError(f"weights shape {self.weights.shape} != (7, {self.feature_config.dim})")
        if self.bias.shape != (NUM_LABELS,):
            raise ValueError(f"bias shape {self.bias.shape}")
        if not (np.isfinite(self.weights).all() and np.isfinite(self.bias).all()):
            raise ValueError("model parameters must be finite")


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 0.5
    epochs: int = 5
    batch_size: int = 32
    seed: int = 0
    hash_dimension: int = 1 << 15
    use_class_weights: bool = True
    l2: float = 0.0
    features: FeatureConfig | None = None

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be > 0")
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")

    def feature_config(self) -> FeatureConfig:
        if self.features is not None:
            return self.features
        return FeatureConfig(dim=self.hash_dimension)


def _dataset_arrays(dataset: Dataset, cfg: FeatureConfig):
    pairs = [item.pair for item in dataset.items]
    indices, values, offsets = featurize_batch(pairs, cfg)
    labels = np.array([int(item.label) for item in dataset.items], dtype=np.int64)
    return indices, values, offsets, labels


def train(train_set: Dataset, val_set: Dataset, cfg: TrainConfig):
    """Fit model parameters; returns (ModelParams, per-epoch history).

    History entries: {"epoch", "train_loss", "val_macro_f1"} (the latter None
    when the validation set is empty). Raises DivergenceError when the loss
    stops being finite.
    """
    if not len(train_set):
        raise EmptyDataset("cannot train on an empty dataset")
    fcfg = cfg.feature_config()
    indices, values, offsets, labels = _dataset_arrays(train_set, fcfg)

    if cfg.use_class_weights:
        weights_by_label = class_weights(distribution(train_set))
        sample_w = np.array(
            [weights_by_label[item.label] for item in train_set.items], dtype=np.float64
        )
    else:
        sample_w = np.ones(len(train_set), dtype=np.float64)

    weights = np.zeros((NUM_LABELS, fcfg.dim), dtype=np.float64)
    bias = np.zeros(NUM_LABELS, dtype=np.float64)

    val_arrays = _dataset_arrays(val_set, fcfg) if len(val_set) else None
    rng = np.random.default_rng(cfg.seed)
    history = []
    for epoch in range(cfg.epochs):
        order = rng.permutation(len(train_set)).astype(np.int64)
        loss = float(
            kernels.epoch_sgd(
                indices, values, offsets, labels, sample_w, order,
                weights, bias, cfg.learning_rate, cfg.l2, cfg.batch_size,
            )
        )
        if not np.isfinite(loss):
            raise DivergenceError(f"loss {loss} at epoch {epoch}")
        val_f1 = None
        if val_arrays is not None:
            v_idx, v_val, v_off, v_labels = val_arrays
            logits = kernels.csr_logits(v_idx, v_val, v_off, weights, bias)
            pred_codes = np.argmax(logits, axis=1)
            m = confusion(
                [TalkMoveLabel(int(g)) for g in v_labels],
                [TalkMoveLabel(int(p)) for p in pred_codes],
            )
            val_f1 = macro_f1_ex_none(m)
        history.append({"epoch": epoch, "train_loss": loss, "val_macro_f1": val_f1})

    model = ModelParams(weights=weights, bias=bias, feature_config=fcfg)
    return model, history


def predict(model: ModelParams, pair: SentencePair) -> Prediction:
    """Softmax distribution over the 7 labels for one pair."""
    vec = featurize(pair, model.feature_config)
    logits = model.bias.copy()
    for fid, v in vec.items():
        logits += model.weights[:, fid] * v
    shifted = np.exp(logits - logits.max())
    return Prediction.from_probs(shifted / shifted.sum())


def predict_batch(model: ModelParams, pairs: list[SentencePair]) -> list[Prediction]:
    if not pairs:
        return []
    indices, values, offsets = featurize_batch(pairs, model.feature_config)
    logits = kernels.csr_logits(indices, values, offsets, model.weights, model.bias)
    probs = kernels.softmax_rows(logits)
    return [Prediction.from_probs(row) for row in probs]


def loss_and_grad(weights, bias, indices, values, offsets, labels, sample_w):
    """Mean weighted cross-entropy and its analytic gradient at (weights, bias).

    Pure function used by the finite-difference gradient check; no l2 term.
    """
    n = labels.shape[0]
    logits = kernels.csr_logits(indices, values, offsets, weights, bias)
    logits = np.asarray(logits)
    shifted = logits - logits.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    probs = e / e.sum(axis=1, keepdims=True)
    picked = probs[np.arange(n), labels]
    loss = float(np.mean(sample_w * -np.log(picked)))

    coefs = probs.copy()
    coefs[np.arange(n), labels] -= 1.0
    coefs *= (sample_w / n)[:, None]
    grad_w = np.zeros_like(weights)
    for i in range(n):
        for j in range(offsets[i], offsets[i + 1]):
            grad_w[:, indices[j]] += coefs[i] * values[j]
    grad_b = coefs.sum(axis=0)
    return loss, grad_w, grad_b


def grid_search(train_set: Dataset, val_set: Dataset, grid: dict[str, list]):
    """Exhaustive sweep over TrainConfig fields.

    Ranks by validation macro-F1 (ties: higher MCC, then lower config index).
    Cells whose training fails are recorded as failed and excluded from the
    ranking. Returns (best TrainConfig, leaderboard rows).
    """
    if not grid or any(not choices for choices in grid.values()):
        raise ValueError("grid must map config fields to non-empty lists")
    names = list(grid)
    rows = []
    for index, combo in enumerate(itertools.product(*(grid[name] for name in names))):
        cfg = TrainConfig(**dict(zip(names, combo)))
        row = {"index": index, "config": {k: v for k, v in asdict(cfg).items() if k != "features"}}
        try:
            model, _ = train(train_set, val_set, cfg)
            golds = [item.label for item in val_set.items]
            preds = [p.label for p in predict_batch(model, [i.pair for i in val_set.items])]
            m = confusion(golds, preds)
            row.update(
                status="ok",
                macro_f1=macro_f1_ex_none(m),
                mcc=mcc_multiclass(m),
                error=None,
            )
        except (DivergenceError, EmptyDataset, ValueError) as e:
            row.update(status="failed", macro_f1=None, mcc=None, error=str(e))
        rows.append(row)

    ranked = sorted(
        (r for r in rows if r["status"] == "ok"),
        key=lambda r: (-r["macro_f1"], -r["mcc"], r["index"]),
    )
    if not ranked:
        raise RuntimeError("every grid cell failed")
    leaderboard = ranked + [r for r in rows if r["status"] != "ok"]
    best = TrainConfig(**{k: v for k, v in leaderboard[0]["config"].items()})
    return best, leaderboard
