"""Evaluation measures for the 7-label classifier.

The headline score is the unweighted macro F1 over the six talk-move labels,
ignoring ``none``; MCC uses the multiclass R_K statistic over all 7 labels.
Zero denominators resolve to 0 everywhere so reports are always total.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .taxonomy import LABELS, MOVE_LABELS, NUM_LABELS, TalkMoveLabel, format_label


class LengthMismatch(ValueError):
    """Gold and predicted sequences differ in length."""


class Empty(ValueError):
    """Metric requires at least one item."""


@dataclass(frozen=True)
class ConfusionMatrix:
    """cells[gold][pred] counts; 7x7 with the frozen label codes."""

    cells: tuple[tuple[int, ...], ...]
    total: int

    def gold_count(self, label: TalkMoveLabel) -> int:
        return sum(self.cells[label])

    def pred_count(self, label: TalkMoveLabel) -> int:
        return sum(row[label] for row in self.cells)


@dataclass(frozen=True)
class ClassReport:
    precision: dict[TalkMoveLabel, float]
    recall: dict[TalkMoveLabel, float]
    f1: dict[TalkMoveLabel, float]


@dataclass(frozen=True)
class EvalSummary:
    macro_f1_ex_none: float
    mcc: float
    accuracy: float
    per_class: ClassReport


@dataclass(frozen=True)
class AgreementReport:
    percent_agreement: float
    kappa: float


def confusion(golds: list[TalkMoveLabel], preds: list[TalkMoveLabel]) -> ConfusionMatrix:
    if len(golds) != len(preds):
        raise LengthMismatch(f"{len(golds)} golds vs {len(preds)} predictions")
    if not golds:
        raise Empty("no items")
    cells = [[0] * NUM_LABELS for _ in range(NUM_LABELS)]
    for g, p in zip(golds, preds):
        cells[g][p] += 1
    return ConfusionMatrix(tuple(tuple(row) for row in cells), len(golds))


def per_class_prf(m: ConfusionMatrix) -> ClassReport:
    """Precision/recall/F1 per label; 0 where the denominator vanishes."""
    precision, recall, f1 = {}, {}, {}
    for label in LABELS:
        tp = m.cells[label][label]
        fp = m.pred_count(label) - tp
        fn = m.gold_count(label) - tp
        p = tp / (tp + fp) if tp + fp else 0.0
        r = tp / (tp + fn) if tp + fn else 0.0
        precision[label] = p
        recall[label] = r
        f1[label] = 2 * p * r / (p + r) if p + r else 0.0
    return ClassReport(precision, recall, f1)


def macro_f1_ex_none(m: ConfusionMatrix) -> float:
    """Unweighted mean F1 over the six talk moves, ignoring ``none``."""
    report = per_class_prf(m)
    return sum(report.f1[label] for label in MOVE_LABELS) / len(MOVE_LABELS)


def f1_variants_ex_none(m: ConfusionMatrix) -> dict[str, float]:
    """Macro plus the micro/weighted alternatives, for comparison output."""
    report = per_class_prf(m)
    macro = sum(report.f1[l] for l in MOVE_LABELS) / len(MOVE_LABELS)
    tp = sum(m.cells[l][l] for l in MOVE_LABELS)
    fp = sum(m.pred_count(l) - m.cells[l][l] for l in MOVE_LABELS)
    fn = sum(m.gold_count(l) - m.cells[l][l] for l in MOVE_LABELS)
    micro_p = tp / (tp + fp) if tp + fp else 0.0
    micro_r = tp / (tp + fn) if tp + fn else 0.0
    micro = 2 * micro_p * micro_r / (micro_p + micro_r) if micro_p + micro_r else 0.0
    support = sum(m.gold_count(l) for l in MOVE_LABELS)
    weighted = (
        sum(report.f1[l] * m.gold_count(l) for l in MOVE_LABELS) / support if support else 0.0
    )
    return {"macro": macro, "micro": micro, "weighted": weighted}


def accuracy(m: ConfusionMatrix) -> float:
    return sum(m.cells[l][l] for l in LABELS) / m.total


def mcc_multiclass(m: ConfusionMatrix) -> float:
    """Multiclass Matthews correlation (the R_K statistic).

    (c*s - sum_k p_k t_k) / sqrt((s^2 - sum p_k^2)(s^2 - sum t_k^2)) with
    c = trace, s = total, p_k/t_k the predicted/gold marginals; defined as 0
    when either denominator factor vanishes (e.g. constant predictions).
    """
    if m.total <= 0:
        raise Empty("empty confusion matrix")
    s = m.total
    c = sum(m.cells[l][l] for l in LABELS)
    p = [m.pred_count(l) for l in LABELS]
    t = [m.gold_count(l) for l in LABELS]
    numerator = c * s - sum(pk * tk for pk, tk in zip(p, t))
    dp = s * s - sum(pk * pk for pk in p)
    dt = s * s - sum(tk * tk for tk in t)
    if dp == 0 or dt == 0:
        return 0.0
    return numerator / math.sqrt(dp * dt)


def evaluate(golds: list[TalkMoveLabel], preds: list[TalkMoveLabel]) -> EvalSummary:
    m = confusion(golds, preds)
    return EvalSummary(
        macro_f1_ex_none=macro_f1_ex_none(m),
        mcc=mcc_multiclass(m),
        accuracy=accuracy(m),
        per_class=per_class_prf(m),
    )


def cohens_kappa(raters_a: list[TalkMoveLabel], raters_b: list[TalkMoveLabel]) -> AgreementReport:
    """Chance-corrected agreement between two raters.

    kappa = (p_o - p_e) / (1 - p_e); when p_e = 1 (both raters constant on
    the same label) agreement is perfect and kappa is 1.
    """
    if len(raters_a) != len(raters_b):
        raise LengthMismatch(f"{len(raters_a)} vs {len(raters_b)} ratings")
    if not raters_a:
        raise Empty("no ratings")
    n = len(raters_a)
    p_o = sum(1 for a, b in zip(raters_a, raters_b) if a == b) / n
    p_e = sum(
        (sum(1 for a in raters_a if a == label) / n)
        * (sum(1 for b in raters_b if b == label) / n)
        for label in LABELS
    )
    if p_e >= 1.0 - 1e-15:
        kappa = 1.0 if p_o == 1.0 else 0.0
    else:
        kappa = (p_o - p_e) / (1.0 - p_e)
    return AgreementReport(percent_agreement=p_o, kappa=kappa)


def error_analysis(golds, preds, pairs, max_examples: int = 5) -> list[dict]:
    """Per-gold-label error digest, worst F1 first.

    ``preds`` supplies both labels and probabilities; each entry carries up
    to ``max_examples`` misclassified pairs.
    """
    if not (len(golds) == len(preds) == len(pairs)):
        raise LengthMismatch(
            f"golds={len(golds)} preds={len(preds)} pairs={len(pairs)}"
        )
    pred_labels = [p.label for p in preds]
    m = confusion(golds, pred_labels)
    report = per_class_prf(m)
    entries = []
    for label in LABELS:
        examples = []
        for gold, pred, pair in zip(golds, preds, pairs):
            if gold == label and pred.label != label and len(examples) < max_examples:
                examples.append(
                    {
                        "student_context": pair.student_context,
                        "teacher_sentence": pair.teacher_sentence,
                        "gold": format_label(gold),
                        "predicted": format_label(pred.label),
                        "probs": list(pred.probs),
                    }
                )
        entries.append(
            {
                "label": format_label(label),
                "f1": report.f1[label],
                "gold_count": m.gold_count(label),
                "misclassified": examples,
            }
        )
    entries.sort(key=lambda e: (e["f1"], e["label"]))
    return entries


def report_to_json(m: ConfusionMatrix, worst_n: int = 3) -> dict:
    """Evaluation report schema used by the eval CLI and stored artifacts."""
    report = per_class_prf(m)
    variants = f1_variants_ex_none(m)
    ranked = sorted(MOVE_LABELS, key=lambda l: (report.f1[l], int(l)))
    return {
        "confusion": [list(row) for row in m.cells],
        "per_class": {
            format_label(l): {
                "p": report.precision[l],
                "r": report.recall[l],
                "f1": report.f1[l],
            }
            for l in LABELS
        },
        "macro_f1_ex_none": variants["macro"],
        "f1_micro_ex_none": variants["micro"],
        "f1_weighted_ex_none": variants["weighted"],
        "mcc": mcc_multiclass(m),
        "accuracy": accuracy(m),
        "worst_classes": [format_label(l) for l in ranked[:worst_n]],
    }
