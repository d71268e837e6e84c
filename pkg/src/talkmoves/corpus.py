"""Labeled-dataset management: CSV codec, statistics, stratified splits,
and inverse-frequency class weights.

Dataset CSV header: ``student_context,teacher_sentence,label,lesson_id``.
Labels use the canonical taxonomy strings; ``none`` is written out, never an
empty cell.
"""

from __future__ import annotations

import csv
import io
import random
from collections import Counter, defaultdict
from dataclasses import dataclass

from .ingest import STUDENT, TEACHER, Sentence, SentencePair
from .taxonomy import LABELS, TalkMoveLabel, format_label, parse_label

DATASET_HEADER = ["student_context", "teacher_sentence", "label", "lesson_id"]


class MalformedRow(ValueError):
    """Dataset CSV row has the wrong shape."""


class RatioError(ValueError):
    """Split ratios are not positive fractions summing to 1."""


class EmptyDataset(ValueError):
    """Operation requires at least one labeled pair."""


@dataclass(frozen=True)
class LabeledPair:
    pair: SentencePair
    label: TalkMoveLabel
    lesson_id: str


@dataclass(frozen=True)
class Dataset:
    items: tuple[LabeledPair, ...] = ()

    def __len__(self) -> int:
        return len(self.items)

    def __iter__(self):
        return iter(self.items)


@dataclass(frozen=True)
class LabelDistribution:
    counts: dict[TalkMoveLabel, int]
    total: int

    def count(self, label: TalkMoveLabel) -> int:
        return self.counts.get(label, 0)


@dataclass(frozen=True)
class CorpusStats:
    total_sentences: int
    teacher_sentences: int
    student_sentences: int
    teacher_share: float | None


def stats_to_json(stats: CorpusStats, dist: LabelDistribution | None = None) -> dict:
    """The stats emission schema: { total, teacher, student, teacher_share, label_counts }."""
    return {
        "total": stats.total_sentences,
        "teacher": stats.teacher_sentences,
        "student": stats.student_sentences,
        "teacher_share": stats.teacher_share,
        "label_counts": (
            {format_label(l): dist.count(l) for l in LABELS} if dist is not None else None
        ),
    }


def load_dataset(data: bytes) -> Dataset:
    """Parse dataset CSV bytes; raises UnknownLabel/MalformedRow with row numbers."""
    text = data.decode("utf-8")
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise MalformedRow("empty file, expected header row") from None
    if [h.strip() for h in header] != DATASET_HEADER:
        raise MalformedRow(f"header must be {','.join(DATASET_HEADER)}")
    items = []
    for rowno, row in enumerate(reader, start=2):
        if not row:
            continue
        if len(row) != 4:
            raise MalformedRow(f"row {rowno}: expected 4 cells, got {len(row)}")
        context, teacher_sentence, label_text, lesson_id = row
        if not teacher_sentence:
            raise MalformedRow(f"row {rowno}: empty teacher_sentence")
        if not context:
            raise MalformedRow(f"row {rowno}: student_context must be '-' or non-empty")
        label = parse_label(label_text, row=rowno)
        pair = SentencePair(context, teacher_sentence, len(items))
        items.append(LabeledPair(pair, label, lesson_id))
    return Dataset(tuple(items))


def save_dataset(dataset: Dataset) -> bytes:
    """Canonical CSV bytes; save(load(f)) == f for files written by save."""
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(DATASET_HEADER)
    for item in dataset.items:
        writer.writerow(
            [
                item.pair.student_context,
                item.pair.teacher_sentence,
                format_label(item.label),
                item.lesson_id,
            ]
        )
    return out.getvalue().encode("utf-8")


def corpus_stats(sentences: list[Sentence]) -> CorpusStats:
    """Teacher/student sentence counts; ``other`` speech is excluded."""
    teacher = sum(1 for s in sentences if s.speaker == TEACHER)
    student = sum(1 for s in sentences if s.speaker == STUDENT)
    total = teacher + student
    share = teacher / total if total else None
    return CorpusStats(total, teacher, student, share)


def distribution(dataset: Dataset) -> LabelDistribution:
    counts = Counter(item.label for item in dataset.items)
    return LabelDistribution({label: counts.get(label, 0) for label in LABELS}, len(dataset.items))


def _largest_remainder(n: int, ratios: tuple[float, ...]) -> list[int]:
    """Apportion n into parts proportional to ratios, off by at most 1 each."""
    exact = [n * r for r in ratios]
    base = [int(x) for x in exact]
    shortfall = n - sum(base)
    remainders = sorted(
        range(len(ratios)), key=lambda i: (-(exact[i] - base[i]), i)
    )
    for i in remainders[:shortfall]:
        base[i] += 1
    return base


def stratified_split(
    dataset: Dataset,
    ratios: tuple[float, float, float],
    seed: int,
    by_lesson: bool = False,
) -> tuple[Dataset, Dataset, Dataset]:
    """Deterministic train/val/test split preserving per-label proportions.

    Per label, part sizes follow largest-remainder rounding of count*ratio;
    the shuffle inside each label stratum is seeded, so identical seeds give
    identical membership. ``by_lesson=True`` switches to the leakage-averse
    variant that keeps whole lessons together (stratification then only
    approximate).
    """
    if len(ratios) != 3 or any(r < 0 for r in ratios):
        raise RatioError(f"need three non-negative ratios, got {ratios}")
    if abs(sum(ratios) - 1.0) > 1e-9:
        raise RatioError(f"ratios must sum to 1, got {sum(ratios)}")

    if by_lesson:
        return _split_by_lesson(dataset, ratios, seed)

    by_label: dict[TalkMoveLabel, list[int]] = defaultdict(list)
    for idx, item in enumerate(dataset.items):
        by_label[item.label].append(idx)

    part_indices: tuple[list[int], list[int], list[int]] = ([], [], [])
    for label in LABELS:
        indices = by_label.get(label)
        if not indices:
            continue
        rng = random.Random(f"{seed}:{int(label)}")
        shuffled = indices[:]
        rng.shuffle(shuffled)
        sizes = _largest_remainder(len(shuffled), tuple(ratios))
        cursor = 0
        for part, size in zip(part_indices, sizes):
            part.extend(shuffled[cursor : cursor + size])
            cursor += size

    parts = []
    for indices in part_indices:
        indices.sort()
        parts.append(Dataset(tuple(dataset.items[i] for i in indices)))
    return parts[0], parts[1], parts[2]


def _split_by_lesson(dataset, ratios, seed):
    lessons: dict[str, list[int]] = defaultdict(list)
    for idx, item in enumerate(dataset.items):
        lessons[item.lesson_id].append(idx)
    order = sorted(lessons)
    rng = random.Random(f"{seed}:lessons")
    rng.shuffle(order)
    targets = _largest_remainder(len(dataset.items), tuple(ratios))
    part_indices: tuple[list[int], list[int], list[int]] = ([], [], [])
    for lesson in order:
        # greedy: put the lesson where the remaining deficit is largest
        deficits = [targets[i] - len(part_indices[i]) for i in range(3)]
        best = max(range(3), key=lambda i: (deficits[i], -i))
        part_indices[best].extend(lessons[lesson])
    parts = []
    for indices in part_indices:
        indices.sort()
        parts.append(Dataset(tuple(dataset.items[i] for i in indices)))
    return parts[0], parts[1], parts[2]


def class_weights(dist: LabelDistribution) -> dict[TalkMoveLabel, float]:
    """Inverse-frequency weights: total / (labels_present * count).

    The item-weighted mean of the weights is exactly 1; absent labels get 0.
    """
    if dist.total <= 0:
        raise EmptyDataset("class weights need a non-empty distribution")
    present = [label for label in LABELS if dist.count(label) > 0]
    weights = {}
    for label in LABELS:
        count = dist.count(label)
        weights[label] = dist.total / (len(present) * count) if count else 0.0
    return weights
