"""Per-lesson feedback statistics and cross-lesson trends.

The seven lesson statistics: talk-move frequencies with their total, the
teacher/student talk share (by word count), category percentages, per-quarter
category counts, the most frequent words, the one-word student response rate,
and the share of teacher sentences followed by at least 3 seconds of wait
time. Metrics that need timestamps report as unavailable (None) without them.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from datetime import datetime, timezone
from importlib import resources

from .ingest import STUDENT, TEACHER, Sentence, Transcript, build_pairs, segment_transcript
from .taxonomy import (
    CATEGORIES,
    MOVE_LABELS,
    TalkCategory,
    TalkMoveLabel,
    category_of,
    format_category,
    format_label,
    parse_category,
    parse_label,
)

WAIT_TIME_MS = 3000
NUM_QUARTERS = 4


class AlignmentError(ValueError):
    """Predictions do not line up one-to-one with teacher sentences."""


@dataclass(frozen=True)
class AnalyticsConfig:
    stopwords: frozenset[str]
    top_words_n: int = 50


@dataclass(frozen=True)
class LessonFeedback:
    lesson_id: str
    talk_move_counts: dict[TalkMoveLabel, int]
    total_talk_moves: int
    teacher_talk_pct: float | None
    student_talk_pct: float | None
    category_pcts: dict[TalkCategory, float]
    quarter_category_counts: tuple[dict[TalkCategory, int], ...]
    top_words: tuple[tuple[str, int], ...]
    one_word_response_pct: float | None
    wait_time_pct: float | None
    created_at: str


@dataclass(frozen=True)
class TrendSeries:
    """Per metric, (lesson_id, created_at, value) points sorted by time."""

    series: dict[str, tuple[tuple[str, str, float], ...]]


def default_stopwords() -> frozenset[str]:
    text = resources.files("talkmoves.data").joinpath("stopwords.txt").read_text("utf-8")
    return frozenset(w.strip() for w in text.splitlines() if w.strip())


def load_stopwords(path: str | None = None) -> frozenset[str]:
    if path is None:
        return default_stopwords()
    with open(path, encoding="utf-8") as fh:
        return frozenset(w.strip() for w in fh.read().splitlines() if w.strip())


def default_config() -> AnalyticsConfig:
    return AnalyticsConfig(stopwords=default_stopwords())


def talk_move_counts(predictions) -> tuple[dict[TalkMoveLabel, int], int]:
    """Counts per talk move (``none`` excluded) and their total."""
    counts = {label: 0 for label in MOVE_LABELS}
    for pred in predictions:
        if pred.label is not TalkMoveLabel.NONE:
            counts[pred.label] += 1
    return counts, sum(counts.values())


def talk_ratio(sentences: list[Sentence]) -> tuple[float | None, float | None]:
    """Teacher vs student share of words; ``other`` speech excluded."""
    teacher_words = sum(len(s.normalized.split()) for s in sentences if s.speaker == TEACHER)
    student_words = sum(len(s.normalized.split()) for s in sentences if s.speaker == STUDENT)
    total = teacher_words + student_words
    if total == 0:
        return None, None
    return teacher_words / total, student_words / total


def category_pcts(predictions) -> dict[TalkCategory, float]:
    """Share of talk moves per category; empty map when there are no moves."""
    counts, total = talk_move_counts(predictions)
    if total == 0:
        return {}
    by_category = {category: 0 for category in CATEGORIES}
    for label, n in counts.items():
        by_category[category_of(label)] += n
    return {category: n / total for category, n in by_category.items()}


def _quarter_of_time(start_ms: int, t0: int, span: int) -> int:
    if span <= 0:
        return 0
    return min((start_ms - t0) * NUM_QUARTERS // span, NUM_QUARTERS - 1)


def _quarter_of_index(index: int, total: int) -> int:
    if total <= 0:
        return 0
    return min(index * NUM_QUARTERS // total, NUM_QUARTERS - 1)


def quarter_breakdown(sentences: list[Sentence], predictions) -> tuple[dict[TalkCategory, int], ...]:
    """Talk moves per category in each temporal quarter of the lesson.

    Quarters are by elapsed time (first start to last end over the lesson)
    when every teacher sentence carries timestamps, else by sentence index.
    A boundary instant belongs to the later quarter; the final instant to Q4.
    """
    quarters = tuple({category: 0 for category in CATEGORIES} for _ in range(NUM_QUARTERS))
    teacher_sentences = [s for s in sentences if s.speaker == TEACHER]
    if len(teacher_sentences) != len(predictions):
        raise AlignmentError(
            f"{len(predictions)} predictions for {len(teacher_sentences)} teacher sentences"
        )
    starts = [s.start_ms for s in sentences if s.start_ms is not None]
    ends = [s.end_ms for s in sentences if s.end_ms is not None]
    by_time = bool(teacher_sentences) and all(s.start_ms is not None for s in teacher_sentences)
    if by_time:
        t0 = min(starts)
        t1 = max(ends) if ends else max(starts)
        span = t1 - t0
    for sentence, pred in zip(teacher_sentences, predictions):
        if pred.label is TalkMoveLabel.NONE:
            continue
        if by_time:
            q = _quarter_of_time(sentence.start_ms, t0, span)
        else:
            q = _quarter_of_index(sentence.index, len(sentences))
        quarters[q][category_of(pred.label)] += 1
    return quarters


def word_cloud(
    sentences: list[Sentence], stopwords: frozenset[str], n: int
) -> tuple[tuple[str, int], ...]:
    """Most frequent non-stopword tokens of teacher+student talk.

    Sorted by descending count, ties alphabetical; at most ``n`` entries.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    counts = Counter()
    for sentence in sentences:
        if sentence.speaker in (TEACHER, STUDENT):
            counts.update(t for t in sentence.normalized.split() if t not in stopwords)
    ranked = sorted(counts.items(), key=lambda item: (-item[1], item[0]))
    return tuple(ranked[:n])


def one_word_pct(sentences: list[Sentence]) -> float | None:
    """Share of student sentences that are a single token; None without student talk."""
    student = [s for s in sentences if s.speaker == STUDENT]
    if not student:
        return None
    return sum(1 for s in student if len(s.normalized.split()) == 1) / len(student)


def wait_time_pct(sentences: list[Sentence]) -> float | None:
    """Share of teacher sentences followed by >= 3 s of silence.

    A gap is measured from an utterance's end to the next utterance's start
    and credited once, to the sentence that ends the utterance. Unavailable
    (None) unless every sentence carries both timestamps.
    """
    teacher_sentences = [s for s in sentences if s.speaker == TEACHER]
    if not teacher_sentences:
        return None
    if any(s.start_ms is None or s.end_ms is None for s in sentences):
        return None
    last_of_utterance: dict[int, Sentence] = {}
    first_start: dict[int, int] = {}
    for s in sentences:
        last_of_utterance[s.utterance_index] = s
        first_start.setdefault(s.utterance_index, s.start_ms)
    utterance_order = sorted(first_start)
    qualifying = 0
    for u, nxt in zip(utterance_order, utterance_order[1:]):
        closer = last_of_utterance[u]
        if closer.speaker == TEACHER and first_start[nxt] - closer.end_ms >= WAIT_TIME_MS:
            qualifying += 1
    return qualifying / len(teacher_sentences)


def compute_feedback(
    transcript: Transcript,
    predictions,
    config: AnalyticsConfig,
    created_at: str | None = None,
) -> LessonFeedback:
    """Assemble the full lesson feedback from aligned predictions.

    ``predictions`` must match the lesson's teacher sentences (one per
    sentence-pair, in order). ``created_at`` defaults to the current UTC
    time; pass a fixed value for reproducible output.
    """
    sentences = segment_transcript(transcript)
    pairs = build_pairs(sentences)
    if len(predictions) != len(pairs):
        raise AlignmentError(f"{len(predictions)} predictions for {len(pairs)} pairs")
    counts, total = talk_move_counts(predictions)
    teacher_pct, student_pct = talk_ratio(sentences)
    if created_at is None:
        created_at = datetime.now(timezone.utc).isoformat()
    return LessonFeedback(
        lesson_id=transcript.lesson_id,
        talk_move_counts=counts,
        total_talk_moves=total,
        teacher_talk_pct=teacher_pct,
        student_talk_pct=student_pct,
        category_pcts=category_pcts(predictions),
        quarter_category_counts=quarter_breakdown(sentences, predictions),
        top_words=word_cloud(sentences, config.stopwords, config.top_words_n),
        one_word_response_pct=one_word_pct(sentences),
        wait_time_pct=wait_time_pct(sentences),
        created_at=created_at,
    )


def feedback_to_json(feedback: LessonFeedback) -> dict:
    return {
        "lesson_id": feedback.lesson_id,
        "talk_move_counts": {
            format_label(label): n for label, n in feedback.talk_move_counts.items()
        },
        "total_talk_moves": feedback.total_talk_moves,
        "teacher_talk_pct": feedback.teacher_talk_pct,
        "student_talk_pct": feedback.student_talk_pct,
        "category_pcts": {
            format_category(c): v for c, v in feedback.category_pcts.items()
        },
        "quarters": [
            {format_category(c): n for c, n in quarter.items()}
            for quarter in feedback.quarter_category_counts
        ],
        "top_words": [[w, c] for w, c in feedback.top_words],
        "one_word_response_pct": feedback.one_word_response_pct,
        "wait_time_pct": feedback.wait_time_pct,
        "created_at": feedback.created_at,
    }


def feedback_from_json(payload: dict) -> LessonFeedback:
    return LessonFeedback(
        lesson_id=payload["lesson_id"],
        talk_move_counts={
            parse_label(k): v for k, v in payload["talk_move_counts"].items()
        },
        total_talk_moves=payload["total_talk_moves"],
        teacher_talk_pct=payload["teacher_talk_pct"],
        student_talk_pct=payload["student_talk_pct"],
        category_pcts={parse_category(k): v for k, v in payload["category_pcts"].items()},
        quarter_category_counts=tuple(
            {parse_category(k): v for k, v in quarter.items()} for quarter in payload["quarters"]
        ),
        top_words=tuple((w, c) for w, c in payload["top_words"]),
        one_word_response_pct=payload["one_word_response_pct"],
        wait_time_pct=payload["wait_time_pct"],
        created_at=payload["created_at"],
    )


def trends(feedbacks: list[LessonFeedback]) -> TrendSeries:
    """Time-sorted metric series across lessons; unavailable metrics skipped."""
    ordered = sorted(feedbacks, key=lambda f: (f.created_at, f.lesson_id))
    series: dict[str, list] = {}

    def push(metric: str, feedback: LessonFeedback, value):
        if value is None:
            return
        series.setdefault(metric, []).append(
            (feedback.lesson_id, feedback.created_at, float(value))
        )

    for feedback in ordered:
        push("total_talk_moves", feedback, feedback.total_talk_moves)
        push("teacher_talk_pct", feedback, feedback.teacher_talk_pct)
        push("student_talk_pct", feedback, feedback.student_talk_pct)
        push("one_word_response_pct", feedback, feedback.one_word_response_pct)
        push("wait_time_pct", feedback, feedback.wait_time_pct)
        for label, n in feedback.talk_move_counts.items():
            push(f"count_{format_label(label)}", feedback, n)
        for category, v in feedback.category_pcts.items():
            push(f"category_pct_{format_category(category)}", feedback, v)
    return TrendSeries({metric: tuple(points) for metric, points in series.items()})


def trends_to_json(t: TrendSeries) -> dict:
    return {
        "series": {
            metric: [
                {"lesson_id": lesson, "timestamp": ts, "value": v} for lesson, ts, v in points
            ]
            for metric, points in t.series.items()
        }
    }
