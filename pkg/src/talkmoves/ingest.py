"""Transcript ingestion: file parsing, sentence segmentation, normalization,
student-teacher pair construction, and ASR-style noise injection.

Supported transcript formats
----------------------------
json        {"lesson_id": ..., "utterances": [{"speaker", "start_ms", "end_ms", "text"}]}
turns_text  one utterance per line, ``speaker: text``, no timestamps
csv         header ``lesson_id,speaker,start_ms,end_ms,text``; empty timestamp
            cells mean absent
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, replace

from .hashing import fnv1a64, mix64

TEACHER = "teacher"
STUDENT = "student"
OTHER = "other"

SENTENCE_TERMINATORS = (".", "?", "!")

PSEUDO_WORDS = (
    "blick", "dax", "fep", "gorp", "lirp", "mib", "norg", "plon",
    "quib", "ral", "snod", "tev", "vun", "wug", "yix", "zorp",
)


class MalformedInput(ValueError):
    """Transcript bytes do not parse under the requested format."""


class BadTimestamps(ValueError):
    """Utterance timestamps violate ordering (end < start or decreasing starts)."""


class EmptyTranscript(ValueError):
    """Parsed transcript contains no utterances."""


@dataclass(frozen=True)
class Utterance:
    speaker: str
    text: str
    start_ms: int | None = None
    end_ms: int | None = None


@dataclass(frozen=True)
class Transcript:
    lesson_id: str
    utterances: tuple[Utterance, ...]


@dataclass(frozen=True)
class Sentence:
    """One segmented sentence, aligned to its source utterance."""

    index: int
    speaker: str
    raw: str
    normalized: str
    utterance_index: int
    start_ms: int | None = None
    end_ms: int | None = None


@dataclass(frozen=True)
class SentencePair:
    """Classification unit: teacher sentence plus its prior student context.

    ``student_context`` is the placeholder ``"-"`` when no unconsumed student
    sentence precedes the teacher sentence.
    """

    student_context: str
    teacher_sentence: str
    teacher_sentence_index: int


@dataclass(frozen=True)
class NoiseConfig:
    word_drop_rate: float = 0.0
    word_substitute_rate: float = 0.0
    student_rate_multiplier: float = 1.0
    seed: int = 0

    def __post_init__(self):
        for name in ("word_drop_rate", "word_substitute_rate"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must be in [0, 1], got {v}")
        if self.student_rate_multiplier < 1.0:
            raise ValueError("student_rate_multiplier must be >= 1")


def _canonical_speaker(raw: str) -> str:
    s = raw.strip().lower()
    if s == TEACHER:
        return TEACHER
    if s == STUDENT:
        return STUDENT
    return OTHER


def _check_utterance(text: str, start_ms, end_ms, where: str):
    if not text.strip():
        raise MalformedInput(f"{where}: empty utterance text")
    if start_ms is not None and end_ms is not None and end_ms < start_ms:
        raise BadTimestamps(f"{where}: end_ms {end_ms} < start_ms {start_ms}")


def _check_transcript(lesson_id: str, utterances: list[Utterance]):
    if not lesson_id:
        raise MalformedInput("lesson_id must be non-empty")
    if not utterances:
        raise EmptyTranscript("transcript has no utterances")
    prev_start = None
    for i, u in enumerate(utterances):
        if u.start_ms is not None:
            if prev_start is not None and u.start_ms < prev_start:
                raise BadTimestamps(
                    f"utterance {i}: start_ms {u.start_ms} decreases below {prev_start}"
                )
            prev_start = u.start_ms


def _parse_optional_ms(value, where: str) -> int | None:
    if value is None or value == "":
        return None
    try:
        return int(value)
    except (TypeError, ValueError):
        raise MalformedInput(f"{where}: bad timestamp {value!r}") from None


def parse_transcript(data: bytes, format: str, lesson_id: str | None = None) -> Transcript:
    """Parse transcript bytes in one of the supported formats.

    ``lesson_id`` overrides (json, csv) or supplies (turns_text, which has no
    lesson field) the lesson identifier. Speakers outside teacher/student map
    to ``other``.
    """
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError as e:
        raise MalformedInput(f"not valid UTF-8: {e}") from None

    if format == "json":
        return _parse_json(text, lesson_id)
    if format == "turns_text":
        return _parse_turns_text(text, lesson_id)
    if format == "csv":
        return _parse_csv(text, lesson_id)
    raise MalformedInput(f"unknown transcript format {format!r}")


def _parse_json(text: str, lesson_id: str | None) -> Transcript:
    try:
        payload = json.loads(text)
    except json.JSONDecodeError as e:
        raise MalformedInput(f"bad json: {e}") from None
    if not isinstance(payload, dict) or not isinstance(payload.get("utterances"), list):
        raise MalformedInput("json transcript must be an object with an 'utterances' list")
    lesson = lesson_id or str(payload.get("lesson_id") or "")
    utterances = []
    for i, item in enumerate(payload["utterances"]):
        if not isinstance(item, dict) or "speaker" not in item or "text" not in item:
            raise MalformedInput(f"utterance {i}: need 'speaker' and 'text'")
        start = _parse_optional_ms(item.get("start_ms"), f"utterance {i}")
        end = _parse_optional_ms(item.get("end_ms"), f"utterance {i}")
        speaker = _canonical_speaker(str(item["speaker"]))
        text_i = str(item["text"])
        _check_utterance(text_i, start, end, f"utterance {i}")
        utterances.append(Utterance(speaker, text_i.strip(), start, end))
    _check_transcript(lesson, utterances)
    return Transcript(lesson, tuple(utterances))


def _parse_turns_text(text: str, lesson_id: str | None) -> Transcript:
    utterances = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        speaker_raw, sep, spoken = line.partition(":")
        if not sep:
            raise MalformedInput(f"line {lineno}: expected 'speaker: text'")
        speaker = _canonical_speaker(speaker_raw)
        _check_utterance(spoken, None, None, f"line {lineno}")
        utterances.append(Utterance(speaker, spoken.strip()))
    lesson = lesson_id or "lesson"
    _check_transcript(lesson, utterances)
    return Transcript(lesson, tuple(utterances))


def _parse_csv(text: str, lesson_id: str | None) -> Transcript:
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise EmptyTranscript("empty csv") from None
    expected = ["lesson_id", "speaker", "start_ms", "end_ms", "text"]
    if [h.strip() for h in header] != expected:
        raise MalformedInput(f"csv header must be {','.join(expected)}")
    lesson = lesson_id
    utterances = []
    for rowno, row in enumerate(reader, start=2):
        if not row:
            continue
        if len(row) != 5:
            raise MalformedInput(f"row {rowno}: expected 5 cells, got {len(row)}")
        row_lesson, speaker_raw, start_raw, end_raw, spoken = row
        if lesson is None:
            lesson = row_lesson
        elif lesson_id is None and row_lesson != lesson:
            raise MalformedInput(f"row {rowno}: lesson_id {row_lesson!r} != {lesson!r}")
        start = _parse_optional_ms(start_raw, f"row {rowno}")
        end = _parse_optional_ms(end_raw, f"row {rowno}")
        speaker = _canonical_speaker(speaker_raw)
        _check_utterance(spoken, start, end, f"row {rowno}")
        utterances.append(Utterance(speaker, spoken.strip(), start, end))
    _check_transcript(lesson or "", utterances)
    return Transcript(lesson, tuple(utterances))


def serialize_transcript(transcript: Transcript) -> bytes:
    """Canonical json-format bytes; parse(serialize(t)) == t."""
    payload = {
        "lesson_id": transcript.lesson_id,
        "utterances": [
            {
                "speaker": u.speaker,
                "start_ms": u.start_ms,
                "end_ms": u.end_ms,
                "text": u.text,
            }
            for u in transcript.utterances
        ],
    }
    return json.dumps(payload, ensure_ascii=False, indent=1).encode("utf-8")


def normalize(text: str) -> str:
    """Lowercase, strip punctuation except ``/``, collapse whitespace.

    ``/`` survives so fraction answers like ``7/10`` stay one token.
    Idempotent.
    """
    lowered = text.lower()
    kept = [c if (c.isalnum() or c.isspace() or c == "/") else " " for c in lowered]
    return " ".join("".join(kept).split())


def _split_fragments(text: str) -> list[str]:
    fragments = []
    current = []
    n = len(text)
    for i, c in enumerate(text):
        if c == "\n":
            fragments.append("".join(current))
            current = []
            continue
        current.append(c)
        if c in SENTENCE_TERMINATORS:
            nxt = text[i + 1] if i + 1 < n else None
            if nxt is None or nxt.isspace():
                fragments.append("".join(current))
                current = []
    fragments.append("".join(current))
    return [f.strip() for f in fragments if f.strip()]


def segment(utterance: Utterance, *, start_index: int = 0, utterance_index: int = 0) -> list[Sentence]:
    """Split an utterance into sentences.

    Splits after '.', '?', '!' when followed by whitespace or end of text,
    and on newlines; interior punctuation (decimals like ``3.5``) does not
    split. Punctuation-only fragments are discarded, so an utterance may
    segment to nothing. Fragments inherit the utterance's speaker and
    timestamps.
    """
    sentences = []
    for fragment in _split_fragments(utterance.text):
        normalized = normalize(fragment)
        if not normalized:
            continue
        sentences.append(
            Sentence(
                index=start_index + len(sentences),
                speaker=utterance.speaker,
                raw=fragment,
                normalized=normalized,
                utterance_index=utterance_index,
                start_ms=utterance.start_ms,
                end_ms=utterance.end_ms,
            )
        )
    return sentences


def segment_transcript(transcript: Transcript) -> list[Sentence]:
    """All sentences of a lesson with dense lesson-wide indices."""
    sentences: list[Sentence] = []
    for u_idx, utterance in enumerate(transcript.utterances):
        sentences.extend(segment(utterance, start_index=len(sentences), utterance_index=u_idx))
    return sentences


def build_pairs(sentences: list[Sentence]) -> list[SentencePair]:
    """One pair per teacher sentence, with at-most-once student context.

    The most recent preceding student sentence becomes the context of the
    first teacher sentence that follows it; every further consecutive teacher
    sentence gets the placeholder "-". Speech by ``other`` speakers neither
    supplies context nor consumes it.
    """
    pairs = []
    last_student: str | None = None
    for sentence in sentences:
        if sentence.speaker == STUDENT:
            last_student = sentence.normalized
        elif sentence.speaker == TEACHER:
            context = last_student if last_student else "-"
            pairs.append(SentencePair(context, sentence.normalized, sentence.index))
            last_student = None
    return pairs


# --- noise injection -------------------------------------------------------


def _token_randoms(seed: int, utt_idx: int, tok_idx: int) -> tuple[float, float, int]:
    base = fnv1a64(f"{seed}:{utt_idx}:{tok_idx}")
    drop_u = mix64(base) / 2**64
    sub_u = mix64(base ^ 0x5DEECE66D) / 2**64
    word_pick = mix64(base ^ 0xA5A5A5A5A5A5A5A5) % len(PSEUDO_WORDS)
    return drop_u, sub_u, word_pick


def degrade(transcript: Transcript, cfg: NoiseConfig) -> Transcript:
    """Simulate ASR damage: per-token drops and pseudo-word substitutions.

    Student utterances use the configured rates times
    ``student_rate_multiplier`` (clamped to 1). Deterministic in ``cfg.seed``;
    each token's fate depends only on (seed, utterance index, token index).
    Utterances reduced to zero tokens are removed.
    """
    kept_utterances = []
    for u_idx, utterance in enumerate(transcript.utterances):
        mult = cfg.student_rate_multiplier if utterance.speaker == STUDENT else 1.0
        drop_rate = min(1.0, cfg.word_drop_rate * mult)
        sub_rate = min(1.0, cfg.word_substitute_rate * mult)
        tokens = []
        for t_idx, token in enumerate(utterance.text.split()):
            drop_u, sub_u, pick = _token_randoms(cfg.seed, u_idx, t_idx)
            if drop_u < drop_rate:
                continue
            if sub_u < sub_rate:
                tokens.append(PSEUDO_WORDS[pick])
            else:
                tokens.append(token)
        if tokens:
            kept_utterances.append(replace(utterance, text=" ".join(tokens)))
    return Transcript(transcript.lesson_id, tuple(kept_utterances))
