import json
import random

import pytest

from talkmoves.analytics import (
    AlignmentError,
    AnalyticsConfig,
    category_pcts,
    compute_feedback,
    default_stopwords,
    feedback_from_json,
    feedback_to_json,
    one_word_pct,
    quarter_breakdown,
    talk_move_counts,
    talk_ratio,
    trends,
    trends_to_json,
    wait_time_pct,
    word_cloud,
)
from talkmoves.classifier.model import Prediction
from talkmoves.ingest import Sentence, Transcript, Utterance
from talkmoves.report_html import render_report
from talkmoves.taxonomy import TalkCategory as C
from talkmoves.taxonomy import TalkMoveLabel as L

CREATED = "2026-01-05T00:00:00+00:00"


def one_hot(label):
    probs = [0.0] * 7
    probs[int(label)] = 1.0
    return Prediction(tuple(probs), label)


LESSON_LABELS = [
    L.NONE,                        # today we look at fractions (Q1)
    L.KEEPING_EVERYONE_TOGETHER,   # let me see your thinking (Q1)
    L.RESTATING,                   # you said eight is a fraction (Q2)
    L.PRESS_FOR_REASONING,         # can you explain why (Q2)
    L.REVOICING,                   # so the numerator is bigger (Q3)
    L.KEEPING_EVERYONE_TOGETHER,   # everyone listen to this idea (Q3)
    L.PRESS_FOR_ACCURACY,          # what about seven tenths (Q3)
    L.NONE,                        # nice work (Q4)
    L.GETTING_STUDENTS_TO_RELATE,  # see you tomorrow (Q4)
]


def lesson_predictions():
    return [one_hot(label) for label in LESSON_LABELS]


def make_sentence(index, speaker, text, utterance_index=0, start=None, end=None):
    return Sentence(index, speaker, text, text, utterance_index, start, end)


# --- individual statistics -------------------------------------------------------


def test_talk_move_counts():
    preds = [one_hot(L.PRESS_FOR_ACCURACY)] * 3 + [one_hot(L.REVOICING)]
    counts, total = talk_move_counts(preds)
    assert total == 4
    assert counts[L.PRESS_FOR_ACCURACY] == 3 and counts[L.REVOICING] == 1
    counts, total = talk_move_counts([one_hot(L.NONE)] * 5)
    assert total == 0 and all(v == 0 for v in counts.values())


def test_talk_move_counts_random_property():
    rng = random.Random(0)
    for _ in range(20):
        preds = [one_hot(rng.choice(list(L))) for _ in range(rng.randrange(0, 40))]
        counts, total = talk_move_counts(preds)
        assert total == sum(1 for p in preds if p.label is not L.NONE)
        assert total == sum(counts.values())


def test_talk_ratio_by_words():
    sentences = [
        make_sentence(0, "teacher", " ".join(["w"] * 65)),
        make_sentence(1, "student", " ".join(["w"] * 35)),
        make_sentence(2, "other", " ".join(["w"] * 99)),
    ]
    assert talk_ratio(sentences) == (pytest.approx(0.65), pytest.approx(0.35))
    assert talk_ratio([make_sentence(0, "teacher", "just teacher talk")]) == (1.0, 0.0)
    assert talk_ratio([]) == (None, None)


def test_talk_ratio_sums_to_one():
    rng = random.Random(1)
    for _ in range(25):
        sentences = [
            make_sentence(i, rng.choice(["teacher", "student"]), " ".join(["w"] * rng.randrange(1, 9)))
            for i in range(rng.randrange(1, 12))
        ]
        teacher_pct, student_pct = talk_ratio(sentences)
        assert teacher_pct + student_pct == pytest.approx(1.0)


def test_category_pcts():
    preds = [one_hot(L.KEEPING_EVERYONE_TOGETHER), one_hot(L.RESTATING), one_hot(L.REVOICING), one_hot(L.PRESS_FOR_REASONING)]
    pcts = category_pcts(preds)
    assert pcts == {
        C.LEARNING_COMMUNITY: pytest.approx(0.5),
        C.CONTENT_KNOWLEDGE: 0.0,
        C.RIGOROUS_THINKING: pytest.approx(0.5),
    }
    assert category_pcts([one_hot(L.PRESS_FOR_ACCURACY)]) == {
        C.LEARNING_COMMUNITY: 0.0,
        C.CONTENT_KNOWLEDGE: 1.0,
        C.RIGOROUS_THINKING: 0.0,
    }
    assert category_pcts([one_hot(L.NONE)]) == {}


def test_category_pcts_sum_to_one():
    rng = random.Random(2)
    for _ in range(20):
        preds = [one_hot(rng.choice(list(L))) for _ in range(rng.randrange(1, 30))]
        pcts = category_pcts(preds)
        if pcts:
            assert sum(pcts.values()) == pytest.approx(1.0)


def test_quarters_evenly_spaced_moves():
    sentences = [
        make_sentence(i, "teacher", f"s{i}", utterance_index=i, start=i * 1000, end=i * 1000 + 500)
        for i in range(8)
    ]
    preds = [one_hot(L.PRESS_FOR_ACCURACY)] * 8
    quarters = quarter_breakdown(sentences, preds)
    assert [q[C.CONTENT_KNOWLEDGE] for q in quarters] == [2, 2, 2, 2]


def test_quarters_all_moves_early():
    sentences = [
        make_sentence(0, "teacher", "a", 0, start=0, end=500),
        make_sentence(1, "teacher", "b", 1, start=400, end=900),
        make_sentence(2, "student", "c", 2, start=9000, end=10000),
    ]
    preds = [one_hot(L.RESTATING), one_hot(L.REVOICING)]
    quarters = quarter_breakdown(sentences, preds)
    assert quarters[0][C.LEARNING_COMMUNITY] == 1
    assert quarters[0][C.RIGOROUS_THINKING] == 1
    assert all(sum(q.values()) == 0 for q in quarters[1:])


def test_quarters_fall_back_to_index_without_timestamps():
    sentences = [make_sentence(i, "teacher", f"s{i}", i) for i in range(4)]
    preds = [one_hot(L.PRESS_FOR_REASONING)] * 4
    quarters = quarter_breakdown(sentences, preds)
    assert [q[C.RIGOROUS_THINKING] for q in quarters] == [1, 1, 1, 1]


def test_quarter_sums_match_category_counts():
    from talkmoves.taxonomy import category_of

    rng = random.Random(3)
    for _ in range(20):
        n = rng.randrange(1, 30)
        starts = sorted(rng.randrange(0, 10**6) for _ in range(n))
        with_time = rng.random() < 0.5  # exercise both quartering modes
        sentences = [
            make_sentence(
                i, "teacher", f"s{i}", i,
                start=starts[i] if with_time else None,
                end=starts[i] + 500 if with_time else None,
            )
            for i in range(n)
        ]
        preds = [one_hot(rng.choice(list(L))) for _ in range(n)]
        quarters = quarter_breakdown(sentences, preds)
        counts, _ = talk_move_counts(preds)
        for category in C:
            expected = sum(v for lab, v in counts.items() if category_of(lab) is category)
            assert sum(q[category] for q in quarters) == expected


def test_word_cloud():
    sentences = [make_sentence(0, "teacher", "add two add")]
    assert word_cloud(sentences, frozenset(), 10) == (("add", 2), ("two", 1))
    assert word_cloud(sentences, frozenset({"add", "two"}), 10) == ()
    with pytest.raises(ValueError):
        word_cloud(sentences, frozenset(), 0)


def test_word_cloud_counts_bounded_by_raw_counts():
    rng = random.Random(4)
    vocab = ["add", "two", "eight", "box"]
    for _ in range(20):
        sentences = [
            make_sentence(i, rng.choice(["teacher", "student", "other"]), " ".join(rng.choice(vocab) for _ in range(6)))
            for i in range(6)
        ]
        raw = {}
        for s in sentences:
            if s.speaker in ("teacher", "student"):
                for tok in s.normalized.split():
                    raw[tok] = raw.get(tok, 0) + 1
        for word, count in word_cloud(sentences, frozenset(), 3):
            assert count <= raw[word]


def test_one_word_pct():
    sentences = [
        make_sentence(0, "student", "eight"),
        make_sentence(1, "student", "then you get eight"),
        make_sentence(2, "student", "yes"),
    ]
    assert one_word_pct(sentences) == pytest.approx(2 / 3)
    assert one_word_pct([make_sentence(0, "teacher", "no students")]) is None
    assert one_word_pct([make_sentence(0, "student", "one")]) == 1.0


def test_wait_time_threshold_is_3000ms():
    def lesson(gap):
        return [
            make_sentence(0, "teacher", "question here", 0, start=0, end=10000),
            make_sentence(1, "student", "answer", 1, start=10000 + gap, end=12000 + gap),
        ]

    assert wait_time_pct(lesson(3500)) == 1.0
    assert wait_time_pct(lesson(3000)) == 1.0
    assert wait_time_pct(lesson(2999)) == 0.0


def test_wait_time_unavailable_without_timestamps():
    sentences = [make_sentence(0, "teacher", "hello class", 0)]
    assert wait_time_pct(sentences) is None


def test_wait_time_credits_only_the_utterance_final_sentence():
    sentences = [
        make_sentence(0, "teacher", "first sentence", 0, start=0, end=5000),
        make_sentence(1, "teacher", "second sentence", 0, start=0, end=5000),
        make_sentence(2, "student", "reply", 1, start=9000, end=9500),
    ]
    assert wait_time_pct(sentences) == pytest.approx(1 / 2)


# --- composed feedback -------------------------------------------------------


def test_compute_feedback_matches_hand_computation(lesson_transcript):
    cfg = AnalyticsConfig(stopwords=frozenset(), top_words_n=3)
    feedback = compute_feedback(lesson_transcript, lesson_predictions(), cfg, created_at=CREATED)
    assert feedback.lesson_id == "lesson-12"
    assert feedback.talk_move_counts == {
        L.KEEPING_EVERYONE_TOGETHER: 2,
        L.GETTING_STUDENTS_TO_RELATE: 1,
        L.RESTATING: 1,
        L.PRESS_FOR_ACCURACY: 1,
        L.REVOICING: 1,
        L.PRESS_FOR_REASONING: 1,
    }
    assert feedback.total_talk_moves == 7
    assert feedback.teacher_talk_pct == pytest.approx(0.65)
    assert feedback.student_talk_pct == pytest.approx(0.35)
    assert feedback.category_pcts == {
        C.LEARNING_COMMUNITY: pytest.approx(4 / 7),
        C.CONTENT_KNOWLEDGE: pytest.approx(1 / 7),
        C.RIGOROUS_THINKING: pytest.approx(2 / 7),
    }
    assert feedback.quarter_category_counts == (
        {C.LEARNING_COMMUNITY: 1, C.CONTENT_KNOWLEDGE: 0, C.RIGOROUS_THINKING: 0},
        {C.LEARNING_COMMUNITY: 1, C.CONTENT_KNOWLEDGE: 0, C.RIGOROUS_THINKING: 1},
        {C.LEARNING_COMMUNITY: 1, C.CONTENT_KNOWLEDGE: 1, C.RIGOROUS_THINKING: 1},
        {C.LEARNING_COMMUNITY: 1, C.CONTENT_KNOWLEDGE: 0, C.RIGOROUS_THINKING: 0},
    )
    assert feedback.top_words == (("the", 4), ("bigger", 3), ("is", 3))
    assert feedback.one_word_response_pct == pytest.approx(2 / 3)
    assert feedback.wait_time_pct == pytest.approx(1 / 9)
    assert feedback.created_at == CREATED


def test_compute_feedback_all_none(lesson_transcript):
    cfg = AnalyticsConfig(stopwords=default_stopwords())
    feedback = compute_feedback(
        lesson_transcript, [one_hot(L.NONE)] * 9, cfg, created_at=CREATED
    )
    assert feedback.total_talk_moves == 0
    assert feedback.category_pcts == {}


def test_compute_feedback_alignment_error(lesson_transcript):
    cfg = AnalyticsConfig(stopwords=frozenset())
    with pytest.raises(AlignmentError):
        compute_feedback(lesson_transcript, [one_hot(L.NONE)] * 3, cfg)


def test_compute_feedback_deterministic_bytes(lesson_transcript):
    cfg = AnalyticsConfig(stopwords=frozenset(), top_words_n=3)
    first = render_report(compute_feedback(lesson_transcript, lesson_predictions(), cfg, created_at=CREATED))
    second = render_report(compute_feedback(lesson_transcript, lesson_predictions(), cfg, created_at=CREATED))
    assert first == second


# --- report rendering -------------------------------------------------------


def test_json_round_trip(lesson_transcript):
    cfg = AnalyticsConfig(stopwords=frozenset(), top_words_n=3)
    feedback = compute_feedback(lesson_transcript, lesson_predictions(), cfg, created_at=CREATED)
    payload, _ = render_report(feedback)
    assert feedback_from_json(json.loads(payload)) == feedback


def test_json_schema_keys(lesson_transcript):
    cfg = AnalyticsConfig(stopwords=frozenset(), top_words_n=3)
    feedback = compute_feedback(lesson_transcript, lesson_predictions(), cfg, created_at=CREATED)
    payload = feedback_to_json(feedback)
    assert set(payload) == {
        "lesson_id",
        "talk_move_counts",
        "total_talk_moves",
        "teacher_talk_pct",
        "student_talk_pct",
        "category_pcts",
        "quarters",
        "top_words",
        "one_word_response_pct",
        "wait_time_pct",
        "created_at",
    }
    assert len(payload["quarters"]) == 4
    assert payload["wait_time_pct"] == pytest.approx(1 / 9)


def test_html_has_one_section_per_statistic(lesson_transcript):
    cfg = AnalyticsConfig(stopwords=frozenset(), top_words_n=3)
    feedback = compute_feedback(lesson_transcript, lesson_predictions(), cfg, created_at=CREATED)
    _, html_bytes = render_report(feedback)
    html_text = html_bytes.decode()
    for marker in (
        "talk-moves",
        "talk-ratio",
        "categories",
        "quarters",
        "word-cloud",
        "one-word",
        "wait-time",
    ):
        assert html_text.count(f'data-stat="{marker}"') == 1
    assert "unavailable" not in html_text


def test_html_marks_missing_wait_time():
    transcript = Transcript("t", (Utterance("teacher", "Hello class everyone."),))
    cfg = AnalyticsConfig(stopwords=frozenset())
    feedback = compute_feedback(transcript, [one_hot(L.KEEPING_EVERYONE_TOGETHER)], cfg, created_at=CREATED)
    _, html_bytes = render_report(feedback)
    assert "unavailable" in html_bytes.decode()


# --- trends -------------------------------------------------------


def feedback_with(created_at, lesson_id, total):
    counts = {label: 0 for label in L if label is not L.NONE}
    counts[L.RESTATING] = total
    return_value = compute_feedback(
        Transcript(lesson_id, (Utterance("teacher", "You said eight."),)),
        [one_hot(L.RESTATING)],
        AnalyticsConfig(stopwords=frozenset()),
        created_at=created_at,
    )
    return return_value


def test_trends_sorted_and_complete():
    f1 = feedback_with("2026-01-03T00:00:00+00:00", "a", 1)
    f2 = feedback_with("2026-01-01T00:00:00+00:00", "b", 1)
    f3 = feedback_with("2026-01-02T00:00:00+00:00", "c", 1)
    series = trends([f1, f2, f3]).series
    totals = series["total_talk_moves"]
    assert [p[0] for p in totals] == ["b", "c", "a"]
    assert [p[2] for p in totals] == [1.0, 1.0, 1.0]
    payload = trends_to_json(trends([f1, f2, f3]))
    assert payload["series"]["total_talk_moves"][0]["lesson_id"] == "b"
    # wait_time unavailable on every lesson: no series at all
    assert "wait_time_pct" not in series
