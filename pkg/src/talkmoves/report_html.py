"""Static, self-contained HTML rendering of a lesson's feedback.

No scripts, no network fetches: inline styles only, so the page can be
archived next to the json artifact and opened anywhere. One section per
lesson statistic, each tagged with a stable ``data-stat`` marker.
"""

from __future__ import annotations

import html
import json

from .analytics import LessonFeedback, feedback_to_json
from .taxonomy import format_category, format_label

_PAGE = """<!DOCTYPE html>
<html lang="en">
<head>
<meta charset="utf-8">
<title>Lesson feedback: {lesson_id}</title>
<style>
body {{ font-family: system-ui, sans-serif; margin: 2rem auto; max-width: 60rem; color: #222; }}
h1 {{ font-size: 1.5rem; }}
section {{ margin: 1.25rem 0; padding: 1rem; border: 1px solid #ddd; border-radius: 8px; }}
h2 {{ font-size: 1.1rem; margin-top: 0; }}
table {{ border-collapse: collapse; }}
td, th {{ padding: 0.25rem 0.75rem; border-bottom: 1px solid #eee; text-align: left; }}
.bar {{ display: inline-block; height: 0.8rem; background: #4a78c2; vertical-align: middle; }}
.word {{ display: inline-block; margin: 0.15rem 0.4rem; color: #2a5599; }}
.muted {{ color: #888; }}
</style>
</head>
<body>
<h1>Lesson feedback: {lesson_id}</h1>
<p class="muted">generated {created_at}</p>
{sections}
</body>
</html>
"""


def _pct(value: float | None) -> str:
    return "unavailable" if value is None else f"{value * 100:.1f}%"


def _section(stat: str, title: str, body: str) -> str:
    return f'<section data-stat="{stat}">\n<h2>{title}</h2>\n{body}\n</section>'


def _moves_section(feedback: LessonFeedback) -> str:
    peak = max(feedback.talk_move_counts.values(), default=0) or 1
    rows = []
    for label, count in feedback.talk_move_counts.items():
        width = int(180 * count / peak)
        rows.append(
            f"<tr><td>{html.escape(format_label(label))}</td>"
            f"<td>{count}</td>"
            f'<td><span class="bar" style="width:{width}px"></span></td></tr>'
        )
    table = "<table><tr><th>talk move</th><th>count</th><th></th></tr>" + "".join(rows) + "</table>"
    return _section(
        "talk-moves",
        f"Talk moves ({feedback.total_talk_moves} total)",
        table,
    )


def _ratio_section(feedback: LessonFeedback) -> str:
    body = (
        f"<p>teacher: <strong>{_pct(feedback.teacher_talk_pct)}</strong> &middot; "
        f"student: <strong>{_pct(feedback.student_talk_pct)}</strong> (by words spoken)</p>"
    )
    return _section("talk-ratio", "Teacher vs. student talk", body)


def _categories_section(feedback: LessonFeedback) -> str:
    if not feedback.category_pcts:
        body = '<p class="muted">no talk moves in this lesson</p>'
    else:
        items = "".join(
            f"<tr><td>{html.escape(format_category(c))}</td><td>{_pct(v)}</td></tr>"
            for c, v in feedback.category_pcts.items()
        )
        body = f"<table><tr><th>category</th><th>share</th></tr>{items}</table>"
    return _section("categories", "Talk moves by category", body)


def _quarters_section(feedback: LessonFeedback) -> str:
    categories = list(feedback.quarter_category_counts[0]) if feedback.quarter_category_counts else []
    header = "".join(f"<th>Q{i + 1}</th>" for i in range(len(feedback.quarter_category_counts)))
    rows = []
    for category in categories:
        cells = "".join(f"<td>{quarter[category]}</td>" for quarter in feedback.quarter_category_counts)
        rows.append(f"<tr><td>{html.escape(format_category(category))}</td>{cells}</tr>")
    body = f"<table><tr><th>category</th>{header}</tr>{''.join(rows)}</table>"
    return _section("quarters", "Talk moves per quarter of the lesson", body)


def _words_section(feedback: LessonFeedback) -> str:
    if not feedback.top_words:
        body = '<p class="muted">no words counted</p>'
    else:
        peak = feedback.top_words[0][1] or 1
        spans = []
        for word, count in feedback.top_words:
            size = 0.8 + 1.2 * count / peak
            spans.append(
                f'<span class="word" style="font-size:{size:.2f}rem" title="{count}">'
                f"{html.escape(word)}</span>"
            )
        body = "<p>" + "".join(spans) + "</p>"
    return _section("word-cloud", "Most frequent words", body)


def _one_word_section(feedback: LessonFeedback) -> str:
    body = f"<p>one-word student responses: <strong>{_pct(feedback.one_word_response_pct)}</strong></p>"
    return _section("one-word", "One-word student responses", body)


def _wait_time_section(feedback: LessonFeedback) -> str:
    body = (
        "<p>teacher sentences followed by &ge; 3 s of wait time: "
        f"<strong>{_pct(feedback.wait_time_pct)}</strong></p>"
    )
    return _section("wait-time", "Wait time", body)


def render_html(feedback: LessonFeedback) -> bytes:
    sections = "\n".join(
        [
            _moves_section(feedback),
            _ratio_section(feedback),
            _categories_section(feedback),
            _quarters_section(feedback),
            _words_section(feedback),
            _one_word_section(feedback),
            _wait_time_section(feedback),
        ]
    )
    page = _PAGE.format(
        lesson_id=html.escape(feedback.lesson_id),
        created_at=html.escape(feedback.created_at),
        sections=sections,
    )
    return page.encode("utf-8")


def render_report(feedback: LessonFeedback) -> tuple[bytes, bytes]:
    """(json bytes, html bytes) for one lesson."""
    payload = json.dumps(feedback_to_json(feedback), ensure_ascii=False, indent=2).encode("utf-8")
    return payload, render_html(feedback)
