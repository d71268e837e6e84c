from __future__ import annotations

import json

import pytest

from talkmoves.ingest import Transcript, Utterance, parse_transcript


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    """One pass/fail line per acceptance criterion at the end of the run."""
    reports = []
    for key in ("passed", "failed", "error"):
        reports.extend(terminalreporter.stats.get(key, []))
    acceptance = [
        r
        for r in reports
        if getattr(r, "when", "call") == "call" and "test_acceptance" in r.nodeid
    ]
    if not acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for report in sorted(acceptance, key=lambda r: r.nodeid):
        mark = "PASS" if report.passed else "FAIL"
        terminalreporter.write_line(f"{mark}  {report.nodeid.split('::')[-1]}")


@pytest.fixture
def table_turns() -> Transcript:
    """The four-sentence student/teacher exchange used for pair construction."""
    text = (
        "student: so you put the eight on the box\n"
        "student: then you get eight\n"
        "teacher: oh so you were using this side to help you get that side\n"
        "teacher: let me see if i can figure out what you said\n"
    )
    return parse_transcript(text.encode(), "turns_text", lesson_id="turns")


@pytest.fixture
def lesson_transcript() -> Transcript:
    """Hand-built 12-sentence timestamped lesson with precomputed analytics.

    9 teacher + 3 student sentences; 39 teacher words vs 21 student words
    (65/35 split); one-word student responses 2 of 3; a 3000 ms wait-time gap
    after the first teacher utterance and a 2999 ms near-miss after the
    second.
    """
    return Transcript(
        "lesson-12",
        (
            Utterance("teacher", "Today we look at fractions. Let me see your thinking.", 0, 10000),
            Utterance("student", "eight", 13000, 14000),
            Utterance("teacher", "You said eight is a fraction. Can you explain why?", 14000, 20000),
            Utterance(
                "student",
                "because the top number is bigger than the bottom number "
                "so the pieces must be bigger than one whole",
                22999,
                24000,
            ),
            Utterance(
                "teacher",
                "So the numerator is bigger. Everyone listen to this idea. What about seven tenths?",
                24000,
                36000,
            ),
            Utterance("student", "yes", 36000, 38000),
            Utterance("teacher", "Nice work. See you tomorrow.", 38000, 40000),
        ),
    )


def transcript_json_bytes(transcript: Transcript) -> bytes:
    return json.dumps(
        {
            "lesson_id": transcript.lesson_id,
            "utterances": [
                {"speaker": u.speaker, "start_ms": u.start_ms, "end_ms": u.end_ms, "text": u.text}
                for u in transcript.utterances
            ],
        }
    ).encode()
