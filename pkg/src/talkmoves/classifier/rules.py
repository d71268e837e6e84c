"""Deterministic keyword/overlap rule baseline.

First matching rule in a fixed precedence wins and gets probability 1:

1. teacher tokens a subset of the student context's tokens -> restating
2. >=50% overlap with the context plus at least one new content token -> revoicing
3. "agree"/"disagree" -> getting_students_to_relate
4. "why"/"explain"/"how do you know" -> press_for_reasoning
5. "say"/"said"/"repeat"/"listen"/"everyone" -> keeping_everyone_together
6. a math-lexicon token -> press_for_accuracy
7. otherwise -> none
"""

from __future__ import annotations

from ..ingest import SentencePair
from ..taxonomy import TalkMoveLabel
from .features import NO_CONTEXT
from .model import Prediction

DEFAULT_MATH_LEXICON = (
    "equation", "number", "add", "subtract", "multiply", "divide", "slope",
    "fraction", "ordered pair", "sum", "difference", "product", "quotient",
    "graph", "angle", "denominator", "numerator", "decimal", "percent",
    "variable", "integer",
)

# function words never count as the "new content" a revoicing adds
FUNCTION_WORDS = frozenset(
    "a an the i you he she it we they this that these those is are was were be been being "
    "do does did to of in on at by for with and or but so if as not no yes om okay ok "
    "um uh oh hmm me my your his her its our their".split()
)

RELATE_WORDS = frozenset({"agree", "disagree"})
REASONING_WORDS = frozenset({"why", "explain"})
REASONING_PHRASES = ("how do you know",)
TOGETHER_WORDS = frozenset({"say", "said", "repeat", "listen", "everyone"})


def _one_hot(label: TalkMoveLabel) -> Prediction:
    probs = [0.0] * 7
    probs[int(label)] = 1.0
    return Prediction(tuple(probs), label)


def rule_classify(pair: SentencePair, math_lexicon=DEFAULT_MATH_LEXICON) -> Prediction:
    """Classify one normalized pair; pure function of its two strings."""
    teacher = pair.teacher_sentence.split()
    teacher_set = set(teacher)
    has_context = pair.student_context != NO_CONTEXT
    student_set = set(pair.student_context.split()) if has_context else set()

    if has_context and teacher_set and teacher_set <= student_set:
        return _one_hot(TalkMoveLabel.RESTATING)

    if has_context and student_set:
        shared = len(teacher_set & student_set)
        new_content = teacher_set - student_set - FUNCTION_WORDS
        if shared >= 0.5 * len(student_set) and new_content:
            return _one_hot(TalkMoveLabel.REVOICING)

    if teacher_set & RELATE_WORDS:
        return _one_hot(TalkMoveLabel.GETTING_STUDENTS_TO_RELATE)

    padded = f" {pair.teacher_sentence} "
    if teacher_set & REASONING_WORDS or any(f" {p} " in padded for p in REASONING_PHRASES):
        return _one_hot(TalkMoveLabel.PRESS_FOR_REASONING)

    if teacher_set & TOGETHER_WORDS:
        return _one_hot(TalkMoveLabel.KEEPING_EVERYONE_TOGETHER)

    for entry in math_lexicon:
        if " " in entry:
            if f" {entry} " in padded:
                return _one_hot(TalkMoveLabel.PRESS_FOR_ACCURACY)
        elif entry in teacher_set:
            return _one_hot(TalkMoveLabel.PRESS_FOR_ACCURACY)

    return _one_hot(TalkMoveLabel.NONE)
