"""Closed label set for teacher talk moves and their discourse categories.

Integer codes are frozen (``NONE = 0``, then the canonical move order) so
confusion matrices, model files, and prediction CSVs stay portable across
runs and platforms. ``none`` is a real label everywhere; files never use an
empty cell to mean "no talk move".
"""

from __future__ import annotations

from enum import IntEnum


class UnknownLabel(ValueError):
    """Raised when a string does not name any talk-move label."""

    def __init__(self, text: str, row: int | None = None):
        self.text = text
        self.row = row
        where = f" (row {row})" if row is not None else ""
        super().__init__(f"unknown talk-move label {text!r}{where}")


class TalkMoveLabel(IntEnum):
    NONE = 0
    KEEPING_EVERYONE_TOGETHER = 1
    GETTING_STUDENTS_TO_RELATE = 2
    RESTATING = 3
    PRESS_FOR_ACCURACY = 4
    REVOICING = 5
    PRESS_FOR_REASONING = 6

    @property
    def canonical(self) -> str:
        return self.name.lower()


class TalkCategory(IntEnum):
    LEARNING_COMMUNITY = 0
    CONTENT_KNOWLEDGE = 1
    RIGOROUS_THINKING = 2

    @property
    def canonical(self) -> str:
        return self.name.lower()


LABELS = tuple(TalkMoveLabel)
MOVE_LABELS = tuple(l for l in TalkMoveLabel if l is not TalkMoveLabel.NONE)
CATEGORIES = tuple(TalkCategory)
NUM_LABELS = len(LABELS)

_CATEGORY_OF = {
    TalkMoveLabel.KEEPING_EVERYONE_TOGETHER: TalkCategory.LEARNING_COMMUNITY,
    TalkMoveLabel.GETTING_STUDENTS_TO_RELATE: TalkCategory.LEARNING_COMMUNITY,
    TalkMoveLabel.RESTATING: TalkCategory.LEARNING_COMMUNITY,
    TalkMoveLabel.PRESS_FOR_ACCURACY: TalkCategory.CONTENT_KNOWLEDGE,
    TalkMoveLabel.REVOICING: TalkCategory.RIGOROUS_THINKING,
    TalkMoveLabel.PRESS_FOR_REASONING: TalkCategory.RIGOROUS_THINKING,
}


def category_of(label: TalkMoveLabel) -> TalkCategory | None:
    """Category of a talk move; ``None`` (no talk move) has no category."""
    return _CATEGORY_OF.get(label)


def format_label(label: TalkMoveLabel) -> str:
    """Canonical lowercase snake_case string, e.g. ``press_for_accuracy``."""
    return label.canonical


def parse_label(text: str, row: int | None = None) -> TalkMoveLabel:
    """Parse a label string, folding case and space/underscore variants.

    Raises UnknownLabel for anything outside the closed 7-label set.
    """
    key = "_".join(text.strip().lower().split()).replace("-", "_")
    key = "_".join(p for p in key.split("_") if p)
    try:
        return TalkMoveLabel[key.upper()]
    except KeyError:
        raise UnknownLabel(text, row=row) from None


def format_category(category: TalkCategory) -> str:
    return category.canonical


def parse_category(text: str) -> TalkCategory:
    key = "_".join(text.strip().lower().split()).replace("-", "_")
    try:
        return TalkCategory[key.upper()]
    except KeyError:
        raise UnknownLabel(text) from None
