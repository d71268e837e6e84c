"""Classroom-discourse analytics: talk-move classification, evaluation
metrics, and per-lesson feedback reports."""

__version__ = "0.1.0"
