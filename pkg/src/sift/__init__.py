"""Fairness governance pipelines with an append-only bias history."""

__version__ = "0.1.0"
