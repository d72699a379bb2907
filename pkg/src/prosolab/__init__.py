"""Word-level prosodic prominence: acoustic annotation and text-only taggers."""

__version__ = "0.1.0"
