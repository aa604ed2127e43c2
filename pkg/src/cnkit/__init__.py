"""cnkit: counter-narrative generation, evaluation, and annotation toolkit."""

__version__ = "0.1.0"
