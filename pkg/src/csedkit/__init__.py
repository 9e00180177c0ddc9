"""Corpus engineering and scoring tools for Chinese semantic error diagnosis data."""

__version__ = "0.1.0"

# Bumped whenever an on-disk layout changes.
FORMAT_VERSIONS = {"conllu": 1, "pairs-jsonl": 1, "corruption-jsonl": 1, "m2": 1, "model-json": 1}
