"""Finite-horizon planning under partial observability via annotated logic
programs: parse action theories, compile them to (normal) logic programs and
CNF, enumerate answer sets, and extract optimal policies — all cross-checked
against a brute-force probabilistic oracle."""

__version__ = "0.1.0"
