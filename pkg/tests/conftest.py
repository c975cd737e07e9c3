"""Keeps the tests directory importable (helpers, fnv_reference)."""
