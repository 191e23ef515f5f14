"""Test fixtures: a bundled corpus and factories."""
