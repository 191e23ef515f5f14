"""Tests package for patch-rank."""
