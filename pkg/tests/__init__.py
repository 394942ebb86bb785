"""Tests for diamondnet."""
