"""Tests for pivotex."""
