"""Tests for rlct_lab."""
