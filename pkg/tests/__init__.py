"""Tests for phasefield-lab."""
