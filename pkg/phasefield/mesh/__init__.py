"""Triangulated surfaces and discrete operators."""
