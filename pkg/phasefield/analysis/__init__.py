"""Diffuse-varifold diagnostics."""
