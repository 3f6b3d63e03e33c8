"""Numerical laboratory for stability-condition paths."""
