"""Exact computations with branching systems of directed graphs."""
