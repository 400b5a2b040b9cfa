"""Finite-level workbench for Fraïssé classes, structural Ramsey checks and
the invariant measure on linear orders of the naturals."""

__version__ = "0.1.0"
