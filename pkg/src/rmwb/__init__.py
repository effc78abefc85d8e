"""Finite workbench for Ramsey-type principles below RT(2,2)."""

__version__ = "0.1.0"
