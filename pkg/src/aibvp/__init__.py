"""Operator-matrix semigroups for initial-boundary value problems with dynamic boundary data."""

__version__ = "0.1.0"
