"""Exact computer algebra for octic plane arrangements: incidence analysis
of one-parameter families, degeneration classification, blow-up bookkeeping
on diagrams, semistable component assembly, and the weight spectral
sequence of the central fiber."""

__version__ = "0.1.0"
