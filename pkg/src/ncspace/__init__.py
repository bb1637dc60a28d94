"""Numerical toolkit for noncommutative L_p norms, embeddings and
random-unitary statistics at desk scale."""

__version__ = "0.1.0"
