"""Quantitative Streett certificates for infinite-state Markov chains."""

__version__ = "0.1.0"
