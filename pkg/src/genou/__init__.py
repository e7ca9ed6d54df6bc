"""Generalized Hermite polynomials, the generalized Ornstein-Uhlenbeck semigroup and its maximal operator."""

__version__ = "0.1.0"
