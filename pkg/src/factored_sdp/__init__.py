"""Solvers for stochastic semidefinite programs via the low-rank factorization X = U U^T."""

__version__ = "0.1.0"
