"""Numerical laboratory for weighted Bergman spaces and Toeplitz operators."""
