"""Numerical and exact verification of Lefschetz fixed point identities on
manifolds with boundary."""

__version__ = "0.1.0"
