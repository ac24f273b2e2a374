"""Finite-volume laboratory for WENO3/CWENO3 with mesh-dependent epsilon."""

from wenolab._kernels import BACKEND

__version__ = "0.1.0"

__all__ = ("BACKEND", "__version__")
