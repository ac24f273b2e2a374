"""Hot kernels with a compiled implementation and a numpy fallback.

The compiled extension is used when it has been built; setting the
environment variable ``WENOLAB_BACKEND=python`` forces the fallback.
"""

from __future__ import annotations

import os

import numpy as np

from wenolab._kernels._recon_py import reconstruct_faces_py

try:
    if os.environ.get("WENOLAB_BACKEND", "").lower() == "python":
        raise ImportError("python backend requested")
    from wenolab._kernels._recon_ext import reconstruct_faces_ext
except ImportError:
    reconstruct_faces_ext = None

BACKEND = "python" if reconstruct_faces_ext is None else "cython"


def kernel_args(config) -> tuple:
    cl, cr, c0 = (float(c) for c in config.cweno_weights)
    return (
        0 if config.kind == "weno3" else 1,
        config.epsilon.code,
        float(config.epsilon.scale),
        int(config.tau),
        cl, cr, c0,
        bool(config.linear),
    )


def reconstruct_faces(u_ext: np.ndarray, h_ext: np.ndarray, config, backend: str | None = None):
    """Edge and centre values of every interior cell of ``u_ext`` (shape ``(m, n + 2)``)."""
    backend = backend or BACKEND
    u_ext = np.ascontiguousarray(u_ext, dtype=np.float64)
    h_ext = np.ascontiguousarray(h_ext, dtype=np.float64)
    if u_ext.shape[-1] != h_ext.size:
        raise ValueError(f"data has {u_ext.shape[-1]} cells but sizes have {h_ext.size}")

    if backend == "cython":
        if reconstruct_faces_ext is None:
            raise RuntimeError("compiled kernels are not built")
        return reconstruct_faces_ext(u_ext, h_ext, *kernel_args(config))
    return reconstruct_faces_py(u_ext, h_ext, *kernel_args(config))


__all__ = ("BACKEND", "reconstruct_faces", "reconstruct_faces_py", "reconstruct_faces_ext")
