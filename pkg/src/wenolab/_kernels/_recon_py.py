"""Vectorised numpy implementation of the mesh-wide reconstruction kernel."""

from __future__ import annotations

import numpy as np


def reconstruct_faces_py(u, h, kind, eps_kind, eps_scale, tau, cl, cr, c0, linear):
    from wenolab.reconstruction import (
        CWENO3, WENO3, EpsilonPolicy, ReconstructionConfig, reconstruct_cell)

    config = ReconstructionConfig(
        kind=WENO3 if kind == 0 else CWENO3,
        epsilon=EpsilonPolicy(("constant", "h", "h2")[eps_kind], eps_scale),
        tau=tau,
        cweno_weights=(cl, cr, c0),
        linear=linear,
    )
    hc = h[1:-1]
    rec = reconstruct_cell(
        (u[:, :-2], u[:, 1:-1], u[:, 2:]), hc, h[:-2] / hc, h[2:] / hc, config)

    shape = u[:, 1:-1].shape
    return (
        np.broadcast_to(rec.u_left, shape).copy(),
        np.broadcast_to(rec.u_right, shape).copy(),
        np.broadcast_to(rec.u_center, shape).copy(),
    )
