"""Initial data and exact cell averages for the 1D test problems."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from wenolab.mesh1d import Mesh1D, cell_averages, interval_averages
from wenolab.systems import Euler

TWO_PI = 2.0 * np.pi


# {{{ scalar data


def smooth_transport(x):
    """Smooth periodic datum on [0, 1] for the transport convergence study."""
    return np.sin(TWO_PI * x - np.sin(TWO_PI * x) / TWO_PI)


def square_wave(x):
    """Indicator of [1/2, 1] extended with period 1."""
    return (np.mod(x, 1.0) >= 0.5).astype(np.float64)


def transport_u1(x):
    return np.sin(np.pi * x - np.sin(np.pi * x) / np.pi)


def transport_u2(x):
    # the modulated packet is centred at 0; it is made periodic on [-1, 1]
    y = np.mod(x + 1.0, 2.0) - 1.0
    return np.sin(np.pi * y) + 0.25 * np.sin(15.0 * np.pi * y) * np.exp(-20.0 * y * y)


def burgers_u3(x):
    return -np.sin(np.pi * x)


def burgers_u4(x):
    return -np.sin(np.pi * x) + 0.2 * np.sin(5.0 * np.pi * x)


def exp_data(x):
    return np.exp(x)


def cos_cubic(x):
    """``cos(2 pi x) + x^3``: a critical point sits at ``x = 0``."""
    return np.cos(TWO_PI * x) + x ** 3


# }}}


# {{{ exact solutions


def shifted_averages(u0: Callable, mesh: Mesh1D, t: float, a: float = 1.0) -> np.ndarray:
    """Exact averages of ``u0(x - a t)`` (``u0`` must be periodic on the domain)."""
    lo, hi = mesh.domain
    L = hi - lo
    return cell_averages(lambda x: u0(lo + np.mod(x - a * t - lo, L)), mesh)


def piecewise_averages(pieces, breaks, mesh: Mesh1D) -> np.ndarray:
    """Averages of a function that is smooth between ``breaks``.

    ``pieces[k]`` is used on the k-th interval delimited by ``breaks``.
    Each cell is split at the break points so the Gauss rule stays accurate.
    """
    edges = np.concatenate([[-np.inf], np.asarray(breaks, dtype=np.float64), [np.inf]])
    a, b = mesh.interfaces[:-1], mesh.interfaces[1:]
    total = None
    for k, f in enumerate(pieces):
        lo = np.clip(edges[k], a, b)
        hi = np.clip(edges[k + 1], a, b)
        w = hi - lo
        part = interval_averages(f, lo, np.where(w > 0.0, hi, lo + 1.0))
        part = part * np.where(w > 0.0, w, 0.0)
        total = part if total is None else total + part
    return total / mesh.h


@dataclass(frozen=True)
class BurgersExact:
    """Entropy solution of periodic Burgers problems by the Hopf-Lax formula.

    With ``U0' = u0``, ``w(x, t) = min_xi [U0(xi) + (x - xi)^2 / (2 t)]`` and
    ``u = w_x``, so cell averages are differences of ``w``.
    """

    u0: Callable
    du0: Callable
    potential: Callable
    umax: float

    def hopf_lax(self, x, t: float, samples: int = 2048, keep: int = 4) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        if t <= 0.0:
            raise ValueError("the Hopf-Lax formula needs t > 0")
        R = t * self.umax * 1.05 + 1.0e-12
        s = np.linspace(-R, R, samples)
        ds = s[1] - s[0]
        out = np.empty_like(x)

        for lo in range(0, x.size, 512):
            xc = x[lo:lo + 512, None]
            xi = xc - s[None, :]
            v = self.potential(xi) + s[None, :] ** 2 / (2.0 * t)
            # local minima of the sampled objective (endpoints included)
            vp = np.pad(v, ((0, 0), (1, 1)), constant_values=np.inf)
            is_min = (v <= vp[:, :-2]) & (v <= vp[:, 2:])
            vm = np.where(is_min, v, np.inf)
            k = min(keep, samples)
            idx = np.argpartition(vm, k - 1, axis=1)[:, :k]
            cand = np.take_along_axis(xi, idx, axis=1)
            ok = np.isfinite(np.take_along_axis(vm, idx, axis=1))
            lo_b, hi_b = cand - ds, cand + ds

            # Newton on xi + t u0(xi) = x, kept inside the sampling bracket
            for _ in range(30):
                g = cand + t * self.u0(cand) - xc
                dg = 1.0 + t * self.du0(cand)
                step = np.where(dg > 0.0, g / np.where(dg > 0.0, dg, 1.0), 0.0)
                cand = np.clip(cand - step, lo_b, hi_b)
                if np.max(np.abs(step)) < 1.0e-15:
                    break

            val = self.potential(cand) + (xc - cand) ** 2 / (2.0 * t)
            val = np.where(ok, val, np.inf)
            out[lo:lo + 512] = np.min(val, axis=1)
        return out

    def averages(self, mesh: Mesh1D, t: float) -> np.ndarray:
        if t == 0.0:
            return cell_averages(self.u0, mesh)
        w = self.hopf_lax(mesh.interfaces, t)
        return np.diff(w) / mesh.h


BURGERS_U3 = BurgersExact(
    u0=burgers_u3,
    du0=lambda x: -np.pi * np.cos(np.pi * x),
    potential=lambda x: np.cos(np.pi * x) / np.pi,
    umax=1.0,
)

BURGERS_U4 = BurgersExact(
    u0=burgers_u4,
    du0=lambda x: -np.pi * np.cos(np.pi * x) + np.pi * np.cos(5.0 * np.pi * x),
    potential=lambda x: np.cos(np.pi * x) / np.pi - 0.04 * np.cos(5.0 * np.pi * x) / np.pi,
    umax=1.2,
)


# }}}


# {{{ Euler


SHU_OSHER_LEFT = (3.857143, 2.629369, 10.333333)
SHU_OSHER_SHOCK = 0.25


def shu_osher_averages(mesh: Mesh1D, gas: Euler | None = None) -> np.ndarray:
    """Conserved cell averages of the shock/acoustic-wave initial data on [0, 1]."""
    gas = gas or Euler()
    rl, vl, pl = SHU_OSHER_LEFT

    def left(x):
        return gas.conserved(np.full_like(x, rl), vl, pl)

    def right(x):
        return gas.conserved(1.0 + 0.2 * np.sin(16.0 * np.pi * x), 0.0, 1.0)

    return piecewise_averages([left, right], [SHU_OSHER_SHOCK], mesh)


# }}}
