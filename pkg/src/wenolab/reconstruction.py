"""Third order WENO3 and CWENO3 reconstructions on non-uniform 3-cell stencils.

All functions broadcast over numpy arrays, so a whole mesh can be processed at
once by passing arrays of neighbour averages and size ratios.  Polynomials are
written in the local coordinate ``x - x_j`` of the central cell.

The mesh-wide fast path used by the time integrators is
:func:`reconstruct_mesh`, which dispatches to the compiled kernel when it is
available.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

WENO3 = "weno3"
CWENO3 = "cweno3"
KINDS = (WENO3, CWENO3)


# {{{ configuration


@dataclass(frozen=True)
class EpsilonPolicy:
    """Rule for the regularisation in the weight denominators.

    ``kind`` is one of ``"constant"`` (``eps = scale``), ``"h"``
    (``eps = scale * h_j``) or ``"h2"`` (``eps = scale * h_j**2``).
    """

    kind: str = "h"
    scale: float = 1.0

    def __post_init__(self) -> None:
        if self.kind not in ("constant", "h", "h2"):
            raise ValueError(f"unknown epsilon policy {self.kind!r}")
        if not self.scale > 0.0:
            raise ValueError(f"epsilon scale must be positive, got {self.scale}")

    @classmethod
    def constant(cls, eps: float) -> EpsilonPolicy:
        return cls("constant", eps)

    @classmethod
    def linear_h(cls, scale: float = 1.0) -> EpsilonPolicy:
        return cls("h", scale)

    @classmethod
    def quadratic_h(cls, scale: float = 1.0) -> EpsilonPolicy:
        return cls("h2", scale)

    @classmethod
    def parse(cls, text: str) -> EpsilonPolicy:
        """Parse ``"h"``, ``"h2"``, ``"h^2"`` or a number such as ``"1e-6"``."""
        t = text.strip().lower().replace("^", "").replace("**", "")
        if t in ("h", "h1"):
            return cls.linear_h()
        if t == "h2":
            return cls.quadratic_h()
        return cls.constant(float(t))

    @property
    def code(self) -> int:
        return ("constant", "h", "h2").index(self.kind)

    @property
    def label(self) -> str:
        if self.kind == "constant":
            return f"{self.scale:g}"
        prefix = "" if self.scale == 1.0 else f"{self.scale:g}*"
        return prefix + ("h" if self.kind == "h" else "h^2")

    def __call__(self, h):
        h = np.asarray(h, dtype=np.float64)
        if self.kind == "constant":
            return np.full_like(h, self.scale)
        if self.kind == "h":
            return self.scale * h
        return self.scale * h * h


@dataclass(frozen=True)
class ReconstructionConfig:
    kind: str = CWENO3
    epsilon: EpsilonPolicy = EpsilonPolicy()
    tau: int = 2
    cweno_weights: tuple[float, float, float] = (0.25, 0.25, 0.5)
    #: force the nonlinear weights to the linear ones (linear scheme)
    linear: bool = False

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise ValueError(f"unknown reconstruction kind {self.kind!r}")
        if int(self.tau) != self.tau or self.tau < 1:
            raise ValueError(f"tau must be a positive integer, got {self.tau}")

        cl, cr, c0 = (float(c) for c in self.cweno_weights)
        if not (0.0 < cl < 1.0 and 0.0 < cr < 1.0):
            raise ValueError(f"CWENO3 weights must lie in (0, 1): {self.cweno_weights}")
        if not abs(cl + cr + c0 - 1.0) < 1.0e-14 or c0 <= 0.0:
            raise ValueError(f"CWENO3 weights must sum to one: {self.cweno_weights}")

    @classmethod
    def cweno(cls, cl: float = 0.25, cr: float = 0.25, **kwargs) -> ReconstructionConfig:
        return cls(kind=CWENO3, cweno_weights=(cl, cr, 1.0 - cl - cr), **kwargs)

    @property
    def label(self) -> str:
        return f"{self.kind}[eps={self.epsilon.label}]"


# }}}


# {{{ candidates


@dataclass(frozen=True)
class CandidateSet:
    """Candidate polynomials of one (or many) cells.

    The linear candidates are ``u0 + sigma_minus * x`` and ``u0 + sigma_plus * x``;
    the central parabola is ``a + b x + c x^2``.  For CWENO3, ``p0`` holds the
    coefficients of the central candidate ``P_0``.
    """

    u0: np.ndarray
    sigma_minus: np.ndarray
    sigma_plus: np.ndarray
    a: np.ndarray
    b: np.ndarray
    c: np.ndarray
    p0: tuple[np.ndarray, np.ndarray, np.ndarray] | None = None

    def optimal(self, x):
        return self.a + self.b * x + self.c * x * x

    def left(self, x):
        return self.u0 + self.sigma_minus * x

    def right(self, x):
        return self.u0 + self.sigma_plus * x

    def central(self, x):
        if self.p0 is None:
            raise ValueError("the central candidate only exists for CWENO3")
        a0, b0, q0 = self.p0
        return a0 + b0 * x + q0 * x * x


def candidate_polynomials(
    um, u0, up, h, beta, gamma,
    kind: str = CWENO3,
    cweno_weights: Sequence[float] = (0.25, 0.25, 0.5),
) -> CandidateSet:
    um, u0, up = (np.asarray(v, dtype=np.float64) for v in (um, u0, up))
    h, beta, gamma = (np.asarray(v, dtype=np.float64) for v in (h, beta, gamma))

    sm = 2.0 * (u0 - um) / ((1.0 + beta) * h)
    sp = 2.0 * (up - u0) / ((1.0 + gamma) * h)
    s = 1.0 + beta + gamma
    c = 1.5 * (sp - sm) / (h * s)
    b = ((0.5 + beta) * sp + (0.5 + gamma) * sm) / s
    a = u0 - c * h * h / 12.0

    p0 = None
    if kind == CWENO3:
        cl, cr, c0 = cweno_weights
        p0 = (
            (a - (cl + cr) * u0) / c0,
            (b - cl * sm - cr * sp) / c0,
            c / c0,
        )
    elif kind != WENO3:
        raise ValueError(f"unknown reconstruction kind {kind!r}")

    return CandidateSet(u0, sm, sp, a, b, c, p0)


# }}}


# {{{ indicators and weights


def polynomial_indicator(slope, quad, h):
    """Jiang-Shu indicator of ``alpha + slope * x + quad * x^2`` on a cell of size h."""
    h2 = h * h
    return slope * slope * h2 + (13.0 / 3.0) * quad * quad * h2 * h2


@dataclass(frozen=True)
class Indicators:
    left: np.ndarray
    right: np.ndarray
    #: indicator of P_0 (CWENO3 only)
    central: np.ndarray | None
    #: indicator of the central parabola, for diagnostics
    optimal: np.ndarray


def jiang_shu_indicators(cand: CandidateSet, h) -> Indicators:
    h = np.asarray(h, dtype=np.float64)
    zero = np.zeros_like(cand.sigma_minus)
    central = None
    if cand.p0 is not None:
        central = polynomial_indicator(cand.p0[1], cand.p0[2], h)

    return Indicators(
        left=polynomial_indicator(cand.sigma_minus, zero, h),
        right=polynomial_indicator(cand.sigma_plus, zero, h),
        central=central,
        optimal=polynomial_indicator(cand.b, cand.c, h),
    )


def nonlinear_weights(linear: Sequence, indicators: Sequence, eps, tau: int = 2) -> np.ndarray:
    """Normalised weights ``C / (eps + I)^tau``, stacked along the first axis."""
    k = len(indicators)
    if len(linear) != k:
        raise ValueError(f"{len(linear)} linear weights for {k} indicators")
    parts = np.broadcast_arrays(
        *[np.asarray(c, dtype=np.float64) for c in linear],
        *[np.asarray(i, dtype=np.float64) for i in indicators],
        np.asarray(eps, dtype=np.float64),
    )
    C = np.stack(parts[:k])
    d = np.stack(parts[k:2 * k]) + parts[-1]

    # scaling by the smallest denominator avoids overflow for tiny eps
    r = np.min(d, axis=0) / d
    w = C * r**tau
    return w / np.sum(w, axis=0)


def weno_optimal_weights(beta, gamma):
    """Linear weights ``(C+_L, C+_R, C-_L, C-_R)`` for the two WENO3 edges.

    ``C-`` solves the matching condition at ``x_{j-1/2}`` exactly.
    """
    beta = np.asarray(beta, dtype=np.float64)
    gamma = np.asarray(gamma, dtype=np.float64)
    s = 1.0 + beta + gamma
    return gamma / s, (1.0 + beta) / s, (1.0 + gamma) / s, beta / s


# }}}


# {{{ cell reconstruction


@dataclass(frozen=True)
class CellReconstruction:
    indicators: Indicators
    #: linear weights; for WENO3 the weights of the right edge
    linear_weights: np.ndarray
    #: nonlinear weights (WENO3: right edge, CWENO3: the only set)
    weights: np.ndarray
    u_left: np.ndarray
    u_right: np.ndarray
    #: CWENO3: P_rec(x_j); WENO3: the central parabola at x_j
    u_center: np.ndarray
    #: WENO3 only: weights of the left edge
    linear_weights_minus: np.ndarray | None = None
    weights_minus: np.ndarray | None = None
    #: CWENO3 only: coefficients of the reconstruction polynomial
    poly: tuple[np.ndarray, np.ndarray, np.ndarray] | None = None


def _unpack(data):
    um, u0, up = data
    return um, u0, up


def reconstruct_cell(data, h, beta, gamma, config: ReconstructionConfig) -> CellReconstruction:
    um, u0, up = _unpack(data)
    h = np.asarray(h, dtype=np.float64)
    cand = candidate_polynomials(um, u0, up, h, beta, gamma, config.kind, config.cweno_weights)
    ind = jiang_shu_indicators(cand, h)
    eps = config.epsilon(h)
    hh = 0.5 * h

    if config.kind == WENO3:
        cpl, cpr, cml, cmr = weno_optimal_weights(beta, gamma)
        Cp = np.stack(np.broadcast_arrays(cpl, cpr))
        Cm = np.stack(np.broadcast_arrays(cml, cmr))
        if config.linear:
            wp, wm = Cp, Cm
        else:
            wp = nonlinear_weights(Cp, (ind.left, ind.right), eps, config.tau)
            wm = nonlinear_weights(Cm, (ind.left, ind.right), eps, config.tau)

        u_right = wp[0] * cand.left(hh) + wp[1] * cand.right(hh)
        u_left = wm[0] * cand.left(-hh) + wm[1] * cand.right(-hh)
        return CellReconstruction(
            indicators=ind,
            linear_weights=Cp,
            weights=wp,
            u_left=u_left,
            u_right=u_right,
            u_center=cand.a,
            linear_weights_minus=Cm,
            weights_minus=wm,
        )

    shape = np.broadcast(cand.u0, h).shape
    C = np.stack([np.full(shape, c) for c in config.cweno_weights])
    if config.linear:
        w = C
    else:
        w = nonlinear_weights(C, (ind.left, ind.right, ind.central), eps, config.tau)

    a0, b0, q0 = cand.p0
    A = (w[0] + w[1]) * cand.u0 + w[2] * a0
    B = w[0] * cand.sigma_minus + w[1] * cand.sigma_plus + w[2] * b0
    Q = w[2] * q0

    return CellReconstruction(
        indicators=ind,
        linear_weights=C,
        weights=w,
        u_left=A - B * hh + Q * hh * hh,
        u_right=A + B * hh + Q * hh * hh,
        u_center=A,
        poly=(A, B, Q),
    )


def weight_deviation(data, h, beta, gamma, config: ReconstructionConfig) -> np.ndarray:
    """``|C - omega|`` per candidate.

    For WENO3 the rows are ``(+L, +R, -L, -R)``; for CWENO3 ``(L, R, 0)``.
    """
    rec = reconstruct_cell(data, h, beta, gamma, config)
    dev = np.abs(rec.linear_weights - rec.weights)
    if rec.weights_minus is not None:
        dev = np.concatenate([dev, np.abs(rec.linear_weights_minus - rec.weights_minus)])
    return dev


def optimal_edge_gradient(h, beta, gamma) -> np.ndarray:
    """Gradient of ``P_OPT(x_{j+1/2})`` with respect to the three averages."""
    eye = np.eye(3)
    return np.array([
        float(candidate_polynomials(*eye[k], h, beta, gamma, kind=WENO3).optimal(0.5 * h))
        for k in range(3)
    ])


def reconstruction_gradient(data, h, beta, gamma, config: ReconstructionConfig):
    """Central-difference gradient of ``u_right`` and the gradient of ``P_OPT``.

    Returns ``(grad_rec, grad_opt)``, both of length 3.
    """
    data = np.asarray(data, dtype=np.float64)
    delta = 1.0e-6 * max(1.0, float(np.max(np.abs(data))))

    grad = np.empty(3)
    for k in range(3):
        e = np.zeros(3)
        e[k] = delta
        up = reconstruct_cell(data + e, h, beta, gamma, config).u_right
        dn = reconstruct_cell(data - e, h, beta, gamma, config).u_right
        grad[k] = (up - dn) / (2.0 * delta)

    return grad, optimal_edge_gradient(h, beta, gamma)


# }}}


# {{{ mesh-wide reconstruction


def reconstruct_mesh(u_ext, h_ext, config: ReconstructionConfig):
    """Reconstruct every cell that has two neighbours in ``u_ext``.

    ``u_ext`` has shape ``(m, n + 2)`` (or ``(n + 2,)``) and ``h_ext`` shape
    ``(n + 2,)``.  Returns ``(u_left, u_right, u_center)`` of shape ``(m, n)``
    (or ``(n,)``).
    """
    from wenolab._kernels import reconstruct_faces

    u_ext = np.asarray(u_ext, dtype=np.float64)
    squeeze = u_ext.ndim == 1
    if squeeze:
        u_ext = u_ext[None, :]

    left, right, center = reconstruct_faces(u_ext, np.asarray(h_ext, dtype=np.float64), config)
    if squeeze:
        return left[0], right[0], center[0]
    return left, right, center


# }}}
