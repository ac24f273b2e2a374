"""Well-balanced shallow-water discretisation over a bathymetry ``z(x)``.

Interface states use hydrostatic reconstruction; the cell average of the
source ``-g h z_x`` is integrated from reconstructed point values by the
trapezoidal rule on one (``S1``) or two (``S2``) sub-intervals, or by their
Richardson combination ``(4 S2 - S1) / 3``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from wenolab.mesh1d import WALL, Mesh1D, QuasiRegular, cell_averages, generate_mesh
from wenolab.reconstruction import CWENO3, WENO3, EpsilonPolicy, ReconstructionConfig, reconstruct_mesh
from wenolab.systems import Rusanov, ShallowWater, numerical_flux
from wenolab.timeintegration import NGHOST, extend_field, integrate

S1 = "S1"
S2 = "S2"
RICHARDSON = "richardson"
QUADRATURES = (S1, S2, RICHARDSON)

#: CWENO3 polynomial at the centre
CENTER_CWENO = "cweno3"
#: WENO3 edges, central optimal parabola at the centre
CENTER_P2 = "weno3+p2"
#: WENO3 edges, cell average at the centre
CENTER_AVG = "weno3+avg"
CENTER_STRATEGIES = (CENTER_CWENO, CENTER_P2, CENTER_AVG)


# {{{ point values


@dataclass(frozen=True)
class PointValues:
    """Reconstructed values of cells ``-1 .. n`` (ghosts included)."""

    left: np.ndarray
    right: np.ndarray
    center: np.ndarray

    def interior(self) -> PointValues:
        return PointValues(self.left[..., 1:-1], self.right[..., 1:-1], self.center[..., 1:-1])


def center_value_strategy(kind: str, epsilon: EpsilonPolicy = EpsilonPolicy(), tau: int = 2):
    """Reconstruction config and centre-value rule of a scheme variant.

    Returns ``(config, center)`` where ``center(averages, reconstructed_center)``
    gives the value used at ``x_j``.
    """
    if kind == CENTER_CWENO:
        return ReconstructionConfig(CWENO3, epsilon, tau), lambda avg, c: c
    if kind == CENTER_P2:
        # the WENO3 kernel reports the central optimal parabola at x_j
        return ReconstructionConfig(WENO3, epsilon, tau), lambda avg, c: c
    if kind == CENTER_AVG:
        return ReconstructionConfig(WENO3, epsilon, tau), lambda avg, c: avg
    raise ValueError(f"unknown centre-value strategy {kind!r}; choose from {CENTER_STRATEGIES}")


def point_values(mesh: Mesh1D, u: np.ndarray, config: ReconstructionConfig, center: Callable,
                 reflective=()) -> PointValues:
    u_ext, h_ext = extend_field(u, mesh, NGHOST, reflective)
    left, right, c = reconstruct_mesh(u_ext, h_ext, config)
    return PointValues(left, right, center(u_ext[:, 1:-1], c))


@dataclass(frozen=True)
class Bathymetry:
    """Bottom elevation on a fixed mesh, reconstructed once."""

    averages: np.ndarray
    values: PointValues

    @classmethod
    def build(cls, mesh: Mesh1D, z: Callable | np.ndarray, config: ReconstructionConfig,
              center: Callable) -> Bathymetry:
        zbar = cell_averages(z, mesh) if callable(z) else np.asarray(z, dtype=np.float64)
        pv = point_values(mesh, zbar[None, :], config, center)
        return cls(zbar, PointValues(pv.left[0], pv.right[0], pv.center[0]))


# }}}


# {{{ hydrostatic reconstruction and sources


def hydrostatic_interface_states(h_minus, v_minus, z_minus, h_plus, v_plus, z_plus):
    """Hydrostatic states at interfaces.

    Returns ``(u_star_minus, u_star_plus, h_star_minus, h_star_plus)`` with
    ``u_star = (h*, h* v)``.
    """
    zs = np.maximum(z_minus, z_plus)
    hm = np.maximum(0.0, h_minus + z_minus - zs)
    hp = np.maximum(0.0, h_plus + z_plus - zs)
    return np.stack([hm, hm * v_minus]), np.stack([hp, hp * v_plus]), hm, hp


def source_quadrature(h_left, h_center, h_right, z_left, z_center, z_right, mode: str = RICHARDSON):
    """Approximation of ``int h z_x dx`` over a cell from point values."""
    s1 = 0.5 * (h_left + h_right) * (z_right - z_left)
    if mode == S1:
        return s1
    s2 = 0.5 * (h_left + h_center) * (z_center - z_left) + 0.5 * (h_center + h_right) * (z_right - z_center)
    if mode == S2:
        return s2
    if mode == RICHARDSON:
        return (4.0 * s2 - s1) / 3.0
    raise ValueError(f"unknown source quadrature {mode!r}; choose from {QUADRATURES}")


@dataclass
class PositivityFilter:
    """Sets negative depths (and their discharge) to zero, tracking the mass added."""

    total: float = 0.0
    events: int = 0

    def __call__(self, mesh: Mesh1D, u):
        u, inc = positivity_filter(mesh, u)
        self.total += inc
        self.events += int(inc > 0.0)
        return u


def positivity_filter(mesh: Mesh1D, u):
    """Returns ``(u, sum_j h_j |dh_j|)``."""
    neg = u[0] < 0.0
    if not np.any(neg):
        return u, 0.0
    inc = float(np.sum(mesh.h[neg] * np.abs(u[0][neg])))
    u = u.copy()
    u[0][neg] = 0.0
    u[1][neg] = 0.0
    return u, inc


# }}}


# {{{ scheme


@dataclass
class SWScheme:
    """Well-balanced finite-volume operator for ``(h, q)`` over a fixed bathymetry."""

    mesh: Mesh1D
    bathymetry: Callable | np.ndarray
    strategy: str = CENTER_CWENO
    epsilon: EpsilonPolicy = field(default_factory=EpsilonPolicy)
    quadrature: str = RICHARDSON
    g: float = 9.81
    dry_tol: float = 1.0e-10
    #: depth below which velocities are desingularised; defaults to the smallest cell width
    kappa: float | None = None

    def __post_init__(self) -> None:
        if self.quadrature not in QUADRATURES:
            raise ValueError(f"unknown source quadrature {self.quadrature!r}")
        self.config, self._center = center_value_strategy(self.strategy, self.epsilon)
        kappa = float(np.min(self.mesh.h)) if self.kappa is None else self.kappa
        self.system = ShallowWater(self.g, self.dry_tol, kappa)
        self.flux = Rusanov()
        self.bottom = Bathymetry.build(self.mesh, self.bathymetry, self.config, self._center)

    def rhs(self, mesh: Mesh1D, u: np.ndarray) -> np.ndarray:
        if mesh is not self.mesh and not np.array_equal(mesh.interfaces, self.mesh.interfaces):
            raise ValueError("the shallow-water scheme is bound to the mesh of its bathymetry")
        g = self.g
        pv = point_values(mesh, u, self.config, self._center, self.system.reflective_components)
        zb = self.bottom.values

        velocity = lambda h, q: self.system.velocity((h, q))  # noqa: E731
        # interface j+1/2 for j = -1 .. n-1: left state from cell j, right from j+1
        hm, qm, zm = pv.right[0, :-1], pv.right[1, :-1], zb.right[:-1]
        hp, qp, zp = pv.left[0, 1:], pv.left[1, 1:], zb.left[1:]
        um, up, hsm, hsp = hydrostatic_interface_states(
            hm, velocity(hm, qm), zm, hp, velocity(hp, qp), zp)
        F = numerical_flux(self.flux, self.system, um, up)

        # momentum flux seen from each side, with the hydrostatic correction
        corr_m = 0.5 * g * (np.maximum(hm, 0.0) ** 2 - hsm ** 2)
        corr_p = 0.5 * g * (np.maximum(hp, 0.0) ** 2 - hsp ** 2)
        du = np.empty_like(u)
        du[0] = -(F[0, 1:] - F[0, :-1]) / mesh.h
        du[1] = -((F[1, 1:] + corr_m[1:]) - (F[1, :-1] + corr_p[:-1])) / mesh.h

        hc = pv.interior()
        zc = zb.interior()
        hl, hr = np.maximum(hc.left[0], 0.0), np.maximum(hc.right[0], 0.0)
        S = source_quadrature(hl, hc.center[0], hr, zc.left, zc.center, zc.right, self.quadrature)
        du[1] -= g * S / mesh.h
        return du


# }}}


# {{{ pond test


POND_DOMAIN = (-1.0, 1.0)
POND_T = 4.0


def pond_bottom(x):
    return 2.0 * x * x


def pond_surface(x):
    return np.maximum(1.0 + 0.4 * x, pond_bottom(x))


def pond_initial(mesh: Mesh1D) -> np.ndarray:
    h = cell_averages(lambda x: pond_surface(x) - pond_bottom(x), mesh)
    return np.stack([h, np.zeros_like(h)])


@dataclass(frozen=True)
class PondResult:
    n: int
    strategy: str
    conservation_error: float
    steps: int
    filter_events: int


def pond_test(n: int, strategy: str = CENTER_CWENO, t_end: float = POND_T, cfl: float = 0.45,
              epsilon: EpsilonPolicy = EpsilonPolicy(), quadrature: str = RICHARDSON,
              g: float = 9.81, mesh: Mesh1D | None = None) -> PondResult:
    """Run the pond problem and return the mass added by the positivity filter."""
    mesh = mesh or generate_mesh(QuasiRegular(n), POND_DOMAIN, WALL)
    u0 = pond_initial(mesh)
    Hmax = float(np.max(cell_averages(pond_surface, mesh)))
    scheme = SWScheme(mesh, pond_bottom, strategy, epsilon, quadrature, g, 1.0e-10 * Hmax)
    filt = PositivityFilter()
    r = integrate(u0, mesh, scheme, t_end, cfl=cfl, post_step=filt)
    return PondResult(mesh.n, strategy, filt.total, r.steps, filt.events)


def lake_at_rest_residual(mesh: Mesh1D, z: Callable, H: float, strategy: str = CENTER_CWENO,
                          epsilon: EpsilonPolicy = EpsilonPolicy(), quadrature: str = RICHARDSON,
                          g: float = 9.81, steps: int = 0, cfl: float = 0.45):
    """Nondimensional residual ``max |RHS| / (g H^2)`` of a lake at rest.

    With ``steps > 0`` the state is first advanced by that many time steps and
    the residual of the final state is reported together with its deviation
    from the initial state.
    """
    zbar = cell_averages(z, mesh)
    u = np.stack([H - zbar, np.zeros_like(zbar)])
    scheme = SWScheme(mesh, zbar, strategy, epsilon, quadrature, g)
    drift = 0.0
    if steps:
        from wenolab.timeintegration import compute_dt, ssprk3_step

        u0 = u.copy()
        for _ in range(steps):
            dt = compute_dt(mesh, u, scheme.system, cfl)
            u = ssprk3_step(u, dt, lambda v: scheme.rhs(mesh, v))
        drift = float(np.max(np.abs(u - u0)))
    res = float(np.max(np.abs(scheme.rhs(mesh, u))))
    return res / (g * H * H), drift


# }}}
