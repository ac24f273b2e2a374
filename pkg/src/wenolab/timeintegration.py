"""Semidiscrete finite-volume operator and SSPRK(3,3) time stepping."""

from __future__ import annotations

import io
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from wenolab.mesh1d import OUTFLOW, PERIODIC, WALL, Mesh1D
from wenolab.reconstruction import ReconstructionConfig, reconstruct_mesh
from wenolab.systems import (
    InadmissibleStateError,
    NumericalFlux,
    System,
    default_flux,
    numerical_entropy_flux,
    numerical_flux,
)

DEFAULT_CFL = 0.45
NGHOST = 2


# {{{ tableau


@dataclass(frozen=True)
class SSPRKTableau:
    """Explicit Runge-Kutta tableau in Butcher form."""

    A: np.ndarray
    b: np.ndarray

    @property
    def stages(self) -> int:
        return self.b.size


#: optimal three-stage third-order SSP scheme
SSPRK33 = SSPRKTableau(
    A=np.array([[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.25, 0.25, 0.0]]),
    b=np.array([1.0, 1.0, 4.0]) / 6.0,
)


def stability_function(z):
    """Amplification factor of SSPRK(3,3) for ``u' = lambda u``, ``z = lambda dt``."""
    z = np.asarray(z)
    return 1.0 + z + z * z / 2.0 + z ** 3 / 6.0


# }}}


# {{{ ghost cells


def extend_field(u: np.ndarray, mesh: Mesh1D, ng: int = NGHOST,
                 reflective_components: Sequence[int] = ()) -> tuple[np.ndarray, np.ndarray]:
    """Pad ``u`` (shape ``(m, n)``) with ``ng`` ghost cells per side.

    Returns the padded data and the matching cell sizes.
    """
    n = mesh.n
    if ng > n:
        raise ValueError(f"{ng} ghost cells requested on a {n}-cell mesh")

    if mesh.boundary == PERIODIC:
        left, right = u[:, n - ng:], u[:, :ng]
    elif mesh.boundary == OUTFLOW:
        left = np.repeat(u[:, :1], ng, axis=1)
        right = np.repeat(u[:, -1:], ng, axis=1)
    elif mesh.boundary == WALL:
        left = u[:, :ng][:, ::-1].copy()
        right = u[:, n - ng:][:, ::-1].copy()
        for k in reflective_components:
            left[k] *= -1.0
            right[k] *= -1.0
    else:
        raise ValueError(f"unknown boundary kind {mesh.boundary!r}")

    return np.concatenate([left, u, right], axis=1), mesh.ghost_sizes(ng)


def as_components(u) -> tuple[np.ndarray, bool]:
    u = np.asarray(u, dtype=np.float64)
    if u.ndim == 1:
        return u[None, :], True
    return u, False


# }}}


# {{{ semidiscrete operator


@dataclass(frozen=True)
class InterfaceData:
    """Boundary-extrapolated data of one operator evaluation."""

    #: states left and right of the ``n + 1`` interfaces, shape ``(m, n + 1)``
    u_minus: np.ndarray
    u_plus: np.ndarray
    #: reconstructed values of the ``n`` cells
    cell_left: np.ndarray
    cell_right: np.ndarray
    cell_center: np.ndarray


def interface_states(mesh: Mesh1D, u: np.ndarray, system: System,
                     config: ReconstructionConfig) -> InterfaceData:
    u_ext, h_ext = extend_field(u, mesh, NGHOST, system.reflective_components)
    # reconstruct cells -1 .. n, which border all n + 1 interfaces
    left, right, center = reconstruct_mesh(u_ext, h_ext, config)
    return InterfaceData(
        u_minus=right[:, :-1],
        u_plus=left[:, 1:],
        cell_left=left[:, 1:-1],
        cell_right=right[:, 1:-1],
        cell_center=center[:, 1:-1],
    )


@dataclass(frozen=True)
class FVScheme:
    """Finite-volume discretisation ``dU_j/dt = -(F_{j+1/2} - F_{j-1/2})/h_j + G_j``.

    ``source``, when given, is called as ``source(mesh, u, interface_data)``
    and returns ``G`` with the shape of ``u``.
    """

    system: System
    config: ReconstructionConfig
    flux: NumericalFlux | None = None
    source: Callable | None = None

    @property
    def numerical_flux(self) -> NumericalFlux:
        return self.flux if self.flux is not None else default_flux(self.system)

    def interface_fluxes(self, mesh: Mesh1D, u: np.ndarray):
        data = interface_states(mesh, u, self.system, self.config)
        try:
            F = numerical_flux(self.numerical_flux, self.system, data.u_minus, data.u_plus)
        except InadmissibleStateError as err:
            i = err.index if isinstance(err.index, int) else err.index[-1]
            x = mesh.interfaces[min(i, mesh.n)]
            raise InadmissibleStateError(
                self.system.name, f"interface {i} (x={x:.6g})", err.state) from err
        return data, F

    def rhs(self, mesh: Mesh1D, u: np.ndarray) -> np.ndarray:
        return self.rhs_with_entropy(mesh, u, entropy=False)[0]

    def rhs_with_entropy(self, mesh: Mesh1D, u: np.ndarray, entropy: bool = True):
        """Operator value and, optionally, the numerical entropy fluxes."""
        data, F = self.interface_fluxes(mesh, u)
        du = -(F[:, 1:] - F[:, :-1]) / mesh.h
        if self.source is not None:
            du = du + self.source(mesh, u, data)
        psi = None
        if entropy:
            psi = numerical_entropy_flux(self.numerical_flux, self.system,
                                         data.u_minus, data.u_plus)
        return du, psi


def semidiscrete_rhs(mesh: Mesh1D, u, system: System, flux: NumericalFlux | None,
                     config: ReconstructionConfig, source: Callable | None = None) -> np.ndarray:
    uc, squeeze = as_components(u)
    du = FVScheme(system, config, flux, source).rhs(mesh, uc)
    return du[0] if squeeze else du


# }}}


# {{{ stepping


def ssprk3_step(u, dt: float, rhs: Callable, limiter: Callable | None = None,
                with_aux: bool = False):
    """One SSPRK(3,3) step in Shu-Osher form.

    With ``with_aux``, ``rhs`` returns ``(du, aux)`` and the stage ``aux``
    values are returned alongside the new state.  ``limiter`` is applied to
    every stage value.
    """
    if not dt > 0.0:
        raise ValueError(f"time step must be positive, got {dt}")

    lim = limiter if limiter is not None else (lambda v: v)
    aux = []

    def L(v):
        r = rhs(v)
        if with_aux:
            r, a = r
            aux.append(a)
        return r

    u1 = lim(u + dt * L(u))
    u2 = lim(0.75 * u + 0.25 * (u1 + dt * L(u1)))
    un = lim(u / 3.0 + 2.0 / 3.0 * (u2 + dt * L(u2)))
    return (un, aux) if with_aux else un


def compute_dt(mesh: Mesh1D, u, system: System, cfl: float = DEFAULT_CFL,
               t: float = 0.0, t_end: float = np.inf, max_dt: float | None = None,
               next_output: float | None = None) -> float:
    if not cfl > 0.0:
        raise ValueError(f"CFL number must be positive, got {cfl}")

    uc, _ = as_components(u)
    speed = float(np.max(system.wave_speed(uc)))
    if speed > 0.0:
        dt = cfl * float(np.min(mesh.h)) / speed
    elif max_dt is not None:
        dt = max_dt
    else:
        raise ValueError("all wave speeds vanish and no maximum time step is configured")
    if max_dt is not None:
        dt = min(dt, max_dt)

    for stop in (next_output, t_end):
        if stop is not None and t + dt >= stop - 1.0e-14 * max(1.0, abs(stop)):
            dt = min(dt, stop - t)
    return dt


@dataclass
class IntegrationResult:
    u: np.ndarray
    mesh: Mesh1D
    t: float
    steps: int
    #: time average of the number of cells
    average_cells: float
    snapshots: list = field(default_factory=list)
    log: list = field(default_factory=list)


def integrate(u0, mesh: Mesh1D, scheme: FVScheme, t_end: float,
              cfl: float = DEFAULT_CFL, adaptivity=None, limiter: Callable | None = None,
              outputs: Sequence[float] = (), max_steps: int = 1_000_000,
              max_dt: float | None = None, post_step: Callable | None = None) -> IntegrationResult:
    """Advance ``u0`` to ``t_end``.

    ``adaptivity`` must provide ``advance(mesh, u, dt, scheme, limiter)``
    returning ``(mesh, u)``; it takes over the step and the mesh update.
    ``limiter`` acts on every Runge-Kutta stage, ``post_step(mesh, u)`` on
    every completed step.
    """
    u, squeeze = as_components(u0)
    u = u.copy()
    t = 0.0
    steps = 0
    cell_time = 0.0
    outputs = sorted(float(o) for o in outputs if 0.0 < o <= t_end)
    snapshots = []
    log = []

    while t < t_end:
        if steps >= max_steps:
            raise RuntimeError(f"maximum number of steps ({max_steps}) reached at t={t}")
        nxt = outputs[0] if outputs else None
        dt = compute_dt(mesh, u, scheme.system, cfl, t, t_end, max_dt, nxt)

        ncells = mesh.n
        if adaptivity is not None:
            mesh, u = adaptivity.advance(mesh, u, dt, scheme, limiter)
        else:
            u = ssprk3_step(u, dt, lambda v: scheme.rhs(mesh, v), limiter)
        if post_step is not None:
            u = post_step(mesh, u)

        cell_time += ncells * dt
        t = t_end if abs(t_end - (t + dt)) <= 1.0e-14 * max(1.0, t_end) else t + dt
        steps += 1
        log.append((steps, t, mesh.n))
        if outputs and t >= outputs[0] - 1.0e-14:
            snapshots.append((outputs.pop(0), mesh, (u[0] if squeeze else u).copy()))

    avg = cell_time / t if t > 0.0 else float(mesh.n)
    return IntegrationResult(u[0] if squeeze else u, mesh, t, steps, avg, snapshots, log)


# }}}


# {{{ checkpoints


def checkpoint_csv(mesh: Mesh1D, u, t: float | None = None) -> str:
    uc, _ = as_components(u)
    out = io.StringIO()
    if t is not None:
        out.write(f"# t={t!r}\n")
    out.write(",".join(["x_center", "h"] + [f"u{k}" for k in range(uc.shape[0])]) + "\n")
    for j in range(mesh.n):
        row = [mesh.centers[j], mesh.h[j]] + list(uc[:, j])
        out.write(",".join(f"{v:.17g}" for v in row) + "\n")
    return out.getvalue()


# }}}
