"""h-adaptive 1D meshes driven by numerical entropy production.

Active cells are dyadic pieces of the cells of a coarse mesh.  A cell is
identified by ``(coarse, level, k)``: it is the ``k``-th of the ``2**level``
equal parts of coarse cell ``coarse``.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from wenolab.mesh1d import Mesh1D
from wenolab.reconstruction import CWENO3, ReconstructionConfig, reconstruct_cell
from wenolab.systems import System
from wenolab.timeintegration import (
    SSPRK33,
    as_components,
    compute_dt,
    extend_field,
    ssprk3_step,
)


class AdaptivityError(ValueError):
    pass


# {{{ mesh


@dataclass(frozen=True)
class AdaptiveMesh:
    coarse_mesh: Mesh1D
    max_level: int
    coarse: np.ndarray
    level: np.ndarray
    k: np.ndarray

    @classmethod
    def from_coarse(cls, mesh: Mesh1D, max_level: int) -> AdaptiveMesh:
        if max_level < 0:
            raise AdaptivityError(f"max_level must be >= 0, got {max_level}")
        n = mesh.n
        return cls(mesh, max_level, np.arange(n), np.zeros(n, dtype=int), np.zeros(n, dtype=int))

    @property
    def n(self) -> int:
        return self.coarse.size

    def interfaces(self) -> np.ndarray:
        x0 = self.coarse_mesh.interfaces[:-1][self.coarse]
        hc = self.coarse_mesh.h[self.coarse]
        left = x0 + hc * self.k / 2.0 ** self.level
        return np.concatenate([left, [self.coarse_mesh.interfaces[-1]]])

    def to_mesh(self) -> Mesh1D:
        return Mesh1D(self.interfaces(), boundary=self.coarse_mesh.boundary)

    def _sibling_pairs(self) -> np.ndarray:
        """Indices ``i`` such that cells ``i`` and ``i + 1`` are siblings."""
        i = np.arange(self.n - 1)
        return i[(self.coarse[i] == self.coarse[i + 1])
                 & (self.level[i] == self.level[i + 1])
                 & (self.level[i] > 0)
                 & (self.k[i] % 2 == 0)
                 & (self.k[i + 1] == self.k[i] + 1)]


@dataclass(frozen=True)
class AdaptPlan:
    """Outcome of one adaptation pass, in terms of the old cells."""

    refine: np.ndarray
    #: first index of each merged sibling pair
    merge: np.ndarray

    @property
    def unchanged(self) -> bool:
        return self.refine.size == 0 and self.merge.size == 0


def plan_adaptation(amesh: AdaptiveMesh, refine_flags, coarsen_flags) -> AdaptPlan:
    refine_flags = np.asarray(refine_flags, dtype=bool) & (amesh.level < amesh.max_level)
    coarsen_flags = np.asarray(coarsen_flags, dtype=bool) & ~refine_flags
    pairs = amesh._sibling_pairs()
    pairs = pairs[coarsen_flags[pairs] & coarsen_flags[pairs + 1]]
    return AdaptPlan(np.flatnonzero(refine_flags), pairs)


def apply_plan(amesh: AdaptiveMesh, plan: AdaptPlan) -> AdaptiveMesh:
    n = amesh.n
    # each old cell becomes 2 (refined), 1 or 0 (second of a merged pair) cells
    count = np.ones(n, dtype=int)
    count[plan.refine] = 2
    count[plan.merge + 1] = 0

    coarse = np.repeat(amesh.coarse, count)
    level = np.repeat(amesh.level, count)
    k = np.repeat(amesh.k, count)
    start = np.concatenate([[0], np.cumsum(count)[:-1]])

    r = start[plan.refine]
    level[r] += 1
    level[r + 1] += 1
    k[r] = 2 * amesh.k[plan.refine]
    k[r + 1] = 2 * amesh.k[plan.refine] + 1

    m = start[plan.merge]
    level[m] -= 1
    k[m] //= 2
    return AdaptiveMesh(amesh.coarse_mesh, amesh.max_level, coarse, level, k)


def adapt_mesh(amesh: AdaptiveMesh, indicator, config: IndicatorConfig):
    """One refinement/coarsening pass.  Returns ``(new_mesh, plan)``."""
    refine, coarsen = config.flags(amesh.to_mesh(), indicator)
    plan = plan_adaptation(amesh, refine, coarsen)
    if plan.unchanged:
        return amesh, plan
    return apply_plan(amesh, plan), plan


# }}}


# {{{ solution transfer


def transfer_config(config: ReconstructionConfig) -> ReconstructionConfig:
    """Reconstruction used to split averages: CWENO3 with the scheme's epsilon."""
    return ReconstructionConfig(kind=CWENO3, epsilon=config.epsilon, tau=config.tau)


def transfer_solution(old: Mesh1D, plan: AdaptPlan, u, config: ReconstructionConfig,
                      reflective_components=()) -> np.ndarray:
    """Project cell averages onto the adapted mesh.

    Children receive the averages of the parent's reconstruction polynomial
    over each half; merged pairs receive the length-weighted mean.
    """
    uc, squeeze = as_components(u)
    n = old.n
    count = np.ones(n, dtype=int)
    count[plan.refine] = 2
    count[plan.merge + 1] = 0
    out = np.repeat(uc, count, axis=1)
    start = np.concatenate([[0], np.cumsum(count)[:-1]])

    if plan.refine.size:
        u_ext, h_ext = extend_field(uc, old, 1, reflective_components)
        j = plan.refine
        h = old.h[j]
        rec = reconstruct_cell(
            (u_ext[:, j], u_ext[:, j + 1], u_ext[:, j + 2]),
            h, h_ext[j] / h, h_ext[j + 2] / h, transfer_config(config))
        A, B, Q = rec.poly
        mean = A + Q * h * h / 12.0
        half = B * h / 4.0
        # restore the exact parent average lost to rounding
        shift = uc[:, j] - mean
        out[:, start[j]] = mean - half + shift
        out[:, start[j] + 1] = mean + half + shift

    if plan.merge.size:
        i = plan.merge
        h1, h2 = old.h[i], old.h[i + 1]
        out[:, start[i]] = (h1 * uc[:, i] + h2 * uc[:, i + 1]) / (h1 + h2)

    return out[0] if squeeze else out


# }}}


# {{{ entropy indicator


@dataclass(frozen=True)
class IndicatorConfig:
    """Refinement thresholds relative to the mean indicator."""

    refine: float = 2.0
    coarsen: float = 0.1
    max_level: int = 3

    def __post_init__(self) -> None:
        if not 0.0 < self.coarsen < self.refine:
            raise AdaptivityError(
                f"need 0 < coarsen < refine, got {self.coarsen}, {self.refine}")
        if self.max_level < 0:
            raise AdaptivityError(f"max_level must be >= 0, got {self.max_level}")

    def flags(self, mesh: Mesh1D, indicator) -> tuple[np.ndarray, np.ndarray]:
        s = np.asarray(indicator, dtype=np.float64)
        mean = float(np.sum(mesh.h * s) / mesh.length)
        if mean <= 0.0:
            return np.zeros(s.size, bool), np.zeros(s.size, bool)
        return s > self.refine * mean, s < self.coarsen * mean


def entropy_indicator(mesh: Mesh1D, u_old, u_new, dt: float, system: System,
                      psi: np.ndarray) -> np.ndarray:
    """``|eta(U^{n+1}) - eta(U^n) + dt/h (Psi_{j+1/2} - Psi_{j-1/2})| / dt``.

    ``psi`` holds the numerical entropy fluxes at the ``n + 1`` interfaces,
    combined over the Runge-Kutta stages.
    """
    if not system.has_entropy:
        raise AdaptivityError(f"{system.name} provides no entropy pair")
    uo, _ = as_components(u_old)
    un, _ = as_components(u_new)
    psi = np.asarray(psi).reshape(-1)
    s = system.entropy(un) - system.entropy(uo) + dt / mesh.h * (psi[1:] - psi[:-1])
    return np.abs(s) / dt


def step_with_entropy(mesh: Mesh1D, u, dt: float, scheme, limiter: Callable | None = None):
    """SSPRK(3,3) step that also returns the entropy-production indicator."""
    uc, squeeze = as_components(u)
    un, stages = ssprk3_step(uc, dt, lambda v: scheme.rhs_with_entropy(mesh, v),
                             limiter, with_aux=True)
    psi = sum(b * p for b, p in zip(SSPRK33.b, stages))
    ind = entropy_indicator(mesh, uc, un, dt, scheme.system, psi)
    return (un[0] if squeeze else un), ind


# }}}


# {{{ driver


@dataclass
class EntropyAdaptivity:
    """Adaptive driver plugged into :func:`wenolab.timeintegration.integrate`."""

    amesh: AdaptiveMesh
    config: IndicatorConfig = IndicatorConfig()
    log: list = field(default_factory=list)
    t: float = 0.0
    _mesh: Mesh1D | None = None

    @classmethod
    def start(cls, coarse: Mesh1D, config: IndicatorConfig) -> EntropyAdaptivity:
        return cls(AdaptiveMesh.from_coarse(coarse, config.max_level), config)

    @property
    def mesh(self) -> Mesh1D:
        if self._mesh is None:
            self._mesh = self.amesh.to_mesh()
        return self._mesh

    def _update(self, plan: AdaptPlan, amesh: AdaptiveMesh) -> None:
        if not plan.unchanged:
            self.amesh = amesh
            self._mesh = None

    def advance(self, mesh: Mesh1D, u, dt: float, scheme, limiter=None):
        if mesh is not self.mesh:
            raise AdaptivityError("mesh does not belong to this adaptive driver")
        un, ind = step_with_entropy(mesh, u, dt, scheme, limiter)
        amesh, plan = adapt_mesh(self.amesh, ind, self.config)
        if not plan.unchanged:
            un = transfer_solution(mesh, plan, un, scheme.config,
                                   scheme.system.reflective_components)
        self._update(plan, amesh)
        self.t += dt
        self.log.append((len(self.log) + 1, self.t, self.amesh.n,
                         int(self.amesh.level.min()), int(self.amesh.level.max())))
        return self.mesh, un

    def adapt_initial(self, averages: Callable, scheme, cfl: float, passes: int | None = None):
        """Adapt the mesh to the initial datum.

        ``averages(mesh)`` returns the exact initial cell averages; each pass
        runs a trial step to evaluate the indicator.
        """
        passes = self.config.max_level if passes is None else passes
        for _ in range(passes):
            mesh = self.mesh
            u = averages(mesh)
            dt = compute_dt(mesh, u, scheme.system, cfl)
            _, ind = step_with_entropy(mesh, u, dt, scheme)
            amesh, plan = adapt_mesh(self.amesh, ind, self.config)
            if plan.unchanged:
                break
            self._update(plan, amesh)
        return self.mesh, averages(self.mesh)

    def log_csv(self) -> str:
        out = io.StringIO()
        out.write("step,time,active_cells,min_level,max_level\n")
        for step, t, n, lo, hi in self.log:
            out.write(f"{step},{t:.17g},{n},{lo},{hi}\n")
        return out.getvalue()


# }}}
