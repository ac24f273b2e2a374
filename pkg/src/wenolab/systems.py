"""Conservation and balance laws and the numerical fluxes used with them.

States are arrays of shape ``(m, ...)``: the first axis runs over the
conserved components, the remaining axes over cells or interfaces.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

#: states may undershoot zero by this much before they are rejected
ADMISSIBILITY_TOL = 1.0e-12


class InadmissibleStateError(ValueError):
    """A state left the physical domain (negative density, pressure or depth)."""

    def __init__(self, system: str, index, state) -> None:
        self.index = index
        self.state = np.asarray(state)
        super().__init__(f"{system}: inadmissible state at cell {index}: {self.state}")


def _first_bad(mask: np.ndarray):
    idx = np.argwhere(mask)[0]
    return tuple(int(i) for i in idx) if idx.size > 1 else int(idx[0])


# {{{ systems


class System:
    """Base interface of a conservation law ``u_t + f(u)_x = 0``."""

    name = "system"
    m = 1
    #: components negated by reflective walls
    reflective_components: tuple[int, ...] = ()
    has_entropy = False

    def flux(self, u: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def wave_speed(self, u: np.ndarray) -> np.ndarray:
        """Largest characteristic speed magnitude of each state."""
        raise NotImplementedError

    def max_wave_speed(self, ul: np.ndarray, ur: np.ndarray) -> np.ndarray:
        return np.maximum(self.wave_speed(ul), self.wave_speed(ur))

    def check_admissible(self, u: np.ndarray) -> None:
        pass

    def entropy(self, u: np.ndarray) -> np.ndarray:
        raise NotImplementedError(f"{self.name} has no entropy pair")

    def entropy_flux(self, u: np.ndarray) -> np.ndarray:
        raise NotImplementedError(f"{self.name} has no entropy pair")


@dataclass(frozen=True)
class LinearAdvection(System):
    a: float = 1.0

    name = "advection"
    has_entropy = True

    def flux(self, u):
        return self.a * u

    def wave_speed(self, u):
        return np.full(u.shape[1:], abs(self.a))

    def entropy(self, u):
        return 0.5 * u[0] ** 2

    def entropy_flux(self, u):
        return 0.5 * self.a * u[0] ** 2


@dataclass(frozen=True)
class Burgers(System):
    name = "burgers"
    has_entropy = True

    def flux(self, u):
        return 0.5 * u * u

    def wave_speed(self, u):
        return np.abs(u[0])

    def entropy(self, u):
        return 0.5 * u[0] ** 2

    def entropy_flux(self, u):
        return u[0] ** 3 / 3.0


@dataclass(frozen=True)
class Euler(System):
    """1D Euler equations in conserved variables ``(rho, rho v, E)``."""

    gamma: float = 1.4

    name = "euler"
    m = 3
    reflective_components = (1,)
    has_entropy = True

    def primitive(self, u):
        rho = u[0]
        v = u[1] / rho
        p = (self.gamma - 1.0) * (u[2] - 0.5 * rho * v * v)
        return rho, v, p

    def conserved(self, rho, v, p):
        rho, v, p = np.broadcast_arrays(*(np.asarray(q, dtype=np.float64) for q in (rho, v, p)))
        return np.stack([rho, rho * v, p / (self.gamma - 1.0) + 0.5 * rho * v * v])

    def check_admissible(self, u):
        rho = u[0]
        bad = ~(rho > -ADMISSIBILITY_TOL)
        if not np.any(bad):
            with np.errstate(divide="ignore", invalid="ignore"):
                _, _, p = self.primitive(u)
            bad = ~(p > -ADMISSIBILITY_TOL)
        if np.any(bad):
            i = _first_bad(bad)
            raise InadmissibleStateError(self.name, i, u[(slice(None),) + np.index_exp[i]])

    def flux(self, u):
        self.check_admissible(u)
        rho, v, p = self.primitive(u)
        return np.stack([u[1], u[1] * v + p, v * (u[2] + p)])

    def sound_speed(self, u):
        rho, _, p = self.primitive(u)
        return np.sqrt(self.gamma * np.maximum(p, 0.0) / rho)

    def wave_speed(self, u):
        return np.abs(u[1] / u[0]) + self.sound_speed(u)

    def entropy(self, u):
        rho, _, p = self.primitive(u)
        return -rho * np.log(p * rho ** (-self.gamma)) / (self.gamma - 1.0)

    def entropy_flux(self, u):
        return self.entropy(u) * u[1] / u[0]


@dataclass(frozen=True)
class ShallowWater(System):
    """Saint-Venant system in ``(h, q)`` with gravity ``g``."""

    g: float = 9.81
    #: depths below this are treated as dry when forming velocities
    dry_tol: float = 1.0e-10
    #: depth scale of the desingularised velocity (0 disables it)
    kappa: float = 0.0

    name = "shallow_water"
    m = 2
    reflective_components = (1,)
    has_entropy = True

    def check_admissible(self, u):
        bad = ~(u[0] > -ADMISSIBILITY_TOL)
        if np.any(bad):
            i = _first_bad(bad)
            raise InadmissibleStateError(self.name, i, u[(slice(None),) + np.index_exp[i]])

    def velocity(self, u):
        return desingularized_velocity(u[0], u[1], self.dry_tol, self.kappa)

    def flux(self, u):
        self.check_admissible(u)
        h = np.maximum(u[0], 0.0)
        v = self.velocity(u)
        return np.stack([h * v, h * v * v + 0.5 * self.g * h * h])

    def wave_speed(self, u):
        return np.abs(self.velocity(u)) + np.sqrt(self.g * np.maximum(u[0], 0.0))

    def entropy(self, u):
        h = np.maximum(u[0], 0.0)
        v = self.velocity(u)
        return 0.5 * h * v * v + 0.5 * self.g * h * h

    def entropy_flux(self, u):
        h = np.maximum(u[0], 0.0)
        v = self.velocity(u)
        return (0.5 * h * v * v + self.g * h * h) * v


def desingularized_velocity(h, q, dry_tol: float = 0.0, kappa: float = 0.0):
    """``q / h``, zero on dry states and regularised for depths below ``kappa``.

    ``v = sqrt(2) h q / sqrt(h^4 + max(h^4, kappa^4))`` equals ``q / h`` as
    soon as ``h >= kappa``.
    """
    h = np.asarray(h, dtype=np.float64)
    wet = h > dry_tol
    hs = np.where(wet, h, 1.0)
    if kappa > 0.0:
        h4 = hs ** 4
        v = np.sqrt(2.0) * hs * q / np.sqrt(h4 + np.maximum(h4, kappa ** 4))
    else:
        v = q / hs
    return np.where(wet, v, 0.0)


def physical_flux(system: System, state) -> np.ndarray:
    u = np.asarray(state, dtype=np.float64)
    squeeze = u.ndim == 1
    if squeeze:
        u = u[:, None]
    f = system.flux(u)
    return f[:, 0] if squeeze else f


# }}}


# {{{ numerical fluxes


@dataclass(frozen=True)
class Upwind:
    """Upwind flux for linear advection ``u_t + a u_x = 0``."""

    a: float = 1.0

    def __post_init__(self) -> None:
        if self.a == 0.0:
            raise ValueError("upwind flux needs a nonzero speed")


@dataclass(frozen=True)
class Rusanov:
    """Local Lax-Friedrichs flux."""


NumericalFlux = Upwind | Rusanov


def numerical_flux(kind: NumericalFlux, system: System, ul, ur) -> np.ndarray:
    ul = np.asarray(ul, dtype=np.float64)
    ur = np.asarray(ur, dtype=np.float64)
    if isinstance(kind, Upwind):
        return system.flux(ul) if kind.a > 0 else system.flux(ur)
    if isinstance(kind, Rusanov):
        alpha = system.max_wave_speed(ul, ur)
        return 0.5 * (system.flux(ul) + system.flux(ur)) - 0.5 * alpha * (ur - ul)
    raise TypeError(f"unknown numerical flux {kind!r}")


def numerical_entropy_flux(kind: NumericalFlux, system: System, ul, ur) -> np.ndarray:
    """Entropy flux consistent with :func:`numerical_flux` (same diffusion)."""
    if isinstance(kind, Upwind):
        return system.entropy_flux(ul) if kind.a > 0 else system.entropy_flux(ur)
    alpha = system.max_wave_speed(ul, ur)
    return (0.5 * (system.entropy_flux(ul) + system.entropy_flux(ur))
            - 0.5 * alpha * (system.entropy(ur) - system.entropy(ul)))


def default_flux(system: System) -> NumericalFlux:
    if isinstance(system, LinearAdvection) and system.a != 0.0:
        return Upwind(system.a)
    return Rusanov()


# }}}
