"""One-dimensional cell partitions and the grid families used in the experiments.

A :class:`Mesh1D` is defined by its ordered interface coordinates.  Cell sizes,
centres and ghost geometry are derived from them.  Four generators are
provided: uniform, quasi-regular (smooth map of a uniform grid), random
(jittered interfaces) and periodic patterns of fixed size factors.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

PERIODIC = "periodic"
OUTFLOW = "outflow"
WALL = "wall"
BOUNDARY_KINDS = (PERIODIC, OUTFLOW, WALL)

# 3-point Gauss-Legendre on [-1/2, 1/2] (exact for degree 5)
GAUSS_NODES = 0.5 * np.array([-math.sqrt(3.0 / 5.0), 0.0, math.sqrt(3.0 / 5.0)])
GAUSS_WEIGHTS = np.array([5.0, 8.0, 5.0]) / 18.0


class MeshError(ValueError):
    """Raised when a grid cannot be constructed or queried."""


# {{{ grid specifications


@dataclass(frozen=True)
class Uniform:
    n: int


@dataclass(frozen=True)
class QuasiRegular:
    n: int


@dataclass(frozen=True)
class Random:
    n: int
    seed: int


@dataclass(frozen=True)
class Pattern:
    """Repeating block of cells with sizes proportional to ``factors``.

    ``n`` is the total number of cells and must be a multiple of the block
    length.
    """

    n: int
    factors: tuple[float, ...] = (1.0, 0.5, 0.25, 0.25)

    def __post_init__(self) -> None:
        object.__setattr__(self, "factors", tuple(float(f) for f in self.factors))


GridSpec = Uniform | QuasiRegular | Random | Pattern

#: block used for the single-cell reconstruction studies
RECON_BLOCK = (1.0, 2.0, 1.0, 0.5, 0.5)
#: block used for the transport studies
TRANSPORT_BLOCK = (1.0, 0.5, 0.25, 0.25)


def describe_spec(spec: GridSpec) -> str:
    if isinstance(spec, Uniform):
        return f"uniform(n={spec.n})"
    if isinstance(spec, QuasiRegular):
        return f"quasiregular(n={spec.n})"
    if isinstance(spec, Random):
        return f"random(n={spec.n},seed={spec.seed})"
    if isinstance(spec, Pattern):
        fac = "/".join(f"{f:g}" for f in spec.factors)
        return f"pattern(n={spec.n},factors={fac})"
    raise MeshError(f"unknown grid spec: {spec!r}")


def quasi_regular_map(x):
    return x + 0.1 * np.sin(10.0 * np.pi * x) / 5.0


# }}}


# {{{ mesh


@dataclass(frozen=True)
class Mesh1D:
    interfaces: np.ndarray
    boundary: str = PERIODIC
    spec: GridSpec | None = None
    h: np.ndarray = field(init=False, repr=False, compare=False)
    centers: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        x = np.array(self.interfaces, dtype=np.float64)
        if x.ndim != 1 or x.size < 2:
            raise MeshError("a mesh needs at least two interfaces")
        if self.boundary not in BOUNDARY_KINDS:
            raise MeshError(f"unknown boundary kind {self.boundary!r}")

        h = np.diff(x)
        if not np.all(h > 0.0):
            j = int(np.argmin(h))
            raise MeshError(f"non-positive cell {j}: h = {h[j]:.3e}")

        x.flags.writeable = False
        h.flags.writeable = False
        c = 0.5 * (x[:-1] + x[1:])
        c.flags.writeable = False
        object.__setattr__(self, "interfaces", x)
        object.__setattr__(self, "h", h)
        object.__setattr__(self, "centers", c)

    @property
    def n(self) -> int:
        return self.h.size

    @property
    def domain(self) -> tuple[float, float]:
        return float(self.interfaces[0]), float(self.interfaces[-1])

    @property
    def length(self) -> float:
        return float(self.interfaces[-1] - self.interfaces[0])

    def with_boundary(self, boundary: str) -> Mesh1D:
        return Mesh1D(self.interfaces, boundary=boundary, spec=self.spec)

    def ghost_sizes(self, ng: int = 1) -> np.ndarray:
        """Cell sizes extended by ``ng`` ghost cells on each side."""
        if ng > self.n:
            raise MeshError(f"{ng} ghost cells requested on a {self.n}-cell mesh")
        h = self.h
        if self.boundary == PERIODIC:
            left, right = h[-ng:], h[:ng]
        elif self.boundary == OUTFLOW:
            left, right = np.full(ng, h[0]), np.full(ng, h[-1])
        else:
            left, right = h[:ng][::-1], h[-ng:][::-1]
        return np.concatenate([left, h, right])


def local_ratios(mesh: Mesh1D, j: int) -> tuple[float, float]:
    """Return ``(beta, gamma)``: neighbour sizes relative to cell ``j``."""
    n = mesh.n
    if not 0 <= j < n:
        raise MeshError(f"cell index {j} outside [0, {n})")

    hg = mesh.ghost_sizes(1)
    return float(hg[j] / hg[j + 1]), float(hg[j + 2] / hg[j + 1])


def all_local_ratios(mesh: Mesh1D) -> tuple[np.ndarray, np.ndarray]:
    hg = mesh.ghost_sizes(1)
    return hg[:-2] / hg[1:-1], hg[2:] / hg[1:-1]


# }}}


# {{{ generation


def generate_mesh(
    spec: GridSpec,
    domain: tuple[float, float] = (0.0, 1.0),
    boundary: str = PERIODIC,
) -> Mesh1D:
    a, b = float(domain[0]), float(domain[1])
    if not b > a:
        raise MeshError(f"empty domain [{a}, {b}]")

    if isinstance(spec, Uniform):
        ref = _uniform_interfaces(spec.n)
    elif isinstance(spec, QuasiRegular):
        ref = quasi_regular_map(_uniform_interfaces(spec.n))
        ref[0], ref[-1] = 0.0, 1.0
    elif isinstance(spec, Random):
        ref = _uniform_interfaces(spec.n)
        rng = np.random.default_rng(spec.seed)
        xi = rng.uniform(-0.5, 0.5, size=spec.n - 1)
        ref[1:-1] += xi * (1.0 / spec.n) / 4.0
    elif isinstance(spec, Pattern):
        ref = _pattern_interfaces(spec)
    else:
        raise MeshError(f"unknown grid spec: {spec!r}")

    x = a + (b - a) * ref
    x[0], x[-1] = a, b
    return Mesh1D(x, boundary=boundary, spec=spec)


def _uniform_interfaces(n: int) -> np.ndarray:
    if n < 1:
        raise MeshError(f"need at least one cell, got n={n}")
    return np.arange(n + 1, dtype=np.float64) / n


def _pattern_interfaces(spec: Pattern) -> np.ndarray:
    factors = np.asarray(spec.factors, dtype=np.float64)
    if factors.size == 0 or np.any(factors <= 0.0):
        raise MeshError(f"pattern factors must be positive: {spec.factors}")
    if spec.n < 5:
        raise MeshError(f"pattern grids need n >= 5, got {spec.n}")
    if spec.n % factors.size:
        raise MeshError(f"n={spec.n} is not a multiple of the block length {factors.size}")

    nblocks = spec.n // factors.size
    sizes = np.tile(factors, nblocks)
    x = np.concatenate([[0.0], np.cumsum(sizes)])
    return x / x[-1]


def pattern_block(
    h: float, factors: Sequence[float] = RECON_BLOCK, center: int | None = None
) -> Mesh1D:
    """A single block of cells of sizes ``h * factors``.

    The centre of cell ``center`` (by default the middle one) sits at ``x = 0``.
    """
    factors = np.asarray(factors, dtype=np.float64)
    if np.any(factors <= 0.0):
        raise MeshError(f"pattern factors must be positive: {factors}")
    if center is None:
        center = factors.size // 2

    sizes = h * factors
    x = np.concatenate([[0.0], np.cumsum(sizes)])
    x -= x[center] + 0.5 * sizes[center]
    return Mesh1D(x, boundary=OUTFLOW)


# }}}


# {{{ cell averages


def cell_averages(f: Callable, mesh: Mesh1D) -> np.ndarray:
    """Cell averages of ``f`` by 3-point Gauss-Legendre quadrature.

    ``f`` is called once on an array of shape ``(3, n)``.  It may return an
    array of shape ``(3, n)`` or ``(m, 3, n)`` for ``m`` components, in which
    case the result has shape ``(m, n)``.
    """
    return interval_averages(f, mesh.interfaces[:-1], mesh.interfaces[1:])


def interval_averages(f: Callable, a, b) -> np.ndarray:
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    c = 0.5 * (a + b)
    w = b - a
    x = c[None, ...] + GAUSS_NODES.reshape((3,) + (1,) * c.ndim) * w[None, ...]
    fx = np.asarray(f(x), dtype=np.float64)
    if fx.ndim < x.ndim:
        fx = np.broadcast_to(fx, x.shape)
    return np.tensordot(GAUSS_WEIGHTS, fx, axes=([0], [fx.ndim - c.ndim - 1]))


# }}}


# {{{ serialization


def mesh_to_csv(mesh: Mesh1D, seed: int | None = None) -> str:
    spec = describe_spec(mesh.spec) if mesh.spec is not None else "explicit"
    if seed is None and isinstance(mesh.spec, Random):
        seed = mesh.spec.seed

    out = io.StringIO()
    out.write(f"# spec={spec}\n")
    out.write(f"# seed={'' if seed is None else seed}\n")
    out.write(f"# boundary={mesh.boundary}\n")
    out.write("x\n")
    for x in mesh.interfaces:
        out.write(f"{float(x)!r}\n")
    return out.getvalue()


def mesh_from_csv(text: str) -> Mesh1D:
    boundary = PERIODIC
    xs = []
    for line in text.splitlines():
        line = line.strip()
        if not line:
            continue
        if line.startswith("#"):
            key, _, value = line[1:].strip().partition("=")
            if key.strip() == "boundary":
                boundary = value.strip()
            continue
        if line == "x":
            continue
        xs.append(float(line))

    return Mesh1D(np.array(xs), boundary=boundary)


# }}}
