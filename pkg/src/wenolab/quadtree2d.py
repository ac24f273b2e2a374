"""Two-dimensional CWENO reconstruction on periodic quad-tree meshes.

Leaves are dyadic squares of a uniform ``n0 x n0`` root grid on the unit
square.  Leaf ``l`` sits at level ``level[l]`` with integer position
``(i[l], j[l])`` on the ``n0 2^level`` grid of that level (``i`` along x).

Reconstruction polynomials are written in the scaled coordinates
``xi = (x - x_c) / w``, ``eta = (y - y_c) / w`` of the leaf (``w`` its width),
with coefficients ordered as ``1, xi, eta, xi^2, xi eta, eta^2``.

Neighbourhoods: the central stencil holds all edge- and vertex-adjacent
leaves; a sector (NE, NW, SW, SE) keeps the neighbours whose centroid offset
is at least ``-w/10`` in both of its directions.  A sector with fewer than
two neighbours takes the remaining neighbours closest in angle to its
diagonal.  Leaves with the same neighbourhood geometry share one
least-squares operator, so whole meshes are processed in vectorised groups.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from wenolab.analysis import convergence_table
from wenolab.mesh1d import GAUSS_NODES, GAUSS_WEIGHTS
from wenolab.reconstruction import EpsilonPolicy, nonlinear_weights

SECTORS = ("NE", "NW", "SW", "SE")
#: (sign of x offset, sign of y offset) of each sector
SECTOR_SIGNS = {"NE": (1, 1), "NW": (-1, 1), "SW": (-1, -1), "SE": (1, -1)}
SECTOR_TOL = 0.1
C_CENTRAL = 0.5
C_SECTOR = 0.125

#: leaves processed per vectorised batch
CHUNK = 200_000

#: 2-point Gauss nodes on the four edges, in scaled coordinates
_G2 = 0.5 / math.sqrt(3.0)
EDGE_NODES = np.array([
    (0.5, -_G2), (0.5, _G2), (-0.5, -_G2), (-0.5, _G2),
    (-_G2, 0.5), (_G2, 0.5), (-_G2, -0.5), (_G2, -0.5),
])


class StencilError(ValueError):
    """A least-squares stencil is rank deficient."""


# {{{ polynomials


@dataclass(frozen=True)
class Poly2D:
    """Quadratic (or plane) in the scaled coordinates of a leaf."""

    coeffs: np.ndarray

    def __post_init__(self) -> None:
        c = np.zeros(6)
        a = np.asarray(self.coeffs, dtype=np.float64)
        if a.size not in (3, 6):
            raise ValueError(f"a Poly2D has 3 or 6 coefficients, got {a.size}")
        c[:a.size] = a
        object.__setattr__(self, "coeffs", c)

    def __call__(self, xi, eta):
        return _evaluate(self.coeffs, np.asarray(xi), np.asarray(eta))

    def average(self) -> float:
        c = self.coeffs
        return float(c[0] + (c[3] + c[5]) / 12.0)

    def indicator(self) -> float:
        return float(indicator2d(self.coeffs))


def _evaluate(c, xi, eta):
    return c[0] + c[1] * xi + c[2] * eta + c[3] * xi * xi + c[4] * xi * eta + c[5] * eta * eta


def indicator2d(c) -> np.ndarray:
    """Jiang-Shu indicator of quadratics with coefficients ``c`` (first axis).

    ``sum_{1<=|a|<=2} |Omega|^{|a|-1} int (D^a P)^2`` on a square, in closed form.
    """
    c = np.asarray(c)
    return (c[1] ** 2 + c[2] ** 2 + 13.0 / 3.0 * (c[3] ** 2 + c[5] ** 2)
            + 7.0 / 6.0 * c[4] ** 2)


def monomial_averages(dx, dy, size):
    """Averages of ``xi, eta, xi^2, xi eta, eta^2`` over squares of side ``size``
    centred at ``(dx, dy)`` (scaled coordinates)."""
    dx, dy, size = np.broadcast_arrays(*(np.asarray(a, dtype=np.float64) for a in (dx, dy, size)))
    s2 = size * size / 12.0
    return np.stack([dx, dy, dx * dx + s2, dx * dy, dy * dy + s2], axis=-1)


# }}}


# {{{ mesh


@dataclass(frozen=True)
class QuadTreeMesh:
    """Leaves of a periodic quad-tree on the unit square."""

    n0: int
    level: np.ndarray
    i: np.ndarray
    j: np.ndarray

    def __post_init__(self) -> None:
        if self.n0 < 3:
            raise ValueError("the periodic root grid needs at least 3x3 cells")

    @classmethod
    def uniform(cls, n0: int) -> QuadTreeMesh:
        i, j = np.meshgrid(np.arange(n0), np.arange(n0), indexing="ij")
        return cls(n0, np.zeros(n0 * n0, dtype=np.int64), i.ravel(), j.ravel())

    @property
    def n(self) -> int:
        return self.level.size

    @property
    def depth(self) -> int:
        return int(self.level.max()) if self.n else 0

    @property
    def resolution(self) -> int:
        """Cells per side of the finest level."""
        return self.n0 * 2 ** self.depth

    @property
    def width(self) -> np.ndarray:
        return 1.0 / (self.n0 * 2.0 ** self.level)

    @property
    def centers(self) -> tuple[np.ndarray, np.ndarray]:
        w = self.width
        return (self.i + 0.5) * w, (self.j + 0.5) * w

    def fine_geometry(self):
        """``(I0, J0, s)``: lower corner and side of each leaf on the finest grid."""
        s = 2 ** (self.depth - self.level)
        return self.i * s, self.j * s, s

    def owner_map(self) -> np.ndarray:
        """Leaf index owning each cell of the finest grid."""
        R = self.resolution
        owner = np.full((R, R), -1, dtype=np.int64 if self.n > 2**31 - 1 else np.int32)
        for lev in np.unique(self.level):
            idx = np.flatnonzero(self.level == lev)
            nl = self.n0 * 2 ** int(lev)
            s = R // nl
            view = owner.reshape(nl, s, nl, s).transpose(0, 2, 1, 3)
            view[self.i[idx], self.j[idx]] = idx[:, None, None]
        if np.any(owner < 0):
            raise ValueError("leaves do not tile the unit square")
        return owner

    def split(self, flags) -> QuadTreeMesh:
        """Split the flagged leaves into four children each."""
        flags = np.asarray(flags, dtype=bool)
        keep = ~flags
        lev = self.level[flags] + 1
        ci = [2 * self.i[flags] + a for a in (0, 1) for _ in (0, 1)]
        cj = [2 * self.j[flags] + b for _ in (0, 1) for b in (0, 1)]
        return QuadTreeMesh(
            self.n0,
            np.concatenate([self.level[keep]] + [lev] * 4),
            np.concatenate([self.i[keep]] + ci),
            np.concatenate([self.j[keep]] + cj),
        )

    def refine_uniform(self, k: int) -> QuadTreeMesh:
        """Split every leaf into ``4**k`` equal parts."""
        if k < 0:
            raise ValueError(f"k must be >= 0, got {k}")
        m = 2 ** k
        a, b = np.meshgrid(np.arange(m), np.arange(m), indexing="ij")
        a, b = a.ravel(), b.ravel()
        return QuadTreeMesh(
            self.n0,
            np.repeat(self.level + k, m * m),
            (self.i[:, None] * m + a).ravel(),
            (self.j[:, None] * m + b).ravel(),
        )

    def to_csv(self, averages=None) -> str:
        """One row per leaf: ``x, y, width, level, average`` (cell centre)."""
        x, y = self.centers
        w = self.width
        avg = np.full(self.n, np.nan) if averages is None else np.asarray(averages)
        out = io.StringIO()
        out.write("x,y,width,level,average\n")
        for row in zip(x, y, w, self.level, avg):
            out.write(f"{row[0]:.17g},{row[1]:.17g},{row[2]:.17g},{row[3]},{row[4]:.17g}\n")
        return out.getvalue()


def leaf_averages(u: Callable, mesh: QuadTreeMesh, cells=None) -> np.ndarray:
    """Cell averages of ``u(x, y)`` by the 3x3 Gauss product rule."""
    cells = np.arange(mesh.n) if cells is None else np.asarray(cells)
    w = mesh.width[cells]
    xc, yc = (mesh.i[cells] + 0.5) * w, (mesh.j[cells] + 0.5) * w
    total = np.zeros(cells.size)
    for ga, wa in zip(GAUSS_NODES, GAUSS_WEIGHTS):
        for gb, wb in zip(GAUSS_NODES, GAUSS_WEIGHTS):
            total += wa * wb * u(xc + ga * w, yc + gb * w)
    return total


# }}}


# {{{ neighbourhoods


def _ring_offsets(s: int) -> tuple[np.ndarray, np.ndarray]:
    r = np.arange(-1, s + 1)
    inner = np.arange(s)
    di = np.concatenate([r, r, np.full(s, -1), np.full(s, s)])
    dj = np.concatenate([np.full(s + 2, -1), np.full(s + 2, s), inner, inner])
    return di, dj


@dataclass(frozen=True)
class Neighbourhoods:
    """Adjacent leaves of a batch of equally sized leaves.

    ``ids`` is padded with ``-1``; ``key`` identifies the geometry and is
    equal for leaves whose neighbourhoods coincide up to translation.
    """

    cells: np.ndarray
    ids: np.ndarray
    #: offsets and sizes in units of half fine cells, aligned with ids
    geometry: np.ndarray
    s: int

    def keys(self) -> np.ndarray:
        g = self.geometry.reshape(self.cells.size, -1)
        return np.concatenate([np.full((self.cells.size, 1), self.s), g], axis=1)


def neighbourhoods(mesh: QuadTreeMesh, cells, owner: np.ndarray | None = None) -> Neighbourhoods:
    """Neighbours of ``cells``, which must all have the same level."""
    cells = np.asarray(cells, dtype=np.int64)
    owner = mesh.owner_map() if owner is None else owner
    R = owner.shape[0]
    I0, J0, S = mesh.fine_geometry()
    s_all = np.unique(S[cells])
    if s_all.size != 1:
        raise ValueError("neighbourhoods() needs leaves of a single level")
    s = int(s_all[0])
    di, dj = _ring_offsets(s)
    ids = owner[(I0[cells, None] + di) % R, (J0[cells, None] + dj) % R].astype(np.int64)

    # distinct ids per row, valid entries first
    ids.sort(axis=1)
    dup = np.zeros_like(ids, dtype=bool)
    dup[:, 1:] = ids[:, 1:] == ids[:, :-1]
    ids[dup] = -1
    K = int(np.max(np.sum(~dup, axis=1)))

    # offsets in half fine cells, wrapped periodically
    valid = ids >= 0
    safe = np.where(valid, ids, 0)
    cx = 2 * I0[safe] + S[safe] - (2 * I0[cells] + s)[:, None]
    cy = 2 * J0[safe] + S[safe] - (2 * J0[cells] + s)[:, None]
    cx = (cx + R) % (2 * R) - R
    cy = (cy + R) % (2 * R) - R

    # canonical order: by (dy, dx), padding last
    big = 4 * R
    order_key = np.where(valid, cy * (4 * R) + cx, big * big)
    order = np.argsort(order_key, axis=1, kind="stable")[:, :K]
    take = lambda a: np.take_along_axis(a, order, axis=1)  # noqa: E731
    ids = take(np.where(valid, ids, -1))
    v = ids >= 0
    geom = np.stack([np.where(v, take(cx), big), np.where(v, take(cy), big),
                     np.where(v, take(S[safe]), 0)], axis=-1)
    return Neighbourhoods(cells, ids, geom, s)


def sector_members(dx, dy, tol: float = SECTOR_TOL) -> dict[str, np.ndarray]:
    """Neighbour indices of each sector from scaled centroid offsets."""
    dx = np.asarray(dx, dtype=np.float64)
    dy = np.asarray(dy, dtype=np.float64)
    ang = np.arctan2(dy, dx)
    out = {}
    for name, (sx, sy) in SECTOR_SIGNS.items():
        inside = np.flatnonzero((sx * dx >= -tol) & (sy * dy >= -tol))
        if inside.size < 2:
            bis = math.atan2(sy, sx)
            dist = np.abs(np.angle(np.exp(1j * (ang - bis))))
            rest = [k for k in np.argsort(dist, kind="stable") if k not in set(inside)]
            inside = np.sort(np.concatenate([inside, rest[:2 - inside.size]]).astype(int))
        out[name] = inside
    return out


def stencil_operator(dx, dy, size, cell: str = "") -> np.ndarray:
    """Least-squares operator of one neighbourhood geometry.

    ``dx, dy, size`` are scaled offsets and sizes of the ``K`` neighbours.
    Returns a ``(13, K)`` matrix mapping the differences ``u_k - u_j`` to
    the non-constant coefficients of ``P_OPT`` in the mean-free basis (5
    rows) followed by the slopes of the NE, NW, SW, SE planes (2 rows each).
    """
    A = monomial_averages(dx, dy, size) - monomial_averages(0.0, 0.0, 1.0)
    if A.shape[0] < 5 or np.linalg.matrix_rank(A) < 5:
        raise StencilError(f"central stencil of cell {cell} is rank deficient")
    rows = [np.linalg.pinv(A)]
    for name, members in sector_members(dx, dy).items():
        As = A[members, :2]
        if np.linalg.matrix_rank(As) < 2:
            raise StencilError(f"sector {name} of cell {cell} is rank deficient")
        G = np.zeros((2, A.shape[0]))
        G[:, members] = np.linalg.pinv(As)
        rows.append(G)
    return np.vstack(rows)


# }}}


# {{{ fitting and reconstruction


@dataclass(frozen=True)
class StencilCoefficients:
    """Coefficients of the stencil polynomials of a batch of leaves.

    Arrays have shape ``(6, m)`` for quadratics and ``(6, 4, m)`` for the
    sector planes (quadratic part zero).
    """

    cells: np.ndarray
    optimal: np.ndarray
    planes: np.ndarray
    central: np.ndarray
    width: np.ndarray


class _OperatorCache(dict):
    def get_operator(self, key: np.ndarray, s: int, cell) -> np.ndarray:
        kb = key.tobytes()
        op = self.get(kb)
        if op is None:
            g = key[1:].reshape(-1, 3)
            g = g[g[:, 2] > 0].astype(np.float64)
            op = stencil_operator(g[:, 0] / (2 * s), g[:, 1] / (2 * s), g[:, 2] / s, cell)
            self[kb] = op
        return op


def fit_batch(mesh: QuadTreeMesh, data, nb: Neighbourhoods,
              cache: dict | None = None) -> StencilCoefficients:
    """Stencil polynomials of a batch of equally sized leaves."""
    cache = _OperatorCache() if cache is None else cache
    if not isinstance(cache, _OperatorCache):
        cache = _OperatorCache(cache)
    data = np.asarray(data, dtype=np.float64)
    cells = nb.cells
    m = cells.size
    ub = data[cells]
    d = np.where(nb.ids >= 0, data[np.maximum(nb.ids, 0)], 0.0) - ub[:, None]

    coef = np.zeros((13, m))
    keys = nb.keys()
    uniq, inv = np.unique(keys, axis=0, return_inverse=True)
    inv = inv.ravel()
    for g in range(uniq.shape[0]):
        rows = np.flatnonzero(inv == g)
        op = cache.get_operator(uniq[g], nb.s, int(cells[rows[0]]))
        coef[:, rows] = op @ d[rows, :op.shape[1]].T

    opt = np.zeros((6, m))
    opt[1:] = coef[:5]
    opt[0] = ub - (opt[3] + opt[5]) / 12.0
    planes = np.zeros((6, 4, m))
    planes[0] = ub
    planes[1] = coef[5::2]
    planes[2] = coef[6::2]
    central = (opt - C_SECTOR * planes.sum(axis=1)) / C_CENTRAL
    return StencilCoefficients(cells, opt, planes, central, mesh.width[cells])


def reconstruct_batch(fit: StencilCoefficients, epsilon: EpsilonPolicy, tau: int = 2):
    """``(P_REC coefficients (6, m), weights (5, m))``; weights ordered C, NE, NW, SW, SE."""
    ind = [indicator2d(fit.central)] + [indicator2d(fit.planes[:, k]) for k in range(4)]
    lin = [C_CENTRAL] + [C_SECTOR] * 4
    w = nonlinear_weights(lin, ind, epsilon(fit.width), tau)
    rec = w[0] * fit.central + np.einsum("km,ckm->cm", w[1:], fit.planes)
    return rec, w


def _batches(mesh: QuadTreeMesh, chunk: int = CHUNK):
    for lev in np.unique(mesh.level):
        idx = np.flatnonzero(mesh.level == lev)
        for a in range(0, idx.size, chunk):
            yield idx[a:a + chunk]


@dataclass(frozen=True)
class StencilFit:
    optimal: Poly2D
    planes: dict
    central: Poly2D


def fit_stencil_polynomials(mesh: QuadTreeMesh, cell: int, data,
                            owner: np.ndarray | None = None) -> StencilFit:
    """``P_OPT``, the four sector planes and ``P_C`` of one leaf."""
    nb = neighbourhoods(mesh, [cell], owner)
    fit = fit_batch(mesh, data, nb)
    return StencilFit(
        Poly2D(fit.optimal[:, 0]),
        {name: Poly2D(fit.planes[:3, k, 0]) for k, name in enumerate(SECTORS)},
        Poly2D(fit.central[:, 0]),
    )


def reconstruct2d(mesh: QuadTreeMesh, cell: int, data, epsilon: EpsilonPolicy = EpsilonPolicy(),
                  tau: int = 2, owner: np.ndarray | None = None) -> Poly2D:
    """CWENO reconstruction polynomial ``P_REC`` of one leaf."""
    fit = fit_batch(mesh, data, neighbourhoods(mesh, [cell], owner))
    rec, _ = reconstruct_batch(fit, epsilon, tau)
    return Poly2D(rec[:, 0])


def reconstruct_all(mesh: QuadTreeMesh, data, epsilon: EpsilonPolicy = EpsilonPolicy(),
                    tau: int = 2) -> tuple[np.ndarray, np.ndarray]:
    """``P_REC`` coefficients ``(6, n)`` and weights ``(5, n)`` of every leaf."""
    owner = mesh.owner_map()
    cache = _OperatorCache()
    rec = np.empty((6, mesh.n))
    weights = np.empty((5, mesh.n))
    for cells in _batches(mesh):
        fit = fit_batch(mesh, data, neighbourhoods(mesh, cells, owner), cache)
        rec[:, cells], weights[:, cells] = reconstruct_batch(fit, epsilon, tau)
    return rec, weights


# }}}


# {{{ adapted grids


def gradient_indicator(mesh: QuadTreeMesh, data, owner: np.ndarray | None = None) -> np.ndarray:
    """``max_k |u_k - u_j| / w_j`` over the adjacent leaves."""
    owner = mesh.owner_map() if owner is None else owner
    data = np.asarray(data, dtype=np.float64)
    out = np.empty(mesh.n)
    for cells in _batches(mesh):
        nb = neighbourhoods(mesh, cells, owner)
        diff = np.where(nb.ids >= 0, np.abs(data[np.maximum(nb.ids, 0)] - data[cells, None]), 0.0)
        out[cells] = diff.max(axis=1) / mesh.width[cells]
    return out


def build_adapted_grid(u: Callable, n0: int = 32, threshold: float = 0.0,
                       sweeps: int = 2) -> QuadTreeMesh:
    """Split leaves whose gradient indicator exceeds ``threshold``, ``sweeps`` times."""
    mesh = QuadTreeMesh.uniform(n0)
    for _ in range(sweeps):
        ind = gradient_indicator(mesh, leaf_averages(u, mesh))
        flags = ind > threshold
        if not np.any(flags):
            break
        mesh = mesh.split(flags)
    return mesh


#: leaf count of the coarsest adapted grid of the reference experiment
TARGET_LEAVES = 10_300


def calibrate_threshold(u: Callable, target: int = TARGET_LEAVES, n0: int = 32, sweeps: int = 2,
                        iterations: int = 40) -> tuple[float, QuadTreeMesh]:
    """Threshold whose adapted grid has the leaf count closest to ``target``.

    The count decreases with the threshold, so a bisection in the logarithm
    of the threshold brackets the target.
    """
    def count(th):
        m = build_adapted_grid(u, n0, th, sweeps)
        return m.n, m

    uniform = QuadTreeMesh.uniform(n0)
    lo = 1.0e-3
    hi = float(np.max(gradient_indicator(uniform, leaf_averages(u, uniform)))) * 2.0
    best = None
    for _ in range(iterations):
        mid = math.sqrt(lo * hi)
        n, m = count(mid)
        if best is None or abs(n - target) < abs(best[1].n - target):
            best = (mid, m)
        if n == target:
            break
        if n > target:
            lo = mid
        else:
            hi = mid
    return best


# }}}


# {{{ error experiment


def sine_cosine(x, y):
    return np.sin(2.0 * np.pi * x) * np.cos(2.0 * np.pi * y)


def edge_errors(mesh: QuadTreeMesh, u: Callable, epsilons: Sequence[EpsilonPolicy],
                tau: int = 2) -> list[float]:
    """Max-norm errors of ``P_REC`` at the edge Gauss nodes, one per epsilon."""
    owner = mesh.owner_map()
    cache = _OperatorCache()
    errs = np.zeros(len(epsilons))
    for cells in _batches(mesh):
        avg = np.zeros(mesh.n)
        nb = neighbourhoods(mesh, cells, owner)
        need = np.unique(np.concatenate([cells, nb.ids[nb.ids >= 0]]))
        avg[need] = leaf_averages(u, mesh, need)
        fit = fit_batch(mesh, avg, nb, cache)
        w = mesh.width[cells]
        xc, yc = (mesh.i[cells] + 0.5) * w, (mesh.j[cells] + 0.5) * w
        exact = [u(xc + xi * w, yc + eta * w) for xi, eta in EDGE_NODES]
        for e, eps in enumerate(epsilons):
            rec, _ = reconstruct_batch(fit, eps, tau)
            for (xi, eta), ue in zip(EDGE_NODES, exact):
                errs[e] = max(errs[e], float(np.max(np.abs(_evaluate(rec, xi, eta) - ue))))
    return [float(v) for v in errs]


@dataclass(frozen=True)
class QuadTreeStudy:
    leaves: tuple[int, ...]
    tables: dict
    threshold: float


def reconstruction_error_table(u: Callable = sine_cosine, levels: int = 5,
                               epsilons: Sequence[EpsilonPolicy] | None = None,
                               base: QuadTreeMesh | None = None, threshold: float | None = None,
                               n0: int = 32, target: int = TARGET_LEAVES) -> QuadTreeStudy:
    """Errors on ``G_0 .. G_{levels-1}`` with rates against ``sqrt(N)``."""
    if epsilons is None:
        epsilons = (EpsilonPolicy.constant(1.0e-6), EpsilonPolicy.quadratic_h(),
                    EpsilonPolicy.linear_h())
    if base is None:
        if threshold is None:
            threshold, base = calibrate_threshold(u, target, n0)
        else:
            base = build_adapted_grid(u, n0, threshold)
    errors = []
    leaves = []
    for k in range(levels):
        g = base.refine_uniform(k)
        leaves.append(g.n)
        errors.append(edge_errors(g, u, epsilons))
    errors = np.array(errors)
    res = np.sqrt(np.array(leaves, dtype=np.float64))
    tables = {
        eps.label: convergence_table(None, list(res), None, errors[:, e], f"eps={eps.label}", "sqrtN")
        for e, eps in enumerate(epsilons)
    }
    return QuadTreeStudy(tuple(leaves), tables, float("nan") if threshold is None else threshold)


# }}}
