"""Error norms, convergence tables and the linear stability study."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import brentq

from wenolab.mesh1d import Mesh1D, Uniform, cell_averages, generate_mesh
from wenolab.reconstruction import WENO3, ReconstructionConfig, reconstruct_mesh
from wenolab.timeintegration import NGHOST, as_components, extend_field, stability_function


# {{{ norms


def error_norms(u, exact, mesh: Mesh1D) -> tuple[float, float]:
    """``(sum_j h_j |U_j - u_j|, max_j |U_j - u_j|)``.

    ``exact`` is either a function (averaged with the Gauss rule) or an array
    of exact cell averages.
    """
    ue = cell_averages(exact, mesh) if callable(exact) else np.asarray(exact, dtype=np.float64)
    d = np.abs(np.asarray(u, dtype=np.float64) - ue)
    return float(np.sum(mesh.h * d)), float(np.max(d))


def total_variation(u, periodic: bool = True) -> float:
    u = np.asarray(u, dtype=np.float64)
    tv = float(np.sum(np.abs(np.diff(u))))
    if periodic:
        tv += abs(float(u[0] - u[-1]))
    return tv


def upwind_values(mesh: Mesh1D, u, config: ReconstructionConfig) -> np.ndarray:
    """``U^-_{j+1/2}`` for ``j = -1 .. n-1`` (upwind data of ``u_t + u_x = 0``)."""
    uc, _ = as_components(u)
    u_ext, h_ext = extend_field(uc, mesh, NGHOST)
    _, right, _ = reconstruct_mesh(u_ext, h_ext, config)
    return right[0, :-1]


def derivative_error(mesh: Mesh1D, u_minus, exact: Callable) -> float:
    """Max-norm truncation error of the upwind difference of boundary data."""
    u_minus = np.asarray(u_minus, dtype=np.float64)
    ue = exact(mesh.interfaces)
    return float(np.max(np.abs(np.diff(ue) - np.diff(u_minus)) / mesh.h))


def spatial_derivative_error(mesh: Mesh1D, u0: Callable, config: ReconstructionConfig) -> float:
    return derivative_error(mesh, upwind_values(mesh, cell_averages(u0, mesh), config), u0)


# }}}


# {{{ convergence tables


@dataclass(frozen=True)
class ConvergenceRow:
    resolution: float
    error: float
    rate: float | None


@dataclass(frozen=True)
class ConvergenceTable:
    rows: tuple[ConvergenceRow, ...]
    label: str = ""
    resolution_name: str = "N"

    @property
    def errors(self) -> np.ndarray:
        return np.array([r.error for r in self.rows])

    @property
    def rates(self) -> np.ndarray:
        return np.array([np.nan if r.rate is None else r.rate for r in self.rows[1:]])

    def csv_rows(self):
        for r in self.rows:
            yield (repr(r.resolution), f"{r.error:.6e}", "" if r.rate is None else f"{r.rate:.4f}")


def observed_rates(errors: Sequence[float], ratio: float | Sequence[float] = 2.0) -> np.ndarray:
    e = np.asarray(errors, dtype=np.float64)
    r = np.broadcast_to(np.asarray(ratio, dtype=np.float64), (max(e.size - 1, 0),))
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.log(e[:-1] / e[1:]) / np.log(r)


def convergence_table(runner: Callable | None, resolutions: Sequence[float], ratio: float = 2.0,
                      errors: Sequence[float] | None = None, label: str = "",
                      resolution_name: str = "N", increasing: bool = True) -> ConvergenceTable:
    """Errors and rates over ``resolutions``.

    ``runner(resolution)`` returns the error; alternatively pass ``errors``.
    ``ratio`` is the refinement factor between consecutive rows; with
    ``ratio=None`` it is taken from the resolutions themselves
    (``N_k / N_{k-1}`` if ``increasing``, otherwise ``h_{k-1} / h_k``).
    """
    if len(resolutions) < 2:
        raise ValueError("a convergence table needs at least two resolutions")
    if errors is None:
        errors = [float(runner(r)) for r in resolutions]
    res = np.asarray(resolutions, dtype=np.float64)
    if ratio is None:
        ratio = res[1:] / res[:-1] if increasing else res[:-1] / res[1:]
    rates = observed_rates(errors, ratio)
    rows = [ConvergenceRow(float(resolutions[0]), float(errors[0]), None)]
    rows += [ConvergenceRow(float(r), float(e), float(q))
             for r, e, q in zip(resolutions[1:], errors[1:], rates)]
    return ConvergenceTable(tuple(rows), label, resolution_name)


# }}}


# {{{ spectrum


SPECTRUM_CELLS = 65


def fourier_averages(mesh: Mesh1D) -> np.ndarray:
    """Exact cell averages of ``1, cos(2 pi k x), sin(2 pi k x)``, ``k = 1 .. (n-1)/2``.

    Returns the matrix whose column ``i`` holds the averages of basis function
    ``i`` (ordering: constant, cos 1, sin 1, cos 2, ...).
    """
    n = mesh.n
    a, b, h = mesh.interfaces[:-1], mesh.interfaces[1:], mesh.h
    cols = [np.ones(n)]
    for k in range(1, (n - 1) // 2 + 1):
        w = 2.0 * np.pi * k
        cols.append((np.sin(w * b) - np.sin(w * a)) / (w * h))
        cols.append((np.cos(w * a) - np.cos(w * b)) / (w * h))
    return np.column_stack(cols)


def fourier_projector(B: np.ndarray, mesh: Mesh1D) -> np.ndarray:
    """Coordinates along the basis by the normal equations with mass ``diag(h)``."""
    W = B.T * mesh.h
    return np.linalg.solve(W @ B, W)


@dataclass(frozen=True)
class SpectrumResult:
    matrix: np.ndarray
    eigenvalues: np.ndarray
    residuals: np.ndarray
    h: float
    config: ReconstructionConfig | None = None

    def scaled(self, cfl: float) -> np.ndarray:
        return cfl * self.h * self.eigenvalues


class EigenSolverError(RuntimeError):
    pass


def spectrum_matrix(config: ReconstructionConfig, n: int = SPECTRUM_CELLS,
                    residual_tol: float = 1.0e-8) -> SpectrumResult:
    """Column-wise matrix of the upwind transport operator in the real Fourier basis."""
    if n % 2 == 0:
        raise ValueError("the real Fourier basis needs an odd number of cells")
    mesh = generate_mesh(Uniform(n))
    B = fourier_averages(mesh)
    P = fourier_projector(B, mesh)

    V = np.empty_like(B)
    for i in range(B.shape[1]):
        um = upwind_values(mesh, B[:, i], config)
        V[:, i] = -(um[1:] - um[:-1]) / mesh.h
    M = P @ V

    lam, vec = np.linalg.eig(M)
    norm = np.linalg.norm(M, 2)
    res = np.linalg.norm(M @ vec - vec * lam, axis=0) / np.maximum(np.linalg.norm(vec, axis=0), 1e-300)
    if not np.all(np.isfinite(lam)) or np.any(res > residual_tol * max(norm, 1.0)):
        raise EigenSolverError(f"eigenpair residual {res.max():.3e} exceeds tolerance")
    return SpectrumResult(M, lam, res, float(mesh.h[0]), config)


def linear_weno3_symbol(theta, h: float) -> np.ndarray:
    """Fourier symbol of the linear WENO3 upwind scheme on a uniform grid."""
    e = np.exp(1j * np.asarray(theta))
    stencil = -1.0 / 6.0 / e + 5.0 / 6.0 + e / 3.0
    return -(1.0 - 1.0 / e) * stencil / h


def circulant_eigenvalues(n: int = SPECTRUM_CELLS) -> np.ndarray:
    """Eigenvalues of the linear WENO3 operator by FFT of its circulant row."""
    h = 1.0 / n
    # (L u)_j = -(U_{j+1/2} - U_{j-1/2}) / h with U_{j+1/2} = -u_{j-1}/6 + 5u_j/6 + u_{j+1}/3
    row = np.zeros(n)
    for off, c in {-2: -1.0 / 6.0, -1: 1.0, 0: -0.5, 1: -1.0 / 3.0}.items():
        row[off % n] += c / h
    # C[j, j+off] = c_off has eigenvalues sum_off c_off exp(2 pi i k off / n)
    return n * np.fft.ifft(row)


def stability_check(eigenvalues, cfl: float, h: float, tol: float = 1.0e-12):
    """``(all |R(z)| <= 1 + tol, max |R(z)| - 1)`` for ``z = cfl h lambda``."""
    z = cfl * h * np.asarray(eigenvalues)
    margin = float(np.max(np.abs(stability_function(z))) - 1.0)
    return margin <= tol, margin


def max_stable_cfl(eigenvalues, h: float, hi: float = 4.0, tol: float = 1.0e-6) -> float:
    """Largest CFL number keeping all scaled eigenvalues in the stability region."""
    lo = 0.0
    if stability_check(eigenvalues, hi, h)[0]:
        return hi
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if stability_check(eigenvalues, mid, h)[0]:
            lo = mid
        else:
            hi = mid
    return lo


def real_axis_stability_limit() -> float:
    """Negative real root of ``|R(z)| = 1`` for SSPRK(3,3)."""
    return brentq(lambda x: stability_function(x) + 1.0, -3.0, -2.0)


@dataclass
class SpectrumStudy:
    """Spectra of several reconstructions and their stability limits."""

    results: dict = field(default_factory=dict)

    def add(self, label: str, config: ReconstructionConfig, n: int = SPECTRUM_CELLS) -> SpectrumResult:
        res = spectrum_matrix(config, n)
        self.results[label] = res
        return res

    def limits(self) -> dict:
        return {k: max_stable_cfl(r.eigenvalues, r.h) for k, r in self.results.items()}


# }}}


def linear_config(kind: str = WENO3) -> ReconstructionConfig:
    return ReconstructionConfig(kind=kind, linear=True)

