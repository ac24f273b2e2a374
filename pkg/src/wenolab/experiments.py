"""Experiment runners shared by the command line and the acceptance suite.

Each runner takes a plain configuration mapping (already merged with the
defaults in :data:`EXPERIMENTS`) and returns a :class:`Report` made of named
tables.  Tables serialise to CSV deterministically.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from wenolab import quadtree2d as qt
from wenolab.adaptivity import EntropyAdaptivity, IndicatorConfig
from wenolab.analysis import (
    SPECTRUM_CELLS,
    convergence_table,
    error_norms,
    linear_config,
    max_stable_cfl,
    spatial_derivative_error,
    spectrum_matrix,
    total_variation,
)
from wenolab.mesh1d import (
    OUTFLOW,
    TRANSPORT_BLOCK,
    Mesh1D,
    Pattern,
    QuasiRegular,
    Random,
    Uniform,
    cell_averages,
    generate_mesh,
    local_ratios,
    pattern_block,
)
from wenolab.problems import (
    BURGERS_U3,
    BURGERS_U4,
    burgers_u3,
    burgers_u4,
    cos_cubic,
    exp_data,
    shifted_averages,
    shu_osher_averages,
    smooth_transport,
    square_wave,
    transport_u1,
    transport_u2,
)
from wenolab.reconstruction import (
    CWENO3,
    KINDS,
    WENO3,
    EpsilonPolicy,
    ReconstructionConfig,
    reconstruct_cell,
    reconstruction_gradient,
    weight_deviation,
)
from wenolab.swbalance import CENTER_STRATEGIES, QUADRATURES, pond_test
from wenolab.systems import Burgers, Euler, LinearAdvection
from wenolab.timeintegration import DEFAULT_CFL, FVScheme, integrate


class ConfigError(ValueError):
    """Invalid or inconsistent experiment configuration."""


# {{{ reports


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v)).lower()
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if math.isnan(v):
            return ""
        return f"{v:.10e}"
    return str(v)


@dataclass
class Table:
    columns: tuple[str, ...]
    rows: list = field(default_factory=list)

    def add(self, *row) -> None:
        if len(row) != len(self.columns):
            raise ValueError(f"row of length {len(row)} for {len(self.columns)} columns")
        self.rows.append(tuple(row))

    def column(self, name: str) -> list:
        k = self.columns.index(name)
        return [r[k] for r in self.rows]

    def where(self, **match) -> list[dict]:
        out = []
        for r in self.rows:
            d = dict(zip(self.columns, r))
            if all(d[k] == v for k, v in match.items()):
                out.append(d)
        return out

    def to_csv(self) -> str:
        out = io.StringIO()
        out.write(",".join(self.columns) + "\n")
        for r in self.rows:
            out.write(",".join(_fmt(v) for v in r) + "\n")
        return out.getvalue()


@dataclass
class Report:
    experiment: str
    tables: dict = field(default_factory=dict)
    #: extra text files (name -> content), e.g. mesh dumps
    files: dict = field(default_factory=dict)

    def table(self, name: str, columns) -> Table:
        t = Table(tuple(columns))
        self.tables[name] = t
        return t


def _rates(errors, resolutions, increasing: bool = True):
    t = convergence_table(None, list(resolutions), None, list(errors), increasing=increasing)
    return [r.rate if r.rate is not None else float("nan") for r in t.rows]


# }}}


# {{{ config helpers


FUNCTIONS = {"exp": exp_data, "cos_cubic": cos_cubic, "cubic_cos": lambda x: x ** 3 + np.cos(x)}


def _eps(text) -> EpsilonPolicy:
    try:
        return EpsilonPolicy.parse(str(text))
    except ValueError as err:
        raise ConfigError(f"invalid epsilon policy {text!r}") from err


def _kind(text) -> str:
    if text not in KINDS:
        raise ConfigError(f"unknown reconstruction kind {text!r}; choose from {KINDS}")
    return text


def _function(name) -> Callable:
    if name not in FUNCTIONS:
        raise ConfigError(f"unknown test function {name!r}; choose from {tuple(FUNCTIONS)}")
    return FUNCTIONS[name]


def _positive_list(cfg, key, cast=int):
    vals = cfg.get(key)
    if not isinstance(vals, (list, tuple)) or not vals:
        raise ConfigError(f"{key!r} must be a nonempty list")
    try:
        out = [cast(v) for v in vals]
    except (TypeError, ValueError) as err:
        raise ConfigError(f"invalid entry in {key!r}: {vals}") from err
    if any(v <= 0 for v in out):
        raise ConfigError(f"{key!r} entries must be positive")
    return out


def _spec(grid: str, n: int, seed: int):
    if grid == "uniform":
        return Uniform(n)
    if grid == "quasiregular":
        return QuasiRegular(n)
    if grid == "random":
        return Random(n, seed)
    if grid == "pattern":
        if n % len(TRANSPORT_BLOCK):
            raise ConfigError(f"pattern grids need N divisible by {len(TRANSPORT_BLOCK)}, got {n}")
        return Pattern(n, TRANSPORT_BLOCK)
    raise ConfigError(f"unknown grid {grid!r}; choose from uniform, quasiregular, random, pattern")


def _recon(cfg, kind=None, eps=None) -> ReconstructionConfig:
    return ReconstructionConfig(_kind(kind or cfg.get("kind", CWENO3)),
                                _eps(eps if eps is not None else cfg.get("epsilon", "h")),
                                int(cfg.get("tau", 2)))


# }}}


# {{{ single-cell studies


def recon_cell_data(f: Callable, h: float):
    """Averages, ratios and exact edge value of the five-cell reconstruction test."""
    mesh = pattern_block(h)
    j = mesh.n // 2
    u = cell_averages(f, mesh)
    beta, gamma = local_ratios(mesh, j)
    return (u[j - 1], u[j], u[j + 1]), beta, gamma, float(f(np.array(0.5 * h)))


def _levels(cfg):
    h0 = float(cfg.get("h0", 0.05))
    levels = int(cfg.get("levels", 10))
    if levels < 2 or h0 <= 0.0:
        raise ConfigError("need levels >= 2 and h0 > 0")
    return [h0 / 2 ** k for k in range(levels)]


def run_recon_convergence(cfg) -> Report:
    rep = Report("recon-convergence")
    t = rep.table("errors", ("kind", "function", "epsilon", "h", "error", "rate"))
    hs = _levels(cfg)
    kind = _kind(cfg["kind"])
    for fname in cfg["functions"]:
        f = _function(fname)
        for e in cfg["epsilons"]:
            conf = _recon(cfg, kind, e)
            errs = []
            for h in hs:
                data, beta, gamma, exact = recon_cell_data(f, h)
                errs.append(abs(float(reconstruct_cell(data, h, beta, gamma, conf).u_right) - exact))
            for h, err, rate in zip(hs, errs, _rates(errs, hs, increasing=False)):
                t.add(kind, fname, conf.epsilon.label, h, err, rate)
    return rep


def run_weight_convergence(cfg) -> Report:
    rep = Report("weight-convergence")
    t = rep.table("deviations", ("kind", "function", "epsilon", "h", "weight", "deviation", "rate"))
    hs = _levels(cfg)
    kind = _kind(cfg["kind"])
    names = ("C+_L", "C+_R", "C-_L", "C-_R") if kind == WENO3 else ("C_L", "C_R", "C_0")
    for fname in cfg["functions"]:
        f = _function(fname)
        for e in cfg["epsilons"]:
            conf = _recon(cfg, kind, e)
            dev = []
            for h in hs:
                data, beta, gamma, _ = recon_cell_data(f, h)
                dev.append(np.asarray(weight_deviation(data, h, beta, gamma, conf), dtype=float).ravel())
            dev = np.array(dev)
            for k, name in enumerate(names):
                for h, d, r in zip(hs, dev[:, k], _rates(dev[:, k], hs, increasing=False)):
                    t.add(kind, fname, conf.epsilon.label, h, name, d, r)
    return rep


def run_gradient_diagnostic(cfg) -> Report:
    rep = Report("gradient-diagnostic")
    t = rep.table("gradients", ("kind", "epsilon", "h", "component", "dR", "dP2", "difference"))
    f = _function(cfg.get("function", "cubic_cos"))
    kind = _kind(cfg["kind"])
    for e in cfg["epsilons"]:
        conf = _recon(cfg, kind, e)
        for h in _levels(cfg):
            mesh = generate_mesh(Uniform(3), (-1.5 * h, 1.5 * h), OUTFLOW)
            data = cell_averages(f, mesh)
            gr, gp = reconstruction_gradient(data, h, 1.0, 1.0, conf)
            for k, name in enumerate(("j-1", "j", "j+1")):
                t.add(kind, conf.epsilon.label, h, name, gr[k], gp[k], abs(gr[k] - gp[k]))
    return rep


# }}}


# {{{ transport


def transport_error(mesh: Mesh1D, u0: Callable, config: ReconstructionConfig, t_end: float = 1.0,
                    cfl: float = DEFAULT_CFL) -> tuple[float, np.ndarray]:
    """``(1-norm error, final averages)`` of periodic transport with speed 1."""
    scheme = FVScheme(LinearAdvection(1.0), config)
    r = integrate(cell_averages(u0, mesh), mesh, scheme, t_end, cfl)
    one, _ = error_norms(r.u, shifted_averages(u0, mesh, t_end), mesh)
    return one, r.u


def run_derivative_transport(cfg) -> Report:
    rep = Report("derivative-transport")
    t = rep.table("errors", ("kind", "epsilon", "grid", "N", "derivative_error", "derivative_rate",
                             "transport_error", "transport_rate"))
    conf = _recon(cfg)
    ns = _positive_list(cfg, "resolutions")
    seed = int(cfg.get("seed", 0))
    for grid in cfg["grids"]:
        der, tra = [], []
        for n in ns:
            mesh = generate_mesh(_spec(grid, n, seed))
            der.append(spatial_derivative_error(mesh, smooth_transport, conf))
            tra.append(transport_error(mesh, smooth_transport, conf, float(cfg["t_end"]),
                                       float(cfg["cfl"]))[0])
        for n, d, dr, e, er in zip(ns, der, _rates(der, ns), tra, _rates(tra, ns)):
            t.add(conf.kind, conf.epsilon.label, grid, n, d, dr, e, er)
    return rep


def run_transport_disc(cfg) -> Report:
    rep = Report("transport-disc")
    t = rep.table("errors", ("kind", "epsilon", "grid", "N", "one_norm_error", "total_variation"))
    prof = rep.table("profiles", ("kind", "epsilon", "N", "x", "u"))
    ns = _positive_list(cfg, "resolutions")
    seed = int(cfg.get("seed", 0))
    grid = cfg.get("grid", "random")
    for kind in cfg["kinds"]:
        for e in cfg["epsilons"]:
            conf = _recon(cfg, kind, e)
            for n in ns:
                mesh = generate_mesh(_spec(grid, n, seed))
                err, u = transport_error(mesh, square_wave, conf, float(cfg["t_end"]), float(cfg["cfl"]))
                t.add(kind, conf.epsilon.label, grid, n, err, total_variation(u))
                if n == max(ns):
                    for x, v in zip(mesh.centers, u):
                        prof.add(kind, conf.epsilon.label, n, x, v)
    return rep


# }}}


# {{{ spectrum


def run_spectrum(cfg) -> Report:
    rep = Report("spectrum")
    lim = rep.table("limits", ("kind", "epsilon", "max_stable_cfl", "stable_at_cfl"))
    eig = rep.table("eigenvalues", ("kind", "epsilon", "cfl", "re", "im"))
    n = int(cfg.get("cells", SPECTRUM_CELLS))
    cfl = cfg.get("cfl")
    results = []
    for kind in cfg["kinds"]:
        for e in cfg["epsilons"]:
            conf = linear_config(_kind(kind)) if e == "linear" else _recon(cfg, kind, e)
            res = spectrum_matrix(conf, n)
            results.append((kind, "linear" if e == "linear" else conf.epsilon.label, res,
                            max_stable_cfl(res.eigenvalues, res.h)))
    if cfl is None:
        # just inside the limit of the largest-limit nonlinear scheme
        cfl = max(c for _, lab, _, c in results if lab != "linear")
    cfl = float(cfl)
    for kind, lab, res, c in results:
        lim.add(kind, lab, c, bool(cfl <= c))
        z = res.scaled(cfl)
        order = np.lexsort((z.imag, z.real))
        for v in z[order]:
            eig.add(kind, lab, cfl, float(v.real), float(v.imag))
    return rep


# }}}


# {{{ adaptive runs


@dataclass(frozen=True)
class AdaptiveProblem:
    system: object
    initial: Callable
    exact: Callable
    t_end: float
    domain: tuple[float, float]
    boundary: str = "periodic"


def adaptive_problem(name: str) -> AdaptiveProblem:
    if name == "u1":
        return AdaptiveProblem(LinearAdvection(1.0), transport_u1,
                               lambda m, t: shifted_averages(transport_u1, m, t), 1.0, (-1.0, 1.0))
    if name == "u2":
        return AdaptiveProblem(LinearAdvection(1.0), transport_u2,
                               lambda m, t: shifted_averages(transport_u2, m, t), 1.0, (-1.0, 1.0))
    if name == "u3":
        return AdaptiveProblem(Burgers(), burgers_u3, BURGERS_U3.averages, 0.35, (-1.0, 1.0))
    if name == "u4":
        return AdaptiveProblem(Burgers(), burgers_u4, BURGERS_U4.averages, 0.45, (-1.0, 1.0))
    raise ConfigError(f"unknown adaptive problem {name!r}; choose from u1, u2, u3, u4")


@dataclass(frozen=True)
class AdaptiveRun:
    error: float
    average_cells: float
    steps: int
    final_cells: int
    log_csv: str


def adaptive_run(problem: AdaptiveProblem, config: ReconstructionConfig, base: int, max_level: int,
                 cfl: float = DEFAULT_CFL, refine: float = 2.0, coarsen: float = 0.1) -> AdaptiveRun:
    scheme = FVScheme(problem.system, config)
    coarse = generate_mesh(Uniform(base), problem.domain, problem.boundary)
    ad = EntropyAdaptivity.start(coarse, IndicatorConfig(refine, coarsen, max_level))
    mesh, u = ad.adapt_initial(lambda m: cell_averages(problem.initial, m), scheme, cfl)
    r = integrate(u, mesh, scheme, problem.t_end, cfl, adaptivity=ad)
    err, _ = error_norms(r.u, problem.exact(r.mesh, problem.t_end), r.mesh)
    return AdaptiveRun(err, r.average_cells, r.steps, r.mesh.n, ad.log_csv())


def uniform_run(problem: AdaptiveProblem, config: ReconstructionConfig, n: int,
                cfl: float = DEFAULT_CFL) -> float:
    mesh = generate_mesh(Uniform(n), problem.domain, problem.boundary)
    r = integrate(cell_averages(problem.initial, mesh), mesh, FVScheme(problem.system, config),
                  problem.t_end, cfl)
    return error_norms(r.u, problem.exact(mesh, problem.t_end), mesh)[0]


def interpolate_loglog(x, xs, ys) -> float:
    """Power-law interpolation (or extrapolation from the end segments)."""
    lx, ly = np.log(np.asarray(xs, float)), np.log(np.asarray(ys, float))
    k = int(np.clip(np.searchsorted(lx, math.log(x)) - 1, 0, lx.size - 2))
    s = (ly[k + 1] - ly[k]) / (lx[k + 1] - lx[k])
    return float(math.exp(ly[k] + s * (math.log(x) - lx[k])))


def _max_level(cfg, problem: str, k: int) -> int:
    rule = cfg.get("max_level", {})
    if isinstance(rule, int):
        return rule
    a, b = rule.get(problem, (2, 2))
    return int(a) + int(b) * k


def run_adaptive_burgers(cfg) -> Report:
    rep = Report("adaptive-burgers")
    t = rep.table("efficiency", ("problem", "epsilon", "k", "base_cells", "max_level",
                                 "avg_cells", "one_norm_error", "uniform_error_at_avg"))
    u = rep.table("uniform", ("problem", "epsilon", "N", "one_norm_error"))
    base0 = int(cfg.get("base", 16))
    cfl = float(cfg["cfl"])
    for pname in cfg["problems"]:
        prob = adaptive_problem(pname)
        for e in cfg["epsilons"]:
            conf = _recon(cfg, None, e)
            ks = [int(k) for k in cfg["levels"]]
            runs = []
            for k in ks:
                L = _max_level(cfg, pname, k)
                runs.append((k, base0 * 2 ** k, L,
                             adaptive_run(prob, conf, base0 * 2 ** k, L, cfl,
                                          float(cfg["refine"]), float(cfg["coarsen"]))))
            ns = [int(n) for n in cfg["uniform"]]
            ue = [uniform_run(prob, conf, n, cfl) for n in ns]
            for n, err in zip(ns, ue):
                u.add(pname, conf.epsilon.label, n, err)
            for k, base, L, r in runs:
                t.add(pname, conf.epsilon.label, k, base, L, r.average_cells, r.error,
                      interpolate_loglog(r.average_cells, ns, ue))
    return rep


def l1_piecewise(ma: Mesh1D, ua, mb: Mesh1D, ub) -> float:
    """Exact L1 distance of two piecewise-constant fields on a common interval."""
    x = np.union1d(ma.interfaces, mb.interfaces)
    c = 0.5 * (x[1:] + x[:-1])
    ia = np.clip(np.searchsorted(ma.interfaces, c) - 1, 0, ma.n - 1)
    ib = np.clip(np.searchsorted(mb.interfaces, c) - 1, 0, mb.n - 1)
    return float(np.sum(np.diff(x) * np.abs(np.asarray(ua)[ia] - np.asarray(ub)[ib])))


SHU_OSHER_DOMAIN = (0.0, 1.0)
SHU_OSHER_T = 0.2


def shu_osher_uniform(config: ReconstructionConfig, n: int, cfl: float = DEFAULT_CFL):
    mesh = generate_mesh(Uniform(n), SHU_OSHER_DOMAIN, OUTFLOW)
    r = integrate(shu_osher_averages(mesh), mesh, FVScheme(Euler(), config), SHU_OSHER_T, cfl)
    return mesh, r.u[0]


def shu_osher_adaptive(config: ReconstructionConfig, base: int, max_level: int, refine: float,
                       coarsen: float, cfl: float = DEFAULT_CFL):
    scheme = FVScheme(Euler(), config)
    coarse = generate_mesh(Uniform(base), SHU_OSHER_DOMAIN, OUTFLOW)
    ad = EntropyAdaptivity.start(coarse, IndicatorConfig(refine, coarsen, max_level))
    mesh, u = ad.adapt_initial(shu_osher_averages, scheme, cfl)
    r = integrate(u, mesh, scheme, SHU_OSHER_T, cfl, adaptivity=ad)
    return r


def run_shu_osher(cfg) -> Report:
    rep = Report("shu-osher")
    t = rep.table("efficiency", ("epsilon", "base_cells", "max_level", "avg_cells",
                                 "one_norm_error", "uniform_cells", "uniform_error"))
    prof = rep.table("profiles", ("epsilon", "base_cells", "x", "width", "density"))
    cfl = float(cfg["cfl"])
    for e in cfg["epsilons"]:
        conf = _recon(cfg, None, e)
        mr, rho_r = shu_osher_uniform(conf, int(cfg["reference_cells"]), cfl)
        for base, L in cfg["runs"]:
            r = shu_osher_adaptive(conf, int(base), int(L), float(cfg["refine"]),
                                   float(cfg["coarsen"]), cfl)
            err = l1_piecewise(r.mesh, r.u[0], mr, rho_r)
            nu = int(round(r.average_cells))
            mu, rho_u = shu_osher_uniform(conf, nu, cfl)
            t.add(conf.epsilon.label, int(base), int(L), r.average_cells, err, nu,
                  l1_piecewise(mu, rho_u, mr, rho_r))
            for x, w, v in zip(r.mesh.centers, r.mesh.h, r.u[0]):
                prof.add(conf.epsilon.label, int(base), x, w, v)
    return rep


# }}}


# {{{ shallow water and 2D


def run_pond(cfg) -> Report:
    rep = Report("pond")
    t = rep.table("conservation", ("strategy", "N", "conservation_error", "rate", "steps",
                                   "filter_events"))
    ns = _positive_list(cfg, "resolutions")
    eps = _eps(cfg.get("epsilon", "h"))
    if cfg.get("quadrature", "richardson") not in QUADRATURES:
        raise ConfigError(f"unknown quadrature {cfg.get('quadrature')!r}")
    for s in cfg["strategies"]:
        if s not in CENTER_STRATEGIES:
            raise ConfigError(f"unknown strategy {s!r}; choose from {CENTER_STRATEGIES}")
        res = [pond_test(n, s, float(cfg["t_end"]), float(cfg["cfl"]), eps,
                         cfg.get("quadrature", "richardson"), float(cfg.get("g", 9.81)))
               for n in ns]
        errs = [r.conservation_error for r in res]
        with np.errstate(divide="ignore"):
            rates = _rates([max(e, 1e-300) for e in errs], ns)
        for n, r, q in zip(ns, res, rates):
            t.add(s, n, r.conservation_error, q, r.steps, r.filter_events)
    return rep


def run_quadtree2d(cfg) -> Report:
    rep = Report("quadtree2d")
    t = rep.table("errors", ("grid", "N", "epsilon", "error", "rate"))
    eps = [_eps(e) for e in cfg["epsilons"]]
    n0 = int(cfg["root_cells"])
    if n0 < 3:
        raise ConfigError("root_cells must be >= 3")
    if cfg.get("threshold") is None:
        threshold, base = qt.calibrate_threshold(qt.sine_cosine, int(cfg["target_leaves"]), n0)
    else:
        threshold = float(cfg["threshold"])
        base = qt.build_adapted_grid(qt.sine_cosine, n0, threshold)
    study = qt.reconstruction_error_table(qt.sine_cosine, int(cfg["levels"]), eps, base=base,
                                          threshold=threshold)
    for e in eps:
        tab = study.tables[e.label]
        for k, (n, row) in enumerate(zip(study.leaves, tab.rows)):
            t.add(f"G{k}", n, e.label, row.error, float("nan") if row.rate is None else row.rate)
    meta = rep.table("grid", ("root_cells", "threshold", "leaves_G0"))
    meta.add(n0, threshold, base.n)
    rep.files["leaves_G0.csv"] = base.to_csv(qt.leaf_averages(qt.sine_cosine, base))
    return rep


# }}}


# {{{ registry


@dataclass(frozen=True)
class Experiment:
    name: str
    runner: Callable
    defaults: dict
    description: str


EXPERIMENTS = {e.name: e for e in (
    Experiment("recon-convergence", run_recon_convergence, {
        "kind": WENO3, "functions": ["exp", "cos_cubic"],
        "epsilons": ["1e-30", "1e-6", "h", "h2"], "h0": 0.05, "levels": 10, "tau": 2,
    }, "single-cell reconstruction errors at x=h/2 on the h,2h,h,h/2,h/2 block"),
    Experiment("weight-convergence", run_weight_convergence, {
        "kind": WENO3, "functions": ["exp", "cos_cubic"],
        "epsilons": ["1e-6", "h", "h2"], "h0": 0.05, "levels": 10, "tau": 2,
    }, "distance between nonlinear and linear weights"),
    Experiment("gradient-diagnostic", run_gradient_diagnostic, {
        "kind": WENO3, "function": "cubic_cos", "epsilons": ["1e-30", "1e-6", "h", "h2"],
        "h0": 0.1, "levels": 14, "tau": 2,
    }, "derivatives of the reconstruction map against the optimal parabola"),
    Experiment("derivative-transport", run_derivative_transport, {
        "kind": WENO3, "epsilon": "h2", "grids": ["uniform", "quasiregular", "random", "pattern"],
        "resolutions": [20, 40, 80, 160, 320, 640, 1280, 2560], "seed": 0, "t_end": 1.0,
        "cfl": DEFAULT_CFL, "tau": 2,
    }, "derivative truncation error and smooth linear transport"),
    Experiment("transport-disc", run_transport_disc, {
        "kinds": [WENO3, CWENO3], "epsilons": ["1e-6", "h2", "h"], "grid": "random",
        "resolutions": [40, 80, 160, 320, 640], "seed": 0, "t_end": 1.0, "cfl": DEFAULT_CFL,
        "tau": 2,
    }, "square-wave transport: 1-norm error and total variation"),
    Experiment("spectrum", run_spectrum, {
        "kinds": [WENO3, CWENO3], "epsilons": ["1e-6", "h2", "h"], "cells": SPECTRUM_CELLS,
        "cfl": None, "tau": 2,
    }, "Fourier spectrum of the linearised transport operator and SSPRK3 stability"),
    Experiment("adaptive-burgers", run_adaptive_burgers, {
        "kind": CWENO3, "problems": ["u3", "u4"], "epsilons": ["h", "1e-6", "h2"],
        "levels": [0, 1, 2], "base": 16,
        "max_level": {"u1": [2, 0], "u2": [3, 0], "u3": [2, 2], "u4": [3, 2]},
        "uniform": [16, 32, 64, 128, 256, 512, 1024], "refine": 2.0, "coarsen": 0.1,
        "cfl": DEFAULT_CFL, "tau": 2,
    }, "entropy-driven adaptive runs (Burgers u3, u4; transport u1, u2)"),
    Experiment("shu-osher", run_shu_osher, {
        "kind": CWENO3, "epsilons": ["h", "1e-6", "h2"], "runs": [[32, 5], [64, 7], [128, 9]],
        "reference_cells": 8192, "refine": 0.05, "coarsen": 0.0025, "cfl": DEFAULT_CFL,
        "tau": 2,
    }, "adaptive Shu-Osher shock/entropy-wave interaction"),
    Experiment("pond", run_pond, {
        "strategies": ["cweno3", "weno3+p2"], "resolutions": [100, 200, 400, 800],
        "epsilon": "h", "quadrature": "richardson", "t_end": 4.0, "cfl": DEFAULT_CFL,
        "g": 9.81,
    }, "mass added by the positivity filter in the oscillating pond"),
    Experiment("quadtree2d", run_quadtree2d, {
        "epsilons": ["1e-6", "h2", "h"], "levels": 5, "root_cells": 32,
        "target_leaves": qt.TARGET_LEAVES, "threshold": None,
    }, "2D CWENO reconstruction errors on quad-tree grids"),
)}


def merged_config(name: str, overrides: dict | None = None) -> dict:
    if name not in EXPERIMENTS:
        raise ConfigError(f"unknown experiment {name!r}; available: {', '.join(EXPERIMENTS)}")
    cfg = dict(EXPERIMENTS[name].defaults)
    for k, v in (overrides or {}).items():
        if k not in cfg and k not in ("seed", "name", "experiment"):
            raise ConfigError(f"unknown option {k!r} for experiment {name!r}")
        cfg[k] = v
    return cfg


def run(name: str, overrides: dict | None = None) -> Report:
    cfg = merged_config(name, overrides)
    return EXPERIMENTS[name].runner(cfg)


# }}}
