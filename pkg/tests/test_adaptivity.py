from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from wenolab.adaptivity import (
    AdaptiveMesh,
    AdaptivityError,
    EntropyAdaptivity,
    IndicatorConfig,
    apply_plan,
    plan_adaptation,
    step_with_entropy,
    transfer_solution,
)
from wenolab.mesh1d import OUTFLOW, PERIODIC, Random, Uniform, cell_averages, generate_mesh
from wenolab.problems import burgers_u3
from wenolab.reconstruction import CWENO3, EpsilonPolicy, ReconstructionConfig
from wenolab.systems import Burgers, Euler, LinearAdvection
from wenolab.timeintegration import FVScheme, compute_dt, integrate

EPS = st.sampled_from(["1e-6", "h", "h2"])


def random_adaptive_mesh(rng, n, max_level, passes=3):
    am = AdaptiveMesh.from_coarse(generate_mesh(Random(n, int(rng.integers(1000))), (-1, 1)), max_level)
    for _ in range(passes):
        plan = plan_adaptation(am, rng.random(am.n) < 0.4, rng.random(am.n) < 0.4)
        am = apply_plan(am, plan)
    return am


@given(seed=st.integers(0, 10_000), n=st.integers(3, 20), L=st.integers(0, 4), eps=EPS,
       boundary=st.sampled_from([PERIODIC, OUTFLOW]))
def test_transfer_conserves(seed, n, L, eps, boundary):
    rng = np.random.default_rng(seed)
    am = random_adaptive_mesh(rng, n, L)
    am = AdaptiveMesh(am.coarse_mesh.with_boundary(boundary), am.max_level, am.coarse, am.level, am.k)
    old = am.to_mesh()
    u = rng.normal(size=(2, old.n))
    plan = plan_adaptation(am, rng.random(am.n) < 0.5, rng.random(am.n) < 0.5)
    new = apply_plan(am, plan).to_mesh()
    un = transfer_solution(old, plan, u, ReconstructionConfig(CWENO3, EpsilonPolicy.parse(eps)))
    assert un.shape == (2, new.n)
    np.testing.assert_allclose(new.h @ un.T, old.h @ u.T, atol=1e-13 * (1 + np.abs(u).max()))


@given(seed=st.integers(0, 10_000), n=st.integers(3, 20), L=st.integers(0, 4))
def test_adapted_meshes_tile_the_domain(seed, n, L):
    rng = np.random.default_rng(seed)
    am = random_adaptive_mesh(rng, n, L, passes=5)
    m = am.to_mesh()
    assert m.length == pytest.approx(2.0)
    assert np.all(am.level <= L) and np.all(am.level >= 0)
    assert np.all(am.k < 2 ** am.level)
    # each cell is the expected dyadic fraction of its parent
    np.testing.assert_allclose(m.h, am.coarse_mesh.h[am.coarse] / 2.0 ** am.level, rtol=1e-12)


@given(seed=st.integers(0, 1000), eps=EPS)
def test_refine_then_merge_round_trip(seed, eps):
    rng = np.random.default_rng(seed)
    am = AdaptiveMesh.from_coarse(generate_mesh(Uniform(8)), 2)
    u = rng.normal(size=8)
    conf = ReconstructionConfig(CWENO3, EpsilonPolicy.parse(eps))
    plan = plan_adaptation(am, np.ones(8, bool), np.zeros(8, bool))
    fine = apply_plan(am, plan)
    uf = transfer_solution(am.to_mesh(), plan, u, conf)
    back_plan = plan_adaptation(fine, np.zeros(16, bool), np.ones(16, bool))
    back = apply_plan(fine, back_plan)
    ub = transfer_solution(fine.to_mesh(), back_plan, uf, conf)
    np.testing.assert_array_equal(back.level, 0)
    np.testing.assert_allclose(ub, u, atol=1e-14)


def test_max_level_respected_and_merge_needs_siblings():
    am = AdaptiveMesh.from_coarse(generate_mesh(Uniform(4)), 1)
    am = apply_plan(am, plan_adaptation(am, np.ones(4, bool), np.zeros(4, bool)))
    plan = plan_adaptation(am, np.ones(8, bool), np.zeros(8, bool))
    assert plan.unchanged
    # cells 1 and 2 belong to different parents
    flags = np.zeros(8, bool)
    flags[[1, 2]] = True
    assert plan_adaptation(am, np.zeros(8, bool), flags).unchanged


def test_indicator_config_validation():
    with pytest.raises(AdaptivityError):
        IndicatorConfig(refine=0.1, coarsen=0.2)
    with pytest.raises(AdaptivityError):
        AdaptiveMesh.from_coarse(generate_mesh(Uniform(4)), -1)


def test_entropy_indicator_localises_shock():
    m = generate_mesh(Uniform(64), (-1, 1))
    scheme = FVScheme(Burgers(), ReconstructionConfig())
    # after the shock forms at x=0 (t > 1/pi), production concentrates there
    r = integrate(cell_averages(burgers_u3, m), m, scheme, 0.5)
    dt = compute_dt(m, r.u, scheme.system)
    _, ind = step_with_entropy(m, r.u, dt, scheme)
    j = int(np.argmax(ind))
    assert abs(m.centers[j]) < 0.1
    smooth = np.abs(m.centers) > 0.5
    assert np.max(ind[smooth]) < 1e-2 * ind[j]


def test_entropy_indicator_vanishes_for_smooth_transport():
    peaks = []
    for n in (64, 128):
        m = generate_mesh(Uniform(n), (-1, 1))
        scheme = FVScheme(LinearAdvection(), ReconstructionConfig())
        u = cell_averages(lambda x: np.sin(np.pi * x), m)
        _, ind = step_with_entropy(m, u, compute_dt(m, u, scheme.system), scheme)
        peaks.append(float(np.max(ind)))
    assert peaks[0] < 2e-3
    assert peaks[0] / peaks[1] > 4.0


def test_adaptive_burgers_conserves_mass():
    coarse = generate_mesh(Uniform(16), (-1, 1))
    scheme = FVScheme(Burgers(), ReconstructionConfig(CWENO3, EpsilonPolicy.linear_h()))
    ad = EntropyAdaptivity.start(coarse, IndicatorConfig(max_level=3))
    mesh, u = ad.adapt_initial(lambda m: cell_averages(lambda x: 0.3 - np.sin(np.pi * x), m), scheme, 0.45)
    mass0 = float(mesh.h @ u)
    r = integrate(u, mesh, scheme, 0.4, adaptivity=ad)
    assert float(r.mesh.h @ r.u) == pytest.approx(mass0, abs=1e-12)
    assert r.mesh.n > coarse.n
    assert ad.log_csv().startswith("step,time,active_cells,min_level,max_level\n")
    assert int(ad.amesh.level.max()) <= 3


def test_driver_rejects_foreign_mesh():
    ad = EntropyAdaptivity.start(generate_mesh(Uniform(8)), IndicatorConfig())
    with pytest.raises(AdaptivityError):
        ad.advance(generate_mesh(Uniform(8)), np.zeros(8), 0.1,
                   FVScheme(Burgers(), ReconstructionConfig()))


def test_euler_entropy_available():
    assert Euler().has_entropy
