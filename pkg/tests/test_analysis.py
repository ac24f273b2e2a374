from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.integrate import quad
from scipy.optimize import brentq

from wenolab.analysis import (
    SPECTRUM_CELLS,
    EigenSolverError,
    circulant_eigenvalues,
    convergence_table,
    error_norms,
    linear_config,
    max_stable_cfl,
    observed_rates,
    real_axis_stability_limit,
    spatial_derivative_error,
    spectrum_matrix,
    stability_check,
    total_variation,
)
from wenolab.mesh1d import Pattern, Uniform, generate_mesh
from wenolab.problems import (
    BURGERS_U3,
    BURGERS_U4,
    burgers_u4,
    piecewise_averages,
    shifted_averages,
    shu_osher_averages,
    smooth_transport,
    square_wave,
    transport_u2,
)
from wenolab.reconstruction import WENO3, EpsilonPolicy, ReconstructionConfig
from wenolab.systems import Euler


def match_sets(a, b):
    """Largest nearest-neighbour distance between two point sets in the plane."""
    d = np.abs(np.asarray(a)[:, None] - np.asarray(b)[None, :])
    return max(d.min(axis=1).max(), d.min(axis=0).max())


def test_error_norms():
    m = generate_mesh(Uniform(4))
    one, mx = error_norms([1.0, 2.0, 3.0, 4.0], np.array([1.0, 2.5, 3.0, 3.0]), m)
    assert one == pytest.approx(0.25 * 1.5)
    assert mx == pytest.approx(1.0)


def test_total_variation():
    assert total_variation([0, 1, 0, 1]) == 4.0
    assert total_variation([0, 1, 0, 1], periodic=False) == 3.0


@given(p=st.floats(0.5, 5.0), e0=st.floats(1e-6, 1.0))
def test_rates_recover_power_law(p, e0):
    ns = [10, 20, 40, 80]
    t = convergence_table(None, ns, errors=[e0 * (10 / n) ** p for n in ns])
    np.testing.assert_allclose(t.rates, p, rtol=1e-10)
    assert t.rows[0].rate is None


def test_rates_with_irregular_ratios():
    hs = [0.1, 0.03, 0.01]
    t = convergence_table(None, hs, ratio=None, errors=[h ** 3 for h in hs], increasing=False)
    np.testing.assert_allclose(t.rates, 3.0)
    with pytest.raises(ValueError):
        convergence_table(None, [1], errors=[1.0])
    assert observed_rates([4.0, 1.0]).tolist() == [2.0]


def test_table_from_runner():
    t = convergence_table(lambda n: 1.0 / n ** 2, [8, 16, 32])
    np.testing.assert_allclose(t.rates, 2.0)
    assert list(t.csv_rows())[1][2] == "2.0000"


def linear_weno3_oracle(n):
    # U_{j+1/2} = -u_{j-1}/6 + 5 u_j/6 + u_{j+1}/3; L u = -(U_{j+1/2} - U_{j-1/2}) / h
    h = 1.0 / n
    th = 2 * np.pi * np.arange(n) / n
    e = np.exp(1j * th)
    return -(1 - 1 / e) * (-1 / (6 * e) + 5 / 6 + e / 3) / h


def test_circulant_matches_symbol_oracle():
    assert match_sets(circulant_eigenvalues(SPECTRUM_CELLS), linear_weno3_oracle(SPECTRUM_CELLS)) < 1e-9


def test_linear_spectrum_matches_oracle():
    res = spectrum_matrix(linear_config(WENO3))
    lam = linear_weno3_oracle(SPECTRUM_CELLS)
    assert match_sets(res.eigenvalues, lam) < 1e-8 * np.abs(lam).max()


def test_spectrum_needs_odd_cells():
    with pytest.raises(ValueError):
        spectrum_matrix(linear_config(), 64)
    assert issubclass(EigenSolverError, RuntimeError)


def test_real_axis_limit():
    x = real_axis_stability_limit()
    assert 1 + x + x * x / 2 + x ** 3 / 6 == pytest.approx(-1.0)
    assert x == pytest.approx(-2.5127, abs=1e-4)


def test_max_stable_cfl_scalar():
    # one eigenvalue on the negative real axis: limit is |x| / |lambda h|
    lam = np.array([-4.0])
    c = max_stable_cfl(lam, 0.5, tol=1e-10)
    assert c == pytest.approx(-real_axis_stability_limit() / 2.0, abs=1e-8)
    assert stability_check(lam, 0.9 * c, 0.5)[0]
    assert not stability_check(lam, 1.1 * c, 0.5)[0]


def test_derivative_error_third_order_uniform():
    conf = ReconstructionConfig(WENO3, EpsilonPolicy.quadratic_h())
    e = [spatial_derivative_error(generate_mesh(Uniform(n)), smooth_transport, conf) for n in (160, 320)]
    assert np.log2(e[0] / e[1]) == pytest.approx(3.0, abs=0.2)


def test_derivative_error_second_order_pattern():
    conf = ReconstructionConfig(WENO3, EpsilonPolicy.quadratic_h())
    e = [spatial_derivative_error(generate_mesh(Pattern(n)), smooth_transport, conf) for n in (320, 640)]
    assert np.log2(e[0] / e[1]) == pytest.approx(2.0, abs=0.15)


# exact solutions


def u3_characteristics(x, t):
    """Solution of Burgers with u0=-sin(pi x) on [-1, 1]: standing shock at 0 for t > 1/pi."""
    s = np.sign(x)
    x = abs(x)
    if x == 0.0 or x >= 1.0:
        return 0.0
    # g(xi) = xi - t sin(pi xi) - x is convex on (0, 1) with g(x) < 0 < g(1)
    xi = brentq(lambda q: q - t * np.sin(np.pi * q) - x, x, 1.0, xtol=1e-15)
    return -s * np.sin(np.pi * xi)


@pytest.mark.parametrize("t", [0.2, 0.35, 0.6])
def test_burgers_u3_exact_averages(t):
    mesh = generate_mesh(Uniform(32), (-1.0, 1.0))
    got = BURGERS_U3.averages(mesh, t)
    oracle = [quad(lambda x: u3_characteristics(x, t), a, b, epsabs=1e-13)[0] / (b - a)
              for a, b in zip(mesh.interfaces[:-1], mesh.interfaces[1:])]
    np.testing.assert_allclose(got, oracle, atol=1e-9)


def test_burgers_u4_smooth_phase_by_characteristics():
    t = 0.05
    mesh = generate_mesh(Uniform(16), (-1.0, 1.0))
    du0 = lambda q: -np.pi * np.cos(np.pi * q) + np.pi * np.cos(5 * np.pi * q)  # noqa: E731
    assert np.min(1 + t * du0(np.linspace(-1, 1, 10001))) > 0  # no shock yet

    def u(x):
        xi = brentq(lambda q: q + t * burgers_u4(q) - x, x - 1.3 * t, x + 1.3 * t, xtol=1e-15)
        return burgers_u4(xi)

    oracle = [quad(u, a, b, epsabs=1e-13)[0] / (b - a)
              for a, b in zip(mesh.interfaces[:-1], mesh.interfaces[1:])]
    np.testing.assert_allclose(BURGERS_U4.averages(mesh, t), oracle, atol=1e-9)


def test_burgers_mass_conserved():
    mesh = generate_mesh(Uniform(50), (-1.0, 1.0))
    for t in (0.3, 0.45, 1.0):
        assert float(mesh.h @ BURGERS_U4.averages(mesh, t)) == pytest.approx(0.0, abs=1e-10)
    with pytest.raises(ValueError):
        BURGERS_U3.hopf_lax(np.zeros(2), 0.0)


def test_shifted_averages_periodic():
    mesh = generate_mesh(Uniform(20), (-1.0, 1.0))
    np.testing.assert_allclose(shifted_averages(transport_u2, mesh, 2.0),
                               shifted_averages(transport_u2, mesh, 0.0), atol=1e-13)
    sq = shifted_averages(square_wave, generate_mesh(Uniform(4)), 0.25)
    np.testing.assert_allclose(sq, [1.0, 0.0, 0.0, 1.0])


def test_piecewise_averages_split_cells():
    mesh = generate_mesh(Uniform(3))
    u = piecewise_averages([lambda x: 0 * x, lambda x: 1 + 0 * x], [0.5], mesh)
    np.testing.assert_allclose(u, [0.0, 0.5, 1.0])


def test_shu_osher_initial_data():
    mesh = generate_mesh(Uniform(100))
    u = shu_osher_averages(mesh)
    rho, v, p = Euler().primitive(u)
    assert rho[0] == pytest.approx(3.857143)
    assert p[0] == pytest.approx(10.333333)
    assert np.all(v[mesh.centers > 0.26] == 0.0)
    assert np.allclose(p[mesh.centers > 0.26], 1.0)
