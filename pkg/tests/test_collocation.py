import numpy as np
import pytest

from solitonlab.collocation import ChebGrid, gauss_legendre_01
from solitonlab.errors import GridMismatch


def test_nodes_interior_and_ascending():
    g = ChebGrid(0.0, 2.0, 32)
    assert np.all(np.diff(g.x) > 0)
    assert g.x[0] > 0.0 and g.x[-1] < 2.0


def test_weights_integrate_polynomials_exactly():
    g = ChebGrid(-1.0, 3.0, 24)
    for p in range(0, 12):
        exact = (3.0 ** (p + 1) - (-1.0) ** (p + 1)) / (p + 1)
        assert g.integrate(g.x ** p) == pytest.approx(exact, rel=1e-13)


def test_quadrature_spectral_on_smooth_integrand():
    exact = np.exp(2.0) - 1.0
    errs = [abs(ChebGrid(0.0, 2.0, n).integrate(np.exp(ChebGrid(0.0, 2.0, n).x)) - exact)
            for n in (8, 16)]
    assert errs[1] < 1e-4 * errs[0] or errs[1] < 1e-13


def test_diff_matrix_exact_on_polynomials():
    g = ChebGrid(1.0, 3.0, 20)
    f = g.x ** 5 - 2.0 * g.x ** 2
    df = 5.0 * g.x ** 4 - 4.0 * g.x
    assert np.max(np.abs(g.diff(f) - df)) < 1e-10


def test_interpolation_and_endpoints():
    g = ChebGrid(0.0, 2.0, 40)
    f = np.sin(3.0 * g.x)
    xq = np.array([0.0, 0.31, 1.7, 2.0])
    assert np.max(np.abs(g.interpolate(f, xq) - np.sin(3.0 * xq))) < 1e-12
    v_lo, v_hi = g.endpoint_values(f)
    assert v_lo == pytest.approx(0.0, abs=1e-12)
    assert v_hi == pytest.approx(np.sin(6.0), abs=1e-12)
    s_lo, s_hi = g.endpoint_slopes(f)
    assert s_lo == pytest.approx(3.0, abs=1e-9)
    assert s_hi == pytest.approx(3.0 * np.cos(6.0), abs=1e-9)


def test_interp_row_matches_interpolate():
    g = ChebGrid(0.0, 2.0, 16)
    f = np.cos(g.x)
    row = g.interp_row(0.0)
    assert row @ f == pytest.approx(g.interpolate(f, 0.0), abs=1e-14)


def test_interpolate_at_node_returns_sample():
    g = ChebGrid(0.0, 1.0, 12)
    f = g.x ** 3
    assert g.interpolate(f, g.x[4]) == pytest.approx(f[4], abs=0.0)


def test_grid_mismatch_raises():
    a, b = ChebGrid(0.0, 2.0, 16), ChebGrid(0.0, 2.0, 18)
    with pytest.raises(GridMismatch):
        a.check_same(b)


def test_gauss_legendre_01():
    t, w = gauss_legendre_01(12)
    assert np.all((t > 0) & (t < 1))
    assert np.sum(w) == pytest.approx(1.0, abs=1e-14)
    assert np.sum(w * t ** 7) == pytest.approx(1.0 / 8.0, abs=1e-14)
