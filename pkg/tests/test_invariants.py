import numpy as np
import pytest
from scipy.integrate import quad

from solitonlab.errors import NoBracket
from solitonlab.functionals import random_admissible
from solitonlab.geometry import make_background
from solitonlab.invariants import (
    find_soliton_field,
    flow_derivative_check,
    flow_potential,
    invariant_at_kappa,
    soliton_kappa_by_shooting,
    soliton_profile_ode,
    tz_invariant,
)


def test_invariant_vanishes_on_round_line(p1):
    for kap in (0.5, 1.0, -2.0):
        Y = p1.holo_field(kap)
        assert abs(tz_invariant(p1, Y)) < 1e-13


def test_invariant_metric_independence(p1_pert, calabi):
    for bg in (p1_pert, calabi):
        Y = bg.holo_field(1.0)
        ref = tz_invariant(bg, Y)
        rng = np.random.default_rng(17)
        st = bg.metric_state(random_admissible(bg, rng))
        assert tz_invariant(bg, Y, st) == pytest.approx(ref, abs=1e-8)


def test_futaki_value_against_quadrature_oracle(calabi):
    # independent route: the reduced integrand of the invariant at the
    # reference is profile * dh/dx * measure, integrated by adaptive
    # quadrature over the moment interval
    Y = calabi.holo_field(1.0)
    val = tz_invariant(calabi, Y)
    integrand = lambda x: 0.5 * (x - 1.0) * (3.0 - x) * (-1.0 / x) * x
    ref = 8.0 * np.pi**2 * quad(integrand, 1.0, 3.0, epsabs=1e-13)[0]
    assert val == pytest.approx(ref, abs=1e-8)
    # hand-evaluated closed form of the same integral
    assert val == pytest.approx(-16.0 * np.pi**2 / 3.0, abs=1e-10)


def test_flow_potential_basics(p1_pert, calabi):
    for bg in (p1_pert, calabi):
        Y = bg.holo_field(0.7)
        assert np.max(np.abs(flow_potential(bg, Y, 0.0).samples)) == 0.0
        Y0 = bg.holo_field(0.0)
        assert np.max(np.abs(flow_potential(bg, Y0, 0.4).samples)) == 0.0


def test_flow_potential_is_pullback(calabi):
    # the flow must preserve every energy built from the volume ratio with
    # the right equivariance; here: check the flow equation by differences
    Y = calabi.holo_field(0.8)
    rec = flow_derivative_check(calabi, Y, [0], [-0.2, 0.0, 0.2])
    for mean, spread in rec.flow_constants:
        assert spread < 1e-8


def test_flow_slopes_on_line(p1):
    Y = p1.holo_field(1.0)
    rec = flow_derivative_check(p1, Y, [0, 1], np.linspace(-0.3, 0.3, 7))
    assert abs(rec.slopes[0]) < 1e-7
    assert abs(rec.slopes[1]) < 1e-7
    assert max(rec.g_deviations.values()) < 1e-7


def test_flow_slopes_scale_with_invariant(calabi):
    Y = calabi.holo_field(1.0)
    fut = tz_invariant(calabi, Y)
    rec = flow_derivative_check(calabi, Y, [0, 1, 2], np.linspace(-0.25, 0.25, 7))
    for k in (0, 1, 2):
        predicted = (k + 1) * calabi.n * fut / calabi.V
        assert rec.slopes[k] == pytest.approx(predicted, abs=1e-6)
        assert rec.slope_residuals[k] < 1e-7
    assert max(rec.g_deviations.values()) < 1e-7


def test_flow_affine_even_for_soliton_field(calabi_star, kappa_star):
    # with the soliton field as the reference field, the invariant of the
    # generator vanishes and the energies are flat along its flow
    Y = calabi_star.holo_field(1.0)
    rec = flow_derivative_check(calabi_star, Y, [0, 1, 2],
                                np.linspace(-0.2, 0.2, 5))
    for k in (0, 1, 2):
        assert abs(rec.slopes[k]) < 1e-6


def test_find_soliton_field_on_line(p1):
    assert find_soliton_field(p1, bracket=(-1.0, 1.0)) == pytest.approx(0.0, abs=1e-12)


def test_find_soliton_field_on_blowup(calabi, kappa_star):
    assert abs(invariant_at_kappa(calabi, kappa_star)) < 1e-10
    assert -1.0 < kappa_star < -0.1


def test_shooting_oracle_agrees(kappa_star):
    shoot = soliton_kappa_by_shooting()
    assert abs(shoot - kappa_star) / abs(kappa_star) < 5e-5


def test_shooting_profile_endpoint_slopes():
    # at the root the profile closes smoothly at the far end: slope -> -1
    shoot = soliton_kappa_by_shooting()
    end_val, sol = soliton_profile_ode(shoot)
    assert abs(end_val) < 1e-10
    x = np.array([1.0 + 1e-7, 3.0 - 1e-7])
    vals = sol.sol(np.clip(x, sol.t[0], sol.t[-1]))[0]
    # one-sided slopes of the collapsing profile
    assert vals[0] / (x[0] - 1.0) == pytest.approx(1.0, abs=1e-4)
    assert vals[1] / (3.0 - x[1]) == pytest.approx(1.0, abs=1e-4)


def test_no_bracket(calabi):
    with pytest.raises(NoBracket):
        find_soliton_field(calabi, bracket=(1.0, 2.0), scan=11)
