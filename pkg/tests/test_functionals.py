import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from solitonlab.errors import DegreeOutOfRange, PathLeavesCone
from solitonlab.functionals import (
    bent_path,
    binomial_g_combination,
    c_constant,
    cone_membership,
    e0_tilde,
    e_k,
    f_tilde,
    functional_report,
    g_k,
    i_energy,
    i_tilde,
    j_tilde,
    linear_path,
    properness_scatter,
    random_admissible,
    reparam_path,
)
from solitonlab.geometry import RadialFunction, make_background

from oracles import refined_background


def eq_identity_residual(bg, phi):
    """Residual of the identity tying the weighted K-energy to the Ding part."""
    phi = bg.as_radial(phi)
    st = bg.metric_state(phi)
    path = linear_path(phi)
    e0 = e0_tilde(bg, path)
    ft = f_tilde(bg, phi, path)
    term_u = bg.integrate(st.u, st, "e_theta") / bg.V
    term_u0 = bg.integrate(bg.u0, None, "e_theta") / bg.V
    log_term = float(np.log(bg.integrate(
        RadialFunction(bg.grid, np.exp(bg.h_omega.samples - phi.samples))) / bg.V))
    return e0 - (ft + term_u - term_u0 + log_term)


# -- direct functionals -------------------------------------------------------


def test_i_energy_trivial_and_positive(p1_k1):
    bg = p1_k1
    z = RadialFunction.zeros(bg.grid)
    c = RadialFunction.from_callable(bg.grid, lambda x: 1.3 * np.ones_like(x))
    assert i_energy(bg, z) == 0.0
    assert abs(i_energy(bg, c)) < 1e-12
    rng = np.random.default_rng(3)
    for _ in range(5):
        assert i_energy(bg, random_admissible(bg, rng)) >= -1e-12


def test_i_energy_refinement_oracle(p1_pert):
    bg = p1_pert
    phi_fn = lambda x: 0.22 * np.sin(1.9 * x) + 0.1 * np.cos(0.6 * x)
    val = i_energy(bg, RadialFunction.from_callable(bg.grid, phi_fn))
    fine = refined_background(bg)
    ref = i_energy(fine, RadialFunction.from_callable(fine.grid, phi_fn))
    assert val == pytest.approx(ref, abs=1e-9)


def test_i_tilde_reduces_to_i_when_unweighted(p1):
    rng = np.random.default_rng(4)
    phi = random_admissible(p1, rng)
    assert i_tilde(p1, phi) == i_energy(p1, phi)


def test_j_tilde_trivial(p1_k1):
    z = RadialFunction.zeros(p1_k1.grid)
    assert j_tilde(p1_k1, linear_path(z)) == 0.0
    c = RadialFunction.from_callable(p1_k1.grid, lambda x: 0.4 * np.ones_like(x))
    assert abs(j_tilde(p1_k1, linear_path(c))) < 1e-12


def test_path_independence(p1_k1, calabi_k):
    for bg in (p1_k1, calabi_k):
        rng = np.random.default_rng(11)
        phi = random_admissible(bg, rng)
        chi = random_admissible(bg, rng, amplitude=0.25)
        for fn in (e0_tilde, j_tilde):
            lin = fn(bg, linear_path(phi))
            assert fn(bg, bent_path(phi, chi)) == pytest.approx(lin, abs=1e-8)
            assert fn(bg, reparam_path(phi)) == pytest.approx(lin, abs=1e-9)


def test_bent_path_can_leave_cone(p1):
    rng = np.random.default_rng(5)
    phi = random_admissible(p1, rng, margin=0.25)
    huge = RadialFunction(p1.grid, 40.0 * np.sin(3.0 * p1.grid.x))
    with pytest.raises(PathLeavesCone):
        e0_tilde(p1, bent_path(phi, huge))


def test_f_tilde_trivial_and_shift(p1_k1):
    z = RadialFunction.zeros(p1_k1.grid)
    assert abs(f_tilde(p1_k1, z)) < 1e-14
    rng = np.random.default_rng(6)
    phi = random_admissible(p1_k1, rng)
    assert f_tilde(p1_k1, phi + 0.6) == pytest.approx(f_tilde(p1_k1, phi), abs=1e-10)


def test_f_tilde_refinement_oracle(p1_k1):
    phi_fn = lambda x: 0.25 * np.sin(1.4 * x) - 0.12 * np.cos(2.3 * x)
    val = f_tilde(p1_k1, RadialFunction.from_callable(p1_k1.grid, phi_fn))
    fine = refined_background(p1_k1)
    ref = f_tilde(fine, RadialFunction.from_callable(fine.grid, phi_fn))
    assert val == pytest.approx(ref, abs=1e-8)


# -- identity battery (the invariants of this module) -------------------------


@pytest.mark.parametrize("backend,kappa", [
    ("p1_radial", 0.0), ("p1_radial", 1.0),
    ("calabi_fiber", 0.0), ("calabi_fiber", -0.5),
])
def test_identity_battery_20_seeds(backend, kappa):
    grid = 64 if backend == "p1_radial" else 96
    bg = make_background(backend, grid, kappa)
    rng = np.random.default_rng(7)
    u0_term = bg.integrate(bg.u0, None, "e_theta") / bg.V
    for _ in range(20):
        phi = random_admissible(bg, rng)
        res = eq_identity_residual(bg, phi)
        assert abs(res) < 1e-8
        # lower bound of the K-energy against the Ding functional
        path = linear_path(phi)
        gap = e0_tilde(bg, path) - f_tilde(bg, phi, path) + u0_term
        assert gap >= -1e-8
        # weighted I dominates weighted J
        assert i_tilde(bg, phi) - j_tilde(bg, path) >= -1e-10


@pytest.mark.parametrize("backend,kappa", [("p1_radial", 1.0), ("calabi_fiber", -0.5)])
def test_pali_recombination(backend, kappa):
    grid = 64 if backend == "p1_radial" else 96
    bg = make_background(backend, grid, kappa)
    rng = np.random.default_rng(8)
    for _ in range(5):
        phi = random_admissible(bg, rng)
        st = bg.metric_state(phi)
        path = linear_path(phi)
        rhs = (2.0 * e0_tilde(bg, path)
               + bg.wedge_ratio(st.u, st.u, None, 0, st)
               - bg.wedge_ratio(bg.u0, bg.u0, None, 0, None))
        assert e_k(bg, phi, 1, path) == pytest.approx(rhs, abs=1e-8)


def test_cocycle_condition(p1_k1, calabi_k):
    for bg in (p1_k1, calabi_k):
        rng = np.random.default_rng(9)
        for _ in range(10):
            phi = random_admissible(bg, rng)
            psi = random_admissible(bg, rng)
            bg2 = bg.rebase(phi)
            for k in range(bg.n + 1):
                lhs = e_k(bg, phi, k) + e_k(bg2, psi - phi, k)
                assert lhs == pytest.approx(e_k(bg, psi, k), abs=1e-7)


def test_constant_shift_invariance(p1_k1):
    bg = p1_k1
    rng = np.random.default_rng(10)
    phi = random_admissible(bg, rng)
    c = 0.83
    for fn in (
        lambda p: i_energy(bg, p),
        lambda p: i_tilde(bg, p),
        lambda p: j_tilde(bg, linear_path(p)),
        lambda p: f_tilde(bg, p),
        lambda p: e0_tilde(bg, linear_path(p)),
        lambda p: e_k(bg, p, 1),
        lambda p: g_k(bg, p, 1),
    ):
        assert fn(phi + c) == pytest.approx(fn(phi), abs=1e-9)


@settings(max_examples=12, deadline=None)
@given(shift=st.floats(-1.5, 1.5), seed=st.integers(0, 50))
def test_shift_invariance_property(shift, seed):
    bg = make_background("p1_radial", 32, kappa=1.0)
    phi = random_admissible(bg, np.random.default_rng(seed))
    assert f_tilde(bg, phi + shift) == pytest.approx(f_tilde(bg, phi), abs=1e-9)
    assert i_tilde(bg, phi + shift) == pytest.approx(i_tilde(bg, phi), abs=1e-9)


# -- k-th energies -------------------------------------------------------------


def test_g_k_trivial_and_sign(p1, calabi_k):
    z = RadialFunction.zeros(p1.grid)
    assert g_k(p1, z, 1) == 0.0
    rng = np.random.default_rng(12)
    phi = random_admissible(p1, rng)
    # on the unweighted line the reference term vanishes and the first wedge
    # energy of u is nonpositive
    assert g_k(p1, phi, 1) <= 0.0
    zc = RadialFunction.zeros(calabi_k.grid)
    for k in (1, 2):
        assert g_k(calabi_k, zc, k) == 0.0
    with pytest.raises(DegreeOutOfRange):
        g_k(p1, phi, 2)


def test_e_k_zero_endpoint(calabi_k):
    z = RadialFunction.zeros(calabi_k.grid)
    for k in range(3):
        assert abs(e_k(calabi_k, z, k)) < 1e-14


def test_c_constant_values(p1, p1_k1, calabi):
    assert c_constant(p1, 1) == 0.0
    # single-term case: minus the first wedge integral of u0
    expected = -p1_k1.wedge_ratio(p1_k1.u0, p1_k1.u0, None, 0, None)
    assert c_constant(p1_k1, 1) == pytest.approx(expected, rel=1e-14)
    with pytest.raises(DegreeOutOfRange):
        c_constant(calabi, 3)


def test_c_constant_refinement_oracle(calabi_k):
    fine = refined_background(calabi_k, factor=2)
    for k in (1, 2):
        assert c_constant(calabi_k, k) == pytest.approx(
            c_constant(fine, k), abs=1e-9)


def test_report_recombination_exact(calabi_k):
    rng = np.random.default_rng(13)
    phi = random_admissible(calabi_k, rng)
    rep = functional_report(calabi_k, phi)
    assert rep.E[0] == rep.E0
    for k in range(1, calabi_k.n + 1):
        expected = binomial_g_combination(calabi_k, phi, k) + (k + 1) * rep.E0
        assert rep.E[k] == pytest.approx(expected, rel=1e-12, abs=1e-14)
    assert np.isfinite([rep.I, rep.I_tilde, rep.J_tilde, rep.F_tilde]).all()


def cone_conditioned_sample(bg, rng, k, amplitude=0.25, tries=60):
    """Seeded admissible potential shrunk until the k-th cone condition holds."""
    phi = random_admissible(bg, rng, amplitude=amplitude)
    for _ in range(tries):
        if cone_membership(bg, phi, k) >= 0.0:
            return phi
        phi = RadialFunction(bg.grid, 0.75 * phi.samples)
    raise AssertionError("could not condition the sample into the cone")


def test_lemma_bound_proof_form(calabi_k):
    bg = calabi_k
    rng = np.random.default_rng(14)
    C2 = c_constant(bg, 2)
    for _ in range(8):
        phi = cone_conditioned_sample(bg, rng, 2)
        gap = e_k(bg, phi, 2) - 3.0 * e0_tilde(bg, linear_path(phi))
        assert gap - C2 >= -1e-8


# -- cone membership -----------------------------------------------------------


def test_cone_membership_reference_and_errors(calabi):
    st = calabi.reference_state()
    # at the reference the defect potential is u0 = log(x/2): the fiber
    # eigenvalue climbs to 1 at the collapsed end, so the margin is exactly 2
    margin = cone_membership(calabi, st, 2)
    assert margin == pytest.approx(2.0, abs=1e-9)
    du = calabi.grid.diff(calabi.u0.samples)
    fiber = calabi.grid.diff(calabi.profile * du) / st.dtau
    base = calabi.profile * du / st.tau
    node_min = min(np.min(3.0 - fiber), np.min(3.0 - base))
    assert margin <= node_min + 1e-12
    with pytest.raises(DegreeOutOfRange):
        cone_membership(calabi, st, 1)


def test_cone_membership_violated_by_curvature_spike(calabi):
    # a Kahler but strongly curved bump pushes the twisted Ricci bound negative
    bump = RadialFunction.from_callable(
        calabi.grid, lambda x: 0.1 * np.exp(-6.0 * (x - 2.0) ** 2))
    assert calabi.positivity_margin(bump) > 0.0
    assert cone_membership(calabi, bump, 2) < 0.0


def test_properness_scatter(p1_k1):
    rng = np.random.default_rng(15)
    z = RadialFunction.zeros(p1_k1.grid)
    pairs = properness_scatter(p1_k1, [z], 1)
    assert pairs[0][0] == 0.0 and abs(pairs[0][1]) < 1e-14
    consts = [RadialFunction.from_callable(p1_k1.grid, lambda x, a=a: a * np.ones_like(x))
              for a in (0.5, -0.7)]
    for I, E in properness_scatter(p1_k1, consts, 1):
        assert abs(I) < 1e-12 and abs(E) < 1e-9
    sample = [random_admissible(p1_k1, rng) for _ in range(3)]
    table = properness_scatter(p1_k1, sample, 1)
    assert np.isfinite(np.asarray(table)).all()


def test_random_admissible_margin_and_determinism(p1_pert):
    a = random_admissible(p1_pert, np.random.default_rng(42))
    b = random_admissible(p1_pert, np.random.default_rng(42))
    assert np.array_equal(a.samples, b.samples)
    assert p1_pert.positivity_margin(a) >= 0.2
