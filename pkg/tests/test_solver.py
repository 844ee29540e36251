import numpy as np
import pytest

from solitonlab.errors import (
    InsufficientPathResolution,
    StepUnderflow,
)
from solitonlab.functionals import linear_path, e0_tilde, random_admissible
from solitonlab.geometry import RadialFunction, make_background
from solitonlab.solver import (
    continuity_path,
    family_path,
    identity_path_points,
    infimum_report,
    path_csv_rows,
    path_functional_identities,
    richardson,
    solve_at_t,
    terminal_ladder,
    write_path_csv,
)


def test_round_reference_solution_is_zero(p1):
    for t in (0.0, 0.4, 0.9):
        pt = solve_at_t(p1, t)
        assert np.max(np.abs(pt.phi.samples)) < 1e-12
        assert pt.residual < 1e-12


def test_t_out_of_range(p1):
    with pytest.raises(ValueError):
        solve_at_t(p1, 1.0)


def test_accepted_point_invariants(p1_pert):
    for t in (0.0, 0.5, 0.95):
        pt = solve_at_t(p1_pert, t)
        assert pt.residual <= 1e-10
        assert pt.monitors["conservation_defect"] <= 1e-8
        assert pt.monitors["u_identity_defect"] <= 1e-8


def test_solution_matches_refined_grid(p1_pert):
    from conftest import p1_perturbation

    fine = make_background("p1_radial", 128, kappa=0.0,
                           perturbation=p1_perturbation)
    for t in (0.0, 0.5):
        a = solve_at_t(p1_pert, t, monitors=False)
        b = solve_at_t(fine, t, monitors=False)
        diff = b.phi.at(p1_pert.grid.x) - a.phi.samples
        assert np.max(np.abs(diff)) < 1e-8


def test_u_equals_scaled_potential_at_half(p1_pert):
    pt = solve_at_t(p1_pert, 0.5, monitors=False)
    st = p1_pert.metric_state(pt.phi)
    assert np.max(np.abs(st.u.samples - 0.5 * pt.phi.samples)) < 1e-8


def test_continuity_path_monotone_monitors(p1_pert):
    pts = continuity_path(p1_pert, [0.0, 0.3, 0.6, 0.9, 0.999])
    imj = [p.monitors["Itilde_minus_Jtilde"] for p in pts]
    f0 = [p.monitors["F0_tilde"] for p in pts]
    assert np.all(np.diff(imj) >= -1e-9)
    assert np.all(np.diff(f0) <= 1e-9)
    for p in pts:
        assert p.monitors["cone_margin"] >= -1e-10


def test_obstructed_path_breaks_down(calabi):
    with pytest.raises(StepUnderflow) as err:
        continuity_path(calabi, list(np.linspace(0.0, 0.999, 25)),
                        monitors=False)
    exc = err.value
    assert exc.last_t < 0.9
    hist = np.asarray(exc.history)
    assert hist[-1, 1] > 2.0 * hist[0, 1]
    assert len(exc.points) >= 1


def test_soliton_path_reaches_terminal(calabi_star):
    pts = continuity_path(calabi_star, [0.0, 0.5, 0.9, 0.999], monitors=False)
    assert pts[-1].t == pytest.approx(0.999, abs=1e-12)
    # Richardson extrapolation of the ladder solves the soliton equation
    lad = terminal_ladder(0.999, 4)
    by_t = {p.t: p for p in continuity_path(calabi_star, lad, monitors=False)}
    phis = np.array([by_t[t].phi.samples for t in lad])
    phi1 = np.array([richardson(phis[:, j]) for j in range(phis.shape[1])])
    st = calabi_star.metric_state(RadialFunction(calabi_star.grid, phi1))
    assert np.max(np.abs(st.u.samples)) < 1e-6


def test_path_identities_trivial_on_round(p1):
    ipath = identity_path_points(p1, t_max=0.995, n_intervals=3,
                                 gl_per_interval=6, ladder_levels=3)
    rec = path_functional_identities(p1, ipath)
    assert rec["c1_residual_max"] < 1e-12
    assert rec["prop_identity_residual_max"] < 1e-12
    assert rec["limit_formula_defect"] < 1e-12


def test_path_identities_perturbed(p1_pert):
    ipath = identity_path_points(p1_pert, t_max=0.999)
    rec = path_functional_identities(p1_pert, ipath)
    assert rec["residual_max"] <= 1e-10
    assert rec["conservation_max"] <= 1e-8
    assert rec["u_defect_max"] <= 1e-8
    assert rec["c1_residual_max"] <= 1e-6
    assert rec["prop_identity_residual_max"] <= 1e-6
    assert rec["limit_formula_defect"] <= 1e-5
    assert rec["imj_monotone_min_step"] >= -1e-9
    assert rec["f0_monotone_max_step"] <= 1e-9
    assert rec["binomial_gap_limit_k1"] <= 1e-5
    assert rec["a1_slack_min_k1"] >= -1e-8


def test_identity_path_resolution_guard(p1_pert):
    with pytest.raises(InsufficientPathResolution):
        identity_path_points(p1_pert, n_intervals=1)
    with pytest.raises(InsufficientPathResolution):
        identity_path_points(p1_pert, t_max=0.3)


def test_infimum_identity_p1(p1_pert):
    rep = infimum_report(p1_pert, ks=[0, 1])
    for k in (0, 1):
        assert rep[f"infimum_defect_k{k}"] <= 1e-5


def test_richardson_and_ladder():
    lad = terminal_ladder(0.999, 4)
    assert lad == pytest.approx([0.992, 0.996, 0.998, 0.999])
    # eliminates a two-term power series exactly
    eps = 1.0 - np.asarray(lad)
    vals = 3.0 + 2.0 * eps + 0.7 * eps**2
    assert richardson(vals) == pytest.approx(3.0, abs=1e-12)


def test_family_trivial_endpoint(p1_pert):
    res = family_path(p1_pert, None, s_grid=[0.0, 0.5, 1.0], t_grid=[0.3, 0.9])
    assert all(abs(c) < 1e-13 for c in res.c_s.values())
    assert max(res.deformation.values()) < 1e-10


def test_family_structure(p1_pert):
    rng = np.random.default_rng(21)
    psi = random_admissible(p1_pert, rng, margin=0.3)
    res = family_path(p1_pert, psi, s_grid=[0.0, 0.5, 1.0],
                      t_grid=[0.05, 0.5, 0.999])
    assert res.h_norm_defect < 1e-9
    assert res.theta_norm_defect < 1e-9
    assert res.hat_equation_defect < 1e-9
    ts = sorted(res.deformation)
    ratios = [res.deformation[b] / res.deformation[a]
              for a, b in zip(ts[-3:-1], ts[-2:])]
    assert all(abs(r - 0.5) < 0.03 for r in ratios)
    assert res.theorem3_gap >= -1e-5


def test_path_csv_contract(p1_pert, tmp_path):
    pts = continuity_path(p1_pert, [0.0, 0.5, 0.9])
    header, rows = path_csv_rows(pts, p1_pert.n)
    assert header == ["t", "residual", "I", "Itilde_minus_Jtilde", "F_tilde",
                      "E_0", "E_1", "conservation_defect", "u_defect"]
    assert len(rows) == 3 and all(len(r) == len(header) for r in rows)
    out = tmp_path / "path.csv"
    write_path_csv(out, pts, p1_pert.n)
    text = out.read_text().splitlines()
    assert text[0] == ",".join(header)
    assert len(text) == 4
