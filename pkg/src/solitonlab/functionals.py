"""Energy functionals on the space of Kahler potentials.

Path-based functionals (the weighted K-energy and the J-type functional)
are computed by Gauss-Legendre quadrature along admissible paths from 0 to
the endpoint; everything else is a direct weighted quadrature.  The k-th
energies combine first-derivative wedge integrals of the soliton defect
potential u with binomial coefficients.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import comb
from typing import Iterator, Optional

import numpy as np

from .collocation import gauss_legendre_01
from .errors import DegreeOutOfRange, PathLeavesCone, PositivityLost
from .geometry import Background, HoloField, MetricState, RadialFunction

__all__ = [
    "PathSpec",
    "FunctionalReport",
    "linear_path",
    "bent_path",
    "reparam_path",
    "i_energy",
    "i_tilde",
    "j_tilde",
    "f_tilde",
    "e0_tilde",
    "g_k",
    "binomial_g_combination",
    "e_k",
    "c_constant",
    "cone_membership",
    "properness_scatter",
    "functional_report",
    "random_admissible",
]


@dataclass(frozen=True)
class PathSpec:
    """A path of potentials from 0 to ``endpoint`` inside the Kahler cone."""

    kind: str                      # linear | bent | reparam
    endpoint: RadialFunction
    bend: Optional[RadialFunction] = None
    t_nodes: int = 24

    def at(self, t: float) -> tuple[np.ndarray, np.ndarray]:
        """Return (phi_t, dphi_t/dt) samples at path parameter t."""
        phi = self.endpoint.samples
        if self.kind == "linear":
            return t * phi, phi
        if self.kind == "bent":
            chi = self.bend.samples
            return t * phi + t * (1.0 - t) * chi, phi + (1.0 - 2.0 * t) * chi
        if self.kind == "reparam":
            r = t * t * (3.0 - 2.0 * t)
            dr = 6.0 * t * (1.0 - t)
            return r * phi, dr * phi
        raise ValueError(f"unknown path kind {self.kind!r}")


def linear_path(phi: RadialFunction, t_nodes: int = 24) -> PathSpec:
    return PathSpec("linear", phi, None, t_nodes)


def bent_path(phi: RadialFunction, chi: RadialFunction, t_nodes: int = 24) -> PathSpec:
    return PathSpec("bent", phi, chi, t_nodes)


def reparam_path(phi: RadialFunction, t_nodes: int = 24) -> PathSpec:
    return PathSpec("reparam", phi, None, t_nodes)


def _path_states(bg: Background, path: PathSpec) -> Iterator[tuple[float, float, MetricState, np.ndarray]]:
    """Yield (weight, t, state, dphi/dt) at the Gauss-Legendre path nodes."""
    t_nodes, t_weights = gauss_legendre_01(path.t_nodes)
    for t, w in zip(t_nodes, t_weights):
        phi_t, dphi_t = path.at(float(t))
        try:
            state = bg.metric_state(RadialFunction(bg.grid, phi_t))
        except PositivityLost as exc:
            raise PathLeavesCone(
                f"{path.kind} path leaves the Kahler cone at t={t:.4f}"
            ) from exc
        yield float(w), float(t), state, dphi_t


@dataclass(frozen=True)
class FunctionalReport:
    """All functional values for one potential, with the recombination baked in."""

    I: float
    I_tilde: float
    J_tilde: float
    F_tilde: float
    E0: float
    G: list    # G_k for k = 1..n
    E: list    # E_k for k = 0..n
    C: list    # C_k for k = 1..n


# -- direct functionals -----------------------------------------------------


def i_energy(bg: Background, phi) -> float:
    """(1/V) int phi (omega^n - omega_phi^n); nonnegative on admissible potentials."""
    state = bg.metric_state(phi)
    return (
        bg.integrate(state.phi) - bg.integrate(state.phi, state)
    ) / bg.V


def i_tilde(bg: Background, phi) -> float:
    """Weighted version of the I functional with the holomorphy weight."""
    state = bg.metric_state(phi)
    return (
        bg.integrate(state.phi, None, "e_theta")
        - bg.integrate(state.phi, state, "e_theta")
    ) / bg.V


def j_tilde(bg: Background, path: PathSpec) -> float:
    """Path integral of the weighted J-type 1-form; path independent."""
    total = 0.0
    for w, _t, state, dphi in _path_states(bg, path):
        f = RadialFunction(bg.grid, dphi)
        total += w * (
            bg.integrate(f, None, "e_theta") - bg.integrate(f, state, "e_theta")
        )
    return total / bg.V


def f_tilde(bg: Background, phi, path: Optional[PathSpec] = None) -> float:
    """The weighted Ding-type functional (J-part minus linear and log terms)."""
    phi = bg.as_radial(phi)
    if path is None:
        path = linear_path(phi)
    lin = bg.integrate(phi, None, "e_theta") / bg.V
    log_arg = (
        bg.integrate(
            RadialFunction(bg.grid, np.exp(bg.h_omega.samples - phi.samples))
        )
        / bg.V
    )
    return j_tilde(bg, path) - lin - float(np.log(log_arg))


def e0_tilde(bg: Background, path: PathSpec) -> float:
    """Weighted K-energy along the path (path independent for admissible paths)."""
    total = 0.0
    for w, _t, state, dphi in _path_states(bg, path):
        f = RadialFunction(bg.grid, dphi)
        total += w * bg.wedge_ratio(f, state.u, None, 0, state)
    return -bg.n * total


# -- k-th energies ----------------------------------------------------------


def g_k(bg: Background, phi_or_state, k: int) -> float:
    """The k-th wedge energy of the soliton defect potential u."""
    if not (1 <= k <= bg.n):
        raise DegreeOutOfRange(f"k={k} outside 1..{bg.n}")
    state = phi_or_state if isinstance(phi_or_state, MetricState) else bg.metric_state(phi_or_state)
    return -bg.wedge_ratio(state.u, state.u, state.u, k - 1, state) + bg.wedge_ratio(
        bg.u0, bg.u0, bg.u0, k - 1, None
    )


def binomial_g_combination(bg: Background, phi_or_state, k: int) -> float:
    """sum_{i<k} (-1)^(k-i) binom(k+1, i) G_{k-i}; the curvature part of E_k."""
    state = phi_or_state if isinstance(phi_or_state, MetricState) else bg.metric_state(phi_or_state)
    return sum(
        (-1) ** (k - i) * comb(k + 1, i) * g_k(bg, state, k - i)
        for i in range(k)
    )


def e_k(bg: Background, phi, k: int, path: Optional[PathSpec] = None) -> float:
    """The k-th generalized energy: binomial G-combination plus (k+1) E_0."""
    if not (0 <= k <= bg.n):
        raise DegreeOutOfRange(f"k={k} outside 0..{bg.n}")
    phi = bg.as_radial(phi)
    if path is None:
        path = linear_path(phi)
    e0 = e0_tilde(bg, path)
    if k == 0:
        return e0
    return binomial_g_combination(bg, phi, k) + (k + 1) * e0


def c_constant(bg: Background, k: int) -> float:
    """The reference constant built from u0 that shifts E_k against (k+1) E_0."""
    if not (1 <= k <= bg.n):
        raise DegreeOutOfRange(f"k={k} outside 1..{bg.n}")
    return sum(
        (-1) ** (k - i)
        * comb(k + 1, i)
        * bg.wedge_ratio(bg.u0, bg.u0, bg.u0, k - i - 1, None)
        for i in range(k)
    )


# -- cone membership --------------------------------------------------------


def cone_membership(bg: Background, phi, k: int) -> float:
    """Signed margin of Ric_phi - L_X omega_phi + 2/(k-1) omega_phi >= 0.

    Eigenvalues are measured against omega_phi; membership holds iff the
    returned margin is nonnegative.  Only k >= 2 restricts the cone.
    """
    if k < 2:
        raise DegreeOutOfRange("cone condition only restricts k >= 2")
    state = phi if isinstance(phi, MetricState) else bg.metric_state(phi)
    du = bg.grid.diff(state.u.samples)
    # eigenvalues of i d dbar u relative to omega_phi
    fiber = bg.grid.diff(bg.profile * du) / state.dtau
    shift = 1.0 + 2.0 / (k - 1.0)
    margins = [bg._interp_min(shift - fiber)]
    if bg.n > 1:
        base = bg.profile * du / state.tau
        margins.append(bg._interp_min(shift - base))
    return float(min(margins))


def properness_scatter(bg: Background, phis, k: int) -> list:
    """Diagnostic (I, E_k) pairs for a sample of potentials; no assertion."""
    return [(i_energy(bg, p), e_k(bg, p, k)) for p in phis]


def functional_report(bg: Background, phi, t_nodes: int = 24) -> FunctionalReport:
    """Evaluate every functional and constant at one potential."""
    phi = bg.as_radial(phi)
    path = linear_path(phi, t_nodes)
    e0 = e0_tilde(bg, path)
    G = [g_k(bg, phi, k) for k in range(1, bg.n + 1)]
    C = [c_constant(bg, k) for k in range(1, bg.n + 1)]
    E = [e0]
    for k in range(1, bg.n + 1):
        comb_part = sum(
            (-1) ** (k - i) * comb(k + 1, i) * G[k - i - 1] for i in range(k)
        )
        E.append(comb_part + (k + 1) * e0)
    return FunctionalReport(
        I=i_energy(bg, phi),
        I_tilde=i_tilde(bg, phi),
        J_tilde=j_tilde(bg, path),
        F_tilde=f_tilde(bg, phi, path),
        E0=e0,
        G=G,
        E=E,
        C=C,
    )


# -- seeded admissible sampling --------------------------------------------


def random_admissible(bg: Background, rng: np.random.Generator,
                      margin: float = 0.2, modes: int = 6,
                      amplitude: float = 0.6) -> RadialFunction:
    """A seeded low-order smooth potential scaled until the Kahler margin holds."""
    coeffs = rng.standard_normal(modes) / (1.0 + np.arange(modes)) ** 2
    xi = (2.0 * bg.grid.x - (bg.grid.lo + bg.grid.hi)) / (bg.grid.hi - bg.grid.lo)
    samples = np.polynomial.chebyshev.chebval(xi, np.concatenate(([0.0], coeffs)))
    sup = np.max(np.abs(samples))
    if sup > 0.0:
        samples = samples * (amplitude / sup)
    phi = RadialFunction(bg.grid, samples)
    for _ in range(80):
        if bg.positivity_margin(phi) >= margin:
            return phi
        phi = RadialFunction(bg.grid, 0.75 * phi.samples)
    raise PathLeavesCone("could not scale the sample into the cone")
