"""Symmetry-reduced Kahler calculus on two circle-invariant Fano backends.

Every geometric object is reduced to a function of the reference moment
coordinate x on a closed interval.  The two backends are

``p1_radial``
    The projective line with twice the Fubini-Study metric.  Moment
    interval [0, 2], reference momentum profile x(2-x)/2, reference Ricci
    potential 0, volume 4*pi.

``calabi_fiber``
    The plane blown up at a point, fibered over a line, with a
    circle-invariant metric in the anticanonical class.  Moment interval
    [1, 3] (forced by smooth compactification of the fibers together with
    the class normalization), reference momentum profile (x-1)(3-x)/2,
    reference Ricci potential log(2/x), volume 32*pi^2.

For a potential with total fiber convexity Q the reduced data are:
moment map tau = x + profile * d(potential)/dx, volume-density ratio
dtau/dx * (tau/x)^(n-1), and holomorphy potential kappa * (tau + const).
All normalization constants are closed-form logarithms of quadrature
values, never iterated.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Union

import numpy as np
from scipy.optimize import minimize_scalar

from .collocation import ChebGrid
from .errors import (
    DegreeOutOfRange,
    GridMismatch,
    NormalizationFailed,
    PositivityLost,
    UnsupportedBackend,
)

__all__ = [
    "RadialFunction",
    "HoloField",
    "MetricState",
    "Background",
    "make_background",
    "BACKEND_IDS",
]


def _softplus(z):
    return np.logaddexp(0.0, z)


class _P1Model:
    """Radial reduction of the projective line, class normalized to 4*pi."""

    backend_id = "p1_radial"
    n = 1
    x_lo, x_hi = 0.0, 2.0
    vol_coeff = 2.0 * np.pi          # integral of f w.r.t. omega^n = vol_coeff * int f m(x) dx
    wedge_coeff = 2.0 * np.pi        # fiber-times-base area factor for wedge integrands
    volume = 4.0 * np.pi

    @staticmethod
    def profile(x):
        return 0.5 * x * (2.0 - x)

    @staticmethod
    def measure_density(x):
        return np.ones_like(x)

    @staticmethod
    def h_model(x):
        return np.zeros_like(x)

    @staticmethod
    def s_of_x(x):
        return np.log(x) - np.log(2.0 - x)

    @staticmethod
    def flow_shift(x, a):
        # P(s + a) - P(s) for the reference fiber potential P = 2*softplus(s)
        s = _P1Model.s_of_x(x)
        return 2.0 * (_softplus(s + a) - _softplus(s))


class _CalabiModel:
    """Momentum reduction of the one-point blow-up fibered over a line."""

    backend_id = "calabi_fiber"
    n = 2
    x_lo, x_hi = 1.0, 3.0
    vol_coeff = 8.0 * np.pi**2
    wedge_coeff = 4.0 * np.pi**2
    volume = 32.0 * np.pi**2

    @staticmethod
    def profile(x):
        return 0.5 * (x - 1.0) * (3.0 - x)

    @staticmethod
    def measure_density(x):
        return np.asarray(x, dtype=float)

    @staticmethod
    def h_model(x):
        # Exact for the quadratic reference profile: dh/dx = -1/x with
        # the normalization that e^h integrates to the volume.
        return np.log(2.0) - np.log(x)

    @staticmethod
    def s_of_x(x):
        return np.log(x - 1.0) - np.log(3.0 - x)

    @staticmethod
    def flow_shift(x, a):
        # P(s+a) - P(s) with dP/dx = x/profile; the log-divergent pieces at
        # the interval ends cancel in the softplus combination.
        s = _CalabiModel.s_of_x(x)
        return (
            _softplus(-s)
            - _softplus(-s - a)
            + 3.0 * (_softplus(s + a) - _softplus(s))
        )


_MODELS = {m.backend_id: m for m in (_P1Model, _CalabiModel)}
BACKEND_IDS = tuple(_MODELS)


class RadialFunction:
    """A smooth radial profile sampled at the interior collocation nodes."""

    __slots__ = ("grid", "samples", "_endpoint")

    def __init__(self, grid: ChebGrid, samples):
        samples = np.asarray(samples, dtype=float)
        if samples.shape != (grid.n,):
            raise GridMismatch(
                f"expected {grid.n} samples, got shape {samples.shape}"
            )
        self.grid = grid
        self.samples = samples.copy()
        self.samples.setflags(write=False)
        self._endpoint = None

    @classmethod
    def zeros(cls, grid: ChebGrid) -> "RadialFunction":
        return cls(grid, np.zeros(grid.n))

    @classmethod
    def from_callable(cls, grid: ChebGrid, fn: Callable) -> "RadialFunction":
        return cls(grid, np.asarray(fn(grid.x), dtype=float))

    @property
    def endpoint_data(self):
        """Endpoint values and one-sided slopes of the interpolant."""
        if self._endpoint is None:
            v_lo, v_hi = self.grid.endpoint_values(self.samples)
            s_lo, s_hi = self.grid.endpoint_slopes(self.samples)
            self._endpoint = {
                "values": (v_lo, v_hi),
                "slopes": (s_lo, s_hi),
            }
        return self._endpoint

    def is_finite(self) -> bool:
        return bool(np.all(np.isfinite(self.samples)))

    def resolution_defect(self) -> float:
        """Relative size of the top fifth of the Chebyshev spectrum.

        Small values certify that the profile is resolved on this grid and
        extends smoothly to the closed moment interval.
        """
        n = self.grid.n
        theta = (2.0 * np.arange(n) + 1.0) * np.pi / (2.0 * n)
        vals = self.samples[::-1]  # descending-node order
        coeffs = np.array(
            [
                (2.0 - (k == 0)) / n * np.sum(vals * np.cos(k * theta))
                for k in range(n)
            ]
        )
        scale = np.max(np.abs(coeffs))
        if scale == 0.0:
            return 0.0
        tail = np.max(np.abs(coeffs[-max(2, n // 5):]))
        return float(tail / scale)

    def derivative(self) -> "RadialFunction":
        return RadialFunction(self.grid, self.grid.diff(self.samples))

    def at(self, xq):
        return self.grid.interpolate(self.samples, xq)

    def resample(self, grid: ChebGrid) -> "RadialFunction":
        if grid == self.grid:
            return self
        return RadialFunction(grid, self.grid.interpolate(self.samples, grid.x))

    # -- pointwise algebra, always on a shared grid ----------------------

    def _coerce(self, other):
        if isinstance(other, RadialFunction):
            self.grid.check_same(other.grid)
            return other.samples
        return other

    def __add__(self, other):
        return RadialFunction(self.grid, self.samples + self._coerce(other))

    __radd__ = __add__

    def __sub__(self, other):
        return RadialFunction(self.grid, self.samples - self._coerce(other))

    def __rsub__(self, other):
        return RadialFunction(self.grid, self._coerce(other) - self.samples)

    def __mul__(self, other):
        return RadialFunction(self.grid, self.samples * self._coerce(other))

    __rmul__ = __mul__

    def __neg__(self):
        return RadialFunction(self.grid, -self.samples)

    def __repr__(self):
        return f"RadialFunction(n={self.grid.n}, sup={np.max(np.abs(self.samples)):.3e})"


@dataclass(frozen=True)
class HoloField:
    """A holomorphic field as a multiple of the backend fiber generator.

    ``theta`` is the normalized holomorphy potential with respect to the
    background metric; kappa == 0 forces theta == 0.
    """

    kappa: float
    theta: RadialFunction


@dataclass(frozen=True)
class MetricState:
    """A Kahler potential with its derived pointwise data."""

    phi: RadialFunction
    ratio: np.ndarray          # omega_phi^n / omega^n at the nodes
    tau: np.ndarray            # total moment map of omega_phi
    dtau: np.ndarray           # d(tau)/dx, the fiber eigenvalue vs the model
    theta_phi: RadialFunction  # holomorphy potential of X w.r.t. omega_phi
    h_phi: RadialFunction      # Ricci potential of omega_phi (integral-normalized)
    u: RadialFunction          # log ratio + phi - h_omega + theta_phi
    model_density: np.ndarray  # omega_phi^n density against the model measure
    conservation_defect: float


_Profile = Union[None, RadialFunction, np.ndarray, Callable]


class Background:
    """A geometry backend instance: grid, measures, Ricci and holomorphy data.

    The background metric is the model metric deformed by ``base_potential``
    (zero for the standard reference).  All module operations are pure
    functions of immutable inputs; backgrounds can be shared freely across
    threads.
    """

    def __init__(self, model, grid: ChebGrid, kappa: float,
                 base_potential: Optional[RadialFunction] = None):
        self.model = model
        self.backend_id = model.backend_id
        self.n = model.n
        self.grid = grid
        self.kappa = float(kappa)

        x = grid.x
        self.profile = model.profile(x)
        self.measure = model.measure_density(x)
        if base_potential is None:
            base_potential = RadialFunction.zeros(grid)
        grid.check_same(base_potential.grid)
        self.base_potential = base_potential

        self.base_tau = self._total_tau(base_potential.samples)
        self.base_dtau = self._total_dtau(base_potential.samples)
        if np.any(self.base_dtau <= 0.0) or (self.n > 1 and np.any(self.base_tau <= 0.0)):
            node = int(np.argmin(self.base_dtau))
            raise PositivityLost(
                "background base potential is not Kahler", node=node,
                value=float(self.base_dtau[node]),
            )
        self.base_ratio = self.base_dtau * (self.base_tau / x) ** (self.n - 1)

        # quadrature weights for integrals against the background volume form
        self._ref_weights = model.vol_coeff * grid.w * self.measure * self.base_ratio
        self.V = float(np.sum(self._ref_weights))
        if not np.isfinite(self.V) or self.V <= 0.0:
            raise NormalizationFailed("volume quadrature is not finite")

        h_raw = (
            model.h_model(x)
            - np.log(self.base_ratio)
            - base_potential.samples
        )
        self.h_omega = RadialFunction(grid, h_raw + self._log_norm(h_raw))
        if self.kappa == 0.0:
            self.theta_X = RadialFunction.zeros(grid)
        else:
            th_raw = self.kappa * self.base_tau
            self.theta_X = RadialFunction(grid, th_raw + self._log_norm(th_raw))
        self.u0 = RadialFunction(
            grid, -self.h_omega.samples + self.theta_X.samples
        )
        self.field = HoloField(self.kappa, self.theta_X)
        self._reference_state = None

    # -- construction helpers ---------------------------------------------

    def _log_norm(self, raw: np.ndarray) -> float:
        """Constant c with integral of exp(raw + c) against the background equal to V."""
        val = np.sum(self._ref_weights * np.exp(raw)) / self.V
        if not np.isfinite(val) or val <= 0.0:
            raise NormalizationFailed("normalization quadrature is not finite")
        return -float(np.log(val))

    def _total_tau(self, psi_tot: np.ndarray) -> np.ndarray:
        return self.grid.x + self.profile * self.grid.diff(psi_tot)

    def _total_dtau(self, psi_tot: np.ndarray) -> np.ndarray:
        return 1.0 + self.grid.diff(self.profile * self.grid.diff(psi_tot))

    def _require_grid(self, f: RadialFunction) -> np.ndarray:
        self.grid.check_same(f.grid)
        return f.samples

    def as_radial(self, f: _Profile) -> RadialFunction:
        if f is None:
            return RadialFunction.zeros(self.grid)
        if isinstance(f, RadialFunction):
            self.grid.check_same(f.grid)
            return f
        if callable(f):
            return RadialFunction.from_callable(self.grid, f)
        return RadialFunction(self.grid, f)

    # -- fields -------------------------------------------------------------

    def holo_field(self, kappa: float) -> HoloField:
        """The field kappa * W with potential normalized against this background."""
        if kappa == 0.0:
            return HoloField(0.0, RadialFunction.zeros(self.grid))
        raw = kappa * self.base_tau
        return HoloField(float(kappa), RadialFunction(self.grid, raw + self._log_norm(raw)))

    # -- states ---------------------------------------------------------------

    def metric_state(self, phi: _Profile) -> MetricState:
        phi = self.as_radial(phi)
        psi_tot = self.base_potential.samples + phi.samples
        tau = self._total_tau(psi_tot)
        dtau = self._total_dtau(psi_tot)
        bad = (dtau <= 0.0) if self.n == 1 else (dtau <= 0.0) | (tau <= 0.0)
        if np.any(bad):
            node = int(np.argmax(bad))
            raise PositivityLost(
                f"potential loses the Kahler condition at node {node} "
                f"(x={self.grid.x[node]:.6f})",
                node=node,
                value=float(dtau[node]),
            )
        model_density = dtau * (tau / self.grid.x) ** (self.n - 1)
        ratio = model_density / self.base_ratio

        theta_phi = RadialFunction(
            self.grid,
            self.theta_X.samples
            + self.kappa * self.profile * self.grid.diff(phi.samples),
        )
        log_ratio = np.log(ratio)
        u = RadialFunction(
            self.grid,
            log_ratio + phi.samples - self.h_omega.samples + theta_phi.samples,
        )
        # Ricci potential, renormalized so exp(h_phi) integrates to V
        h_raw = self.h_omega.samples - log_ratio - phi.samples
        state_weights = self.model.vol_coeff * self.grid.w * self.measure * model_density
        val = np.sum(state_weights * np.exp(h_raw)) / self.V
        if not np.isfinite(val) or val <= 0.0:
            raise NormalizationFailed("Ricci potential normalization failed")
        h_phi = RadialFunction(self.grid, h_raw - np.log(val))

        cons = np.sum(state_weights * np.exp(theta_phi.samples)) / self.V - 1.0
        return MetricState(
            phi=phi,
            ratio=ratio,
            tau=tau,
            dtau=dtau,
            theta_phi=theta_phi,
            h_phi=h_phi,
            u=u,
            model_density=model_density,
            conservation_defect=float(abs(cons)),
        )

    def reference_state(self) -> MetricState:
        if self._reference_state is None:
            self._reference_state = self.metric_state(None)
        return self._reference_state

    # -- core operations -----------------------------------------------------

    def integrate(self, f: _Profile, state: Optional[MetricState] = None,
                  weight: str = "none") -> float:
        """Integral of f (optionally times e^theta) against omega_state^n."""
        f = self.as_radial(f)
        if state is None:
            density = self.base_ratio
            theta = self.theta_X.samples
        else:
            density = state.model_density
            theta = state.theta_phi.samples
        vals = f.samples
        if weight == "e_theta":
            vals = vals * np.exp(theta)
        elif weight != "none":
            raise ValueError(f"unknown weight {weight!r}")
        return float(
            np.sum(self.model.vol_coeff * self.grid.w * self.measure * density * vals)
        )

    def density_ratio(self, phi: _Profile) -> np.ndarray:
        """omega_phi^n / omega^n at the nodes; raises if positivity fails."""
        return self.metric_state(phi).ratio

    def theta_potential(self, X: HoloField, phi: _Profile) -> RadialFunction:
        """theta_X + X(phi), the potential of X for the deformed metric."""
        phi = self.as_radial(phi)
        self.grid.check_same(X.theta.grid)
        return RadialFunction(
            self.grid,
            X.theta.samples + X.kappa * self.profile * self.grid.diff(phi.samples),
        )

    def ricci_potential(self, phi: _Profile) -> RadialFunction:
        return self.metric_state(phi).h_phi

    def u_potential(self, phi: _Profile) -> RadialFunction:
        return self.metric_state(phi).u

    def wedge_ratio(self, a: RadialFunction, b: RadialFunction,
                    c: Optional[RadialFunction], j: int,
                    state: Optional[MetricState] = None) -> float:
        """(1/V) int sqrt(-1) da ^ dbar(b) ^ (sqrt(-1) d dbar c)^j ^ e^theta omega_phi^(n-1-j).

        Mixed radial wedge products reduce to weighted 1-D integrals of the
        first derivatives; only the j == 0 term sees the state metric.
        """
        if not (0 <= j <= self.n - 1):
            raise DegreeOutOfRange(f"wedge degree j={j} outside 0..{self.n - 1}")
        da = self.grid.diff(self._require_grid(a))
        db = self.grid.diff(self._require_grid(b))
        if state is None:
            tau = self.base_tau
            theta = self.theta_X.samples
        else:
            tau = state.tau
            theta = state.theta_phi.samples
        core = da * db * np.exp(theta)
        if self.n == 1:
            integrand = core * self.profile
        elif j == 0:
            integrand = core * self.profile * tau
        else:
            if c is None:
                raise ValueError("third profile required when j >= 1")
            dc = self.grid.diff(self._require_grid(c))
            integrand = core * dc * self.profile**2
        return float(
            self.model.wedge_coeff / self.V * np.sum(self.grid.w * integrand)
        )

    def weighted_laplacian(self, state: Optional[MetricState], f: RadialFunction,
                           X: Optional[HoloField] = None) -> RadialFunction:
        """(Delta_phi + X) f in reduced coordinates."""
        if state is None:
            state = self.reference_state()
        if X is None:
            X = self.field
        fs = self._require_grid(f)
        df = self.grid.diff(fs)
        fiber = self.grid.diff(self.profile * df) / state.dtau
        vals = fiber + X.kappa * self.profile * df
        if self.n > 1:
            vals = vals + (self.n - 1) * self.profile * df / state.tau
        return RadialFunction(self.grid, vals)

    def positivity_margin(self, phi: _Profile) -> float:
        """Signed minimum eigenvalue of the reduced metric of omega_phi vs omega.

        Positive iff omega_phi > 0.  The minimum is taken over a dense scan
        of the eigenvalue interpolants, polished by local minimization, so
        it tracks the true minimum over the closed moment interval.
        """
        phi = self.as_radial(phi)
        psi_tot = self.base_potential.samples + phi.samples
        e1 = self._total_dtau(psi_tot) / self.base_dtau
        candidates = [self._interp_min(e1)]
        if self.n > 1:
            e2 = self._total_tau(psi_tot) / self.base_tau
            candidates.append(self._interp_min(e2))
        return float(min(candidates))

    def _interp_min(self, vals: np.ndarray) -> float:
        g = self.grid
        dense = ChebGrid(g.lo, g.hi, 8 * g.n)
        xs = np.concatenate(([g.lo], dense.x, [g.hi]))
        ys = g.interpolate(vals, xs)
        k = int(np.argmin(ys))
        lo = xs[max(0, k - 1)]
        hi = xs[min(len(xs) - 1, k + 1)]
        if hi <= lo:
            return float(ys[k])
        res = minimize_scalar(
            lambda t: g.interpolate(vals, t),
            bounds=(lo, hi),
            method="bounded",
            options={"xatol": 1e-13},
        )
        return float(min(ys[k], res.fun))

    # -- rebasing ------------------------------------------------------------

    def rebase(self, phi: _Profile) -> "Background":
        """The background whose reference metric is omega_phi."""
        phi = self.as_radial(phi)
        return Background(
            self.model, self.grid, self.kappa,
            self.base_potential + phi,
        )

    def rebase_constant(self, phi: _Profile) -> float:
        """Constant c with integral of exp(h_omega - phi + c) omega^n equal to V."""
        phi = self.as_radial(phi)
        raw = self.h_omega.samples - phi.samples
        return self._log_norm(raw)

    def __repr__(self):
        return (
            f"Background({self.backend_id}, n_nodes={self.grid.n}, "
            f"kappa={self.kappa}, perturbed={np.any(self.base_potential.samples != 0.0)})"
        )


def make_background(backend_id: str, grid_size: int, kappa: float = 0.0,
                    perturbation: _Profile = None) -> Background:
    """Construct a backend instance on an interior collocation grid.

    ``perturbation`` deforms the reference metric by a fixed Kahler
    potential (the background stays in the same class); all normalizations
    are recomputed for the deformed metric.
    """
    model = _MODELS.get(backend_id)
    if model is None:
        raise UnsupportedBackend(
            f"backend {backend_id!r}; supported: {sorted(_MODELS)}"
        )
    if grid_size < 16:
        raise ValueError("grid_size must be at least 16")
    grid = ChebGrid(model.x_lo, model.x_hi, grid_size)
    base = None
    if perturbation is not None:
        if isinstance(perturbation, RadialFunction):
            base = perturbation.resample(grid)
        elif callable(perturbation):
            base = RadialFunction.from_callable(grid, perturbation)
        else:
            base = RadialFunction(grid, perturbation)
    return Background(model, grid, kappa, base)
