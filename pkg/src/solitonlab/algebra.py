"""Exact verification of the binomial wedge identities behind the k-th energies.

Both checks are finite algebraic statements, so they are carried out in
exact rational arithmetic; the float entry points only convert at the end.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import sympy as sp

__all__ = [
    "CoeffTable",
    "wedge_binomial_identity",
    "p_expansion_coeffs",
    "reconstruction_residual",
]

_x = sp.Symbol("x")


def _lhs_poly(k: int) -> sp.Expr:
    return sp.expand(
        sum(sp.binomial(k + 1, i) * (_x - 1) ** (k - i - 1) for i in range(k))
    )


def _rhs_poly(k: int) -> sp.Expr:
    return sp.expand(sum(i * _x ** (k - i) for i in range(1, k + 1)))


@dataclass(frozen=True)
class CoeffTable:
    """Taylor coefficients a_2..a_k of the weight polynomial about -2/(k-1)."""

    k: int
    a: list


def wedge_binomial_identity(k: int, x_samples) -> float:
    """Max residual of the binomial collapse identity over the samples.

    The two sides agree as polynomials, so with exact rational evaluation
    the residual is exactly 0; the returned float is the max absolute
    difference over ``x_samples``.
    """
    if not (1 <= k <= 12):
        raise ValueError("k must lie in 1..12")
    diff = sp.expand(_lhs_poly(k) - _rhs_poly(k))
    residual = Fraction(0)
    for xv in x_samples:
        if isinstance(xv, (int, Fraction)):
            val = diff.subs(_x, sp.Rational(Fraction(xv)))
            residual = max(residual, abs(Fraction(str(val)) if val != 0 else Fraction(0)))
        else:
            val = diff.subs(_x, sp.Float(xv, 30))
            residual = max(residual, Fraction(abs(float(val))))
    return float(residual)


def p_expansion_coeffs(k: int) -> CoeffTable:
    """Expand P(x) = sum_{i=1..k} i x^(k-i) about x0 = -2/(k-1).

    Returns a_i = P^(k-i)(x0)/(k-i)! for i = 2..k; exact rationals.  The
    i = 1 coefficient is 1 by construction and is omitted, matching the
    shifted-power reconstruction P(x) = (x - x0)^(k-1) + sum a_i (x - x0)^(k-i).
    """
    if not (2 <= k <= 12):
        raise ValueError("k must lie in 2..12")
    P = _rhs_poly(k)
    x0 = sp.Rational(-2, k - 1)
    a = []
    for i in range(2, k + 1):
        deriv = sp.diff(P, _x, k - i)
        a_i = deriv.subs(_x, x0) / sp.factorial(k - i)
        a.append(Fraction(int(sp.fraction(a_i)[0]), int(sp.fraction(a_i)[1])))
    return CoeffTable(k=k, a=a)


def reconstruction_residual(k: int, x_samples) -> float:
    """Max residual of P against its shifted-power expansion over the samples.

    Rational samples are evaluated exactly (residual 0); float samples fall
    back to a relative residual against the magnitude of P.
    """
    table = p_expansion_coeffs(k)
    x0 = Fraction(-2, k - 1)
    res = Fraction(0)
    res_f = 0.0
    for xv in x_samples:
        if isinstance(xv, (int, Fraction)):
            xq = Fraction(xv)
            p_val = sum(i * xq ** (k - i) for i in range(1, k + 1))
            e_val = (xq - x0) ** (k - 1) + sum(
                a * (xq - x0) ** (k - i)
                for i, a in zip(range(2, k + 1), table.a)
            )
            res = max(res, abs(p_val - e_val))
        else:
            p_val = sum(i * float(xv) ** (k - i) for i in range(1, k + 1))
            e_val = float(xv - float(x0)) ** (k - 1) + sum(
                float(a) * float(xv - float(x0)) ** (k - i)
                for i, a in zip(range(2, k + 1), table.a)
            )
            res_f = max(res_f, abs(p_val - e_val) / max(1.0, abs(p_val)))
    return max(float(res), res_f)
