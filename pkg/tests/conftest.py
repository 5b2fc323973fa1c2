"""Shared fixtures and independent oracles.

The oracles use mpmath's high-level routines (``qp``, ``polyroots``, ``det``)
or exact rational arithmetic, never the package's own code paths.
"""

from __future__ import annotations

from fractions import Fraction

import mpmath
import pytest

from qasym.numerics import ScaledReal, make_context


@pytest.fixture
def ctx():
    return make_context("0.5")


@pytest.fixture(params=["0.3", "0.5", "0.7"])
def ctx_q(request):
    return make_context(request.param)


def mp_q(ctx, dps=120):
    mpmath.mp.dps = dps
    return mpmath.mpf(ctx.q_literal.numerator) / ctx.q_literal.denominator


def to_mp(x: ScaledReal):
    return mpmath.mpf(str(x.to_fraction().numerator)) / x.to_fraction().denominator


def rel_err(x: ScaledReal, ref) -> float:
    ref = mpmath.mpf(ref)
    if ref == 0:
        return float(abs(to_mp(x)))
    return float(abs(to_mp(x) - ref) / abs(ref))


def mp_gauss(n, k, q):
    if k < 0 or k > n:
        return mpmath.mpf(0)
    return mpmath.qp(q, q, n) / (mpmath.qp(q, q, k) * mpmath.qp(q, q, n - k))


def mp_sw_coeffs(n, q):
    """Coefficients of monic Stieltjes-Wigert ``S_n``, lowest degree first."""
    return [(-1) ** (n + k) * mp_gauss(n, k, q) * q ** (k * k + mpmath.mpf(k) / 2 - n * n - mpmath.mpf(n) / 2)
            for k in range(n + 1)]


def mp_laguerre_coeffs(n, a, q):
    pre = mpmath.qp(q ** (a + 1), q, n) / mpmath.qp(q, q, n)
    return [pre * mp_gauss(n, k, q) * q ** (k * k + a * k) * (-1) ** k / mpmath.qp(q ** (a + 1), q, k)
            for k in range(n + 1)]


def mp_polyval(coeffs, x):
    return mpmath.polyval(list(reversed(coeffs)), x)


def mp_derivative(coeffs, j):
    out = list(coeffs)
    for _ in range(j):
        out = [k * c for k, c in enumerate(out)][1:]
    return out


def frac_gauss(n: int, k: int, q: Fraction) -> Fraction:
    """Gaussian binomial from the q-Pascal recurrence."""
    if k < 0 or k > n:
        return Fraction(0)
    row = [Fraction(1)]
    for m in range(1, n + 1):
        new = [Fraction(1)] * (m + 1)
        for i in range(1, m):
            new[i] = row[i - 1] + q ** i * row[i]
        row = new
    return row[k]
