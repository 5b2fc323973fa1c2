"""Leading-order asymptotics of ``P_{n,j}`` with explicit error bounds.

Three regimes are covered:

* oscillatory, ``x = q**(-2m) y`` with ``m = floor(n l)``: theta-type sums
  ``X_{j,m}``;
* right tail, ``x = q**(n t) y`` with ``t >= 0``: ``Phi_j`` of the limiting
  coefficient sequence;
* left tail, ``x = q**(n t) y`` with ``t <= -2``: the finite sums ``Psi_{j,n}``.

The bounds are evaluated sums, not symbols.  Writing the exact value minus the
estimate as a sum over the coefficient index, each term is bounded by its
weight ``q**(k*k) M**|k| |falling factorial|`` times either the family's
closed-form coefficient deviation (inside the window ``|k| < d``) or the
crude bound ``uniform_bound + 1`` (outside it).  A floor of
``tail_tol * sum(weights)`` covers series truncation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Optional

from .numerics import QContext, RealLike, ScaledReal, as_fraction
from .qpoly import CoefficientFamily
from .qseries import CoefficientSequence, X_jm, falling, phi_j, psi_jn

OSCILLATORY = "oscillatory"
RIGHT_TAIL = "right_tail"
LEFT_TAIL = "left_tail"

# float sums of positive terms are inflated by this factor to absorb rounding
_SAFETY = 1.0 + 1e-9


class RegimeError(ValueError):
    """Arguments fall outside the range an estimate is valid for."""


@dataclass(frozen=True)
class AsymptoticWindow:
    n: int
    l: Fraction
    delta: Fraction
    M: float

    def __post_init__(self):
        if not 0 < self.l < 1:
            raise RegimeError("window centre l must lie in (0, 1)")
        if not 0 < self.delta < min(self.l, 1 - self.l):
            raise RegimeError("delta must lie in (0, min(l, 1-l))")
        if self.M < 1:
            raise RegimeError("uniformity radius M must be >= 1")

    @property
    def m(self) -> int:
        return math.floor(self.n * self.l)

    @property
    def d(self) -> int:
        return math.floor(self.n * self.delta)

    @classmethod
    def build(cls, n: int, l: RealLike, delta: RealLike | None = None,
              M: float | None = None, y: ScaledReal | None = None) -> "AsymptoticWindow":
        """Window with defaults ``delta = min(l, 1-l)/2`` and ``M = max(|y|, 1/|y|) + 1``."""
        l = as_fraction(l)
        delta = min(l, 1 - l) / 2 if delta is None else as_fraction(delta)
        return cls(n, l, delta, _default_M(y) if M is None else float(M))


@dataclass(frozen=True)
class AsymptoticEstimate:
    """Leading term, an upper bound on ``|exact - value|`` and the regime.

    ``scale`` is the magnitude of the prefactor pulled out of the bracket, so
    ``error_bound / scale`` is the bound on the bracketed (normalized) error.
    """

    value: ScaledReal
    error_bound: ScaledReal
    regime: str
    scale: ScaledReal

    @property
    def relative_bound(self) -> float:
        return float(self.error_bound / self.scale)


def _default_M(y: ScaledReal | None) -> float:
    if y is None or y.is_zero():
        return 2.0
    mag = abs(y.log2_abs())
    return 2.0 ** mag + 1.0


def _log_weight(lq: float, log_m: float, k: int, ff: int) -> float:
    if ff == 0:
        return -math.inf
    return -lq * k * k + log_m * abs(k) + math.log(abs(ff))


def _positive_sum(terms: Iterable[float]) -> float:
    return math.fsum(terms) * _SAFETY


def _series_tail(log_term: Callable[[int], float], start: int, step: int) -> float:
    """``sum_{i >= 0} exp(log_term(start + step*i))`` for eventually log-concave terms."""
    total = 0.0
    k = start
    prev = None
    for _ in range(100000):
        lt = log_term(k)
        term = math.exp(lt) if lt > -745 else 0.0
        if prev is not None and lt != -math.inf and prev != -math.inf:
            log_ratio = lt - prev
            if log_ratio < math.log(0.5) and (term == 0.0 or term < 1e-40 * total):
                # remaining terms dominated by a geometric series with this ratio
                r = math.exp(log_ratio)
                return (total + term / (1 - r)) * _SAFETY
        total += term
        prev = lt
        k += step
    raise ArithmeticError("bound series did not converge")


def _noise_floor(ctx: QContext) -> float:
    return max(ctx.tail_tol, 2.0 ** (-ctx.prec + 16))


def oscillatory_estimate(ctx: QContext, family: CoefficientFamily, n: int, j: int,
                         window: AsymptoticWindow, y: RealLike) -> AsymptoticEstimate:
    """``P_{n,j}(q**(-2m) y) ~ q**(-m*m) (-y)**m X_{j,m}(-y)``."""
    y = ctx.scalar(y)
    if window.n != n:
        raise RegimeError("window was built for a different degree")
    if y.is_zero() or abs(y.log2_abs()) > math.log2(window.M) + 1e-12:
        raise RegimeError("need 1/M <= |y| <= M")
    if family.deviation is None:
        raise RegimeError(f"family {family.name} supplies no oscillatory deviation bound")
    m, d = window.m, window.d
    neg_y = -y
    scale = abs(ctx.power(-m * m) * neg_y ** m)
    prefactor = ctx.power(-m * m) * neg_y ** m
    value = prefactor * X_jm(ctx, j, m, neg_y)

    lq = -ctx.log_q
    log_m = math.log(window.M)
    inside = []
    for k in range(-d + 1, d):
        w = _log_weight(lq, log_m, k, falling(k + m, j))
        if w > -math.inf:
            inside.append(math.exp(w) * family.deviation(ctx, n, k + m))
    outside_factor = family.uniform_bound + 1.0
    tail_up = _series_tail(lambda k: _log_weight(lq, log_m, k, falling(k + m, j)), max(d, 0), 1)
    tail_down = _series_tail(lambda k: _log_weight(lq, log_m, k, falling(k + m, j)), -max(d, 1), -1)
    total_weight = (_series_tail(lambda k: _log_weight(lq, log_m, k, falling(k + m, j)), 0, 1)
                    + _series_tail(lambda k: _log_weight(lq, log_m, k, falling(k + m, j)), -1, -1))
    bracket = (_positive_sum(inside) + outside_factor * (tail_up + tail_down)
               + _noise_floor(ctx) * total_weight)
    return AsymptoticEstimate(value, scale * ctx.scalar(bracket), OSCILLATORY, scale)


def right_tail_estimate(ctx: QContext, family: CoefficientFamily, a: Optional[CoefficientSequence],
                        n: int, j: int, t: RealLike, y: RealLike, delta: RealLike = Fraction(1, 2),
                        M: float | None = None) -> AsymptoticEstimate:
    """``P_{n,j}(q**(n t) y) ~ Phi_j(-q**(n t) y)`` for ``t >= 0``."""
    t = as_fraction(t)
    delta = as_fraction(delta)
    if t < 0:
        raise RegimeError("right tail needs t >= 0")
    if not 0 < delta < 1:
        raise RegimeError("delta must lie in (0, 1)")
    a = a or family.right_limit
    if a is None or family.right_deviation is None:
        raise RegimeError(f"family {family.name} supplies no right-tail limit")
    y = ctx.scalar(y)
    M = _default_M(y) if M is None else float(M)
    if not y.is_zero() and y.log2_abs() > math.log2(M) + 1e-12:
        raise RegimeError("need |y| <= M")
    x = ctx.power(n * t) * y
    value = phi_j(ctx, a, j, -x)

    d = math.floor(n * delta)
    lq = -ctx.log_q
    log_m = math.log(M)
    a_bound = a.bound_for(ctx)

    def lw(k: int) -> float:
        return _log_weight(lq, log_m, k, falling(k, j))

    inside = [math.exp(lw(k)) * family.right_deviation(ctx, n, k)
              for k in range(0, min(d, n + 1)) if lw(k) > -745]
    middle = [math.exp(lw(k)) for k in range(d, n + 1) if lw(k) > -745]
    beyond = _series_tail(lw, n + 1, 1)
    bracket = (_positive_sum(inside) + (family.uniform_bound + a_bound) * _positive_sum(middle)
               + a_bound * beyond + _noise_floor(ctx) * a_bound * _series_tail(lw, 0, 1))
    one = ScaledReal.one(ctx.prec)
    return AsymptoticEstimate(value, ctx.scalar(bracket), RIGHT_TAIL, one)


def left_tail_estimate(ctx: QContext, family: CoefficientFamily, a: Optional[CoefficientSequence],
                       n: int, j: int, t: RealLike, y: RealLike, delta: RealLike = Fraction(1, 2),
                       M: float | None = None) -> AsymptoticEstimate:
    """``P_{n,j}(q**(n t) y) ~ (-q**(n+nt) y)**n Psi_{j,n}(-q**(-2n-nt)/y)`` for ``t <= -2``."""
    t = as_fraction(t)
    delta = as_fraction(delta)
    if t > -2:
        raise RegimeError("left tail needs t <= -2")
    if not 0 < delta < 1:
        raise RegimeError("delta must lie in (0, 1)")
    a = a or family.left_limit
    if a is None or family.left_deviation is None:
        raise RegimeError(f"family {family.name} supplies no left-tail limit")
    y = ctx.scalar(y)
    if y.is_zero():
        raise RegimeError("left tail needs y != 0")
    M = _default_M(y) if M is None else float(M)
    if -y.log2_abs() > math.log2(M) + 1e-12:
        raise RegimeError("need |y| >= 1/M")
    prefactor = (-ctx.power(n + n * t) * y) ** n
    z = -ctx.power(-2 * n - n * t) / y
    value = prefactor * psi_jn(ctx, a, j, n, z)

    d = math.floor(n * delta)
    lq = -ctx.log_q
    log_m = math.log(M)
    a_bound = a.bound_for(ctx)

    def lw(k: int) -> float:
        return _log_weight(lq, log_m, k, falling(n - k, j))

    inside = [math.exp(lw(k)) * family.left_deviation(ctx, n, k)
              for k in range(0, min(d, n + 1)) if lw(k) > -745]
    middle = [math.exp(lw(k)) for k in range(d, n + 1) if lw(k) > -745]
    everything = [math.exp(lw(k)) for k in range(0, n + 1) if lw(k) > -745]
    bracket = (_positive_sum(inside) + (family.uniform_bound + a_bound) * _positive_sum(middle)
               + _noise_floor(ctx) * a_bound * _positive_sum(everything))
    scale = abs(prefactor)
    return AsymptoticEstimate(value, scale * ctx.scalar(bracket), LEFT_TAIL, scale)


def sw_scaled_leading(ctx: QContext, n: int, t: RealLike, u: RealLike) -> ScaledReal:
    """Leading term of ``S_n(q**(-n t) u)`` for ``0 < t < 2`` (theta form).

    ``Theta(-q**(-nt+2m+1/2) u) / ((-1)**n (q;q)_n q**(n^2-m^2+nmt+(n-m)/2) (-u)**(-m))``
    with ``m = floor(n t / 2)``.
    """
    from .qseries import q_factorials, theta

    t = as_fraction(t)
    if not 0 < t < 2:
        raise RegimeError("need 0 < t < 2")
    u = ctx.scalar(u)
    m = math.floor(n * t / 2)
    arg = -ctx.power(-n * t + 2 * m + Fraction(1, 2)) * u
    denom = (q_factorials(ctx, n)[n] * ctx.power(n * n - m * m + n * m * t + Fraction(n - m, 2))
             / (-u) ** m)
    if n % 2:
        denom = -denom
    return theta(ctx, arg) / denom
