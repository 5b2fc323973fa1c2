"""q-Pochhammer symbols, Gaussian binomials and theta-type series.

All bilateral and one-sided series are truncated by an explicit tail bound:
the omitted terms are dominated by a geometric series once the term ratio
``q**(2k+1) * R`` drops below one.  The first pass measures the tail against
the largest unweighted term ``q**(k*k) * R**k``; sums that cancel heavily are
redone with a tighter cutoff and more bits, so the tolerance ends up relative
to the value itself.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Union

from .numerics import QContext, RealLike, ScaledReal

INFINITY = math.inf

_GUARD_BITS = 32
_MAX_REFINEMENTS = 4


@dataclass(frozen=True)
class TailPolicy:
    target_tol: float
    max_terms: int = 10**6

    def __post_init__(self):
        if not self.target_tol > 0:
            raise ValueError("target_tol must be positive")
        if self.max_terms < 1:
            raise ValueError("max_terms must be positive")


def default_policy(ctx: QContext) -> TailPolicy:
    return TailPolicy(ctx.tail_tol)


@dataclass(frozen=True)
class CoefficientSequence:
    """A uniformly bounded sequence ``a_k`` evaluated at context precision.

    ``bound`` is either a constant or a function of the context (for
    sequences such as ``1/(q;q)_k`` whose bound depends on q).
    """

    name: str
    generator: Callable[[QContext, int], ScaledReal]
    bound: Union[float, Callable[[QContext], float]] = 1.0

    def __call__(self, ctx: QContext, k: int) -> ScaledReal:
        return self.generator(ctx, k)

    def bound_for(self, ctx: QContext) -> float:
        return self.bound(ctx) if callable(self.bound) else float(self.bound)


class TruncationError(ArithmeticError):
    """A series needs more terms than the policy allows."""


def falling(n: int, j: int) -> int:
    """``n (n-1) ... (n-j+1)``, exactly; equals ``(-n)_j (-1)**j``."""
    out = 1
    for i in range(j):
        out *= n - i
    return out


# -- products --------------------------------------------------------------


def q_pochhammer(ctx: QContext, a: RealLike, n=INFINITY) -> ScaledReal:
    """``(a; q)_n`` for finite ``n`` or ``n = INFINITY``."""
    a = ctx.scalar(a)
    prec = ctx.prec
    one = ScaledReal.one(prec + _GUARD_BITS)
    noise = -(prec - 8)
    if n != INFINITY:
        if n < 0:
            raise ValueError("negative Pochhammer length")
        n = int(n)
    result = one
    if a.is_zero() or n == 0:
        return result.with_prec(prec)
    q = ctx.q.with_prec(prec + _GUARD_BITS)
    term = a.with_prec(prec + _GUARD_BITS)
    stop = math.log2(ctx.tail_tol * (1 - ctx.q_float))
    m = 0
    while True:
        if n != INFINITY and m >= n:
            break
        if n == INFINITY and term.log2_abs() < stop:
            break
        factor = one - term
        if factor.log2_abs() < noise:
            return ScaledReal.zero(prec)
        result = result * factor
        term = term * q
        m += 1
    return result.with_prec(prec)


@lru_cache(maxsize=512)
def q_factorials(ctx: QContext, n: int) -> tuple:
    """``((q;q)_0, (q;q)_1, ..., (q;q)_n)``."""
    out = [ScaledReal.one(ctx.prec)]
    for i in range(1, n + 1):
        out.append(out[-1] * (1 - ctx.power(i)))
    return tuple(out)


def gauss_binomial(ctx: QContext, n: int, k: int) -> ScaledReal:
    if k < 0 or k > n or n < 0:
        return ScaledReal.zero(ctx.prec)
    k = min(k, n - k)
    num = ScaledReal.one(ctx.prec)
    den = ScaledReal.one(ctx.prec)
    for i in range(1, k + 1):
        num = num * (1 - ctx.power(n - k + i))
        den = den * (1 - ctx.power(i))
    return num / den


# -- series ----------------------------------------------------------------


def _log_term(lq: float, lr: float, k: int, c: int, j: int) -> float:
    """``log(q**(k*k) * R**k * (k + c)**j)`` with ``lq = -log q``."""
    poly = j * math.log(k + c) if j and k + c > 0 else 0.0
    return -lq * k * k + lr * k + poly


def _peak_log(lq: float, lr: float) -> float:
    k = max(0, int(lr / (2 * lq)))
    return max(0.0, max(-lq * i * i + lr * i for i in (k, k + 1)))


def tail_cutoff(ctx: QContext, log_r: float, c: int, j: int, tol: float,
                max_terms: int, weight: float = 1.0, sides: int = 2) -> int:
    """Smallest K whose omitted terms ``|k| > K`` sum below ``tol * peak``.

    Terms are bounded by ``weight * q**(k*k) * R**k * (k + c)**j`` with
    ``log_r = log R >= 0``; ``sides`` is 2 for bilateral sums.
    """
    lq = -ctx.log_q
    lr = max(log_r, 0.0)
    target = math.log(tol / 4) + _peak_log(lq, lr) - math.log(max(weight, 1e-300)) - math.log(sides)
    k = max(0, math.ceil(lr / (2 * lq)) + 1)
    while True:
        if k > max_terms:
            raise TruncationError(f"series cutoff exceeds {max_terms} terms")
        first = k + 1
        # ratio of consecutive bounds, decreasing in k past the peak
        log_ratio = -lq * (2 * first + 1) + lr
        if j:
            log_ratio += j * math.log1p(1.0 / (first + c)) if first + c > 0 else 0.0
        if log_ratio < 0:
            tail = _log_term(lq, lr, first, c, j) - math.log1p(-math.exp(log_ratio))
            if tail < target:
                return k
        k += 1


def _abs_log(x: ScaledReal) -> float:
    return abs(x.log2_abs()) * math.log(2)


def _cancellation_safe(ctx: QContext, tol: float, cutoff_for: Callable[[float], int],
                       accumulate: Callable[[QContext, int], tuple],
                       cutoff: int | None = None) -> ScaledReal:
    """Sum a series to ``tol`` relative to its value rather than its largest term.

    ``accumulate(work, K)`` returns ``(sum, sum of |terms|)`` over the first
    ``K`` terms.  When the sum is much smaller than its terms, the cutoff is
    tightened and the working precision raised by the observed cancellation;
    a sum still below ``2**-prec`` of its terms after that is reported as 0.
    """
    cap = float(ctx.prec)
    rel_log2 = 0.0
    total = ScaledReal.zero(ctx.prec)
    for _ in range(_MAX_REFINEMENTS):
        k = cutoff if cutoff is not None else cutoff_for(tol * 2.0 ** -rel_log2)
        work = ctx.with_bits(ctx.prec + _GUARD_BITS + k.bit_length() + math.ceil(rel_log2))
        total, size = accumulate(work, k)
        if total.is_zero():
            return ScaledReal.zero(ctx.prec)
        lost = size.log2_abs() - total.log2_abs()
        if lost <= rel_log2 + 1:
            return total.with_prec(ctx.prec)
        if rel_log2 >= cap:
            return ScaledReal.zero(ctx.prec)
        rel_log2 = min(lost + 1, cap)
    return ScaledReal.zero(ctx.prec) if lost > cap else total.with_prec(ctx.prec)


def X_jm(ctx: QContext, j: int, m: int, x: RealLike, policy: TailPolicy | None = None,
         cutoff: int | None = None) -> ScaledReal:
    """``sum_k q**(k*k) * x**k * (-k-m)_j * (-1)**j`` over all integers k."""
    if j < 0:
        raise ValueError("j must be nonnegative")
    policy = policy or default_policy(ctx)
    x = ctx.scalar(x)
    if x.is_zero():
        raise ValueError("X_jm is undefined at x = 0")
    log_x = _abs_log(x)

    def cutoff_for(tol: float) -> int:
        return tail_cutoff(ctx, log_x, abs(m) + j, j, tol, policy.max_terms)

    def accumulate(work: QContext, K: int) -> tuple:
        xw = x.with_prec(work.prec)
        inv = 1 / xw
        total = ScaledReal.zero(work.prec)
        size = ScaledReal.zero(work.prec)
        up = ScaledReal.one(work.prec)
        down = ScaledReal.one(work.prec)
        for k in range(K + 1):
            weight = work.power(k * k)
            for sgn, xp in ((1, up), (-1, down)):
                if k == 0 and sgn < 0:
                    continue
                coeff = falling(sgn * k + m, j)
                if coeff == 0:
                    continue
                t = weight * xp * coeff
                total = total + t
                size = size + abs(t)
            up = up * xw
            down = down * inv
        return total, size

    return _cancellation_safe(ctx, policy.target_tol, cutoff_for, accumulate, cutoff)


def theta(ctx: QContext, z: RealLike, policy: TailPolicy | None = None) -> ScaledReal:
    return X_jm(ctx, 0, 0, z, policy)


def theta_j(ctx: QContext, j: int, z: RealLike, policy: TailPolicy | None = None) -> ScaledReal:
    """``z**j * Theta^{(j)}(z)``."""
    return X_jm(ctx, j, 0, z, policy)


def triple_product_F(ctx: QContext, z: RealLike) -> ScaledReal:
    """``sum_k q**(k*k/2) z**k`` via its Jacobi triple product."""
    z = ctx.scalar(z)
    if z.is_zero():
        raise ValueError("F is undefined at z = 0")
    p = ctx.p
    return (q_pochhammer(ctx, ctx.q) * q_pochhammer(ctx, -z * p)
            * q_pochhammer(ctx, -p / z))


def triple_product_F_series(ctx: QContext, z: RealLike) -> ScaledReal:
    """The bilateral series side of :func:`triple_product_F` (base-sqrt(q) theta)."""
    return X_jm(ctx.rebase(Fraction(1, 2)), 0, 0, z)


def phi_j(ctx: QContext, a: CoefficientSequence, j: int, z: RealLike,
          policy: TailPolicy | None = None, cutoff: int | None = None) -> ScaledReal:
    """``sum_{k>=0} a_k q**(k*k) z**k (-k)_j (-1)**j``."""
    policy = policy or default_policy(ctx)
    z = ctx.scalar(z)
    if z.is_zero():
        return a(ctx, 0) if j == 0 else ScaledReal.zero(ctx.prec)
    log_z = z.log2_abs() * math.log(2)

    def cutoff_for(tol: float) -> int:
        return tail_cutoff(ctx, log_z, 0, j, tol, policy.max_terms,
                           weight=a.bound_for(ctx), sides=1)

    def accumulate(work: QContext, K: int) -> tuple:
        zw = z.with_prec(work.prec)
        total = ScaledReal.zero(work.prec)
        size = ScaledReal.zero(work.prec)
        zp = ScaledReal.one(work.prec)
        for k in range(K + 1):
            coeff = falling(k, j)
            if coeff:
                t = a(work, k) * work.power(k * k) * zp * coeff
                total = total + t
                size = size + abs(t)
            zp = zp * zw
        return total, size

    return _cancellation_safe(ctx, policy.target_tol, cutoff_for, accumulate, cutoff)


def psi_jn(ctx: QContext, a: CoefficientSequence, j: int, n: int, z: RealLike) -> ScaledReal:
    """Finite sum ``sum_{k=0}^{n} a_k q**(k*k) z**k (-n+k)_j (-1)**j``."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    z = ctx.scalar(z)
    work = ctx.with_bits(ctx.prec + _GUARD_BITS)
    zw = z.with_prec(work.prec)
    total = ScaledReal.zero(work.prec)
    zp = ScaledReal.one(work.prec)
    for k in range(n + 1):
        coeff = falling(n - k, j)
        if coeff:
            total = total + a(work, k) * work.power(k * k) * zp * coeff
        zp = zp * zw
    return total.with_prec(ctx.prec)


# -- coefficient presets ---------------------------------------------------


def _unit(ctx: QContext, k: int) -> ScaledReal:
    return ScaledReal.one(ctx.prec)


def _q_airy(ctx: QContext, k: int) -> ScaledReal:
    val = 1 / q_factorials(ctx, k)[k]
    return -val if k % 2 else val


def _inverse_euler_bound(ctx: QContext) -> float:
    return 1.0 / float(q_pochhammer(ctx.with_bits(64).with_tail_tol(1e-12), ctx.q_float))


def _tail_pochhammer(ctx: QContext, k: int) -> ScaledReal:
    return q_pochhammer(ctx, ctx.power(k + 1))


UNIT = CoefficientSequence("unit", _unit, 1.0)
Q_AIRY = CoefficientSequence("q-airy", _q_airy, _inverse_euler_bound)
# limit of (q;q)_n [n, k] as n -> infinity
TAIL_POCHHAMMER = CoefficientSequence("tail-pochhammer", _tail_pochhammer, 1.0)
