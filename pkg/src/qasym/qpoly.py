"""q-polynomial families: exact construction, differentiation, evaluation.

A family is described by its coefficient function ``f_n(k)`` in

    P_n(x) = sum_{k=0}^{n} q**(k*k) f_n(k) (-x)**k

together with the deviation bounds the asymptotic estimates need.  The
classical polynomials (Stieltjes-Wigert, q^{-1}-Hermite, q-Laguerre) are
related to their family ``P_n`` by an explicit prefactor and argument scaling.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional, Sequence

from .numerics import QContext, RealLike, ScaledReal, as_fraction, stabilize
from .qseries import (
    TAIL_POCHHAMMER,
    UNIT,
    CoefficientSequence,
    falling,
    gauss_binomial,
    q_factorials,
    q_pochhammer,
)

Deviation = Callable[[QContext, int, int], float]


@dataclass(frozen=True)
class CoefficientFamily:
    """Coefficients ``f_n(k)`` plus the bounds used by the asymptotic estimates.

    ``deviation(ctx, n, k)`` bounds ``|f_n(k) - 1|``; ``right_deviation``
    bounds ``|f_n(k) - right_limit_k|`` and ``left_deviation`` bounds
    ``|f_n(n-k) - left_limit_k|``.  All three are closed-form bounds valid
    for every ``0 <= k <= n``.
    """

    name: str
    f: Callable[[QContext, int, int], ScaledReal]
    uniform_bound: float = 1.0
    params: tuple = ()
    deviation: Optional[Deviation] = None
    right_limit: Optional[CoefficientSequence] = None
    right_deviation: Optional[Deviation] = None
    left_limit: Optional[CoefficientSequence] = None
    left_deviation: Optional[Deviation] = None
    coefficients: Optional[Callable[[QContext, int], list]] = None

    def values(self, ctx: QContext, n: int) -> list:
        if self.coefficients is not None:
            return self.coefficients(ctx, n)
        return [self.f(ctx, n, k) for k in range(n + 1)]

    def eps_window(self, ctx: QContext, n: int, l: float, delta: float) -> float:
        """``sup |f_n(k) - 1|`` over ``n(l-delta) <= k <= n(l+delta)``."""
        lo = max(0, math.ceil(n * (l - delta)))
        hi = min(n, math.floor(n * (l + delta)))
        return max((self.deviation(ctx, n, k) for k in range(lo, hi + 1)), default=0.0)

    @property
    def tag(self) -> str:
        if not self.params:
            return self.name
        return self.name + "(" + ",".join(f"{k}={v}" for k, v in self.params) + ")"


@dataclass(frozen=True)
class QPolynomial:
    """``sum c_k x**k``; the zero polynomial has ``degree == -1``."""

    coefficients: tuple
    provenance: str = ""
    rebuild: Optional[Callable[[QContext], "QPolynomial"]] = field(default=None, compare=False, repr=False)

    @property
    def degree(self) -> int:
        return len(self.coefficients) - 1

    @property
    def leading_sign(self) -> int:
        return self.coefficients[-1].sign if self.coefficients else 0

    def is_zero(self) -> bool:
        return not self.coefficients


# -- deviation bounds ----------------------------------------------------------


def _sw_deviation(ctx: QContext, n: int, k: int) -> float:
    q = ctx.q_float
    return (q ** (k + 1) + q ** (n - k + 1)) / (1 - q)


def _sw_end_deviation(ctx: QContext, n: int, k: int) -> float:
    q = ctx.q_float
    return q ** (n - k + 1) / (1 - q)


def _sw_values(ctx: QContext, n: int) -> list:
    fac = q_factorials(ctx, n)
    top = fac[n] * fac[n]
    return [top / (fac[k] * fac[n - k]) for k in range(n + 1)]


def _sw_f(ctx: QContext, n: int, k: int) -> ScaledReal:
    fac = q_factorials(ctx, n)
    return fac[n] * gauss_binomial(ctx, n, k)


def _family_sw(name: str) -> CoefficientFamily:
    return CoefficientFamily(
        name=name,
        f=_sw_f,
        uniform_bound=1.0,
        deviation=_sw_deviation,
        right_limit=TAIL_POCHHAMMER,
        right_deviation=_sw_end_deviation,
        left_limit=TAIL_POCHHAMMER,
        left_deviation=_sw_end_deviation,
        coefficients=_sw_values,
    )


SW_FAMILY = _family_sw("sw")
# q^{-1}-Hermite polynomials share the Stieltjes-Wigert coefficients
HERMITE_FAMILY = _family_sw("qhermite")


def _unit_f(ctx: QContext, n: int, k: int) -> ScaledReal:
    return ScaledReal.one(ctx.prec)


def _no_deviation(ctx: QContext, n: int, k: int) -> float:
    return 0.0


UNIT_FAMILY = CoefficientFamily(
    name="unit",
    f=_unit_f,
    uniform_bound=1.0,
    deviation=_no_deviation,
    right_limit=UNIT,
    right_deviation=_no_deviation,
    left_limit=UNIT,
    left_deviation=_no_deviation,
)


def laguerre_family(alpha: RealLike) -> CoefficientFamily:
    """``f_n(k) = (q^{alpha+k+1};q)_{n-k} (q;q)_n [n, k]`` for the q-Laguerre case."""
    a = as_fraction(alpha)
    if a <= -1:
        raise ValueError("q-Laguerre parameter alpha must exceed -1")
    qa = float(a)

    def values(ctx: QContext, n: int) -> list:
        sw = _sw_values(ctx, n)
        shifted = [q_pochhammer(ctx, ctx.power(a + k + 1), n - k) for k in range(n + 1)]
        return [s * t for s, t in zip(sw, shifted)]

    def f(ctx: QContext, n: int, k: int) -> ScaledReal:
        return _sw_f(ctx, n, k) * q_pochhammer(ctx, ctx.power(a + k + 1), n - k)

    def deviation(ctx: QContext, n: int, k: int) -> float:
        q = ctx.q_float
        return (q ** (k + 1) * (1 + q**qa) + q ** (n - k + 1)) / (1 - q)

    def right_dev(ctx: QContext, n: int, k: int) -> float:
        q = ctx.q_float
        return (q ** (n - k + 1) + q ** (n + 1) * (1 + q**qa)) / (1 - q)

    def left_dev(ctx: QContext, n: int, k: int) -> float:
        q = ctx.q_float
        return (q ** (n - k + 1) * (1 + q**qa) + q ** (n + 1)) / (1 - q)

    def right_limit(ctx: QContext, k: int) -> ScaledReal:
        return q_pochhammer(ctx, ctx.power(a + k + 1)) * q_pochhammer(ctx, ctx.power(k + 1))

    return CoefficientFamily(
        name="qlaguerre",
        f=f,
        uniform_bound=1.0,
        params=(("alpha", str(alpha)),),
        deviation=deviation,
        right_limit=CoefficientSequence(f"qlaguerre-right({alpha})", right_limit, 1.0),
        right_deviation=right_dev,
        left_limit=TAIL_POCHHAMMER,
        left_deviation=left_dev,
        coefficients=values,
    )


def get_family(name: str, alpha: RealLike | None = None) -> CoefficientFamily:
    if name == "sw":
        return SW_FAMILY
    if name == "qhermite":
        return HERMITE_FAMILY
    if name == "unit":
        return UNIT_FAMILY
    if name == "qlaguerre":
        return laguerre_family("0" if alpha is None else alpha)
    raise ValueError(f"unknown family {name!r}")


# -- construction --------------------------------------------------------------


def build_family_poly(ctx: QContext, family: CoefficientFamily, n: int) -> QPolynomial:
    """``P_n`` with ``c_k = q**(k*k) f_n(k) (-1)**k``."""
    if n < 0:
        raise ValueError("degree must be nonnegative")
    coeffs = []
    for k, fk in enumerate(family.values(ctx, n)):
        if fk.exponent2 > 10**15:
            raise ValueError(f"family {family.name} returned a non-finite coefficient at k={k}")
        c = ctx.power(k * k) * fk
        coeffs.append(-c if k % 2 else c)
    return QPolynomial(tuple(coeffs), f"{family.tag};n={n}",
                       rebuild=lambda c: build_family_poly(c, family, n))


def stieltjes_wigert(ctx: QContext, n: int) -> QPolynomial:
    """Monic Stieltjes-Wigert polynomial ``S_n``."""
    if n < 0:
        raise ValueError("degree must be nonnegative")
    coeffs = []
    for k in range(n + 1):
        # q^{k^2 + k/2 - n^2 - n/2} on the p = sqrt(q) lattice
        c = gauss_binomial(ctx, n, k) * ctx.power(Fraction(2 * k * k + k - 2 * n * n - n, 2))
        coeffs.append(-c if (n + k) % 2 else c)
    return QPolynomial(tuple(coeffs), f"sw;n={n}", rebuild=lambda c: stieltjes_wigert(c, n))


def q_laguerre(ctx: QContext, n: int, alpha: RealLike) -> QPolynomial:
    """q-Laguerre polynomial ``L_n^{(alpha)}(x; q)``."""
    a = as_fraction(alpha)
    if a <= -1:
        raise ValueError("q-Laguerre parameter alpha must exceed -1")
    if n < 0:
        raise ValueError("degree must be nonnegative")
    fac = q_factorials(ctx, n)
    base = ctx.power(a + 1)
    shifted = [ScaledReal.one(ctx.prec)]
    for k in range(n):
        shifted.append(shifted[-1] * (1 - base * ctx.power(k)))
    pre = shifted[n] / fac[n]
    qa = ctx.power(a)
    coeffs = []
    qak = ScaledReal.one(ctx.prec)
    for k in range(n + 1):
        c = pre * gauss_binomial(ctx, n, k) * ctx.power(k * k) * qak / shifted[k]
        coeffs.append(-c if k % 2 else c)
        qak = qak * qa
    return QPolynomial(tuple(coeffs), f"qlaguerre(alpha={alpha});n={n}",
                       rebuild=lambda c: q_laguerre(c, n, alpha))


def q_hermite_eval(ctx: QContext, n: int, xi: RealLike) -> ScaledReal:
    """``h_n(sinh xi) = sum [n,k] q**(k*k - n*k) (-1)**k e**((n-2k) xi)``."""
    e = ctx.scalar(xi).exp()
    e_inv2 = 1 / (e * e)
    term_e = e ** n
    total = ScaledReal.zero(ctx.prec)
    for k in range(n + 1):
        t = gauss_binomial(ctx, n, k) * ctx.power(k * k - n * k) * term_e
        total = total - t if k % 2 else total + t
        term_e = term_e * e_inv2
    return total


def differentiate(poly: QPolynomial, j: int) -> QPolynomial:
    """``j``-th derivative; factorial ratios are exact integers."""
    if j < 0:
        raise ValueError("derivative order must be nonnegative")
    if j == 0:
        return poly
    coeffs = tuple(c * falling(k + j, j) for k, c in enumerate(poly.coefficients[j:]))
    rebuild = None
    if poly.rebuild is not None:
        parent = poly.rebuild
        rebuild = lambda c: differentiate(parent(c), j)  # noqa: E731
    return QPolynomial(coeffs, f"{poly.provenance};d{j}", rebuild=rebuild)


def eval_poly(ctx: QContext, poly: QPolynomial, x: RealLike,
              target_digits: int | None = None) -> ScaledReal:
    """Horner evaluation.

    With ``target_digits`` and a mixed-sign sum, the polynomial is rebuilt
    and re-evaluated under :func:`numerics.stabilize`.
    """
    x = ctx.scalar(x)
    if target_digits is not None and poly.rebuild is not None and not _one_signed(poly, x):
        def run(c: QContext) -> ScaledReal:
            return _horner(poly.rebuild(c).coefficients, x.with_prec(c.prec), c.prec)
        return stabilize(run, ctx, target_digits).value
    return _horner(poly.coefficients, x, ctx.prec)


def _one_signed(poly: QPolynomial, x: ScaledReal) -> bool:
    signs = {c.sign * (x.sign ** k if k else 1) for k, c in enumerate(poly.coefficients) if not c.is_zero()}
    return len(signs) <= 1


def _horner(coeffs: Sequence[ScaledReal], x: ScaledReal, prec: int) -> ScaledReal:
    acc = ScaledReal.zero(prec + 16)
    for c in reversed(coeffs):
        acc = acc * x + c
    return acc.with_prec(prec)


def eval_pnj(ctx: QContext, family: CoefficientFamily, n: int, j: int, x: RealLike) -> ScaledReal:
    """``P_{n,j}(x) = x**j P_n^{(j)}(x)``."""
    if j < 0:
        raise ValueError("j must be nonnegative")
    x = ctx.scalar(x)
    poly = differentiate(build_family_poly(ctx, family, n), j)
    if j and x.is_zero():
        return ScaledReal.zero(ctx.prec)
    return eval_poly(ctx, poly, x) * (x ** j)


def poly_to_json(ctx: QContext, poly: QPolynomial, family: str, n: int, digits: int = 30) -> str:
    return json.dumps({
        "family": family,
        "n": n,
        "q": ctx.base_literal,
        "coefficients": [c.to_decimal(digits) for c in poly.coefficients],
    })
