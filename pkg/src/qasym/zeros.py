"""Positive real zeros of q-polynomials and their reflection symmetry.

Zeros of these families are spaced roughly geometrically (consecutive ratios
near ``q**-2``), so every search runs in ``log x``: a mesh of powers of q
brackets the sign changes, bisection narrows each bracket, and a safeguarded
Newton step in ``log x`` polishes to working precision.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from decimal import ROUND_HALF_EVEN, Decimal
from fractions import Fraction
from typing import Sequence

from .numerics import QContext, RealLike, ScaledReal, as_fraction
from .qpoly import QPolynomial, differentiate, eval_poly, stieltjes_wigert

BISECT_BITS = 80
RESIDUAL_BITS = 70
_MESH_STEPS = (Fraction(1, 2), Fraction(1, 4), Fraction(1, 8))
_NEWTON_ITERS = 60

CSV_HEADER = "k,x_k,x_{n+1-k},normalized_product"


class ZeroCountError(ArithmeticError):
    """The mesh bracketed fewer sign changes than the polynomial degree."""


@dataclass(frozen=True)
class ZeroSet:
    provenance: str
    zeros: tuple
    brackets: tuple
    residuals: tuple

    def __len__(self) -> int:
        return len(self.zeros)


def _root_radius_log2(coeffs: Sequence[ScaledReal]) -> float:
    """log2 of Fujiwara's bound on the moduli of the roots."""
    n = len(coeffs) - 1
    lead = coeffs[-1].log2_abs()
    worst = -math.inf
    for k in range(1, n + 1):
        c = coeffs[n - k]
        if not c.is_zero():
            worst = max(worst, (c.log2_abs() - lead) / k)
    return 1 + worst


def _exponent_range(poly: QPolynomial, log2_q: float) -> tuple:
    """Interval of ``e`` (in ``x = q**e``) containing every positive zero."""
    coeffs = poly.coefficients
    if coeffs[0].is_zero():
        raise ValueError("polynomial vanishes at x = 0")
    hi_log2 = _root_radius_log2(coeffs)
    lo_log2 = -_root_radius_log2(coeffs[::-1])
    # larger x means smaller exponent since log q < 0
    return hi_log2 / log2_q, lo_log2 / log2_q


def _sign(ctx: QContext, poly: QPolynomial, x: ScaledReal) -> int:
    return eval_poly(ctx, poly, x).sign


def _mesh(e_min: float, e_max: float, anchor: Fraction, step: Fraction) -> list:
    """Exponents ``anchor - s*step`` covering ``[e_min, e_max]``, decreasing."""
    top = anchor + step * math.ceil((e_max - float(anchor)) / step + 1)
    count = math.ceil((float(top) - e_min) / step) + 2
    return [top - i * step for i in range(count)]


def _bracket(ctx: QContext, poly: QPolynomial, anchor: Fraction) -> tuple:
    """Sign-change brackets (ascending in x) plus exact zeros hit by the mesh."""
    n = poly.degree
    e_min, e_max = _exponent_range(poly, math.log2(ctx.q_float))
    e_min -= 1
    e_max += 1
    best = ([], [])
    for step in _MESH_STEPS:
        grid = _mesh(e_min, e_max, anchor, step)
        points = [ctx.power(e) for e in grid]
        signs = [_sign(ctx, poly, x) for x in points]
        brackets, exact = [], []
        prev_x, prev_s = None, 0
        for x, s in zip(points, signs):
            if s == 0:
                exact.append(x)
                continue
            if prev_s and s != prev_s and not (exact and prev_x < exact[-1] < x):
                brackets.append((prev_x, x))
            prev_x, prev_s = x, s
        found = len(brackets) + len(exact)
        if found == n:
            return brackets, exact
        if found > len(best[0]) + len(best[1]):
            best = (brackets, exact)
    raise ZeroCountError(f"found {len(best[0]) + len(best[1])} sign changes, expected {n}")


def _geometric_mid(a: ScaledReal, b: ScaledReal) -> ScaledReal:
    return (a * b).sqrt()


def _refine(ctx: QContext, poly: QPolynomial, dpoly: QPolynomial, a: ScaledReal,
            b: ScaledReal) -> tuple:
    """Bisection in ``log x`` down to relative width ``2**-BISECT_BITS``, then Newton."""
    sa = _sign(ctx, poly, a)
    while b - a > a.ldexp(-BISECT_BITS):
        mid = _geometric_mid(a, b)
        sm = _sign(ctx, poly, mid)
        if sm == 0:
            return mid, (a, b)
        if sm == sa:
            a = mid
        else:
            b = mid
    bracket = (a, b)
    x = _geometric_mid(a, b)
    for _ in range(_NEWTON_ITERS):
        value = eval_poly(ctx, poly, x)
        if value.is_zero():
            break
        slope = eval_poly(ctx, dpoly, x)
        if slope.is_zero():
            break
        if value.sign == sa:
            a = x
        else:
            b = x
        tol = abs(x).ldexp(-(ctx.prec - 12))
        new = x - value / slope
        if new < a:
            new = a if a - new <= tol else _geometric_mid(a, b)
        elif new > b:
            new = b if new - b <= tol else _geometric_mid(a, b)
        if abs(new - x) <= tol or b - a <= tol:
            x = new
            break
        x = new
    return x, bracket


def _find(ctx: QContext, poly: QPolynomial, anchor: Fraction) -> ZeroSet:
    brackets, exact = _bracket(ctx, poly, anchor)
    dpoly = differentiate(poly, 1)
    found = []
    for a, b in brackets:
        x, br = _refine(ctx, poly, dpoly, a, b)
        found.append((x, br))
    found.extend((x, (x, x)) for x in exact)
    found.sort(key=lambda item: item[0])
    zeros = tuple(x for x, _ in found)
    residuals = tuple(abs(eval_poly(ctx, poly, x)) for x in zeros)
    for x, r in zip(zeros, residuals):
        slope = abs(eval_poly(ctx, dpoly, x))
        if r > slope * x * ScaledReal.one(ctx.prec).ldexp(-RESIDUAL_BITS):
            raise ZeroCountError(f"zero near {x.to_decimal(12)} failed the simple-root residual check")
    return ZeroSet(poly.provenance, zeros, tuple(br for _, br in found), residuals)


def find_positive_zeros(ctx: QContext, poly: QPolynomial, hint_exponent: RealLike = 0) -> ZeroSet:
    """All ``n`` positive zeros of a polynomial known to have only such zeros.

    The mesh consists of the points ``q**(hint_exponent - s)`` with ``s`` on a
    half-integer grid, refined to eighths when sign changes are missing; the
    search is repeated once at doubled precision before giving up.
    """
    if poly.degree < 1:
        raise ValueError("need a polynomial of degree >= 1")
    anchor = as_fraction(hint_exponent)
    try:
        return _find(ctx, poly, anchor)
    except ZeroCountError:
        if poly.rebuild is None:
            raise
    wide = ctx.with_bits(2 * ctx.prec)
    result = _find(wide, poly.rebuild(wide), anchor)
    return ZeroSet(result.provenance,
                   tuple(x.with_prec(ctx.prec) for x in result.zeros),
                   result.brackets, result.residuals)


def default_hint(family: str, n: int, alpha: RealLike = 0) -> Fraction:
    """Mesh anchor on the lattice the family's zeros cluster around."""
    if family in ("sw", "qhermite"):
        return Fraction(-(2 * n + 1), 2)
    if family == "qlaguerre":
        return -as_fraction(alpha)
    return Fraction(0)


def symmetry_products(ctx: QContext, zs: ZeroSet, lattice_exponent: RealLike) -> list:
    """``q**e x_k x_{n+1-k}`` for ``k = 1 .. ceil(n/2)``."""
    scale = ctx.power(as_fraction(lattice_exponent))
    x = zs.zeros
    n = len(x)
    return [scale * x[k] * x[n - 1 - k] for k in range((n + 1) // 2)]


def round_table_entry(value: ScaledReal | float, places: int = 3) -> str:
    """Round half-even to ``places`` decimals, then drop trailing zeros (``1.000 -> 1.``)."""
    d = Decimal(value.to_decimal(places + 20)) if isinstance(value, ScaledReal) else Decimal(repr(value))
    text = str(d.quantize(Decimal(1).scaleb(-places), rounding=ROUND_HALF_EVEN))
    return text.rstrip("0") if "." in text else text + "."


def rounded_product_line(ctx: QContext, zs: ZeroSet, lattice_exponent: RealLike) -> str:
    """Comma-separated rounded products for ``k = 1 .. floor(n/2)``."""
    products = symmetry_products(ctx, zs, lattice_exponent)[: len(zs) // 2]
    return ",".join(round_table_entry(s) for s in products)


def zeros_to_csv(ctx: QContext, zs: ZeroSet, lattice_exponent: RealLike, digits: int = 30) -> str:
    products = symmetry_products(ctx, zs, lattice_exponent)
    n = len(zs)
    lines = [CSV_HEADER]
    for k, s in enumerate(products):
        lines.append(",".join([str(k + 1), zs.zeros[k].to_decimal(digits),
                               zs.zeros[n - 1 - k].to_decimal(digits), s.to_decimal(digits)]))
    return "\n".join(lines) + "\n"


def sw_zeros(ctx: QContext, n: int) -> ZeroSet:
    return find_positive_zeros(ctx, stieltjes_wigert(ctx, n), default_hint("sw", n))


def hermite_zeros(ctx: QContext, n: int) -> list:
    """Zeros ``xi`` of ``h_n(sinh xi)``, ascending, from ``x = q**(-n-1/2) exp(-2 xi)``."""
    zs = sw_zeros(ctx, n)
    shift = ctx.q.log() * (n + Fraction(1, 2))
    return [-(x.log() + shift) / 2 for x in reversed(zs.zeros)]


def hermite_zero_symmetry(ctx: QContext, n: int) -> ScaledReal:
    """``max_j |xi_j + xi_{n+1-j}|`` over the zeros of ``h_n(sinh xi)``."""
    xi = hermite_zeros(ctx, n)
    return max(abs(xi[k] + xi[n - 1 - k]) for k in range(n))
