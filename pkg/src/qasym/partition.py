"""Partition function of the fermionic matrix model and its large-N limit.

``Z_hat(L, N)`` is the Wronskian of ``S_N, ..., S_{N+L-1}`` at the spectral
point ``lambda = -q**(-N - L/2)``, normalized by ``(-1)**(L N) / prod j!``.
Its scaled version ``q**(5 L N^2/4 + L^2 N/2) Z_hat`` tends to a parity
dependent limit expressed through theta functions.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .numerics import (
    QContext,
    ScaledReal,
    det,
    stabilize,
)
from .qpoly import differentiate, eval_poly, stieltjes_wigert
from .qseries import falling, gauss_binomial, q_pochhammer, theta_j

METHODS = ("wronskian", "detS", "sumL1")
TARGET_DIGITS = 30


@dataclass(frozen=True)
class PartitionSpec:
    N: int
    L: int

    def __post_init__(self):
        if self.N < 1 or self.L < 1:
            raise ValueError("N and L must be positive integers")

    @property
    def m(self) -> int:
        return self.N // 2

    @property
    def alpha(self) -> int:
        return 2 * self.m - self.N

    @property
    def beta(self) -> Fraction:
        return self.N - 2 * self.m + Fraction(self.L - 1, 2)

    @property
    def parity(self) -> str:
        return "even" if self.N % 2 == 0 else "odd"

    @property
    def lambda_lattice_exponent(self) -> int:
        """``lambda = -p**e`` with ``p = sqrt(q)``."""
        return -(2 * self.N + self.L)

    @property
    def scale_exponent(self) -> Fraction:
        """Power of q in the scaling ``q**(5 L N^2/4 + L^2 N/2)``."""
        return Fraction(5 * self.L * self.N**2, 4) + Fraction(self.L**2 * self.N, 2)

    def spectral_point(self, ctx: QContext) -> ScaledReal:
        return -ctx.power(Fraction(self.lambda_lattice_exponent, 2))


@dataclass(frozen=True)
class PartitionResult:
    raw: ScaledReal
    scaled: ScaledReal
    method: str
    verified_digits: int


def _factorial_product(L: int) -> int:
    return math.prod(math.factorial(j) for j in range(L))


def _wronskian(ctx: QContext, spec: PartitionSpec) -> ScaledReal:
    lam = spec.spectral_point(ctx)
    columns = []
    for j in range(spec.L):
        poly = stieltjes_wigert(ctx, spec.N + j)
        columns.append([eval_poly(ctx, differentiate(poly, i), lam) for i in range(spec.L)])
    rows = [[columns[j][i] for j in range(spec.L)] for i in range(spec.L)]
    value = det(rows) / _factorial_product(spec.L)
    return -value if (spec.L * spec.N) % 2 else value


def _s_entry(ctx: QContext, spec: PartitionSpec, i: int, j: int) -> ScaledReal:
    N, L = spec.N, spec.L
    total = ScaledReal.zero(ctx.prec)
    for k in range(i, N + j + 1):
        # q^{k^2 + k/2 - (k-i)(N + L/2)} on the p-lattice
        e = 2 * k * k + k - (k - i) * (2 * N + L)
        total = total + gauss_binomial(ctx, N + j, k) * ctx.power(Fraction(e, 2)) * falling(k, i)
    return -total if i % 2 else total


def _det_s(ctx: QContext, spec: PartitionSpec) -> ScaledReal:
    N, L = spec.N, spec.L
    value = det([[_s_entry(ctx, spec, i, j) for j in range(L)] for i in range(L)])
    sign = (-1) ** (L * N)
    exponent = Fraction(0)
    for j in range(L):
        sign *= (-1) ** (N + j)
        exponent -= (N + j) ** 2 + Fraction(N + j, 2)
    value = value * ctx.power(exponent) / _factorial_product(L)
    return -value if sign < 0 else value


def _sum_l1(ctx: QContext, spec: PartitionSpec) -> ScaledReal:
    N = spec.N
    total = ScaledReal.zero(ctx.prec)
    for k in range(N + 1):
        total = total + gauss_binomial(ctx, N, k) * ctx.power(k * k - k * N)
    return total * ctx.power(-(N * N) - Fraction(N, 2))


_ROUTES = {"wronskian": _wronskian, "detS": _det_s, "sumL1": _sum_l1}


def partition_exact(ctx: QContext, spec: PartitionSpec, method: str = "wronskian",
                    target_digits: int = TARGET_DIGITS) -> PartitionResult:
    """Exact ``Z_hat(L, N)``, stabilized against cancellation in the determinant."""
    if method not in _ROUTES:
        raise ValueError(f"unknown method {method!r}; choose from {METHODS}")
    if method == "sumL1" and spec.L != 1:
        raise ValueError("method sumL1 requires L = 1")
    route = _ROUTES[method]
    stable = stabilize(lambda c: route(c, spec), ctx, target_digits)
    raw = stable.value.with_prec(ctx.prec)
    scaled = raw * ctx.power(spec.scale_exponent)
    return PartitionResult(raw, scaled, method, stable.verified_digits)


def _R_matrix(ctx: QContext, L: int, alpha: int) -> list:
    return [[theta_j(ctx, i, ctx.power(Fraction(2 * alpha - 2 * j - (L - 1), 2))) for j in range(L)]
            for i in range(L)]


def predicted_scaled(ctx: QContext, spec: PartitionSpec) -> ScaledReal:
    """Large-N limit of the scaled partition function via ``det(R)``."""
    L, alpha = spec.L, spec.alpha
    R = _R_matrix(ctx, L, alpha)
    euler = q_pochhammer(ctx, ctx.q)
    pre = ctx.power(Fraction(L * (L - alpha - 1) ** 2, 4)) / (euler ** L * _factorial_product(L))
    return pre * det(R)


def det_R(ctx: QContext, L: int, alpha: int) -> ScaledReal:
    """``det(R)`` alone, for exploring closed forms at general L."""
    return det(_R_matrix(ctx, L, alpha))


def theta_wronskian_limit(ctx: QContext, alpha: int) -> ScaledReal:
    """L = 2 limit written with Theta and Theta' only:

    ``[Theta(a) Theta'(b) - q Theta'(a) Theta(b)] / (q**(1 - alpha^2/2) (q;q)^2)``
    with ``a = q**(alpha - 1/2)``, ``b = q**(alpha - 3/2)``.
    """
    a = ctx.power(Fraction(2 * alpha - 1, 2))
    b = ctx.power(Fraction(2 * alpha - 3, 2))
    th_a, th_b = theta_j(ctx, 0, a), theta_j(ctx, 0, b)
    dth_a, dth_b = theta_j(ctx, 1, a) / a, theta_j(ctx, 1, b) / b
    num = th_a * dth_b - ctx.q * dth_a * th_b
    euler = q_pochhammer(ctx, ctx.q)
    return num / (ctx.power(1 - Fraction(alpha * alpha, 2)) * euler * euler)


def closed_form_limit(ctx: QContext, L: int, parity: str) -> ScaledReal:
    """Infinite-product forms of the L = 1 and L = 2 limits."""
    if parity not in ("even", "odd"):
        raise ValueError("parity must be 'even' or 'odd'")
    alpha = 0 if parity == "even" else -1
    sq = ctx.rebase(2)
    if L == 1:
        if alpha == 0:
            num = q_pochhammer(sq, -ctx.q) ** 2
        else:
            num = ctx.power(Fraction(1, 4)) * q_pochhammer(sq, -1) * q_pochhammer(sq, -sq.q)
        return num / q_pochhammer(sq, ctx.q)
    if L == 2:
        def poch(a):
            return q_pochhammer(ctx, a)
        lo = ctx.power(Fraction(2 * alpha - 1, 2))
        hi = ctx.power(Fraction(3 - 2 * alpha, 2))
        euler = poch(ctx.q)
        odd = q_pochhammer(sq, ctx.q)
        bracket = (-(euler * euler) * (odd * odd) * poch(lo) * poch(hi) + poch(-lo) * poch(-hi))
        pre = ctx.power(Fraction((alpha - 1) ** 2, 2)) / 4 * poch(-ctx.q) * poch(-1)
        return pre * bracket
    raise ValueError("closed forms exist only for L in {1, 2}")


@dataclass(frozen=True)
class ConvergenceRow:
    N: int
    parity: str
    scaled_exact: ScaledReal
    predicted: ScaledReal
    ratio: ScaledReal
    abs_err: ScaledReal
    verified_digits: int


def _row(ctx: QContext, L: int, N: int, method: str) -> ConvergenceRow:
    spec = PartitionSpec(N, L)
    exact = partition_exact(ctx, spec, method)
    if L in (1, 2):
        predicted = closed_form_limit(ctx, L, spec.parity)
    else:
        predicted = predicted_scaled(ctx, spec)
    ratio = exact.scaled / predicted
    return ConvergenceRow(N, spec.parity, exact.scaled, predicted, ratio, abs(ratio - 1),
                          exact.verified_digits)


def convergence_table(ctx: QContext, L: int, N_list: Sequence[int], method: str = "wronskian",
                      jobs: int = 1) -> list:
    """One row per N comparing the exact scaled value with its predicted limit."""
    N_list = list(N_list)
    if not N_list:
        raise ValueError("N_list must be nonempty")
    if any(b <= a for a, b in zip(N_list, N_list[1:])):
        raise ValueError("N_list must be strictly ascending")
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(lambda N: _row(ctx, L, N, method), N_list))
    return [_row(ctx, L, N, method) for N in N_list]


CSV_HEADER = "N,parity,scaled_exact,predicted,ratio,abs_err"


def table_to_csv(rows: Sequence[ConvergenceRow], digits: int | None = None) -> str:
    lines = [CSV_HEADER]
    for r in rows:
        dg = digits or max(1, r.verified_digits)
        lines.append(",".join([str(r.N), r.parity, r.scaled_exact.to_decimal(dg),
                               r.predicted.to_decimal(dg), r.ratio.to_decimal(dg),
                               r.abs_err.to_decimal(min(dg, 16))]))
    return "\n".join(lines) + "\n"


def table_to_dat(rows: Sequence[ConvergenceRow]) -> str:
    """Whitespace columns ``N parity abs_err`` for gnuplot."""
    lines = ["# N parity(0=even,1=odd) abs_err"]
    for r in rows:
        lines.append(f"{r.N} {r.N % 2} {r.abs_err.to_decimal(8)}")
    return "\n".join(lines) + "\n"

