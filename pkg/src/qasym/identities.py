"""Randomized checks of classical q-series identities.

Each check draws its instances from a seeded generator, so a run is
reproducible.  The relative error of an instance is
``|lhs - rhs| / max(|lhs|, |rhs|)``, and a check passes when every instance
stays below ``10 * tail_tol``.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

from .numerics import DEFAULT_BITS, DEFAULT_TAIL_TOL, QContext, ScaledReal, make_context
from .qpoly import eval_poly, q_hermite_eval, stieltjes_wigert
from .qseries import (
    gauss_binomial,
    q_factorials,
    q_pochhammer,
    theta,
    triple_product_F,
    triple_product_F_series,
)

DEFAULT_INSTANCES = 20
DEFAULT_SEED = 20240601


@dataclass(frozen=True)
class IdentityReport:
    name: str
    instances: int
    max_rel_err: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.max_rel_err < self.tolerance

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return (f"{status} {self.name}: {self.instances} instances, "
                f"max rel err {self.max_rel_err:.3e} (tol {self.tolerance:.1e})")


def relative_error(lhs: ScaledReal, rhs: ScaledReal) -> float:
    if lhs == rhs:
        return 0.0
    scale = max(abs(lhs), abs(rhs))
    return float(abs(lhs - rhs) / scale)


def _random_q(rng: random.Random) -> str:
    return f"0.{rng.randint(10, 85)}"


def _random_arg(rng: random.Random, low: float = -1.0, high: float = 1.0) -> str:
    """A signed decimal literal with magnitude ``10**uniform(low, high)``."""
    mag = 10 ** rng.uniform(low, high)
    sign = rng.choice(("", "-"))
    return f"{sign}{mag:.6f}"


# Each check maps (ctx, rng) to a (lhs, rhs) pair for one random instance.

def _jacobi_triple_product(ctx: QContext, rng: random.Random) -> tuple:
    z = ctx.scalar(_random_arg(rng))
    return triple_product_F_series(ctx, z), triple_product_F(ctx, z)


def _theta_quasi_periodicity(ctx: QContext, rng: random.Random) -> tuple:
    z = ctx.scalar(_random_arg(rng))
    return theta(ctx, ctx.power(2) * z), theta(ctx, z) / (ctx.q * z)


def _q_binomial_theorem(ctx: QContext, rng: random.Random) -> tuple:
    n = rng.randint(1, 30)
    z = ctx.scalar(_random_arg(rng, -1.0, 0.5))
    total = ScaledReal.zero(ctx.prec)
    zk = ScaledReal.one(ctx.prec)
    for k in range(n + 1):
        total = total + gauss_binomial(ctx, n, k) * ctx.power(Fraction(k * (k - 1), 2)) * zk
        zk = zk * z
    return total, q_pochhammer(ctx, -z, n)


def _shift_identity(ctx: QContext, rng: random.Random) -> tuple:
    m = rng.randint(-6, 6)
    u = ctx.scalar(_random_arg(rng))
    lhs = triple_product_F_series(ctx, ctx.power(-m) * u)
    rhs = triple_product_F(ctx, u) * ctx.power(Fraction(-m * m, 2)) * u ** m
    return lhs, rhs


def _sw_reflection(ctx: QContext, rng: random.Random) -> tuple:
    n = rng.randint(1, 25)
    x = ctx.power(Fraction(-rng.randint(0, 4 * n + 2), 2)) * ctx.scalar(_random_arg(rng, -0.3, 0.3))
    poly = stieltjes_wigert(ctx, n)
    lhs = x ** n * eval_poly(ctx, poly, ctx.power(-2 * n - 1) / x)
    rhs = ctx.power(-n * n - Fraction(n, 2)) * eval_poly(ctx, poly, x)
    return lhs, (-rhs if n % 2 else rhs)


def _hermite_bridge(ctx: QContext, rng: random.Random) -> tuple:
    n = rng.randint(1, 25)
    xi = ctx.scalar(_random_arg(rng, -1.0, 0.7))
    x = ctx.power(-n - Fraction(1, 2)) * (-2 * xi).exp()
    rhs = ctx.power(n * n + Fraction(n, 2)) * (n * xi).exp() * eval_poly(ctx, stieltjes_wigert(ctx, n), x)
    return q_hermite_eval(ctx, n, xi), (-rhs if n % 2 else rhs)


def _euler_product(ctx: QContext, rng: random.Random) -> tuple:
    """``sum z**k / (q;q)_k = 1/(z;q)_inf`` for ``|z| < 1``."""
    z = ctx.scalar(f"{rng.uniform(-0.95, 0.95):.6f}")
    total = ScaledReal.zero(ctx.prec)
    zk = ScaledReal.one(ctx.prec)
    k = 0
    fac = ScaledReal.one(ctx.prec)
    stop = math.log2(ctx.tail_tol) - 8
    while True:
        term = zk / fac
        total = total + term
        if not zk.is_zero() and term.log2_abs() - total.log2_abs() < stop and k > 2:
            break
        k += 1
        zk = zk * z
        fac = fac * (1 - ctx.power(k))
    return total, 1 / q_pochhammer(ctx, z)


CHECKS: dict = {
    "jacobi_triple_product": _jacobi_triple_product,
    "theta_quasi_periodicity": _theta_quasi_periodicity,
    "q_binomial_theorem": _q_binomial_theorem,
    "theta_shift_identity": _shift_identity,
    "sw_reflection": _sw_reflection,
    "hermite_sw_bridge": _hermite_bridge,
    "euler_product": _euler_product,
}


def run_check(name: str, instances: int = DEFAULT_INSTANCES, seed: int = DEFAULT_SEED,
              bits: int = DEFAULT_BITS, tail_tol: float = DEFAULT_TAIL_TOL,
              q: str | None = None) -> IdentityReport:
    """Run one identity over random instances (random q unless ``q`` is given)."""
    check: Callable = CHECKS[name]
    rng = random.Random(f"{seed}:{name}")
    worst = 0.0
    for _ in range(instances):
        ctx = make_context(q or _random_q(rng), bits, tail_tol)
        lhs, rhs = check(ctx, rng)
        worst = max(worst, relative_error(lhs, rhs))
    return IdentityReport(name, instances, worst, 10 * tail_tol)


def run_all(instances: int = DEFAULT_INSTANCES, seed: int = DEFAULT_SEED, bits: int = DEFAULT_BITS,
            tail_tol: float = DEFAULT_TAIL_TOL, q: str | None = None) -> list:
    return [run_check(name, instances, seed, bits, tail_tol, q) for name in CHECKS]
