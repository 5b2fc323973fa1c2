"""Invariant suite behind ``qasym selftest``."""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction

from .asymptotics import (
    AsymptoticWindow,
    left_tail_estimate,
    oscillatory_estimate,
    right_tail_estimate,
)
from .identities import CHECKS, run_check
from .numerics import agreement_digits, make_context
from .partition import PartitionSpec, closed_form_limit, partition_exact, predicted_scaled
from .qpoly import HERMITE_FAMILY, SW_FAMILY, build_family_poly, differentiate, eval_poly, laguerre_family, q_laguerre
from .zeros import default_hint, find_positive_zeros, hermite_zero_symmetry, rounded_product_line, sw_zeros, symmetry_products

LAGUERRE_TABLES = (
    ("0.6", 20, "0.4", "0.45,0.725,0.852,0.917,0.952,0.972,0.983,0.989,0.993,0.994"),
    ("0.5", 25, "0.7", "0.658,0.861,0.937,0.97,0.985,0.993,0.996,0.998,0.999,1.,1.,1."),
)


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str

    def line(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'} {self.name}: {self.detail}"


def _sw_symmetry(bits: int, tol: float) -> CheckResult:
    worst = 0.0
    for q in ("0.3", "0.5", "0.7"):
        ctx = make_context(q, bits, tol)
        for n in (5, 10, 20):
            products = symmetry_products(ctx, sw_zeros(ctx, n), 2 * n + 1)
            worst = max(worst, max(float(abs(s - 1)) for s in products))
    return CheckResult("sw_zero_symmetry", worst < 1e-25, f"max |s_k - 1| = {worst:.2e}")


def _hermite_symmetry(bits: int, tol: float) -> CheckResult:
    worst = max(float(hermite_zero_symmetry(make_context(q, bits, tol), n))
                for q, n in (("0.5", 6), ("0.7", 15)))
    return CheckResult("hermite_zero_symmetry", worst < 1e-25, f"max |xi_j + xi_(n+1-j)| = {worst:.2e}")


def _laguerre_tables(bits: int, tol: float) -> CheckResult:
    bad = []
    for q, n, alpha, expected in LAGUERRE_TABLES:
        ctx = make_context(q, bits, tol)
        zs = find_positive_zeros(ctx, q_laguerre(ctx, n, alpha), default_hint("qlaguerre", n, alpha))
        got = rounded_product_line(ctx, zs, 2 * n + 2 * Fraction(alpha))
        if got != expected:
            bad.append(f"n={n}: {got}")
    return CheckResult("laguerre_zero_tables", not bad, "; ".join(bad) or "both tables reproduced")


def _partition_methods(bits: int, tol: float) -> CheckResult:
    ctx = make_context("0.5", bits, tol)
    worst = float("inf")
    for L in (1, 2, 3):
        for N in range(1, 7):
            spec = PartitionSpec(N, L)
            a = partition_exact(ctx, spec, "wronskian").raw
            worst = min(worst, agreement_digits(a, partition_exact(ctx, spec, "detS").raw))
            if L == 1:
                worst = min(worst, agreement_digits(a, partition_exact(ctx, spec, "sumL1").raw))
    return CheckResult("partition_method_agreement", worst >= 30, f"min agreeing digits {worst:.1f}")


def _closed_forms(bits: int, tol: float) -> CheckResult:
    worst = 0.0
    for q in ("0.3", "0.5", "0.7"):
        ctx = make_context(q, bits, tol)
        for L in (1, 2):
            for N in (2, 3):
                spec = PartitionSpec(N, L)
                a, b = predicted_scaled(ctx, spec), closed_form_limit(ctx, L, spec.parity)
                worst = max(worst, float(abs(a / b - 1)))
    return CheckResult("limit_closed_forms", worst < 1e-30, f"max relative gap {worst:.2e}")


def _asymptotic_honesty(bits: int, tol: float, instances: int) -> CheckResult:
    ctx = make_context("0.5", bits, tol)
    rng = random.Random(7)
    worst = 0.0
    for fam in (SW_FAMILY, HERMITE_FAMILY, laguerre_family("0.4")):
        for _ in range(max(1, instances // 4)):
            n = rng.choice((10, 20))
            j = rng.randint(0, 2)
            y = ctx.scalar(f"{rng.uniform(0.5, 2):.4f}") * rng.choice((1, -1))
            regime = rng.choice(("osc", "right", "left"))
            if regime == "osc":
                window = AsymptoticWindow.build(n, Fraction(rng.randint(2, 8), 10), y=y)
                est = oscillatory_estimate(ctx, fam, n, j, window, y)
                x = ctx.power(-2 * window.m) * y
            elif regime == "right":
                t = Fraction(rng.randint(0, 10), 10)
                est = right_tail_estimate(ctx, fam, None, n, j, t, y)
                x = ctx.power(n * t) * y
            else:
                t = -2 - Fraction(rng.randint(0, 10), 10)
                est = left_tail_estimate(ctx, fam, None, n, j, t, y)
                x = ctx.power(n * t) * y
            poly = differentiate(build_family_poly(ctx, fam, n), j)
            exact = eval_poly(ctx, poly, x, target_digits=30) * x ** j
            worst = max(worst, float(abs(exact - est.value) / est.error_bound))
    return CheckResult("asymptotic_bounds_honest", worst <= 1, f"max |exact - estimate| / bound = {worst:.3f}")


def run_selftest(bits: int, tail_tol: float, instances: int = 20) -> list:
    results = []
    for name in CHECKS:
        report = run_check(name, instances, bits=bits, tail_tol=tail_tol)
        results.append(CheckResult(name, report.passed,
                                   f"{report.instances} instances, max rel err {report.max_rel_err:.3e}"))
    results += [
        _sw_symmetry(bits, tail_tol),
        _hermite_symmetry(bits, tail_tol),
        _laguerre_tables(bits, tail_tol),
        _partition_methods(bits, tail_tol),
        _closed_forms(bits, tail_tol),
        _asymptotic_honesty(bits, tail_tol, instances),
    ]
    return results
