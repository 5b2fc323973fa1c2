from fractions import Fraction

import mpmath
import pytest

from qasym.numerics import ScaledReal, make_context
from qasym.qpoly import QPolynomial, differentiate, eval_poly, q_laguerre, stieltjes_wigert
from qasym.zeros import (
    CSV_HEADER,
    RESIDUAL_BITS,
    ZeroCountError,
    default_hint,
    find_positive_zeros,
    hermite_zero_symmetry,
    hermite_zeros,
    round_table_entry,
    rounded_product_line,
    sw_zeros,
    symmetry_products,
    zeros_to_csv,
)

from .conftest import mp_laguerre_coeffs, mp_q, mp_sw_coeffs, rel_err


def test_linear_sw_zero(ctx):
    zs = sw_zeros(ctx, 1)
    assert len(zs) == 1
    assert rel_err(zs.zeros[0], mpmath.mpf(2) ** (mpmath.mpf(3) / 2)) < 1e-70


def test_quadratic_sw_zeros(ctx):
    q = mp_q(ctx)
    b = (1 + q) * q ** (-mpmath.mpf(7) / 2)
    disc = mpmath.sqrt(b * b - 4 * q ** -5)
    zs = sw_zeros(ctx, 2)
    assert rel_err(zs.zeros[0], (b - disc) / 2) < 1e-70
    assert rel_err(zs.zeros[1], (b + disc) / 2) < 1e-70
    assert zs.zeros[0].to_decimal(6) == "2.16073e0"
    assert rel_err(zs.zeros[0] * zs.zeros[1], 32) < 1e-70


@pytest.mark.parametrize("n", [6, 11])
def test_sw_zeros_against_polyroots(ctx_q, n):
    q = mp_q(ctx_q, dps=200)
    roots = sorted(r.real for r in mpmath.polyroots(list(reversed(mp_sw_coeffs(n, q))), maxsteps=500,
                                                    extraprec=1500))
    for got, want in zip(sw_zeros(ctx_q, n).zeros, roots):
        assert rel_err(got, want) < 1e-60


@pytest.mark.parametrize("n,alpha", [(8, "0.4"), (12, "0.7")])
def test_laguerre_zeros_against_polyroots(n, alpha):
    ctx = make_context("0.5")
    q = mp_q(ctx, dps=200)
    coeffs = mp_laguerre_coeffs(n, mpmath.mpf(alpha), q)
    roots = sorted(r.real for r in mpmath.polyroots(list(reversed(coeffs)), maxsteps=500, extraprec=1500))
    zs = find_positive_zeros(ctx, q_laguerre(ctx, n, alpha), default_hint("qlaguerre", n, alpha))
    for got, want in zip(zs.zeros, roots):
        assert rel_err(got, want) < 1e-60


@pytest.mark.parametrize("q", ["0.3", "0.5", "0.7"])
def test_sw_zero_count_and_exact_symmetry(q):
    ctx = make_context(q)
    for n in (3, 10, 25, 40):
        zs = sw_zeros(ctx, n)
        assert len(zs) == n
        assert all(a < b for a, b in zip(zs.zeros, zs.zeros[1:]))
        for s in symmetry_products(ctx, zs, 2 * n + 1):
            assert float(abs(s - 1)) < 1e-25


@pytest.mark.parametrize("alpha", ["0", "0.4", "0.7"])
def test_laguerre_zero_count(alpha):
    ctx = make_context("0.5")
    for n in (5, 17, 30):
        zs = find_positive_zeros(ctx, q_laguerre(ctx, n, alpha), default_hint("qlaguerre", n, alpha))
        assert len(zs) == n


def test_zeros_interlace(ctx):
    for n in range(1, 21):
        a, b = sw_zeros(ctx, n).zeros, sw_zeros(ctx, n + 1).zeros
        for k in range(n):
            assert b[k] < a[k] < b[k + 1]


def test_brackets_and_residuals(ctx):
    poly = stieltjes_wigert(ctx, 9)
    dpoly = differentiate(poly, 1)
    zs = sw_zeros(ctx, 9)
    tiny = ScaledReal.one(ctx.prec).ldexp(-RESIDUAL_BITS)
    for x, (lo, hi), r in zip(zs.zeros, zs.brackets, zs.residuals):
        assert lo <= x <= hi
        assert eval_poly(ctx, poly, lo).sign != eval_poly(ctx, poly, hi).sign
        assert r < abs(eval_poly(ctx, dpoly, x)) * x * tiny
    assert zs.provenance == "sw;n=9"


def test_laguerre_mid_table_approaches_one():
    ctx = make_context("0.5")
    alpha = Fraction(2, 5)
    mids = []
    for n in (10, 15, 20, 25):
        zs = find_positive_zeros(ctx, q_laguerre(ctx, n, alpha), default_hint("qlaguerre", n, alpha))
        mids.append(float(symmetry_products(ctx, zs, 2 * n + 2 * alpha)[n // 2 - 1]))
    assert all(b >= a for a, b in zip(mids, mids[1:]))
    assert mids[-1] < 1


def test_odd_degree_includes_middle_term(ctx):
    zs = sw_zeros(ctx, 5)
    products = symmetry_products(ctx, zs, 11)
    assert len(products) == 3
    assert rel_err(zs.zeros[2] ** 2 * ctx.power(11), 1) < 1e-60


def test_rounded_product_tables():
    ctx = make_context("0.6")
    zs = find_positive_zeros(ctx, q_laguerre(ctx, 20, "0.4"), default_hint("qlaguerre", 20, "0.4"))
    assert rounded_product_line(ctx, zs, Fraction(204, 5)) == "0.45,0.725,0.852,0.917,0.952,0.972,0.983,0.989,0.993,0.994"
    ctx = make_context("0.5")
    zs = find_positive_zeros(ctx, q_laguerre(ctx, 25, "0.7"), default_hint("qlaguerre", 25, "0.7"))
    assert rounded_product_line(ctx, zs, Fraction(514, 10)) == "0.658,0.861,0.937,0.97,0.985,0.993,0.996,0.998,0.999,1.,1.,1."


@pytest.mark.parametrize("value,text", [
    (0.4501, "0.45"), (0.97, "0.97"), (0.99988, "1."), (0.9985, "0.998"), (0.9975, "0.998"), (0.725, "0.725"),
    (-0.0004, "-0."), (12.3456, "12.346"),
])
def test_table_rounding(value, text):
    assert round_table_entry(value) == text


def test_rounding_accepts_scaled_reals(ctx):
    assert round_table_entry(ctx.scalar("0.45012906")) == "0.45"


def test_hermite_symmetry():
    assert hermite_zero_symmetry(make_context("0.3"), 1).is_zero()
    assert float(hermite_zero_symmetry(make_context("0.5"), 6)) < 1e-25
    assert float(hermite_zero_symmetry(make_context("0.7"), 15)) < 1e-25


def test_hermite_zeros_are_ascending(ctx):
    xi = hermite_zeros(ctx, 7)
    assert all(a < b for a, b in zip(xi, xi[1:]))
    assert xi[3].is_zero() or float(abs(xi[3])) < 1e-70


def test_csv(ctx):
    lines = zeros_to_csv(ctx, sw_zeros(ctx, 4), 9, digits=8).splitlines()
    assert lines[0] == CSV_HEADER
    assert len(lines) == 3
    assert lines[1].startswith("1,") and lines[1].endswith(",1.0000000e0")


def test_polynomial_without_positive_zeros_fails(ctx):
    one = ScaledReal.one(ctx.prec)
    poly = QPolynomial((one, ScaledReal.zero(ctx.prec), one))  # x^2 + 1
    with pytest.raises(ZeroCountError):
        find_positive_zeros(ctx, poly)


def test_degenerate_inputs(ctx):
    with pytest.raises(ValueError):
        find_positive_zeros(ctx, stieltjes_wigert(ctx, 0))
