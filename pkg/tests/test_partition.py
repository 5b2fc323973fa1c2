import math
from fractions import Fraction

import mpmath
import pytest

from qasym.numerics import agreement_digits, make_context
from qasym.partition import (
    CSV_HEADER,
    PartitionSpec,
    _det_s,
    _wronskian,
    closed_form_limit,
    convergence_table,
    det_R,
    partition_exact,
    predicted_scaled,
    table_to_csv,
    table_to_dat,
    theta_wronskian_limit,
)

from .conftest import mp_derivative, mp_polyval, mp_q, mp_sw_coeffs, rel_err


def mp_partition(ctx, N, L):
    """Wronskian of S_N..S_{N+L-1} at -q^{-N-L/2}, normalized, all in mpmath."""
    q = mp_q(ctx, dps=150)
    lam = -q ** (-N - mpmath.mpf(L) / 2)
    rows = [[mp_polyval(mp_derivative(mp_sw_coeffs(N + j, q), i), lam) for j in range(L)] for i in range(L)]
    value = mpmath.det(mpmath.matrix(rows)) / math.prod(math.factorial(j) for j in range(L))
    return value * (-1) ** (L * N)


def mp_theta_j(q, j, z):
    return mpmath.nsum(lambda k: q ** (k * k) * z ** k * mpmath.ff(k, j), [-mpmath.inf, mpmath.inf])


def test_spec_properties():
    spec = PartitionSpec(5, 3)
    assert (spec.m, spec.alpha, spec.parity) == (2, -1, "odd")
    assert spec.beta == 2
    assert spec.lambda_lattice_exponent == -13
    assert spec.scale_exponent == Fraction(5 * 3 * 25, 4) + Fraction(9 * 5, 2)
    assert PartitionSpec(4, 1).alpha == 0
    with pytest.raises(ValueError):
        PartitionSpec(0, 1)


def test_single_fermion_value(ctx):
    result = partition_exact(ctx, PartitionSpec(1, 1))
    assert result.raw.to_decimal(16) == "5.656854249492380e0"
    assert rel_err(result.raw, 2 * mpmath.mpf(2) ** (mpmath.mpf(3) / 2)) < 1e-70


def test_two_by_one_is_rational(ctx):
    assert partition_exact(ctx, PartitionSpec(2, 1)).raw == 160


@pytest.mark.parametrize("N,L", [(1, 2), (3, 2), (4, 3), (6, 4), (9, 2)])
def test_wronskian_against_mpmath(ctx_q, N, L):
    got = partition_exact(ctx_q, PartitionSpec(N, L))
    assert rel_err(got.raw, mp_partition(ctx_q, N, L)) < 1e-35
    assert got.verified_digits >= 30


@pytest.mark.parametrize("N,L", [(2, 1), (5, 2), (7, 3), (12, 4)])
def test_methods_agree(ctx, N, L):
    spec = PartitionSpec(N, L)
    a = partition_exact(ctx, spec, "wronskian").raw
    b = partition_exact(ctx, spec, "detS").raw
    assert agreement_digits(a, b) >= 30
    # the unstabilized routes already agree at working precision
    assert agreement_digits(_wronskian(ctx, spec), _det_s(ctx, spec)) >= 30
    if L == 1:
        assert agreement_digits(a, partition_exact(ctx, spec, "sumL1").raw) >= 30


def test_method_validation(ctx):
    with pytest.raises(ValueError):
        partition_exact(ctx, PartitionSpec(2, 2), "sumL1")
    with pytest.raises(ValueError):
        partition_exact(ctx, PartitionSpec(2, 2), "cholesky")


def test_scaled_value_uses_the_scale_exponent(ctx):
    r = partition_exact(ctx, PartitionSpec(3, 2))
    assert r.scaled == r.raw * ctx.power(PartitionSpec(3, 2).scale_exponent)


@pytest.mark.parametrize("parity", ["even", "odd"])
def test_closed_form_against_mpmath_products(ctx_q, parity):
    q = mp_q(ctx_q)
    q2 = q * q
    if parity == "even":
        want = mpmath.qp(-q, q2) ** 2 / mpmath.qp(q, q2)
    else:
        want = q ** (mpmath.mpf(1) / 4) * mpmath.qp(-1, q2) * mpmath.qp(-q2, q2) / mpmath.qp(q, q2)
    assert rel_err(closed_form_limit(ctx_q, 1, parity), want) < 1e-38


@pytest.mark.parametrize("L,N", [(1, 2), (1, 3), (2, 4), (2, 5), (3, 6), (3, 7), (4, 4)])
def test_predicted_against_mpmath_theta_determinant(L, N):
    ctx = make_context("0.5")
    q = mp_q(ctx, dps=60)
    spec = PartitionSpec(N, L)
    a = spec.alpha
    R = mpmath.matrix(L, L)
    for i in range(L):
        for j in range(L):
            R[i, j] = mp_theta_j(q, i, q ** (a - j - mpmath.mpf(L - 1) / 2))
    pre = q ** (mpmath.mpf(L * (L - a - 1) ** 2) / 4) / (mpmath.qp(q, q) ** L * math.prod(
        math.factorial(j) for j in range(L)))
    assert rel_err(predicted_scaled(ctx, spec), pre * mpmath.det(R)) < 1e-38
    assert rel_err(det_R(ctx, L, a), mpmath.det(R)) < 1e-38


@pytest.mark.parametrize("q", ["0.3", "0.5", "0.7"])
def test_predicted_agrees_with_closed_forms(q):
    ctx = make_context(q)
    for L in (1, 2):
        for N in (2, 3):
            spec = PartitionSpec(N, L)
            a, b = predicted_scaled(ctx, spec), closed_form_limit(ctx, L, spec.parity)
            assert float(abs(a / b - 1)) < 1e-30


@pytest.mark.parametrize("alpha,parity", [(0, "even"), (-1, "odd")])
def test_theta_wronskian_form(ctx_q, alpha, parity):
    a, b = theta_wronskian_limit(ctx_q, alpha), closed_form_limit(ctx_q, 2, parity)
    assert float(abs(a / b - 1)) < 1e-30


def test_closed_form_validation(ctx):
    with pytest.raises(ValueError):
        closed_form_limit(ctx, 3, "even")
    with pytest.raises(ValueError):
        closed_form_limit(ctx, 1, "both")


def test_convergence_table(ctx):
    rows = convergence_table(ctx, 1, range(2, 21))
    for parity in ("even", "odd"):
        errs = [r.abs_err for r in rows if r.parity == parity]
        assert all(b < a for a, b in zip(errs, errs[1:]))
    assert float(rows[-1].abs_err) < 1e-2


def test_parallel_rows_are_identical(ctx):
    serial = convergence_table(ctx, 2, [3, 4, 5, 6])
    parallel = convergence_table(ctx, 2, [3, 4, 5, 6], jobs=3)
    assert table_to_csv(serial) == table_to_csv(parallel)


def test_table_validation(ctx):
    with pytest.raises(ValueError):
        convergence_table(ctx, 1, [])
    with pytest.raises(ValueError):
        convergence_table(ctx, 1, [4, 3])


def test_table_serialization(ctx):
    rows = convergence_table(ctx, 1, [2, 3])
    csv = table_to_csv(rows, digits=6).splitlines()
    assert csv[0] == CSV_HEADER
    assert csv[1].startswith("2,even,2.50000e0,7.37197e0,")
    dat = table_to_dat(rows).splitlines()
    assert dat[0].startswith("#")
    assert dat[1].split()[:2] == ["2", "0"]
    assert dat[2].split()[:2] == ["3", "1"]
