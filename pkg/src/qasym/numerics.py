"""Scaled arbitrary-precision reals, q-contexts and precision escalation.

Every value in the package is a :class:`ScaledReal`: a binary floating point
number with an unbounded integer exponent, backed by the pure functions of
``mpmath.libmp``.  Precision travels with each value instead of living in a
global context, so values and contexts can be shared between threads.
"""

from __future__ import annotations

import decimal
import math
from dataclasses import dataclass, replace
from fractions import Fraction
from functools import cached_property, lru_cache
from typing import Callable, Sequence, Union

from mpmath import libmp

RND = libmp.round_nearest

DEFAULT_BITS = 256
DEFAULT_TAIL_TOL = 1e-40
MIN_BITS = 64
MAX_ESCALATIONS = 6

_LOG10_2 = math.log10(2.0)


class StabilizationError(ArithmeticError):
    """Successive precision doublings never agreed to the requested digits."""


class ScaledReal:
    """Immutable real ``sign * mantissa * 2**exponent2`` at a fixed precision.

    Arithmetic between two values runs at the larger of the two precisions;
    Python ints and Fractions are converted exactly.
    """

    __slots__ = ("_mpf", "prec")

    def __init__(self, mpf: tuple, prec: int):
        self._mpf = mpf
        self.prec = prec

    # -- construction --------------------------------------------------

    @classmethod
    def from_int(cls, n: int, prec: int) -> "ScaledReal":
        return cls(libmp.from_int(n, prec, RND), prec)

    @classmethod
    def from_fraction(cls, value: Fraction, prec: int) -> "ScaledReal":
        value = Fraction(value)
        return cls(libmp.from_rational(value.numerator, value.denominator, prec, RND), prec)

    @classmethod
    def from_string(cls, text: str, prec: int) -> "ScaledReal":
        try:
            return cls(libmp.from_str(text.strip(), prec, RND), prec)
        except ValueError as exc:
            raise ValueError(f"malformed number literal {text!r}") from exc

    @classmethod
    def zero(cls, prec: int) -> "ScaledReal":
        return cls(libmp.fzero, prec)

    @classmethod
    def one(cls, prec: int) -> "ScaledReal":
        return cls(libmp.fone, prec)

    @classmethod
    def coerce(cls, value: "RealLike", prec: int) -> "ScaledReal":
        """Convert ints, Fractions, decimal strings, floats or ScaledReals.

        Floats go through their shortest repr, so ``1.7`` means 17/10.
        """
        if isinstance(value, ScaledReal):
            return value
        if isinstance(value, bool):
            raise TypeError("booleans are not real numbers here")
        if isinstance(value, int):
            return cls.from_int(value, prec)
        if isinstance(value, Fraction):
            return cls.from_fraction(value, prec)
        if isinstance(value, decimal.Decimal):
            return cls.from_fraction(Fraction(value), prec)
        if isinstance(value, float):
            if not math.isfinite(value):
                raise ValueError("non-finite float")
            return cls.from_string(repr(value), prec)
        if isinstance(value, str):
            return cls.from_string(value, prec)
        raise TypeError(f"cannot convert {type(value).__name__} to ScaledReal")

    def _other(self, other) -> tuple | None:
        if isinstance(other, ScaledReal):
            return other._mpf
        if isinstance(other, int) and not isinstance(other, bool):
            return libmp.from_int(other)
        if isinstance(other, Fraction):
            return libmp.from_rational(other.numerator, other.denominator, self.prec + 64, RND)
        return None

    def _prec_with(self, other) -> int:
        if isinstance(other, ScaledReal):
            return max(self.prec, other.prec)
        return self.prec

    # -- structure -----------------------------------------------------

    @property
    def sign(self) -> int:
        return libmp.mpf_sign(self._mpf)

    @property
    def exponent2(self) -> int:
        """Exponent ``e`` with ``|self| = mantissa * 2**e`` and mantissa in [1, 2)."""
        if self._mpf == libmp.fzero:
            return 0
        _, man, exp, bc = self._mpf
        return exp + bc - 1

    @property
    def mantissa(self) -> "ScaledReal":
        if self._mpf == libmp.fzero:
            return self
        sign, man, _, bc = self._mpf
        return ScaledReal(libmp.from_man_exp(-man if sign else man, 1 - bc), self.prec)

    def is_zero(self) -> bool:
        return self._mpf == libmp.fzero

    def with_prec(self, prec: int) -> "ScaledReal":
        return ScaledReal(libmp.mpf_pos(self._mpf, prec, RND), prec)

    def log2_abs(self) -> float:
        """``log2|x|`` as a float; ``-inf`` at zero.  Never overflows."""
        if self._mpf == libmp.fzero:
            return -math.inf
        _, man, exp, bc = self._mpf
        top = man >> max(bc - 53, 0)
        return math.log2(top) + exp + max(bc - 53, 0)

    def log10_abs(self) -> float:
        return self.log2_abs() * _LOG10_2

    # -- arithmetic ----------------------------------------------------

    def __add__(self, other):
        o = self._other(other)
        if o is None:
            return NotImplemented
        prec = self._prec_with(other)
        return ScaledReal(libmp.mpf_add(self._mpf, o, prec, RND), prec)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._other(other)
        if o is None:
            return NotImplemented
        prec = self._prec_with(other)
        return ScaledReal(libmp.mpf_sub(self._mpf, o, prec, RND), prec)

    def __rsub__(self, other):
        o = self._other(other)
        if o is None:
            return NotImplemented
        return ScaledReal(libmp.mpf_sub(o, self._mpf, self.prec, RND), self.prec)

    def __mul__(self, other):
        o = self._other(other)
        if o is None:
            return NotImplemented
        prec = self._prec_with(other)
        return ScaledReal(libmp.mpf_mul(self._mpf, o, prec, RND), prec)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._other(other)
        if o is None:
            return NotImplemented
        if o == libmp.fzero:
            raise ZeroDivisionError("division by zero ScaledReal")
        prec = self._prec_with(other)
        return ScaledReal(libmp.mpf_div(self._mpf, o, prec, RND), prec)

    def __rtruediv__(self, other):
        o = self._other(other)
        if o is None:
            return NotImplemented
        if self._mpf == libmp.fzero:
            raise ZeroDivisionError("division by zero ScaledReal")
        return ScaledReal(libmp.mpf_div(o, self._mpf, self.prec, RND), self.prec)

    def __pow__(self, n: int):
        if not isinstance(n, int):
            return NotImplemented
        if n < 0 and self._mpf == libmp.fzero:
            raise ZeroDivisionError("negative power of zero")
        # pow_int loses about log2|n| bits; compute with guard bits
        guard = self.prec + abs(n).bit_length() + 8
        return ScaledReal(libmp.mpf_pow_int(self._mpf, n, guard, RND), self.prec).with_prec(self.prec)

    def __neg__(self):
        return ScaledReal(libmp.mpf_neg(self._mpf), self.prec)

    def __pos__(self):
        return self

    def __abs__(self):
        return ScaledReal(libmp.mpf_abs(self._mpf), self.prec)

    def ldexp(self, n: int) -> "ScaledReal":
        return ScaledReal(libmp.mpf_shift(self._mpf, n), self.prec)

    def sqrt(self) -> "ScaledReal":
        return ScaledReal(libmp.mpf_sqrt(self._mpf, self.prec, RND), self.prec)

    def exp(self) -> "ScaledReal":
        guard = self.prec + max(self.exponent2, 0) + 8
        return ScaledReal(libmp.mpf_exp(self._mpf, guard, RND), self.prec).with_prec(self.prec)

    def log(self) -> "ScaledReal":
        if self.sign <= 0:
            raise ValueError("log of a non-positive ScaledReal")
        return ScaledReal(libmp.mpf_log(self._mpf, self.prec, RND), self.prec)

    # -- comparison ----------------------------------------------------

    def _cmp(self, other) -> int:
        o = self._other(other)
        if o is None:
            raise TypeError(f"cannot compare ScaledReal with {type(other).__name__}")
        return libmp.mpf_cmp(self._mpf, o)

    def __eq__(self, other):
        o = self._other(other)
        if o is None:
            return NotImplemented
        return libmp.mpf_eq(self._mpf, o)

    def __hash__(self):
        return libmp.mpf_hash(self._mpf)

    def __lt__(self, other):
        return self._cmp(other) < 0

    def __le__(self, other):
        return self._cmp(other) <= 0

    def __gt__(self, other):
        return self._cmp(other) > 0

    def __ge__(self, other):
        return self._cmp(other) >= 0

    def __bool__(self):
        return self._mpf != libmp.fzero

    # -- conversion ----------------------------------------------------

    def __float__(self):
        return libmp.to_float(self._mpf)

    def to_fraction(self) -> Fraction:
        if self._mpf == libmp.fzero:
            return Fraction(0)
        sign, man, exp, _ = self._mpf
        value = Fraction(man) * Fraction(2) ** exp
        return -value if sign else value

    def to_decimal(self, digits: int = 16) -> str:
        """Serialize as ``[-]d.ddd...e[-]EEE`` with ``digits`` significant digits."""
        if digits < 1:
            raise ValueError("digits must be positive")
        if self._mpf == libmp.fzero:
            return "0e0"
        sign, digs, exp10 = libmp.to_digits_exp(self._mpf, digits + 6)
        raw = decimal.Decimal(f"{sign}0.{digs}E{exp10 + 1}")
        rounded = decimal.Context(prec=digits, rounding=decimal.ROUND_HALF_EVEN).plus(raw)
        tup = rounded.as_tuple()
        body = "".join(map(str, tup.digits)).ljust(digits, "0")[:digits]
        exponent = tup.exponent + len(tup.digits) - 1
        head = "-" if tup.sign else ""
        if digits == 1:
            return f"{head}{body}e{exponent}"
        return f"{head}{body[0]}.{body[1:]}e{exponent}"

    def __repr__(self):
        return f"ScaledReal({self.to_decimal(20)}, prec={self.prec})"

    def __str__(self):
        return self.to_decimal(max(1, int(self.prec * _LOG10_2) - 1))


RealLike = Union[ScaledReal, int, Fraction, str, float, decimal.Decimal]


def parse_exact(literal) -> Fraction:
    """Parse an exact decimal (or ``a/b``) literal; binary floats are refused."""
    if isinstance(literal, Fraction):
        return literal
    if isinstance(literal, float):
        raise TypeError("q must be given as an exact decimal string, not a float")
    if isinstance(literal, int):
        return Fraction(literal)
    try:
        return Fraction(str(literal).strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise ValueError(f"malformed q literal {literal!r}") from exc


def decimal_literal(value: Fraction) -> str:
    """Exact decimal text for a terminating rational, else ``a/b``."""
    with decimal.localcontext() as dc:
        dc.prec = 400
        d = decimal.Decimal(value.numerator) / decimal.Decimal(value.denominator)
    if Fraction(d) != value:
        return f"{value.numerator}/{value.denominator}"
    return format(d.normalize(), "f")


def as_fraction(value: RealLike) -> Fraction:
    """Exact rational value of a real-like argument (floats via their repr)."""
    if isinstance(value, ScaledReal):
        return value.to_fraction()
    if isinstance(value, float):
        if not math.isfinite(value):
            raise ValueError("non-finite float")
        return Fraction(repr(value))
    return parse_exact(value)


@dataclass(frozen=True)
class QContext:
    """Base ``q`` and working precision shared by every evaluation.

    The effective base is ``q_literal ** base_power``; sibling contexts with
    base q**2 or sqrt(q) are made with :meth:`rebase`, which keeps every
    exponent on the ``p = base**(1/2)`` lattice integral.
    """

    q_literal: Fraction
    mantissa_bits: int = DEFAULT_BITS
    tail_tol: float = DEFAULT_TAIL_TOL
    base_power: Fraction = Fraction(1)

    def __post_init__(self):
        if not 0 < self.q_literal < 1:
            raise ValueError(f"q out of range (0, 1): {self.q_literal}")
        if self.base_power <= 0:
            raise ValueError("base_power must be positive")
        if self.mantissa_bits < MIN_BITS:
            raise ValueError(f"mantissa_bits must be >= {MIN_BITS}")
        if not 0 < self.tail_tol < 2.0**-32:
            raise ValueError("tail_tol must lie in (0, 2**-32)")

    @property
    def prec(self) -> int:
        return self.mantissa_bits

    @cached_property
    def q(self) -> ScaledReal:
        """The effective base as a ScaledReal."""
        return self.power(1)

    @cached_property
    def p(self) -> ScaledReal:
        return self.power(Fraction(1, 2))

    @cached_property
    def q_float(self) -> float:
        return float(self.q_literal) ** float(self.base_power)

    @cached_property
    def log_q(self) -> float:
        """Natural log of the effective base, as a float (for cutoff searches)."""
        return float(self.base_power) * math.log(float(self.q_literal))

    @property
    def base_literal(self) -> str:
        """The effective base as an exact decimal string when it is one."""
        if self.base_power.denominator != 1:
            return f"{decimal_literal(self.q_literal)}^({self.base_power})"
        return decimal_literal(self.q_literal ** self.base_power.numerator)

    def with_bits(self, bits: int) -> "QContext":
        return replace(self, mantissa_bits=bits)

    def with_tail_tol(self, tol: float) -> "QContext":
        return replace(self, tail_tol=tol)

    def rebase(self, power) -> "QContext":
        """Context whose base is the current base raised to ``power``."""
        return replace(self, base_power=self.base_power * Fraction(power))

    def scalar(self, value: RealLike) -> ScaledReal:
        return ScaledReal.coerce(value, self.prec)

    def power(self, exponent) -> ScaledReal:
        """``base ** exponent`` for a rational exponent, to working precision."""
        exponent = Fraction(exponent)
        if exponent == 0:
            return ScaledReal.one(self.prec)
        return ScaledReal(_literal_power(self.q_literal, exponent * self.base_power, self.prec), self.prec)

    def real_power(self, exponent: RealLike) -> ScaledReal:
        """``base ** exponent`` for an arbitrary real exponent (via exp/log)."""
        return self.power(as_fraction(exponent))


@lru_cache(maxsize=4096)
def _literal_power(q: Fraction, r: Fraction, prec: int) -> tuple:
    """Raw mpf for ``q ** r`` rounded to ``prec`` bits."""
    guard = prec + abs(r.numerator).bit_length() + 16
    if r.denominator == 1:
        base = libmp.from_rational(q.numerator, q.denominator, guard, RND)
        val = libmp.mpf_pow_int(base, r.numerator, guard, RND)
    elif r.denominator <= 64:
        base = libmp.from_rational(q.numerator, q.denominator, guard, RND)
        root = libmp.mpf_nthroot(base, r.denominator, guard, RND)
        val = libmp.mpf_pow_int(root, r.numerator, guard, RND)
    else:
        guard += int(abs(r)).bit_length()
        base = libmp.from_rational(q.numerator, q.denominator, guard, RND)
        arg = libmp.mpf_mul(libmp.mpf_log(base, guard, RND),
                            libmp.from_rational(r.numerator, r.denominator, guard, RND), guard, RND)
        val = libmp.mpf_exp(arg, guard, RND)
    return libmp.mpf_pos(val, prec, RND)


def make_context(q_literal, mantissa_bits: int = DEFAULT_BITS, tail_tol: float = DEFAULT_TAIL_TOL) -> QContext:
    """Build a :class:`QContext` from an exact literal such as ``"0.6"``."""
    if isinstance(mantissa_bits, bool) or not isinstance(mantissa_bits, int):
        raise TypeError("mantissa_bits must be an integer")
    return QContext(parse_exact(q_literal), mantissa_bits, float(tail_tol))


def q_half_power(ctx: QContext, e: int) -> ScaledReal:
    """``q ** (e/2)``, i.e. an integer power of ``p = sqrt(q)``."""
    return ctx.power(Fraction(e, 2))


# -- precision escalation ---------------------------------------------------


@dataclass(frozen=True)
class StabilizedValue:
    value: ScaledReal
    verified_digits: int
    escalations: int


def precision_digits(bits: int) -> int:
    return int(bits * _LOG10_2)


def agreement_digits(a: ScaledReal, b: ScaledReal) -> float:
    """Number of significant decimal digits on which ``a`` and ``b`` agree."""
    if a == b:
        return math.inf
    if a.is_zero() or b.is_zero():
        return 0.0
    diff = abs(a - b).with_prec(max(a.prec, b.prec))
    scale = max(a.log10_abs(), b.log10_abs())
    return max(0.0, scale - diff.log10_abs())


def stabilize(computation: Callable[[QContext], ScaledReal], ctx: QContext,
              target_digits: int = 30) -> StabilizedValue:
    """Re-run ``computation`` at doubling precision until two runs agree.

    ``escalations`` counts the doublings beyond the first confirming run.
    """
    prev = computation(ctx)
    bits = ctx.mantissa_bits
    for step in range(1, MAX_ESCALATIONS + 1):
        lower_bits = bits
        bits *= 2
        cur = computation(ctx.with_bits(bits))
        digits = agreement_digits(prev, cur)
        if digits >= target_digits:
            verified = min(digits, precision_digits(lower_bits))
            return StabilizedValue(cur, int(verified), step - 1)
        prev = cur
    raise StabilizationError(
        f"no {target_digits}-digit agreement after {MAX_ESCALATIONS} precision doublings "
        f"(last two runs agree to {agreement_digits(prev, cur):.1f} digits at {bits} bits)")


def det(matrix: Sequence[Sequence[ScaledReal]]) -> ScaledReal:
    """Determinant by Gaussian elimination with full pivoting."""
    a = [list(row) for row in matrix]
    n = len(a)
    if any(len(row) != n for row in a):
        raise ValueError("determinant of a non-square matrix")
    if n == 0:
        raise ValueError("determinant of an empty matrix")
    prec = max(x.prec for row in a for x in row)
    result = ScaledReal.one(prec)
    cols = list(range(n))
    for k in range(n):
        piv_r, piv_c = k, k
        best = abs(a[k][cols[k]])
        for i in range(k, n):
            for j in range(k, n):
                v = abs(a[i][cols[j]])
                if v > best:
                    best, piv_r, piv_c = v, i, j
        if best.is_zero():
            return ScaledReal.zero(prec)
        if piv_r != k:
            a[k], a[piv_r] = a[piv_r], a[k]
            result = -result
        if piv_c != k:
            cols[k], cols[piv_c] = cols[piv_c], cols[k]
            result = -result
        pivot = a[k][cols[k]]
        result = result * pivot
        for i in range(k + 1, n):
            factor = a[i][cols[k]] / pivot
            if factor.is_zero():
                continue
            for j in range(k + 1, n):
                a[i][cols[j]] = a[i][cols[j]] - factor * a[k][cols[j]]
    return result
