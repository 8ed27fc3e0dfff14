"""Certified real arithmetic.

Three layers live here:

* :class:`Enclosure` -- an interval with dyadic endpoints ``lo_num/2**bits`` and
  ``hi_num/2**bits``; every operation rounds outward.
* :class:`NumberField` / :class:`NumberFieldElem` -- exact arithmetic in
  ``Q[x]/(p)`` for an irreducible ``p`` with a distinguished real root.
* :class:`CertReal` -- the facade used by the rest of the package.  A value is
  either exact (a :class:`~fractions.Fraction` or a number-field element) or a
  lazily refinable enclosure.  Signs are decided by refining from 64 bits,
  doubling up to the active precision cap (see :func:`precision`).
"""

from __future__ import annotations

import contextlib
import contextvars
import enum
from dataclasses import dataclass
from fractions import Fraction
from math import gcd
from typing import Callable, Iterator, Sequence, Union

import sympy

from .errors import (
    DivisionBySignUnknown,
    MultipleRoots,
    NoSignChange,
    UnresolvableAtPrecision,
)

START_BITS = 64
DEFAULT_MAX_BITS = 4096

_MAX_BITS: contextvars.ContextVar[int] = contextvars.ContextVar(
    "betaswitch_max_bits", default=DEFAULT_MAX_BITS
)


def max_bits() -> int:
    """Precision cap currently in force."""
    return _MAX_BITS.get()


@contextlib.contextmanager
def precision(bits: int) -> Iterator[None]:
    """Temporarily change the precision cap used for sign decisions.

    >>> with precision(256):
    ...     pass
    """
    if bits < 2:
        raise ValueError("precision cap must be at least 2 bits")
    token = _MAX_BITS.set(bits)
    try:
        yield
    finally:
        _MAX_BITS.reset(token)


def bit_schedule(limit: int | None = None) -> Iterator[int]:
    """64, 128, 256, ... capped at ``limit`` (default: the active cap)."""
    limit = max_bits() if limit is None else limit
    bits = min(START_BITS, limit)
    while True:
        yield bits
        if bits >= limit:
            return
        bits = min(2 * bits, limit)


def _ceil_shift(value: int, shift: int) -> int:
    return -((-value) >> shift)


def _ceil_div(a: int, b: int) -> int:
    return -((-a) // b)


# --------------------------------------------------------------------------
# Enclosures
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class Enclosure:
    """Closed interval ``[lo_num, hi_num] / 2**precision_bits``."""

    lo_num: int
    hi_num: int
    precision_bits: int

    def __post_init__(self):
        if self.lo_num > self.hi_num:
            raise ValueError("enclosure with lo > hi")

    @classmethod
    def from_fraction(cls, q: Fraction, bits: int) -> "Enclosure":
        scaled = q * (1 << bits)
        return cls(scaled.numerator // scaled.denominator,
                   _ceil_div(scaled.numerator, scaled.denominator), bits)

    @classmethod
    def from_bounds(cls, lo: Fraction, hi: Fraction, bits: int) -> "Enclosure":
        a = Fraction(lo) * (1 << bits)
        b = Fraction(hi) * (1 << bits)
        return cls(a.numerator // a.denominator,
                   _ceil_div(b.numerator, b.denominator), bits)

    @property
    def lo(self) -> Fraction:
        return Fraction(self.lo_num, 1 << self.precision_bits)

    @property
    def hi(self) -> Fraction:
        return Fraction(self.hi_num, 1 << self.precision_bits)

    @property
    def width(self) -> Fraction:
        return Fraction(self.hi_num - self.lo_num, 1 << self.precision_bits)

    @property
    def mid(self) -> Fraction:
        return Fraction(self.lo_num + self.hi_num, 1 << (self.precision_bits + 1))

    def contains(self, q) -> bool:
        q = Fraction(q)
        return self.lo <= q <= self.hi

    def contains_enclosure(self, other: "Enclosure") -> bool:
        return self.lo <= other.lo and other.hi <= self.hi

    def at(self, bits: int) -> "Enclosure":
        """Same interval expressed on a ``2**-bits`` grid (outward)."""
        shift = bits - self.precision_bits
        if shift >= 0:
            return Enclosure(self.lo_num << shift, self.hi_num << shift, bits)
        return Enclosure(self.lo_num >> -shift,
                         _ceil_shift(self.hi_num, -shift), bits)

    def intersect(self, other: "Enclosure") -> "Enclosure":
        bits = max(self.precision_bits, other.precision_bits)
        a, b = self.at(bits), other.at(bits)
        lo, hi = max(a.lo_num, b.lo_num), min(a.hi_num, b.hi_num)
        if lo > hi:
            raise ValueError("disjoint enclosures of one value")
        return Enclosure(lo, hi, bits)

    def sign(self) -> int | None:
        """Strict sign when the interval excludes zero, 0 for [0, 0]."""
        if self.lo_num > 0:
            return 1
        if self.hi_num < 0:
            return -1
        if self.lo_num == 0 and self.hi_num == 0:
            return 0
        return None

    def _pair(self, other: "Enclosure"):
        bits = max(self.precision_bits, other.precision_bits)
        return self.at(bits), other.at(bits), bits

    def __add__(self, other: "Enclosure") -> "Enclosure":
        a, b, bits = self._pair(other)
        return Enclosure(a.lo_num + b.lo_num, a.hi_num + b.hi_num, bits)

    def __sub__(self, other: "Enclosure") -> "Enclosure":
        a, b, bits = self._pair(other)
        return Enclosure(a.lo_num - b.hi_num, a.hi_num - b.lo_num, bits)

    def __neg__(self) -> "Enclosure":
        return Enclosure(-self.hi_num, -self.lo_num, self.precision_bits)

    def __mul__(self, other: "Enclosure") -> "Enclosure":
        a, b, bits = self._pair(other)
        products = (a.lo_num * b.lo_num, a.lo_num * b.hi_num,
                    a.hi_num * b.lo_num, a.hi_num * b.hi_num)
        return Enclosure(min(products) >> bits, _ceil_shift(max(products), bits), bits)

    def reciprocal(self) -> "Enclosure":
        if self.sign() in (None, 0):
            raise ZeroDivisionError("enclosure contains zero")
        bits = self.precision_bits
        num = 1 << (2 * bits)
        return Enclosure(num // self.hi_num, _ceil_div(num, self.lo_num), bits)

    def __truediv__(self, other: "Enclosure") -> "Enclosure":
        a, b, _ = self._pair(other)
        return a * b.reciprocal()

    def __repr__(self):
        return f"Enclosure([{float(self.lo)!r}, {float(self.hi)!r}] @ {self.precision_bits} bits)"


# --------------------------------------------------------------------------
# Polynomial helpers (coefficient lists, low degree first)
# --------------------------------------------------------------------------


def _trim(p: list) -> list:
    while len(p) > 1 and p[-1] == 0:
        p.pop()
    return p


def _poly_eval(p: Sequence, x):
    acc = 0
    for c in reversed(p):
        acc = acc * x + c
    return acc


def _poly_divmod(a: list[Fraction], b: list[Fraction]):
    a = list(a)
    q = [Fraction(0)] * max(1, len(a) - len(b) + 1)
    lead = b[-1]
    while len(a) >= len(b) and any(a):
        shift = len(a) - len(b)
        t = a[-1] / lead
        q[shift] = t
        for i, c in enumerate(b):
            a[shift + i] -= t * c
        a.pop()
        _trim(a)
    return q, _trim(a) if a else [Fraction(0)]


def _poly_mul(a: Sequence, b: Sequence) -> list:
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] += x * y
    return out


def _poly_sub(a: Sequence, b: Sequence) -> list:
    n = max(len(a), len(b))
    return _trim([(a[i] if i < len(a) else 0) - (b[i] if i < len(b) else 0)
                  for i in range(n)])


def _poly_inverse_mod(a: list[Fraction], m: list[Fraction]) -> list[Fraction]:
    """u with u*a = 1 mod m (extended Euclid over Q)."""
    r0, r1 = list(m), _trim(list(a))
    s0, s1 = [Fraction(0)], [Fraction(1)]
    while len(r1) > 1 or r1[0] != 0:
        q, r = _poly_divmod(r0, r1)
        r0, r1 = r1, r
        s0, s1 = s1, _poly_sub(s0, _poly_mul(q, s1))
    if len(r0) != 1:
        raise ZeroDivisionError("element is not invertible modulo the field polynomial")
    c = r0[0]
    return [x / c for x in s0]


def _as_coefficients(poly) -> list[Fraction]:
    """Normalise a polynomial given as coefficients (low first), sympy Poly or str."""
    if isinstance(poly, str):
        poly = sympy.Poly(sympy.sympify(poly), sympy.Symbol("x"))
    if isinstance(poly, sympy.Poly):
        coeffs = [Fraction(int(c.p), int(c.q)) for c in reversed(poly.all_coeffs())]
    else:
        coeffs = [Fraction(c) for c in poly]
    coeffs = _trim(coeffs)
    if len(coeffs) < 2:
        raise ValueError("polynomial must have degree >= 1")
    return coeffs


def _to_sympy(coeffs: Sequence[Fraction]) -> sympy.Poly:
    x = sympy.Symbol("x")
    return sympy.Poly([sympy.Rational(c.numerator, c.denominator)
                       for c in reversed(coeffs)], x, domain="QQ")


# --------------------------------------------------------------------------
# Number fields
# --------------------------------------------------------------------------

_FIELDS: dict = {}


class NumberField:
    """``Q[x]/(p)`` for an irreducible ``p`` together with one real root of ``p``.

    Use :func:`number_field` to construct; instances are interned so that the
    same polynomial and bracket always give the same field object.
    """

    def __init__(self, monic: tuple[Fraction, ...], bracket: tuple[Fraction, Fraction]):
        self.poly = monic
        self.degree = len(monic) - 1
        den = 1
        for c in monic:
            den = den * c.denominator // gcd(den, c.denominator)
        self._ipoly = tuple(int(c * den) for c in monic)  # primitive up to content
        g = 0
        for c in self._ipoly:
            g = gcd(g, c)
        self._ipoly = tuple(c // g for c in self._ipoly)
        self._lc = self._ipoly[-1]
        lo, hi = bracket
        self.bracket = (lo, hi)
        self._root = self._snap(lo, hi)

    # root enclosure ------------------------------------------------------

    def _sign_at(self, num: int, bits: int) -> int:
        # sign of p(num / 2**bits), computed in integers
        acc = 0
        n = len(self._ipoly) - 1
        for i, c in enumerate(self._ipoly):
            acc += c * num ** i << (bits * (n - i))
        return (acc > 0) - (acc < 0)

    def _snap(self, lo: Fraction, hi: Fraction):
        bits = 8
        while True:
            a = Fraction(lo) * (1 << bits)
            b = Fraction(hi) * (1 << bits)
            lo_num = _ceil_div(a.numerator, a.denominator)
            hi_num = b.numerator // b.denominator
            if lo_num < hi_num:
                s_lo, s_hi = self._sign_at(lo_num, bits), self._sign_at(hi_num, bits)
                if s_lo * s_hi < 0:
                    return [lo_num, hi_num, bits, s_lo]
            bits += 8
            if bits > 1 << 16:
                raise NoSignChange("could not isolate the field root inside its bracket")

    def root_bounds(self, bits: int) -> tuple[int, int, int]:
        """``(L, H, P)`` with the root in ``[L, H] / 2**P`` and ``H - L <= 2**(P-bits)``."""
        lo_num, hi_num, p, s_lo = self._root
        while (hi_num - lo_num) << bits > (1 << p):
            if hi_num - lo_num == 1:
                lo_num, hi_num, p = lo_num << 1, hi_num << 1, p + 1
            mid = (lo_num + hi_num) >> 1
            s = self._sign_at(mid, p)
            if s == 0:
                lo_num = hi_num = mid
                break
            if s == s_lo:
                lo_num = mid
            else:
                hi_num = mid
        self._root = [lo_num, hi_num, p, s_lo]
        excess = p - bits - 8
        if excess > 0:
            return lo_num >> excess, _ceil_shift(hi_num, excess), p - excess
        return lo_num, hi_num, p

    def root_enclosure(self, bits: int) -> Enclosure:
        lo_num, hi_num, p = self.root_bounds(bits)
        return Enclosure(lo_num, hi_num, p).at(bits)

    # elements ------------------------------------------------------------

    @property
    def gen(self) -> "NumberFieldElem":
        return self.element([0, 1])

    def element(self, coeffs: Sequence) -> "NumberFieldElem":
        coeffs = [Fraction(c) for c in coeffs]
        if len(coeffs) > self.degree:
            _, coeffs = _poly_divmod(coeffs, list(self.poly))
        den = 1
        for c in coeffs:
            den = den * c.denominator // gcd(den, c.denominator)
        return NumberFieldElem._make(self, [int(c * den) for c in coeffs], den)

    def coerce(self, q: Fraction) -> "NumberFieldElem":
        q = Fraction(q)
        return NumberFieldElem._make(self, [q.numerator], q.denominator)

    def __repr__(self):
        terms = " + ".join(f"({c})*x^{i}" for i, c in enumerate(self.poly) if c)
        return f"NumberField({terms}, root in [{self.bracket[0]}, {self.bracket[1]}])"


def number_field(poly, bracket) -> NumberField:
    """Intern the field generated by the root of ``poly`` inside ``bracket``.

    ``poly`` must already be irreducible over Q.
    """
    coeffs = _as_coefficients(poly)
    lead = coeffs[-1]
    monic = tuple(c / lead for c in coeffs)
    lo, hi = Fraction(bracket[0]), Fraction(bracket[1])
    key = (monic, lo, hi)
    field = _FIELDS.get(key)
    if field is None:
        field = NumberField(monic, (lo, hi))
        _FIELDS[key] = field
    return field


class NumberFieldElem:
    """Element ``(sum nums[i] x**i) / den`` of a :class:`NumberField`."""

    __slots__ = ("field", "nums", "den", "_hash")

    @classmethod
    def _make(cls, field: NumberField, nums: list[int], den: int) -> "NumberFieldElem":
        nums = list(nums) + [0] * (field.degree - len(nums))
        if den < 0:
            nums, den = [-c for c in nums], -den
        g = den
        for c in nums:
            g = gcd(g, c)
            if g == 1:
                break
        if g > 1:
            nums, den = [c // g for c in nums], den // g
        self = object.__new__(cls)
        self.field = field
        self.nums = tuple(nums)
        self.den = den
        self._hash = None
        return self

    @property
    def coeffs(self) -> tuple[Fraction, ...]:
        return tuple(Fraction(c, self.den) for c in self.nums)

    def is_zero(self) -> bool:
        return not any(self.nums)

    def is_rational(self) -> bool:
        return not any(self.nums[1:])

    def __eq__(self, other):
        if not isinstance(other, NumberFieldElem):
            return NotImplemented
        return self.field is other.field and self.nums == other.nums and self.den == other.den

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((id(self.field), self.nums, self.den))
        return self._hash

    def __add__(self, other: "NumberFieldElem") -> "NumberFieldElem":
        d1, d2 = self.den, other.den
        return self._make(self.field, [a * d2 + b * d1 for a, b in zip(self.nums, other.nums)],
                          d1 * d2)

    def __sub__(self, other: "NumberFieldElem") -> "NumberFieldElem":
        d1, d2 = self.den, other.den
        return self._make(self.field, [a * d2 - b * d1 for a, b in zip(self.nums, other.nums)],
                          d1 * d2)

    def __neg__(self) -> "NumberFieldElem":
        return self._make(self.field, [-a for a in self.nums], self.den)

    def __mul__(self, other: "NumberFieldElem") -> "NumberFieldElem":
        field = self.field
        prod = _poly_mul(self.nums, other.nums)
        den = self.den * other.den
        ip, lc, d = field._ipoly, field._lc, field.degree
        while len(prod) > d:
            top = prod.pop()
            if top == 0:
                continue
            if lc != 1:
                prod = [c * lc for c in prod]
                den *= lc
            shift = len(prod) - d
            for i in range(d):
                prod[shift + i] -= top * ip[i]
        return self._make(field, prod, den)

    def inverse(self) -> "NumberFieldElem":
        if self.is_zero():
            raise ZeroDivisionError("inverse of zero")
        u = _poly_inverse_mod(list(self.coeffs), list(self.field.poly))
        return self.field.element(u)

    def __truediv__(self, other: "NumberFieldElem") -> "NumberFieldElem":
        return self * other.inverse()

    def enclosure(self, bits: int) -> Enclosure:
        """Outward enclosure of the element's value with width about ``2**-bits``."""
        nums, den = self.nums, self.den
        if not any(nums[1:]):
            return Enclosure.from_fraction(Fraction(nums[0], den), bits)
        n = len(nums) - 1
        L0, H0, P0 = self.field.root_bounds(2)
        bound = max(abs(L0), abs(H0)) // (1 << P0) + 2
        spread = sum(abs(c) * i * bound ** i for i, c in enumerate(nums))
        extra = max(0, spread.bit_length() - den.bit_length()) + 4
        while True:
            L, H, P = self.field.root_bounds(bits + extra)
            lo_acc = hi_acc = 0
            for i, c in enumerate(nums):
                if c == 0:
                    continue
                pl, ph = L ** i, H ** i
                if i % 2 == 0 and L < 0:
                    pl, ph = (0, max(pl, ph)) if H > 0 else (ph, pl)
                scale = 1 << (P * (n - i))
                if c > 0:
                    lo_acc += c * pl * scale
                    hi_acc += c * ph * scale
                else:
                    lo_acc += c * ph * scale
                    hi_acc += c * pl * scale
            total = den << (P * n)
            enc = Enclosure((lo_acc << bits) // total,
                            _ceil_div(hi_acc << bits, total), bits)
            if enc.hi_num - enc.lo_num <= 4:
                return enc
            extra += 16

    def __repr__(self):
        return f"NumberFieldElem({[str(c) for c in self.coeffs]})"


# --------------------------------------------------------------------------
# CertReal
# --------------------------------------------------------------------------

Exact = Union[Fraction, NumberFieldElem]


class Ordering(enum.Enum):
    LESS = "Less"
    EQUAL = "Equal"
    GREATER = "Greater"
    UNKNOWN = "Unknown"


def _common(a: Exact, b: Exact):
    """Bring two exact values into one representation, or ``None``."""
    if isinstance(a, Fraction):
        if isinstance(b, Fraction):
            return a, b
        return b.field.coerce(a), b
    if isinstance(b, Fraction):
        return a, a.field.coerce(b)
    if a.field is b.field:
        return a, b
    return None


def _magnitude_bits(enc: Enclosure) -> int:
    m = max(abs(enc.lo_num), abs(enc.hi_num)) >> enc.precision_bits
    return m.bit_length()


class CertReal:
    """A real number with a certified, refinable enclosure.

    Exact values carry ``exact`` (a Fraction or a :class:`NumberFieldElem`) and
    are closed under arithmetic when the operands share a field.  Everything
    else is an ``approx(bits)`` callback whose enclosures are intersected so
    that refinement never widens.
    """

    __slots__ = ("exact", "_approx", "_best")

    def __init__(self, exact: Exact | None = None,
                 approx: Callable[[int], Enclosure] | None = None):
        if exact is None and approx is None:
            raise ValueError("CertReal needs an exact value or an approximation")
        if isinstance(exact, NumberFieldElem) and exact.is_rational():
            exact = Fraction(exact.nums[0], exact.den)
        self.exact = exact
        self._approx = approx
        self._best: Enclosure | None = None

    # construction ----------------------------------------------------------

    @classmethod
    def of(cls, value) -> "CertReal":
        if isinstance(value, CertReal):
            return value
        if isinstance(value, NumberFieldElem):
            return cls(value)
        if isinstance(value, Enclosure):
            return cls(approx=lambda bits, e=value: e.at(bits))
        return cls(Fraction(value))

    @property
    def is_exact(self) -> bool:
        return self.exact is not None

    @property
    def field(self) -> NumberField | None:
        return self.exact.field if isinstance(self.exact, NumberFieldElem) else None

    @property
    def key(self):
        """Hashable exact identity, or ``None`` for inexact values."""
        return self.exact

    # enclosures ------------------------------------------------------------

    def enclosure(self, bits: int = START_BITS) -> Enclosure:
        ex = self.exact
        if isinstance(ex, Fraction):
            return Enclosure.from_fraction(ex, bits)
        if ex is not None:
            return ex.enclosure(bits)
        enc = self._approx(bits)
        best = self._best
        if best is not None:
            enc = enc.intersect(best).at(bits)
        if best is None or bits >= best.precision_bits:
            self._best = enc
        return enc

    def refine(self, bits: int) -> "CertReal":
        """Value-equal CertReal whose cached enclosure is at least ``bits`` wide."""
        self.enclosure(bits)
        return self

    def __float__(self) -> float:
        if isinstance(self.exact, Fraction):
            return float(self.exact)
        return float(self.enclosure(START_BITS).mid)

    # sign and comparison ------------------------------------------------------

    def sign(self, limit: int | None = None) -> int | None:
        """-1, 0, 1, or ``None`` when undecided at the precision cap."""
        ex = self.exact
        if isinstance(ex, Fraction):
            return (ex > 0) - (ex < 0)
        if ex is not None and ex.is_zero():
            return 0
        for bits in bit_schedule(limit):
            s = self.enclosure(bits).sign()
            if s:
                return s
        return None

    def cmp(self, other, limit: int | None = None) -> Ordering:
        s = (self - CertReal.of(other)).sign(limit)
        if s is None:
            return Ordering.UNKNOWN
        return (Ordering.LESS, Ordering.EQUAL, Ordering.GREATER)[s + 1]

    def compare(self, other) -> int:
        """-1/0/1; raises :class:`UnresolvableAtPrecision` when undecided."""
        s = (self - CertReal.of(other)).sign()
        if s is None:
            raise UnresolvableAtPrecision(
                f"cannot order {self!r} and {CertReal.of(other)!r} at {max_bits()} bits")
        return s

    def __lt__(self, other):
        return self.compare(other) < 0

    def __le__(self, other):
        return self.compare(other) <= 0

    def __gt__(self, other):
        return self.compare(other) > 0

    def __ge__(self, other):
        return self.compare(other) >= 0

    def same_as(self, other) -> bool:
        """Certified equality; raises when the question is undecidable."""
        return self.compare(other) == 0

    # arithmetic ------------------------------------------------------------

    def _binary(self, other, op: str) -> "CertReal":
        other = CertReal.of(other)
        if self.exact is not None and other.exact is not None:
            pair = _common(self.exact, other.exact)
            if pair is not None:
                a, b = pair
                if op == "add":
                    return CertReal(a + b)
                if op == "sub":
                    return CertReal(a - b)
                if op == "mul":
                    return CertReal(a * b)
                if isinstance(b, Fraction) and b == 0 or \
                        isinstance(b, NumberFieldElem) and b.is_zero():
                    raise ZeroDivisionError("division by exact zero")
                return CertReal(a / b)
        return _lazy(self, other, op)

    def __add__(self, other):
        return self._binary(other, "add")

    def __radd__(self, other):
        return CertReal.of(other)._binary(self, "add")

    def __sub__(self, other):
        return self._binary(other, "sub")

    def __rsub__(self, other):
        return CertReal.of(other)._binary(self, "sub")

    def __mul__(self, other):
        return self._binary(other, "mul")

    def __rmul__(self, other):
        return CertReal.of(other)._binary(self, "mul")

    def __truediv__(self, other):
        return self._binary(other, "div")

    def __rtruediv__(self, other):
        return CertReal.of(other)._binary(self, "div")

    def __neg__(self):
        if self.exact is not None:
            return CertReal(-self.exact)
        return CertReal(approx=lambda bits, s=self: -s.enclosure(bits))

    def __pow__(self, n: int):
        if not isinstance(n, int):
            return NotImplemented
        if n < 0:
            return CertReal(Fraction(1)) / (self ** -n)
        result, base = CertReal(Fraction(1)), self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def __repr__(self):
        if isinstance(self.exact, Fraction):
            return f"CertReal({self.exact})"
        tag = "exact" if self.exact is not None else "approx"
        return f"CertReal({format_decimal(self, 12, strict=False)}..., {tag})"


def _lazy(a: CertReal, b: CertReal, op: str) -> CertReal:
    if op == "div":
        s = b.sign()
        if s is None:
            raise DivisionBySignUnknown(f"sign of divisor {b!r} unknown at {max_bits()} bits")
        if s == 0:
            raise ZeroDivisionError("division by exact zero")

    def approx(bits: int) -> Enclosure:
        if op in ("add", "sub"):
            ea, eb = a.enclosure(bits + 2), b.enclosure(bits + 2)
            return (ea + eb if op == "add" else ea - eb).at(bits)
        ea0, eb0 = a.enclosure(START_BITS), b.enclosure(START_BITS)
        if op == "mul":
            guard = bits + 4 + max(_magnitude_bits(ea0), _magnitude_bits(eb0))
            return (a.enclosure(guard) * b.enclosure(guard)).at(bits)
        # division: |1/b| is controlled by the distance of b from zero
        small = min(abs(eb0.lo), abs(eb0.hi))
        inv_bits = 0 if small >= 1 else (1 / small).numerator.bit_length() + 1
        guard = bits + 4 + _magnitude_bits(ea0) + 2 * inv_bits
        return (a.enclosure(guard) / b.enclosure(guard)).at(bits)

    return CertReal(approx=approx)


# --------------------------------------------------------------------------
# Module-level operations
# --------------------------------------------------------------------------


def cr_arith(a, b, op: str) -> CertReal:
    """Apply ``op`` in {'add', 'sub', 'mul', 'div'} to two certified reals."""
    if op not in ("add", "sub", "mul", "div"):
        raise ValueError(f"unknown op {op!r}")
    return CertReal.of(a)._binary(b, op)


def cr_cmp(a, b, max_bits: int | None = None) -> Ordering:
    return CertReal.of(a).cmp(b, max_bits)


def format_decimal(x: CertReal, digits: int, strict: bool = True) -> str:
    """Round ``x`` to ``digits`` decimals.

    With ``strict`` the result is certified: the enclosure is refined until
    both endpoints round to the same string (raises if the cap is reached).
    """
    x = CertReal.of(x)
    scale = 10 ** digits
    if isinstance(x.exact, Fraction):
        return _fixed(_round_half_even(x.exact * scale), digits)
    bits = max(START_BITS, int(digits * 3.33) + 16)
    cap = max(max_bits(), bits)
    while True:
        enc = x.enclosure(bits)
        lo = _round_half_even(enc.lo * scale)
        hi = _round_half_even(enc.hi * scale)
        if lo == hi or not strict:
            return _fixed(hi if lo == hi else _round_half_even(enc.mid * scale), digits)
        if bits >= cap:
            raise UnresolvableAtPrecision(f"cannot round {x!r} to {digits} digits")
        bits = min(2 * bits, cap)


def _round_half_even(q: Fraction) -> int:
    return round(q)


def _fixed(n: int, digits: int) -> str:
    sign = "-" if n < 0 else ""
    n = abs(n)
    if digits == 0:
        return f"{sign}{n}"
    s = str(n).rjust(digits + 1, "0")
    return f"{sign}{s[:-digits]}.{s[-digits:]}"


def isolate_root(poly, bracket, bits: int = START_BITS) -> CertReal:
    """Certified root of ``poly`` inside the open ``bracket``.

    ``poly`` is a coefficient sequence (lowest degree first), a sympy Poly or a
    string in ``x``.  The polynomial must change sign across the bracket and
    have exactly one real root inside it.  The result is exact: either a
    Fraction (rational root) or the generator of the number field cut out by
    the irreducible factor that vanishes there.
    """
    coeffs = _as_coefficients(poly)
    lo, hi = Fraction(bracket[0]), Fraction(bracket[1])
    if lo >= hi:
        raise ValueError("empty bracket")
    v_lo, v_hi = _poly_eval(coeffs, lo), _poly_eval(coeffs, hi)
    if v_lo * v_hi >= 0:
        raise NoSignChange(f"polynomial does not change sign on [{lo}, {hi}]")
    sp = _to_sympy(coeffs)
    n_roots = sympy.Poly(sympy.sqf_part(sp.as_expr()), sp.gen).count_roots(
        sympy.Rational(lo.numerator, lo.denominator),
        sympy.Rational(hi.numerator, hi.denominator))
    if n_roots > 1:
        raise MultipleRoots(f"{n_roots} roots in [{lo}, {hi}]")
    _, factors = sympy.factor_list(sp.as_expr(), sp.gen)
    for factor, _mult in factors:
        fc = _as_coefficients(sympy.Poly(factor, sp.gen))
        if _poly_eval(fc, lo) * _poly_eval(fc, hi) < 0:
            break
    else:  # pragma: no cover - a sign change must come from some factor
        raise NoSignChange("no irreducible factor changes sign")
    if len(fc) == 2:
        return CertReal(-fc[0] / fc[1])
    field = number_field(fc, (lo, hi))
    root = CertReal(field.gen)
    root.enclosure(bits)
    return root
