"""Exact arithmetic over Q and real quadratic fields Q(sqrt m).

Rationals are :class:`fractions.Fraction`.  Elements of a real quadratic field
are :class:`QuadElement` values ``x + y*sqrt(m)``; Q itself is the degenerate
field ``FieldDescriptor(None)`` so every routine handles both base fields.
"""

from __future__ import annotations

import functools
import math
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Union

import sympy

Number = Union[int, Fraction]


# ---------------------------------------------------------------------------
# integers


def is_prime(n: int) -> bool:
    return n >= 2 and bool(sympy.isprime(n))


def check_prime(p: int) -> int:
    if not is_prime(p):
        raise ValueError(f"{p} is not prime")
    return p


@dataclass(frozen=True)
class Factorization:
    sign: int
    factors: tuple[tuple[int, int], ...]

    def value(self) -> int:
        out = self.sign
        for p, e in self.factors:
            out *= p**e
        return out

    def primes(self) -> tuple[int, ...]:
        return tuple(p for p, _ in self.factors)


def factorize(n: int) -> Factorization:
    """Sign and sorted prime-power factors of a nonzero integer."""
    return _factorize(int(n))


@functools.lru_cache(maxsize=65536)
def _factorize(n: int) -> Factorization:
    if n == 0:
        raise ValueError("cannot factorize 0")
    sign = 1 if n > 0 else -1
    facs = sympy.factorint(abs(n))
    return Factorization(sign, tuple(sorted((int(p), int(e)) for p, e in facs.items())))


def is_squarefree(n: int) -> bool:
    return n != 0 and all(e == 1 for _, e in factorize(n).factors)


def _as_fraction(q) -> Fraction:
    if isinstance(q, QuadElement):
        if not q.is_rational():
            raise TypeError(f"{q} is not rational")
        return q.x
    return Fraction(q)


def squarefree_part(q) -> tuple[int, Fraction]:
    """Return ``(s, w)`` with ``q == s * w**2`` and ``s`` a squarefree integer.

    ``s`` carries the sign of ``q``; it is the canonical square-class
    representative used throughout the package.
    """
    return _squarefree_part(_as_fraction(q))


@functools.lru_cache(maxsize=65536)
def _squarefree_part(q: Fraction) -> tuple[int, Fraction]:
    if q == 0:
        raise ValueError("0 has no square class")
    s = 1 if q > 0 else -1
    w = Fraction(1)
    for part, power in ((q.numerator, 1), (q.denominator, -1)):
        for p, e in factorize(part).factors:
            if e % 2:
                s *= p
                # p^e = p * p^(e-1) for the numerator, p^-e = p * p^-(e+1) for the denominator
                w *= Fraction(p) ** ((e - 1) // 2 if power == 1 else -(e + 1) // 2)
            else:
                w *= Fraction(p) ** (power * e // 2)
    return s, w


def square_class(q) -> int:
    return squarefree_part(q)[0]


def padic_valuation(q, p: int) -> int:
    q = _as_fraction(q)
    if q == 0:
        raise ValueError("valuation of 0 is infinite")
    check_prime(p)
    v = 0
    num, den = q.numerator, q.denominator
    while num % p == 0:
        num //= p
        v += 1
    while den % p == 0:
        den //= p
        v -= 1
    return v


def rational_sqrt(q) -> Optional[Fraction]:
    """Nonnegative rational square root, or None."""
    q = Fraction(q)
    if q < 0:
        return None
    rn, rd = math.isqrt(q.numerator), math.isqrt(q.denominator)
    if rn * rn == q.numerator and rd * rd == q.denominator:
        return Fraction(rn, rd)
    return None


# ---------------------------------------------------------------------------
# fields


@dataclass(frozen=True)
class FieldDescriptor:
    """Q when ``m`` is None, otherwise the real quadratic field Q(sqrt m)."""

    m: Optional[int] = None

    def __post_init__(self):
        if self.m is not None:
            if not isinstance(self.m, int) or self.m < 2 or not is_squarefree(self.m):
                raise ValueError(f"Q(sqrt {self.m}) needs squarefree m >= 2")

    @property
    def is_rational(self) -> bool:
        return self.m is None

    def __str__(self):
        return "Q" if self.m is None else f"Q(sqrt{self.m})"

    def to_json(self) -> dict:
        if self.m is None:
            return {"kind": "Q"}
        return {"kind": "QuadraticReal", "m": self.m}

    @classmethod
    def from_json(cls, obj) -> "FieldDescriptor":
        if isinstance(obj, str):
            obj = {"kind": obj}
        kind = obj.get("kind")
        if kind == "Q":
            return QQ
        if kind in ("QuadraticReal", "RealQuadratic"):
            return cls(int(obj["m"]))
        raise ValueError(f"unknown field descriptor {obj!r}")

    def __call__(self, x=0, y=0) -> "QuadElement":
        return QuadElement(Fraction(x), Fraction(y), self)

    def sqrt_m(self) -> "QuadElement":
        if self.m is None:
            raise ValueError("Q has no sqrt(m) generator")
        return QuadElement(Fraction(0), Fraction(1), self)

    def join(self, other: "FieldDescriptor") -> "FieldDescriptor":
        if self == other or other.m is None:
            return self
        if self.m is None:
            return other
        raise ValueError(f"mixed fields {self} and {other}")


QQ = FieldDescriptor(None)


_ZERO = Fraction(0)


class QuadElement:
    """Immutable exact element ``x + y*sqrt(m)`` of a real quadratic field (or Q)."""

    __slots__ = ("x", "y", "field")

    def __init__(self, x=0, y=0, field: FieldDescriptor = QQ):
        x, y = Fraction(x), Fraction(y)
        if field.m is None and y != 0:
            raise ValueError("rational field element must have y = 0")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "field", field)

    def __setattr__(self, key, value):
        raise AttributeError("QuadElement is immutable")

    # -- coercion -----------------------------------------------------------
    @classmethod
    def _raw(cls, x: Fraction, y: Fraction, field: FieldDescriptor) -> "QuadElement":
        # trusted constructor: x, y already Fractions, y = 0 over Q
        out = object.__new__(cls)
        object.__setattr__(out, "x", x)
        object.__setattr__(out, "y", y)
        object.__setattr__(out, "field", field)
        return out

    @staticmethod
    def coerce(value, field: FieldDescriptor = QQ) -> "QuadElement":
        if isinstance(value, QuadElement):
            return value if value.field == field or field.m is None else value.lift(field)
        return QuadElement(Fraction(value), 0, field)

    def lift(self, field: FieldDescriptor) -> "QuadElement":
        f = self.field.join(field)
        if f == self.field:
            return self
        return QuadElement(self.x, self.y, f)

    def _pair(self, other):
        if isinstance(other, QuadElement):
            f = self.field.join(other.field)
            return f, other
        if isinstance(other, (int, Fraction)):
            return self.field, QuadElement._raw(Fraction(other), _ZERO, self.field)
        return None, None

    # -- arithmetic ---------------------------------------------------------
    def __add__(self, other):
        f, o = self._pair(other)
        if f is None:
            return NotImplemented
        return QuadElement._raw(self.x + o.x, self.y + o.y, f)

    __radd__ = __add__

    def __neg__(self):
        return QuadElement._raw(-self.x, -self.y, self.field)

    def __sub__(self, other):
        f, o = self._pair(other)
        if f is None:
            return NotImplemented
        return QuadElement._raw(self.x - o.x, self.y - o.y, f)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        f, o = self._pair(other)
        if f is None:
            return NotImplemented
        if not self.y and not o.y:
            return QuadElement._raw(self.x * o.x, _ZERO, f)
        m = f.m or 0
        return QuadElement._raw(self.x * o.x + m * self.y * o.y, self.x * o.y + self.y * o.x, f)

    __rmul__ = __mul__

    def inverse(self) -> "QuadElement":
        n = self.norm()
        if n == 0:
            raise ZeroDivisionError("inverse of 0")
        return QuadElement(self.x / n, -self.y / n, self.field)

    def __truediv__(self, other):
        f, o = self._pair(other)
        if f is None:
            return NotImplemented
        return self.lift(f) * o.inverse()

    def __rtruediv__(self, other):
        return self.inverse() * other

    def __pow__(self, k: int):
        if k < 0:
            return self.inverse() ** (-k)
        out = QuadElement(1, 0, self.field)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    # -- structure ----------------------------------------------------------
    def conjugate(self) -> "QuadElement":
        return QuadElement(self.x, -self.y, self.field)

    def norm(self) -> Fraction:
        return self.x * self.x - (self.field.m or 0) * self.y * self.y

    def trace(self) -> Fraction:
        return 2 * self.x if self.field.m else self.x

    def is_rational(self) -> bool:
        return self.y == 0

    def is_zero(self) -> bool:
        return self.x == 0 and self.y == 0

    def __bool__(self):
        return not self.is_zero()

    def sign(self) -> int:
        """Sign under the identity embedding (sqrt m > 0)."""
        return _sign_of(self.x, self.y, self.field.m or 0)

    def conj_sign(self) -> int:
        return _sign_of(self.x, -self.y, self.field.m or 0)

    def is_integral(self) -> bool:
        """Membership in Z[sqrt m]; only valid when that is the maximal order."""
        m = self.field.m
        if m is not None and m % 4 == 1:
            raise ValueError(f"ring of integers of Q(sqrt{m}) is not Z[sqrt{m}]")
        return self.x.denominator == 1 and self.y.denominator == 1

    # -- comparison ---------------------------------------------------------
    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.y == 0 and self.x == other
        if not isinstance(other, QuadElement):
            return NotImplemented
        if self.x != other.x or self.y != other.y:
            return False
        return self.y == 0 or self.field == other.field

    def __hash__(self):
        if self.y == 0:
            return hash(self.x)
        return hash((self.x, self.y, self.field.m))

    def __lt__(self, other):
        return (self - other).sign() < 0

    def __le__(self, other):
        return (self - other).sign() <= 0

    def __gt__(self, other):
        return (self - other).sign() > 0

    def __ge__(self, other):
        return (self - other).sign() >= 0

    def __float__(self):
        return float(self.x) + float(self.y) * math.sqrt(self.field.m or 0)

    # -- I/O ----------------------------------------------------------------
    def __repr__(self):
        return f"QuadElement({self})"

    def __str__(self):
        if self.y == 0:
            return str(self.x)
        m = self.field.m
        root = f"sqrt{m}"
        if self.y == 1:
            tail = root
        elif self.y == -1:
            tail = "-" + root
        else:
            tail = f"{self.y}*{root}"
        if self.x == 0:
            return tail
        return f"{self.x}{'' if tail.startswith('-') else '+'}{tail}"

    def to_json(self):
        if self.field.m is None:
            return format_rational(self.x)
        return {"x": format_rational(self.x), "y": format_rational(self.y)}


def _sign_of(x: Fraction, y: Fraction, m: int) -> int:
    sx = (x > 0) - (x < 0)
    sy = (y > 0) - (y < 0)
    if sy == 0 or m == 0:
        return sx
    if sx == 0 or sx == sy:
        return sy
    # opposite signs: compare x^2 with m y^2
    return sx if x * x > m * y * y else sy


# ---------------------------------------------------------------------------
# element-level operations


def qf_conjugate(e: QuadElement) -> QuadElement:
    return e.conjugate()


def qf_is_square(e: QuadElement) -> Optional[QuadElement]:
    """Return ``r`` with ``r*r == e`` if ``e`` is a square in its field, else None.

    Solves ``u^2 + m v^2 = x`` and ``2uv = y``.  When ``y != 0`` both ``u`` and
    ``v`` are nonzero and ``u^2 = (x +- sqrt(x^2 - m y^2)) / 2``.
    """
    f = e.field
    m = f.m or 0
    if e.y == 0:
        r = rational_sqrt(e.x)
        if r is not None:
            return QuadElement(r, 0, f)
        if m:
            r = rational_sqrt(e.x / m)
            if r is not None:
                return QuadElement(0, r, f)
        return None
    disc = rational_sqrt(e.norm())
    if disc is None:
        return None
    for u2 in ((e.x + disc) / 2, (e.x - disc) / 2):
        u = rational_sqrt(u2)
        if u:
            v = e.y / (2 * u)
            return QuadElement(u, v, f)
    return None


def is_square(e) -> bool:
    return qf_is_square(QuadElement.coerce(e)) is not None


def is_totally_positive(e) -> bool:
    e = QuadElement.coerce(e)
    return e.sign() > 0 and e.conj_sign() > 0


# ---------------------------------------------------------------------------
# serialization

_RATIONAL_RE = re.compile(r"^\s*([+-]?\d+)(?:\s*/\s*(\d+))?\s*$")


def parse_rational(s) -> Fraction:
    """Parse an exact ``"p/q"`` or ``"p"`` string; floats are refused."""
    if isinstance(s, bool):
        raise ValueError("booleans are not scalars")
    if isinstance(s, int):
        return Fraction(s)
    if not isinstance(s, str):
        raise ValueError(f"expected an exact rational string, got {s!r}")
    match = _RATIONAL_RE.match(s)
    if not match:
        raise ValueError(f"not an exact rational: {s!r}")
    num = int(match.group(1))
    den = int(match.group(2)) if match.group(2) else 1
    if den == 0:
        raise ValueError(f"zero denominator in {s!r}")
    return Fraction(num, den)


def format_rational(q) -> str:
    q = Fraction(q)
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def parse_scalar(obj, field: FieldDescriptor = QQ) -> QuadElement:
    if isinstance(obj, dict):
        x = parse_rational(obj.get("x", "0"))
        y = parse_rational(obj.get("y", "0"))
        if y != 0 and field.m is None:
            raise ValueError(f"irrational scalar {obj!r} over Q")
        return QuadElement(x, y, field)
    return QuadElement(parse_rational(obj), 0, field)


def scalar_to_json(e):
    if isinstance(e, QuadElement):
        return e.to_json()
    return format_rational(e)
