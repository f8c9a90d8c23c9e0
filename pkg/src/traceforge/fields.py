"""Quadratic extensions k(sqrt g), multiquadratic fields, and the projective
rationality test that decides the field of definition of a gluing isometry."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional, Sequence

from . import linalg
from .arith import QQ, FieldDescriptor, QuadElement, factorize, qf_is_square, square_class
from .forms import DiagonalForm


class ExtElement:
    """``u + v*sqrt(g)`` with u, v in a base field k and g in k a non-square."""

    __slots__ = ("u", "v", "g")

    def __init__(self, u, v, g: QuadElement):
        g = QuadElement.coerce(g)
        u = QuadElement.coerce(u, g.field)
        v = QuadElement.coerce(v, g.field)
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "v", v)
        object.__setattr__(self, "g", g)

    def __setattr__(self, key, value):
        raise AttributeError("ExtElement is immutable")

    @classmethod
    def sqrt(cls, g) -> "ExtElement":
        return cls(0, 1, g)

    def _other(self, other) -> Optional["ExtElement"]:
        if isinstance(other, ExtElement):
            if other.g != self.g:
                raise ValueError(f"mixed extensions sqrt({self.g}) and sqrt({other.g})")
            return other
        if isinstance(other, (int, Fraction, QuadElement)):
            return ExtElement(other, 0, self.g)
        return None

    def __add__(self, other):
        o = self._other(other)
        if o is None:
            return NotImplemented
        return ExtElement(self.u + o.u, self.v + o.v, self.g)

    __radd__ = __add__

    def __neg__(self):
        return ExtElement(-self.u, -self.v, self.g)

    def __sub__(self, other):
        o = self._other(other)
        if o is None:
            return NotImplemented
        return ExtElement(self.u - o.u, self.v - o.v, self.g)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        o = self._other(other)
        if o is None:
            return NotImplemented
        if not self.v and not o.v:
            return ExtElement(self.u * o.u, self.v, self.g)
        return ExtElement(
            self.u * o.u + self.g * self.v * o.v, self.u * o.v + self.v * o.u, self.g
        )

    __rmul__ = __mul__

    def relative_norm(self) -> QuadElement:
        return self.u * self.u - self.g * self.v * self.v

    def inverse(self) -> "ExtElement":
        n = self.relative_norm()
        if n.is_zero():
            raise ZeroDivisionError("inverse of 0")
        return ExtElement(self.u / n, -self.v / n, self.g)

    def __truediv__(self, other):
        o = self._other(other)
        if o is None:
            return NotImplemented
        return self * o.inverse()

    def __rtruediv__(self, other):
        return self.inverse() * other

    def conjugate(self) -> "ExtElement":
        return ExtElement(self.u, -self.v, self.g)

    def in_base(self) -> bool:
        return self.v.is_zero()

    def is_zero(self) -> bool:
        return self.u.is_zero() and self.v.is_zero()

    def __bool__(self):
        return not self.is_zero()

    def __eq__(self, other):
        if isinstance(other, (int, Fraction, QuadElement)):
            return self.v.is_zero() and self.u == other
        if isinstance(other, ExtElement):
            return self.u == other.u and self.v == other.v and (self.v.is_zero() or self.g == other.g)
        return NotImplemented

    def __hash__(self):
        return hash(self.u) if self.v.is_zero() else hash((self.u, self.v, self.g))

    def __repr__(self):
        return f"ExtElement({self})"

    def __str__(self):
        if self.v.is_zero():
            return str(self.u)
        return f"({self.u}) + ({self.v})*sqrt({self.g})"

    def to_json(self) -> dict:
        return {"base": self.u.to_json(), "sqrt": self.v.to_json()}


def lift_matrix(a: linalg.Matrix, g) -> linalg.Matrix:
    g = QuadElement.coerce(g)
    return linalg.map_entries(
        lambda v: v if isinstance(v, ExtElement) else ExtElement(v, 0, g), a
    )


def conjugate_matrix(a: linalg.Matrix) -> linalg.Matrix:
    return linalg.map_entries(lambda v: v.conjugate() if isinstance(v, ExtElement) else v, a)


class NotASimilitudeError(ValueError):
    pass


@dataclass(frozen=True)
class DefinitionField:
    """Outcome of the projective rationality test.

    ``extended`` is True when the isometry needs k(sqrt g); ``reflection`` records
    that the conjugate equals the matrix composed with the last-coordinate
    reflection (up to a scalar).
    """

    extended: bool
    reflection: bool
    generator: Optional[QuadElement]
    multiplier: object


def reflection_matrix(n: int, one=1):
    return linalg.diagonal([one] * (n - 1) + [-one], zero=one * 0)


def field_of_definition(
    a: linalg.Matrix,
    f: DiagonalForm,
    allow_reflection: bool = False,
    target: Optional[DiagonalForm] = None,
    generator=None,
) -> DefinitionField:
    """Decide whether ``x -> a x`` is defined over k projectively.

    ``a`` has entries in k(sqrt g) and must satisfy ``target o a = mu * f``.  The
    isometry is defined over k iff ``sigma(a) a^-1`` is scalar.  With
    ``allow_reflection`` the case ``a^-1 sigma(a) = c * rho`` (rho the reflection in
    the last coordinate) is also recognised and flagged.
    """
    target = target or f
    g = generator
    if g is None:
        g = next((v.g for row in a for v in row if isinstance(v, ExtElement)), None)
    if g is None:
        g = f.field(1)  # all entries already in k
    a = lift_matrix(a, g)
    n = len(a)
    if not linalg.is_square_matrix(a) or n != f.rank or n != target.rank:
        raise ValueError("matrix and form sizes disagree")
    fg = lift_matrix(f.gram(), g)
    tg = lift_matrix(target.gram(), g)
    pulled = linalg.congruence(a, tg)
    mu = pulled[0][0] / fg[0][0]
    if mu.is_zero():
        raise ValueError("matrix is not invertible")
    if pulled != linalg.scale(mu, fg):
        raise NotASimilitudeError("target o A is not proportional to f")
    # a is invertible (mu != 0, both forms nondegenerate), so sigma(a) a^-1 = c I
    # iff sigma(a) = c a, and a^-1 sigma(a) = c rho iff sigma(a) = c a rho
    gen = g if not all(v.in_base() for row in a for v in row) else None
    if _proportional(a, [1] * n):
        return DefinitionField(False, False, None, mu)
    if allow_reflection and _proportional(a, [1] * (n - 1) + [-1]):
        return DefinitionField(True, True, gen, mu)
    return DefinitionField(True, False, gen, mu)


def _proportional(a: linalg.Matrix, col_signs: Sequence[int]) -> bool:
    """Whether ``sigma(a) = c * a * diag(col_signs)`` for a single scalar c."""
    c = None
    for row in a:
        for v, s in zip(row, col_signs):
            if not v:
                continue
            target = v.conjugate()
            if c is None:
                c = target / (v * s)
            elif target != c * v * s:
                return False
    return True


# ---------------------------------------------------------------------------
# multiquadratic fields


def _rational_vector(q) -> frozenset:
    """F2 exponent vector of a rational square class (-1 encodes the sign)."""
    s = square_class(q)
    vec = set(factorize(s).primes())
    if s < 0:
        vec.add(-1)
    return frozenset(vec)


def _vector_value(vec: frozenset) -> int:
    out = 1
    for p in vec:
        out *= p
    return out


def _rref(vectors: Iterable[frozenset]) -> list[frozenset]:
    """Reduced echelon basis over F2 with pivots at the largest support element."""
    basis: dict[int, frozenset] = {}
    for v in vectors:
        for pivot in sorted(basis, reverse=True):
            if pivot in v:
                v = v ^ basis[pivot]
        if v:
            pivot = max(v)
            for key in list(basis):
                if pivot in basis[key]:
                    basis[key] = basis[key] ^ v
            basis[pivot] = v
    return [basis[k] for k in sorted(basis)]


def _subset_products(elems: Sequence[QuadElement]):
    for r in range(len(elems) + 1):
        for combo in itertools.combinations(elems, r):
            prod = elems[0].field(1) if elems else QQ(1)
            for e in combo:
                prod = prod * e
            yield combo, prod


@dataclass(frozen=True, eq=False)
class MultiquadraticField:
    """k(sqrt a_1, ..., sqrt a_s) with F2-independent square classes a_i of k."""

    base: FieldDescriptor
    generators: tuple[QuadElement, ...] = ()

    @classmethod
    def of(cls, base: FieldDescriptor, elems: Iterable = ()) -> "MultiquadraticField":
        out = cls(base)
        for e in elems:
            out = out.adjoin(e)
        return out

    def _coerce(self, x) -> QuadElement:
        x = QuadElement.coerce(x, self.base)
        if x.is_zero():
            raise ValueError("0 has no square class")
        return x

    def contains_class(self, x) -> bool:
        """Whether sqrt(x) lies in this field, i.e. x is in the span of the generators."""
        x = self._coerce(x)
        if self.base.is_rational:
            target = _rational_vector(x.x)
            basis = _rref(_rational_vector(g.x) for g in self.generators)
            for v in reversed(basis):
                if max(v) in target:
                    target = target ^ v
            return not target
        return any(qf_is_square(x * prod) is not None for _, prod in _subset_products(self.generators))

    def adjoin(self, x) -> "MultiquadraticField":
        x = self._coerce(x)
        if self.contains_class(x):
            return self
        if self.base.is_rational:
            basis = _rref([_rational_vector(g.x) for g in self.generators] + [_rational_vector(x.x)])
            return MultiquadraticField(self.base, tuple(QQ(_vector_value(v)) for v in basis))
        return MultiquadraticField(self.base, self.generators + (x,))

    def compositum(self, other: "MultiquadraticField") -> "MultiquadraticField":
        if other.base != self.base:
            raise ValueError("composita need a common base field")
        out = self
        for g in other.generators:
            out = out.adjoin(g)
        return out

    @property
    def rank(self) -> int:
        return len(self.generators)

    @property
    def degree(self) -> int:
        return 2 ** len(self.generators)

    def is_subfield_of(self, other: "MultiquadraticField") -> bool:
        return self.base == other.base and all(other.contains_class(g) for g in self.generators)

    def __eq__(self, other):
        if not isinstance(other, MultiquadraticField):
            return NotImplemented
        return self.rank == other.rank and self.is_subfield_of(other)

    def __hash__(self):
        return hash((self.base, self.rank))

    def __str__(self):
        if not self.generators:
            return str(self.base)
        inner = ", ".join(f"sqrt({g})" for g in self.generators)
        return f"{self.base}({inner})"

    def __repr__(self):
        return f"MultiquadraticField({self})"

    def to_json(self) -> dict:
        return {"base": str(self.base), "generators": [g.to_json() for g in self.generators]}


def field_degree(k: MultiquadraticField) -> int:
    return k.degree


def brute_force_degree(base: FieldDescriptor, elems: Sequence) -> int:
    """2^rank by counting square subset products; exponential, for checking."""
    elems = [QuadElement.coerce(e, base) for e in elems]
    squares = sum(1 for _, prod in _subset_products(elems) if qf_is_square(prod) is not None)
    return 2 ** len(elems) // squares
