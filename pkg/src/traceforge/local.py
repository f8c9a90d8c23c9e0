"""Local invariants: Hilbert symbols over Q, Hasse invariants, and the
residue-field splitting test for primes of Z[sqrt 2]."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Optional, Sequence

import sympy

from .arith import (
    FieldDescriptor,
    QuadElement,
    check_prime,
    factorize,
    is_prime,
    is_totally_positive,
    square_class,
)

QSQRT2 = FieldDescriptor(2)
FUNDAMENTAL_UNIT = QuadElement(1, 1, QSQRT2)
UNIT_WINDOW = range(-8, 9)


@dataclass(frozen=True, order=True)
class Place:
    """A place of Q: ``p == 0`` encodes the real place."""

    p: int = 0

    def __post_init__(self):
        if self.p:
            check_prime(self.p)

    @property
    def is_real(self) -> bool:
        return self.p == 0

    def __str__(self):
        return "inf" if self.p == 0 else str(self.p)

    @classmethod
    def parse(cls, s) -> "Place":
        if s in ("inf", "oo", "infinity", "real", 0):
            return REAL
        return cls(int(s))


REAL = Place(0)


def legendre(a: int, p: int) -> int:
    """Quadratic residue symbol (a/p) by Euler's criterion."""
    if p == 2 or not is_prime(p):
        raise ValueError(f"legendre symbol needs an odd prime, got {p}")
    r = pow(a % p, (p - 1) // 2, p)
    return -1 if r == p - 1 else r


def _integral_class(q) -> int:
    """An integer in the same square class as the nonzero rational ``q``."""
    if isinstance(q, QuadElement):
        if not q.is_rational():
            raise ValueError(f"{q} is not rational")
        q = q.x
    q = Fraction(q)
    if q == 0:
        raise ValueError("Hilbert symbol of 0 is undefined")
    return q.numerator * q.denominator


def _split_p(n: int, p: int) -> tuple[int, int]:
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v, n


def hilbert_symbol(a, b, v: Place | int) -> int:
    """(a, b)_v for nonzero rationals a, b at a place of Q."""
    if not isinstance(v, Place):
        v = Place.parse(v)
    a, b = _integral_class(a), _integral_class(b)
    if v.is_real:
        return -1 if a < 0 and b < 0 else 1
    p = v.p
    alpha, u = _split_p(a, p)
    beta, w = _split_p(b, p)
    if p == 2:
        def eps(x):
            return ((x - 1) // 2) % 2

        def omega(x):
            return ((x * x - 1) // 8) % 2

        e = eps(u) * eps(w) + alpha * omega(w) + beta * omega(u)
        return -1 if e % 2 else 1
    sign = -1 if (alpha * beta * ((p - 1) // 2)) % 2 else 1
    if beta % 2:
        sign *= legendre(u, p)
    if alpha % 2:
        sign *= legendre(w, p)
    return sign


def relevant_primes(values: Iterable) -> list[int]:
    """2 together with every prime dividing a numerator or denominator."""
    primes = {2}
    for q in values:
        n = _integral_class(q)
        primes.update(factorize(n).primes())
    return sorted(primes)


def relevant_places(values: Iterable) -> list[Place]:
    return [REAL] + [Place(p) for p in relevant_primes(values)]


def _entries(f) -> list:
    entries = list(getattr(f, "entries", f))
    if any(QuadElement.coerce(d).is_zero() for d in entries):
        raise ValueError("degenerate form: zero diagonal entry")
    return entries


def hasse_invariant(f, v: Place | int) -> int:
    """prod_{i<j} (d_i, d_j)_v for a diagonal form over Q."""
    entries = _entries(f)
    out = 1
    for i, j in itertools.combinations(range(len(entries)), 2):
        out *= hilbert_symbol(entries[i], entries[j], v)
    return out


def scaled_hasse_formula(a, n: int, v: Place | int) -> int:
    """Closed form of the Hasse invariant of ``a * <-1, 1, ..., 1>`` (n variables).

    Equals ``(a, a)_v^((n-1)(n-2)/2) * (a, -a)_v^(n-1)``.
    """
    if n < 2:
        raise ValueError("n must be at least 2")
    a = Fraction(_integral_class(a))
    out = 1
    if ((n - 1) * (n - 2) // 2) % 2:
        out *= hilbert_symbol(a, a, v)
    if (n - 1) % 2:
        out *= hilbert_symbol(a, -a, v)
    return out


@dataclass(frozen=True)
class HasseProfile:
    rank: int
    signature: tuple[int, int]
    discriminant_class: int
    minus_places: tuple[Place, ...]

    def to_json(self) -> dict:
        return {
            "rank": self.rank,
            "signature": list(self.signature),
            "disc": self.discriminant_class,
            "eps_minus_one": [str(p) for p in self.minus_places],
        }


def hasse_profile(f) -> HasseProfile:
    entries = [Fraction(_integral_class(d)) for d in _entries(f)]
    pos = sum(1 for d in entries if d > 0)
    disc = 1
    for d in entries:
        disc *= d
    minus = tuple(v for v in relevant_places(entries) if hasse_invariant(entries, v) == -1)
    return HasseProfile(len(entries), (pos, len(entries) - pos), square_class(disc), minus)


# ---------------------------------------------------------------------------
# primes of Z[sqrt 2]


@dataclass(frozen=True)
class QuadPrime:
    """A prime of Z[sqrt 2] above the rational prime ``rational_prime``.

    ``residue_map`` is the image t of sqrt 2 in F_p (split or ramified primes);
    inert primes have residue field F_{p^2} and no such map.
    """

    pi: QuadElement
    rational_prime: int
    splitting_type: str
    residue_map: Optional[int] = None

    def __post_init__(self):
        p = self.rational_prime
        if abs(self.pi.norm()) not in (p, p * p):
            raise ValueError(f"{self.pi} does not lie above {p}")
        expected = "ramified" if p == 2 else "split" if p % 8 in (1, 7) else "inert"
        if self.splitting_type != expected:
            raise ValueError(f"{p} is {expected} in Z[sqrt2], not {self.splitting_type}")
        if (self.residue_map is None) != (expected == "inert"):
            raise ValueError(f"{expected} primes {'have no' if expected == 'inert' else 'need a'} residue map")
        if self.residue_map is not None:
            if (self.residue_map**2 - 2) % p:
                raise ValueError(f"{self.residue_map}^2 != 2 mod {p}")
            if self.reduce(self.pi) != 0:
                raise ValueError(f"{self.pi} is not in the kernel of sqrt2 -> {self.residue_map}")

    def reduce(self, e: QuadElement) -> int:
        """Image of a p-integral element of Q(sqrt 2) in F_p (split/ramified only)."""
        if self.residue_map is None:
            raise ValueError("inert primes have residue field F_p^2")
        p = self.rational_prime
        x = e.x.numerator * pow(e.x.denominator, -1, p)
        y = e.y.numerator * pow(e.y.denominator, -1, p)
        return (x + y * self.residue_map) % p


def _sqrt2_mod(p: int) -> list[int]:
    return sorted(int(t) for t in sympy.sqrt_mod(2, p, all_roots=True))


def _find_norm_solution(p: int, t: int) -> QuadElement:
    """x + y sqrt2 with x^2 - 2y^2 = +-p lying in the prime where sqrt2 -> t."""
    bound = 1
    while True:
        for y in range(0, bound + 1):
            for x in range(0, bound + 1):
                if abs(x * x - 2 * y * y) == p:
                    for cand in (QuadElement(x, y, QSQRT2), QuadElement(x, -y, QSQRT2)):
                        if (x + int(cand.y) * t) % p == 0:
                            return cand
        bound *= 2


def classify_prime_zsqrt2(p: int) -> tuple[QuadPrime, ...]:
    """The primes of Z[sqrt 2] above ``p``: one (inert/ramified) or two (split)."""
    check_prime(p)
    if p == 2:
        return (QuadPrime(QSQRT2.sqrt_m(), 2, "ramified", 0),)
    if p % 8 in (1, 7):
        return tuple(
            QuadPrime(_find_norm_solution(p, t), p, "split", t) for t in _sqrt2_mod(p)
        )
    return (QuadPrime(QuadElement(p, 0, QSQRT2), p, "inert"),)


def _fp2_pow(a: tuple[int, int], e: int, p: int) -> tuple[int, int]:
    """(a0 + a1 X)^e in F_p[X]/(X^2 - 2)."""
    r0, r1 = 1, 0
    b0, b1 = a
    while e:
        if e & 1:
            r0, r1 = (r0 * b0 + 2 * r1 * b1) % p, (r0 * b1 + r1 * b0) % p
        b0, b1 = (b0 * b0 + 2 * b1 * b1) % p, (2 * b0 * b1) % p
        e >>= 1
    return r0, r1


def splits_in_sqrt_ext(pi: QuadPrime, delta: QuadElement) -> bool:
    """Whether ``pi`` splits in k(sqrt delta), i.e. delta is a nonzero square mod pi."""
    p = pi.rational_prime
    if p == 2:
        raise ValueError("residue characteristic 2 is not handled")
    if pi.splitting_type == "inert":
        x = delta.x.numerator * pow(delta.x.denominator, -1, p) % p
        y = delta.y.numerator * pow(delta.y.denominator, -1, p) % p
        if (x, y) == (0, 0):
            return False
        return _fp2_pow((x, y), (p * p - 1) // 2, p) == (1, 0)
    r = pi.reduce(delta)
    return r != 0 and legendre(r, p) == 1


@dataclass(frozen=True)
class SplitPrime:
    """A prime of Z[sqrt 2] with a totally positive generator ``sign * pi * u^k``."""

    prime: QuadPrime
    generator: QuadElement
    unit_exponent: int
    sign: int


@dataclass(frozen=True)
class SplitPrimeSearch:
    primes: tuple[SplitPrime, ...]
    truncated: bool
    failures: tuple[QuadPrime, ...] = field(default=())


def totally_positive_generator(pi: QuadElement, window=UNIT_WINDOW) -> Optional[tuple[QuadElement, int, int]]:
    """Search ``sign * pi * (1+sqrt2)^k`` for k in ``window``, smallest |k| first."""
    for k in sorted(window, key=lambda k: (abs(k), k < 0)):
        for sign in (1, -1):
            g = pi * FUNDAMENTAL_UNIT**k * sign
            if is_totally_positive(g):
                return g, k, sign
    return None


def _branch(delta) -> QuadElement:
    delta = QuadElement.coerce(delta, QSQRT2)
    if delta not in (QSQRT2.sqrt_m(), -QSQRT2.sqrt_m()):
        raise ValueError(f"delta must be +-sqrt2, got {delta}")
    return delta


def find_split_primes(delta, count: int, norm_bound: int) -> SplitPrimeSearch:
    """The first ``count`` odd primes of Z[sqrt 2] (norm <= norm_bound) splitting in
    k(sqrt delta), ordered by rational prime then residue map."""
    delta = _branch(delta)
    found: list[SplitPrime] = []
    failures: list[QuadPrime] = []
    if count <= 0:
        return SplitPrimeSearch((), False)
    for p in sympy.primerange(3, norm_bound + 1):
        p = int(p)
        for prime in classify_prime_zsqrt2(p):
            if abs(prime.pi.norm()) > norm_bound:
                continue
            if not splits_in_sqrt_ext(prime, delta):
                continue
            gen = totally_positive_generator(prime.pi)
            if gen is None:
                failures.append(prime)
                continue
            found.append(SplitPrime(prime, *gen))
            if len(found) == count:
                return SplitPrimeSearch(tuple(found), False, tuple(failures))
    return SplitPrimeSearch(tuple(found), True, tuple(failures))


def prime_of_element(a: QuadElement) -> Optional[QuadPrime]:
    """Identify the prime of Z[sqrt 2] generated by ``a`` (None if ``a`` is not prime)."""
    a = QuadElement.coerce(a, QSQRT2)
    if a.field != QSQRT2 or not a.is_integral():
        return None
    n = abs(int(a.norm()))
    if is_prime(n):
        for prime in classify_prime_zsqrt2(n):
            if prime.residue_map is not None and prime.reduce(a) == 0:
                return prime
        return None
    root = sympy.integer_nthroot(n, 2)
    if root[1] and is_prime(int(root[0])):
        p = int(root[0])
        primes = classify_prime_zsqrt2(p)
        # a generates (p) exactly when a / p is a unit
        if primes[0].splitting_type == "inert" and abs((a / p).norm()) == 1 and (a / p).is_integral():
            return primes[0]
    return None

