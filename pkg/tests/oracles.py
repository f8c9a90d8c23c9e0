"""Independent reference implementations.

Nothing here imports the package's number theory; each routine is the slow,
obvious version of something the package computes a faster way.
"""

from __future__ import annotations

import itertools
from fractions import Fraction


def trial_factor(n: int) -> tuple[int, list[tuple[int, int]]]:
    sign = -1 if n < 0 else 1
    n = abs(n)
    out, p = [], 2
    while p * p <= n:
        e = 0
        while n % p == 0:
            n //= p
            e += 1
        if e:
            out.append((p, e))
        p += 1
    if n > 1:
        out.append((n, 1))
    return sign, out


def is_prime_td(n: int) -> bool:
    return n > 1 and trial_factor(n)[1] == [(n, 1)]


def squarefree_int(n: int) -> int:
    sign, fac = trial_factor(n)
    out = sign
    for p, e in fac:
        if e % 2:
            out *= p
    return out


def squarefree_rational(q) -> int:
    q = Fraction(q)
    return squarefree_int(q.numerator * q.denominator)


def squares_mod(p: int) -> set[int]:
    return {x * x % p for x in range(p)}


def legendre_enum(a: int, p: int) -> int:
    a %= p
    if a == 0:
        return 0
    return 1 if a in squares_mod(p) else -1


def _vp(n: int, p: int) -> int:
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


def _reduce(q, p: int) -> int:
    """Integer in the same square class as q with p-adic valuation 0 or 1."""
    q = Fraction(q)
    n = q.numerator * q.denominator
    v = _vp(n, p)
    return n // p ** (v - v % 2)


def hilbert_brute(a, b, p: int, k: int | None = None) -> int:
    """(a, b)_p from primitive solutions of a x^2 + b y^2 = z^2 modulo p^K.

    With coefficients of valuation <= 1, a Z_p-solution has a unit variable w
    whose partial derivative has valuation e <= v(2) + 1, and any primitive
    solution mod p^(2e+1) with such a variable lifts (Hensel).  K defaults to
    2 e_max + 1; larger K only makes the search slower.  p = 0 is the real place.
    """
    if p == 0:
        return -1 if a < 0 and b < 0 else 1
    a, b = _reduce(a, p), _reduce(b, p)
    v2 = 1 if p == 2 else 0
    k = k or 2 * (v2 + 1) + 1
    mod = p**k
    roots: dict[int, list[int]] = {}
    for z in range(mod):
        roots.setdefault(z * z % mod, []).append(z)

    def liftable(coef, var):
        if var % p == 0:
            return False
        e = _vp(abs(2 * coef), p)
        return 2 * e + 1 <= k

    for x in range(mod):
        for y in range(mod):
            t = (a * x * x + b * y * y) % mod
            for z in roots.get(t, ()):
                if x % p == 0 and y % p == 0 and z % p == 0:
                    continue
                if liftable(a, x) or liftable(b, y) or liftable(-1, z):
                    return 1
    return -1


def hasse_oracle(entries, p: int) -> int:
    out = 1
    for i, j in itertools.combinations(range(len(entries)), 2):
        out *= hilbert_brute(entries[i], entries[j], p)
    return out


# -- Z[sqrt 2] residue fields -------------------------------------------------


def fp2_squares(p: int) -> set[tuple[int, int]]:
    """Nonzero squares of F_p[X]/(X^2 - 2) by exhaustion (elements u + v X)."""
    out = set()
    for u in range(p):
        for v in range(p):
            if u == v == 0:
                continue
            out.add(((u * u + 2 * v * v) % p, (2 * u * v) % p))
    return out


def delta_is_square_mod_prime(p: int, t, sign: int) -> bool:
    """Is sign*sqrt2 a nonzero square in the residue field of the prime (p, sqrt2 - t)?

    ``t`` None means p is inert (residue field F_p^2)."""
    if t is None:
        return ((0, sign % p) in fp2_squares(p))
    return (sign * t) % p in {x * x % p for x in range(1, p)}


def split_primes_oracle(sign: int, count: int, norm_bound: int):
    """(p, t) for the first odd primes of Z[sqrt 2] with norm <= bound where
    sign*sqrt2 is a square in the residue field; t None for inert primes."""
    out = []
    for p in range(3, norm_bound + 1):
        if not is_prime_td(p):
            continue
        roots = [t for t in range(p) if (t * t - 2) % p == 0]
        cands = [(p, t) for t in roots] if roots else ([(p, None)] if p * p <= norm_bound else [])
        for p_, t in cands:
            if delta_is_square_mod_prime(p_, t, sign):
                out.append((p_, t))
                if len(out) == count:
                    return out
    return out


# -- twist blocks --------------------------------------------------------------


def blocks_unpruned(d: int, coeff_bound: int, entry_bound: int):
    """Every (c1, c2, p, q, r, s) with q o A = d q and A^2 = d I, no pruning."""
    out = []
    cs = [c for c in range(-coeff_bound, coeff_bound + 1) if c]
    es = range(-entry_bound, entry_bound + 1)
    for c1 in cs:
        for c2 in cs:
            for p, q, r, s in itertools.product(es, repeat=4):
                # A^T diag(c1, c2) A
                m00 = c1 * p * p + c2 * r * r
                m01 = c1 * p * q + c2 * r * s
                m11 = c1 * q * q + c2 * s * s
                if (m00, m01, m11) != (d * c1, 0, d * c2):
                    continue
                if (p * p + q * r, p * q + q * s, r * p + s * r, r * q + s * s) != (d, 0, 0, d):
                    continue
                out.append((c1, c2, p, q, r, s))
    return sorted(out)


# -- multiquadratic degree -------------------------------------------------------


def rational_degree_oracle(values) -> int:
    """2^rank of the square classes of nonzero rationals, by bitmask elimination."""
    primes: dict[int, int] = {}
    masks = []
    for v in values:
        s = squarefree_rational(v)
        m = 1 if s < 0 else 0
        for p, _ in trial_factor(s)[1]:
            primes.setdefault(p, len(primes) + 1)
            m |= 1 << primes[p]
        masks.append(m)
    rank, basis = 0, []
    for m in masks:
        for b in basis:
            m = min(m, m ^ b)
        if m:
            basis.append(m)
            rank += 1
    return 2**rank


def sqrt2_is_square_oracle(x: Fraction, y: Fraction, bound: int = 60) -> bool:
    """Search u + v sqrt2 with u, v in (1/den) Z, |num| <= bound, squaring to x + y sqrt2."""
    den = 1
    for q in (Fraction(x), Fraction(y)):
        den = den * q.denominator
    for dd in {1, 2, den}:
        for un in range(-bound, bound + 1):
            u = Fraction(un, dd)
            for vn in range(0, bound + 1):
                v = Fraction(vn, dd)
                if u * u + 2 * v * v == x and 2 * u * v == y:
                    return True
    return False
