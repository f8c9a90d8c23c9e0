"""Diagonal quadratic forms over Q and Q(sqrt m): invariants, admissibility,
Hasse-Minkowski equivalence and similarity over Q."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

from . import linalg
from .arith import (
    QQ,
    FieldDescriptor,
    QuadElement,
    is_totally_positive,
    parse_scalar,
    qf_is_square,
    rational_sqrt,
    square_class,
)
from .local import (
    QSQRT2,
    SplitPrime,
    hasse_invariant,
    prime_of_element,
    relevant_places,
    relevant_primes,
    splits_in_sqrt_ext,
)


class DegenerateFormError(ValueError):
    pass


@dataclass(frozen=True)
class DiagonalForm:
    """``<d_0, ..., d_N>`` = sum d_i x_i^2 with nonzero entries in ``field``."""

    field: FieldDescriptor
    entries: tuple[QuadElement, ...]

    def __post_init__(self):
        entries = tuple(QuadElement.coerce(d, self.field) for d in self.entries)
        for d in entries:
            if d.is_zero():
                raise DegenerateFormError(f"zero entry in {self}")
            if d.field != self.field and not d.is_rational():
                raise ValueError(f"{d} does not lie in {self.field}")
        object.__setattr__(self, "entries", tuple(QuadElement(d.x, d.y, self.field) for d in entries))

    @classmethod
    def of(cls, entries: Sequence, field: FieldDescriptor = QQ) -> "DiagonalForm":
        return cls(field, tuple(entries))

    @property
    def rank(self) -> int:
        return len(self.entries)

    def gram(self) -> linalg.Matrix:
        return linalg.diagonal(self.entries, zero=self.field(0))

    def __call__(self, vec: Sequence) -> QuadElement:
        return sum((d * x * x for d, x in zip(self.entries, vec)), self.field(0))

    def rational_entries(self) -> list[Fraction]:
        if not self.field.is_rational:
            raise ValueError(f"form over {self.field} is not over Q")
        return [d.x for d in self.entries]

    def __str__(self):
        return "<" + ", ".join(str(d) for d in self.entries) + ">"

    def to_json(self) -> dict:
        return {"field": self.field.to_json(), "entries": [d.to_json() for d in self.entries]}

    @classmethod
    def from_json(cls, obj: dict) -> "DiagonalForm":
        fld = FieldDescriptor.from_json(obj.get("field", {"kind": "Q"}))
        return cls(fld, tuple(parse_scalar(e, fld) for e in obj["entries"]))


def standard_f0(n: int, field: FieldDescriptor = QQ) -> DiagonalForm:
    """``<-1, 1, ..., 1>`` in n variables."""
    return DiagonalForm(field, (field(-1),) + (field(1),) * (n - 1))


def sqrt2_f0(n: int) -> DiagonalForm:
    """``<-sqrt2, 1, ..., 1>`` over Q(sqrt 2) in n variables."""
    return DiagonalForm(QSQRT2, (-QSQRT2.sqrt_m(),) + (QSQRT2(1),) * (n - 1))


def scale_form(a, f: DiagonalForm) -> DiagonalForm:
    a = QuadElement.coerce(a, f.field)
    if a.is_zero():
        raise ValueError("cannot scale by 0")
    fld = f.field.join(a.field)
    return DiagonalForm(fld, tuple(a * d for d in f.entries))


def orthogonal_sum(f: DiagonalForm, g: DiagonalForm) -> DiagonalForm:
    if f.field != g.field:
        raise ValueError(f"mixed fields {f.field} and {g.field}")
    return DiagonalForm(f.field, f.entries + g.entries)


# ---------------------------------------------------------------------------
# Gram matrices


@dataclass(frozen=True)
class GramForm:
    field: FieldDescriptor
    matrix: linalg.Matrix

    def __post_init__(self):
        m = linalg.as_matrix(self.matrix, lambda v: QuadElement.coerce(v, self.field))
        if not linalg.is_square_matrix(m) or m != linalg.transpose(m):
            raise ValueError("Gram matrix must be square and symmetric")
        object.__setattr__(self, "matrix", m)


def diagonalize(g: GramForm) -> tuple[DiagonalForm, linalg.Matrix]:
    """Symmetric elimination: returns ``(D, T)`` with ``T^T G T`` = diag(D)."""
    fld = g.field
    zero, one = fld(0), fld(1)
    n = len(g.matrix)
    a = [list(row) for row in g.matrix]
    t = [[one if i == j else zero for j in range(n)] for i in range(n)]

    def add_col(dst, src, c):
        # basis change e_dst += c e_src, applied on both sides
        for r in range(n):
            t[r][dst] = t[r][dst] + c * t[r][src]
        for r in range(n):
            a[r][dst] = a[r][dst] + c * a[r][src]
        for r in range(n):
            a[dst][r] = a[dst][r] + c * a[src][r]

    def swap(i, j):
        for row in t:
            row[i], row[j] = row[j], row[i]
        for row in a:
            row[i], row[j] = row[j], row[i]
        a[i], a[j] = a[j], a[i]

    for i in range(n):
        if a[i][i].is_zero():
            j = next((j for j in range(i + 1, n) if not a[j][j].is_zero()), None)
            if j is not None:
                swap(i, j)
            else:
                j = next((j for j in range(i + 1, n) if not a[i][j].is_zero()), None)
                if j is None:
                    raise DegenerateFormError("degenerate Gram matrix")
                add_col(i, j, one)
        for j in range(i + 1, n):
            if not a[i][j].is_zero():
                add_col(j, i, -(a[i][j] / a[i][i]))
    form = DiagonalForm(fld, tuple(a[i][i] for i in range(n)))
    return form, tuple(tuple(row) for row in t)


# ---------------------------------------------------------------------------
# invariants


def _product(f: DiagonalForm) -> QuadElement:
    out = f.field(1)
    for d in f.entries:
        out = out * d
    return out


@dataclass(frozen=True)
class QuadSquareClass:
    """Square class in Q(sqrt m) of the shape ``rational * sqrt(m)^flag``.

    ``element`` is set instead when the class has no such representative.
    """

    rational: Optional[int]
    sqrt_flag: bool = False
    element: Optional[QuadElement] = None


def _rational_times_square(p: QuadElement) -> Optional[Fraction]:
    """q with p = q * w^2 in Q(sqrt m), if one exists (norm-one trick)."""
    n = rational_sqrt(p.norm())
    if n is None:
        return None
    for s in (n, -n):
        z = 1 + p / s
        if not z.is_zero():
            return s / z.norm()
    return None


def _canonical_rational_class(q: Fraction, m: int) -> int:
    a, b = square_class(q), square_class(q * m)
    return min(a, b, key=lambda s: (abs(s), s))


def square_class_of(p: QuadElement):
    """Canonical square-class representative of a nonzero element."""
    fld = p.field
    if fld.is_rational:
        return square_class(p.x)
    m = fld.m
    q = _rational_times_square(p)
    if q is not None:
        return QuadSquareClass(_canonical_rational_class(q, m), False)
    q = _rational_times_square(p / fld.sqrt_m())
    if q is not None:
        return QuadSquareClass(_canonical_rational_class(q, m), True)
    return QuadSquareClass(None, False, p)


def same_square_class(a: QuadElement, b: QuadElement) -> bool:
    return qf_is_square(a / b) is not None


def discriminant(f: DiagonalForm):
    return square_class_of(_product(f))


def signature(f: DiagonalForm, embedding: str = "id") -> tuple[int, int]:
    if embedding not in ("id", "conjugate"):
        raise ValueError(f"unknown embedding {embedding!r}")
    if embedding == "conjugate" and f.field.is_rational:
        raise ValueError("Q has no nontrivial embedding")
    signs = [d.sign() if embedding == "id" else d.conj_sign() for d in f.entries]
    pos = sum(1 for s in signs if s > 0)
    return pos, len(signs) - pos


def admissible(f: DiagonalForm) -> bool:
    if signature(f) != (f.rank - 1, 1):
        return False
    return f.field.is_rational or signature(f, "conjugate") == (f.rank, 0)


# ---------------------------------------------------------------------------
# equivalence over Q


@dataclass(frozen=True)
class Witness:
    invariant: str
    place: Optional[str]
    left: object
    right: object

    def __str__(self):
        at = f" at {self.place}" if self.place else ""
        return f"{self.invariant}{at}: {self.left} vs {self.right}"

    def to_json(self) -> dict:
        return {"invariant": self.invariant, "place": self.place,
                "left": _jsonable(self.left), "right": _jsonable(self.right)}


def _jsonable(v):
    if isinstance(v, tuple):
        return list(v)
    if isinstance(v, (int, str)) or v is None:
        return v
    return str(v)


@dataclass(frozen=True)
class EquivalenceVerdict:
    result: str  # "equivalent" | "inequivalent" | "unknown"
    witness: Optional[Witness] = None
    reason: str = ""
    checks: tuple[str, ...] = field(default=())

    def __post_init__(self):
        if self.result == "inequivalent" and self.witness is None:
            raise ValueError("an inequivalence verdict needs a witness")

    @property
    def equivalent(self) -> bool:
        return self.result == "equivalent"

    def to_json(self) -> dict:
        return {
            "result": self.result,
            "witness": self.witness.to_json() if self.witness else None,
            "reason": self.reason,
            "checks": list(self.checks),
        }


def _require_q(*forms: DiagonalForm):
    for f in forms:
        if not f.field.is_rational:
            raise ValueError(f"{f} is not a form over Q")


def equivalent_q(f: DiagonalForm, g: DiagonalForm) -> EquivalenceVerdict:
    """Hasse-Minkowski: rank, signature, discriminant and all Hasse invariants."""
    _require_q(f, g)
    if f.rank != g.rank:
        return EquivalenceVerdict("inequivalent", Witness("rank", None, f.rank, g.rank))
    sf, sg = signature(f), signature(g)
    if sf != sg:
        return EquivalenceVerdict("inequivalent", Witness("signature", "inf", sf, sg))
    df, dg = discriminant(f), discriminant(g)
    if df != dg:
        return EquivalenceVerdict("inequivalent", Witness("discriminant", None, df, dg))
    fe, ge = f.rational_entries(), g.rational_entries()
    # odd primes first, 2 last: by the product formula a mismatch is never isolated,
    # and odd-prime symbols are the ones with closed forms worth reporting
    places = sorted(relevant_places(fe + ge), key=lambda v: (v.p == 2, v.p))
    mismatches = [(v, hasse_invariant(fe, v), hasse_invariant(ge, v)) for v in places]
    mismatches = [m for m in mismatches if m[1] != m[2]]
    if mismatches:
        v, ef, eg = mismatches[0]
        return EquivalenceVerdict(
            "inequivalent", Witness("hasse", str(v), ef, eg),
            reason="Hasse invariants differ at " + ", ".join(str(m[0]) for m in mismatches),
        )
    return EquivalenceVerdict("equivalent")


@dataclass(frozen=True)
class SimilarityVerdict:
    result: str  # "similar" | "inequivalent" | "unknown"
    scale: Optional[Fraction] = None
    witness: Optional[Witness] = None
    reason: str = ""

    @property
    def similar(self) -> bool:
        return self.result == "similar"

    def to_json(self) -> dict:
        return {
            "result": self.result,
            "lambda": None if self.scale is None else str(self.scale),
            "witness": self.witness.to_json() if self.witness else None,
            "reason": self.reason,
        }


def similarity_candidates(f: DiagonalForm, g: DiagonalForm) -> list[int]:
    """Squarefree lambdas (both signs) supported on primes dividing 2 and the entries."""
    primes = relevant_primes(f.rational_entries() + g.rational_entries())
    mags = []
    for r in range(len(primes) + 1):
        for combo in itertools.combinations(primes, r):
            v = 1
            for p in combo:
                v *= p
            mags.append(v)
    mags.sort()
    return [s * v for v in mags for s in (1, -1)]


def similar_q(f: DiagonalForm, g: DiagonalForm) -> SimilarityVerdict:
    """Search lambda with ``f ~= lambda * g`` over a restricted candidate set."""
    _require_q(f, g)
    if f.rank != g.rank:
        return SimilarityVerdict("inequivalent", witness=Witness("rank", None, f.rank, g.rank))
    n = f.rank
    sf, sg = signature(f), signature(g)
    if sf not in (sg, sg[::-1]):
        return SimilarityVerdict("inequivalent", witness=Witness("signature", "inf", sf, sg))
    df, dg = discriminant(f), discriminant(g)
    if n % 2 == 0 and df != dg:
        # disc(lambda g) = disc(g) in even rank
        return SimilarityVerdict(
            "inequivalent", witness=Witness("discriminant", None, df, dg),
            reason="even rank: similarity preserves the discriminant class",
        )
    for lam in similarity_candidates(f, g):
        if n % 2 and square_class(lam * df * dg) != 1:
            continue
        if equivalent_q(f, scale_form(lam, g)).equivalent:
            return SimilarityVerdict("similar", scale=Fraction(lam))
    if n % 2:
        # odd rank forces lambda = disc(f) disc(g), which was among the candidates
        lam = square_class(df * dg)
        verdict = equivalent_q(f, scale_form(lam, g))
        return SimilarityVerdict(
            "inequivalent", witness=verdict.witness,
            reason=f"odd rank forces lambda = {lam} up to squares",
        )
    return SimilarityVerdict("unknown", reason="restricted candidate set exhausted")


# ---------------------------------------------------------------------------
# scaled family over Q(sqrt 2)


class CriterionNotApplicable(ValueError):
    pass


def equivalent_scaled_family_qsqrt2(a, n: int, branch=None) -> EquivalenceVerdict:
    """Decide ``a f0 ~= f0`` for ``f0 = <-sqrt2, 1, ..., 1>`` by the local symbol argument.

    ``a`` must be a totally positive generator of a prime of Z[sqrt 2] that splits in
    k(sqrt(-sqrt2)) when n = 0 mod 4, or in k(sqrt(sqrt2)) when n = 2 mod 4.  The
    returned verdict lists every check performed.
    """
    if isinstance(a, SplitPrime):
        prime, a = a.prime, a.generator
    else:
        a = QuadElement.coerce(a, QSQRT2)
        prime = prime_of_element(a)
    if n < 2 or n % 2:
        raise CriterionNotApplicable(f"n = {n} must be even and >= 2")
    expected = -QSQRT2.sqrt_m() if n % 4 == 0 else QSQRT2.sqrt_m()
    if branch is not None and QuadElement.coerce(branch, QSQRT2) != expected:
        raise CriterionNotApplicable(f"branch {branch} does not match n = {n} mod 4")
    checks = [f"n = {n}: n mod 4 = {n % 4}, delta = {expected}"]
    if not is_totally_positive(a):
        raise CriterionNotApplicable(f"{a} is not totally positive")
    checks.append(f"{a} totally positive")
    if prime is None or prime.rational_prime == 2:
        raise CriterionNotApplicable(f"{a} does not generate an odd prime of Z[sqrt2]")
    if not splits_in_sqrt_ext(prime, expected):
        raise CriterionNotApplicable(f"prime ({prime.pi}) does not split in k(sqrt({expected}))")
    checks.append(
        f"prime above {prime.rational_prime} ({prime.splitting_type}) splits in k(sqrt({expected}))"
    )
    f0 = sqrt2_f0(n)
    af0 = scale_form(a, f0)
    if not same_square_class(_product(f0), _product(af0)):  # pragma: no cover - even rank
        return EquivalenceVerdict("inequivalent", Witness("discriminant", None, str(f0), str(af0)),
                                  checks=tuple(checks))
    checks.append("discriminants agree (a^n is a square for even n)")
    for emb in ("id", "conjugate"):
        if signature(f0, emb) != signature(af0, emb):  # pragma: no cover - a totally positive
            return EquivalenceVerdict("inequivalent",
                                      Witness("signature", emb, signature(f0, emb), signature(af0, emb)),
                                      checks=tuple(checks))
    checks.append("signatures agree at both real embeddings")
    e_aa = (n - 1) * (n - 2) // 2 % 2
    e_mixed = (n - 1) % 2
    checks.append(
        f"eps_v(a f0) = (-sqrt2 a, a)_v^{e_mixed} (a, a)_v^{e_aa} = ({expected}, a)_v"
    )
    checks.append(f"({expected}, a)_v = 1 at every place since a is a norm from k(sqrt({expected}))")
    return EquivalenceVerdict(
        "equivalent",
        reason="local symbol argument for primes split in the branch extension",
        checks=tuple(checks),
    )
