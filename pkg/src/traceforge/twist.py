"""Twist isometries: 2x2 building blocks, block assembly, certification of the
twist conditions, closed-form families, and the even-d table."""

from __future__ import annotations

import hashlib
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources
from typing import Optional, Sequence

from . import linalg
from .arith import (
    QQ,
    FieldDescriptor,
    QuadElement,
    is_squarefree,
    is_totally_positive,
    parse_scalar,
    qf_is_square,
)
from .fields import ExtElement, MultiquadraticField, field_of_definition
from .forms import DiagonalForm, admissible, orthogonal_sum, signature
from .local import FUNDAMENTAL_UNIT


def _mat(rows, fld: FieldDescriptor) -> linalg.Matrix:
    return linalg.as_matrix(
        rows, lambda v: parse_scalar(v, fld) if isinstance(v, (str, dict)) else QuadElement.coerce(v, fld)
    )


def _scalar_matrix(c, n, fld):
    return linalg.diagonal([c] * n, zero=fld(0))


# ---------------------------------------------------------------------------
# blocks


@dataclass(frozen=True)
class TwistBlock2:
    q: DiagonalForm
    A: linalg.Matrix
    d: QuadElement

    def key(self):
        return (
            tuple((e.x, e.y) for e in self.q.entries),
            tuple((e.x, e.y) for row in self.A for e in row),
        )


@dataclass(frozen=True)
class BlockCheck:
    similitude: bool
    square: bool
    detail: str = ""

    def __bool__(self):
        return self.similitude and self.square


def verify_block(q: DiagonalForm, a, d) -> BlockCheck:
    """Exact check of ``q o A = d q`` and ``A^2 = d I``."""
    fld = q.field
    d = QuadElement.coerce(d, fld)
    a = _mat(a, fld)
    if linalg.shape(a) != (q.rank, q.rank):
        raise ValueError("block shape does not match the form")
    sim = linalg.congruence(a, q.gram()) == linalg.scale(d, q.gram())
    sq = linalg.matmul(a, a) == _scalar_matrix(d, q.rank, fld)
    problems = []
    if not sim:
        problems.append("q o A != d q")
    if not sq:
        problems.append("A^2 != d I")
    return BlockCheck(sim, sq, "; ".join(problems))


# ---------------------------------------------------------------------------
# certificates


@dataclass(frozen=True)
class TwistCertificate:
    f0: DiagonalForm
    a: QuadElement
    A0: linalg.Matrix
    checks: dict
    resulting_field: MultiquadraticField
    notes: tuple[str, ...] = field(default=())

    def to_json(self) -> dict:
        return {
            "field": self.f0.field.to_json(),
            "f0": [d.to_json() for d in self.f0.entries],
            "a": self.a.to_json(),
            "A0": [[v.to_json() for v in row] for row in self.A0],
            "checks": dict(self.checks),
            "resulting_field": self.resulting_field.to_json(),
            "notes": list(self.notes),
        }


class TwistConditionError(ValueError):
    def __init__(self, failures: dict, checks: dict):
        self.failures = failures
        self.checks = checks
        super().__init__("; ".join(f"{k}: {v}" for k, v in failures.items()))


def _integral_over_ok(e: QuadElement) -> bool:
    return e.is_integral()


def twist_field(f0: DiagonalForm, a, A0) -> MultiquadraticField:
    """Field of definition of ``diag(A0 / sqrt a, 1)`` acting on ``f0 + x_n^2``."""
    fld = f0.field
    a = QuadElement.coerce(a, fld)
    n = f0.rank
    inv_a = a.inverse()
    rows = [
        [ExtElement(0, v * inv_a, a) for v in row] + [ExtElement(0, 0, a)]
        for row in A0
    ]
    rows.append([ExtElement(0, 0, a)] * n + [ExtElement(1, 0, a)])
    f = orthogonal_sum(f0, DiagonalForm(fld, (fld(1),)))
    res = field_of_definition(tuple(tuple(r) for r in rows), f, allow_reflection=True)
    out = MultiquadraticField(fld)
    return out.adjoin(a) if res.extended else out


def verify_twist_conditions(f0: DiagonalForm, a, A0) -> TwistCertificate:
    """Certify a twist: raises :class:`TwistConditionError` naming each failed check.

    Checks ``f0 o A0 = a f0``; that ``A0^2 / a`` is an integral isometry of f0;
    that ``a`` is a totally positive non-square; and that f0 is admissible.
    """
    fld = f0.field
    a = QuadElement.coerce(a, fld)
    A0 = _mat(A0, fld)
    n = f0.rank
    if linalg.shape(A0) != (n, n):
        raise ValueError("A0 shape does not match f0")
    if fld.m is not None and fld.m % 4 == 1:
        raise ValueError(f"integrality over the ring of integers of {fld} is not supported")
    gram = f0.gram()
    checks, failures = {}, {}

    checks["similitude"] = linalg.congruence(A0, gram) == linalg.scale(a, gram)
    if not checks["similitude"]:
        failures["similitude"] = "f0 o A0 != a f0"

    if a.is_zero():
        raise ValueError("a must be nonzero")
    normalized = linalg.scale(a.inverse(), linalg.matmul(A0, A0))
    checks["normalized_square_integral"] = all(_integral_over_ok(v) for row in normalized for v in row)
    checks["normalized_square_orthogonal"] = linalg.congruence(normalized, gram) == gram
    if not checks["normalized_square_integral"]:
        failures["normalized_square_integral"] = "A0^2 / a has non-integral entries"
    if not checks["normalized_square_orthogonal"]:
        failures["normalized_square_orthogonal"] = "A0^2 / a is not an isometry of f0"

    checks["a_totally_positive"] = is_totally_positive(a)
    checks["a_nonsquare"] = qf_is_square(a) is None
    if not checks["a_totally_positive"]:
        failures["a_totally_positive"] = f"{a} is not totally positive"
    if not checks["a_nonsquare"]:
        failures["a_nonsquare"] = f"{a} is a square in {fld}"

    checks["f0_admissible"] = admissible(f0)
    if not checks["f0_admissible"]:
        failures["f0_admissible"] = f"{f0} is not admissible"

    if failures:
        raise TwistConditionError(failures, checks)
    resulting = twist_field(f0, a, A0)
    checks["field_extended"] = resulting.rank == 1
    if not checks["field_extended"]:  # pragma: no cover - forced by the conditions above
        raise TwistConditionError({"field_extended": "isometry defined over k"}, checks)
    notes = ("n = 2 lies below the n >= 4 range of the closed-form twist families",) if n == 2 else ()
    return TwistCertificate(f0, a, A0, checks, resulting, notes)


# ---------------------------------------------------------------------------
# assembly


def assemble(blocks: Sequence[TwistBlock2]) -> tuple[DiagonalForm, linalg.Matrix]:
    """``f0 = q_1 + q_2 + ...`` and block-diagonal ``A0`` for blocks sharing d."""
    if not blocks:
        raise ValueError("need at least one block")
    d = blocks[0].d
    fld = blocks[0].q.field
    for b in blocks:
        if b.d != d:
            raise ValueError(f"blocks have different multipliers {d} and {b.d}")
        if b.q.field != fld:
            raise ValueError("blocks over different fields")
        check = verify_block(b.q, b.A, b.d)
        if not check:
            raise ValueError(f"block {b.q} fails: {check.detail}")
    negatives = sum(signature(b.q)[1] for b in blocks)
    if negatives != 1:
        raise ValueError(f"assembled form needs exactly one negative direction, got {negatives}")
    f0 = blocks[0].q
    for b in blocks[1:]:
        f0 = orthogonal_sum(f0, b.q)
    A0 = linalg.block_diagonal([b.A for b in blocks], zero=fld(0))
    return f0, A0


def odd_blocks(d: int) -> tuple[TwistBlock2, TwistBlock2]:
    b = (d - 1) // 2
    q1 = DiagonalForm.of([-1, 1])
    a1 = _mat([[b + 1, b], [-b, -(b + 1)]], QQ)
    q2 = DiagonalForm.of([d, 1])
    a2 = _mat([[0, 1], [d, 0]], QQ)
    return TwistBlock2(q1, a1, QQ(d)), TwistBlock2(q2, a2, QQ(d))


def build_odd_twist(d: int, n: int) -> TwistCertificate:
    """Twist realizing Q(sqrt d) for odd squarefree d > 1 in even dimension n >= 4."""
    if d <= 1 or d % 2 == 0 or not is_squarefree(d):
        raise ValueError(f"d = {d} must be odd, squarefree and > 1")
    if n < 4 or n % 2:
        raise ValueError(f"n = {n} must be even and >= 4")
    first, second = odd_blocks(d)
    f0, A0 = assemble([first] + [second] * (n // 2 - 1))
    return verify_twist_conditions(f0, d, A0)


@dataclass(frozen=True)
class Normalization:
    b: QuadElement
    scale: QuadElement
    conjugated: bool


def _one_negative_conjugate(b: QuadElement) -> Optional[bool]:
    """None unless b - 1 has exactly one negative conjugate; else whether it is sigma's."""
    c = b - 1
    s, t = c.sign(), c.conj_sign()
    if s < 0 < t:
        return False
    if t < 0 < s:
        return True
    return None


def normalize_quad_b(b: QuadElement, search_bound: int = 12) -> Normalization:
    """Scale b by a totally positive square so b - 1 has exactly one negative conjugate,
    then move that conjugate to the identity embedding (applying sigma if needed)."""
    candidates = []
    for p in range(1, search_bound + 1):
        for q in range(1, search_bound + 1):
            candidates.append(Fraction(p, q))
    candidates = sorted(set(candidates), key=lambda r: (r.numerator + r.denominator, r))
    units = [FUNDAMENTAL_UNIT.lift(b.field) ** (2 * k) for k in (0, 1, -1, 2, -2, 3, -3)] \
        if b.field.m == 2 else [b.field(1)]
    for u in units:
        for r in candidates:
            s = u * (r * r)
            cand = b * s
            where = _one_negative_conjugate(cand)
            if where is None:
                continue
            if where:
                return Normalization(cand.conjugate(), s.conjugate(), True)
            return Normalization(cand, s, False)
    raise ValueError(f"no square scaling of {b} within the search window normalizes it")


def quad_blocks(b: QuadElement) -> tuple[TwistBlock2, TwistBlock2]:
    fld = b.field
    q1 = DiagonalForm(fld, (b - 1, fld(1)))
    a1 = _mat([[1, 1], [b - 1, -1]], fld)
    q2 = DiagonalForm(fld, (b, fld(1)))
    a2 = _mat([[0, 1], [b, 0]], fld)
    return TwistBlock2(q1, a1, b), TwistBlock2(q2, a2, b)


def build_quadfield_twist(b, n: int, search_bound: int = 12) -> TwistCertificate:
    """Twist realizing k(sqrt b) over k = Q(sqrt m) for totally positive irrational b."""
    b = QuadElement.coerce(b)
    if b.field.is_rational or b.is_rational():
        raise ValueError(f"b = {b} must be irrational in a real quadratic field")
    if not is_totally_positive(b):
        raise ValueError(f"b = {b} is not totally positive")
    if n < 4 or n % 2:
        raise ValueError(f"n = {n} must be even and >= 4")
    norm = normalize_quad_b(b, search_bound)
    first, second = quad_blocks(norm.b)
    f0, A0 = assemble([first] + [second] * (n // 2 - 1))
    cert = verify_twist_conditions(f0, norm.b, A0)
    notes = [f"b scaled by {norm.scale}"] if norm.scale != 1 else []
    if norm.conjugated:
        notes.append("b replaced by its conjugate so the negative direction sits at the identity embedding")
    return TwistCertificate(cert.f0, cert.a, cert.A0, cert.checks, cert.resulting_field,
                            cert.notes + tuple(notes))


# ---------------------------------------------------------------------------
# exhaustive block search


def _search_slice(args) -> list[tuple]:
    d, coeffs, entry_bound = args
    out = []
    rng = range(-entry_bound, entry_bound + 1)
    for c1, c2 in coeffs:
        for p in rng:
            for q in rng:
                if q == 0:
                    continue
                # A^2 = dI with d a non-square forces trace 0 and qr = d - p^2
                rem = d - p * p
                if rem % q:
                    continue
                r = rem // q
                if abs(r) > entry_bound:
                    continue
                s = -p
                if _block_ok(c1, c2, p, q, r, s, d):
                    out.append((c1, c2, p, q, r, s))
        if _is_int_square(d):
            for p in rng:
                for q in rng:
                    for r in rng:
                        for s in rng:
                            if p + s == 0 and q != 0:
                                continue  # already covered above
                            if _block_ok(c1, c2, p, q, r, s, d):
                                out.append((c1, c2, p, q, r, s))
    return out


def _is_int_square(d: int) -> bool:
    return d >= 0 and math.isqrt(d) ** 2 == d


def _block_ok(c1, c2, p, q, r, s, d) -> bool:
    # q o A = d q for q = <c1, c2>, A = [[p, q], [r, s]]
    if c1 * p * p + c2 * r * r != d * c1:
        return False
    if c1 * q * q + c2 * s * s != d * c2:
        return False
    if c1 * p * q + c2 * r * s != 0:
        return False
    # A^2 = d I
    return p * p + q * r == d and s * s + q * r == d and q * (p + s) == 0 and r * (p + s) == 0


def _workers(workers: Optional[int]) -> int:
    if workers is not None:
        return max(1, workers)
    env = os.environ.get("TRACEFORGE_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def search_blocks(
    d,
    coeff_bound: int,
    entry_bound: int,
    mixed_signs_only: bool = False,
    workers: Optional[int] = None,
) -> list[TwistBlock2]:
    """All integral blocks ``(<c1, c2>, A)`` with ``|c_i| <= coeff_bound`` and
    ``|A_ij| <= entry_bound`` satisfying ``q o A = d q`` and ``A^2 = d I``.

    The grid of forms is split across ``workers`` processes; the merged result is
    sorted canonically so it does not depend on the worker count.
    """
    if coeff_bound < 1 or entry_bound < 1:
        raise ValueError("bounds must be >= 1")
    d = Fraction(d)
    if d.denominator != 1:
        return []  # integral A forces integral d
    d = int(d)
    cs = [c for c in range(-coeff_bound, coeff_bound + 1) if c]
    coeffs = [(c1, c2) for c1 in cs for c2 in cs if not mixed_signs_only or c1 * c2 < 0]
    nworkers = min(_workers(workers), len(coeffs))
    if nworkers <= 1:
        raw = _search_slice((d, coeffs, entry_bound))
    else:
        chunks = [coeffs[i::nworkers] for i in range(nworkers)]
        with ProcessPoolExecutor(nworkers) as pool:
            raw = [x for part in pool.map(_search_slice, [(d, c, entry_bound) for c in chunks]) for x in part]
    raw.sort()
    return [
        TwistBlock2(DiagonalForm.of([c1, c2]), _mat([[p, q], [r, s]], QQ), QQ(d))
        for c1, c2, p, q, r, s in raw
    ]


# ---------------------------------------------------------------------------
# even-d table

TABLE_RESOURCE = "even_twists.json"
TABLE_SHA256 = "867998989816f79617087549377a12aebc3ba782c04ec29aeec6aceaeb45ef29"


def load_even_table() -> list[dict]:
    raw = resources.files("traceforge.data").joinpath(TABLE_RESOURCE).read_bytes()
    digest = hashlib.sha256(raw).hexdigest()
    if digest != TABLE_SHA256:
        raise RuntimeError(f"{TABLE_RESOURCE} checksum mismatch: {digest}")
    return json.loads(raw)["rows"]


@dataclass(frozen=True)
class TableRowResult:
    d: int
    checks: dict
    field: Optional[MultiquadraticField]

    @property
    def passed(self) -> bool:
        return all(self.checks.values())

    def to_json(self) -> dict:
        return {
            "d": self.d,
            "passed": self.passed,
            "checks": dict(self.checks),
            "field": self.field.to_json() if self.field else None,
        }


def check_table_row(row: dict) -> TableRowResult:
    d = int(row["d"])
    q1 = DiagonalForm.of([parse_scalar(v) for v in row["q1"]])
    q2 = DiagonalForm.of([parse_scalar(v) for v in row["q2"]])
    a1 = _mat(row["A1"], QQ)
    a2 = _mat(row["A2"], QQ)
    checks = {}
    g1 = q1.gram()
    checks["q1 o A1 = d q1"] = linalg.congruence(a1, g1) == linalg.scale(QQ(d), g1)
    # the 4x4 blocks square to d times an integral isometry, not to d I
    checks["A1^2 / d integral isometry of q1"] = _normalized_square_ok(a1, q1, d)
    block2 = verify_block(q2, a2, d)
    checks["q2 o A2 = d q2"] = block2.similitude
    checks["A2^2 = d I"] = block2.square
    expected = MultiquadraticField(QQ).adjoin(d)
    fields = []
    for n, (f0, A0) in {
        4: (q1, a1),
        6: (orthogonal_sum(q1, q2), linalg.block_diagonal([a1, a2], zero=QQ(0))),
    }.items():
        try:
            cert = verify_twist_conditions(f0, d, A0)
        except TwistConditionError as exc:
            checks[f"n={n} twist conditions"] = False
            checks[f"n={n} failures: {exc}"] = False
            continue
        checks[f"n={n} twist conditions"] = True
        checks[f"n={n} admissible"] = cert.checks["f0_admissible"]
        checks[f"n={n} field Q(sqrt {d})"] = cert.resulting_field == expected
        fields.append(cert.resulting_field)
    return TableRowResult(d, checks, fields[0] if fields else None)


def _normalized_square_ok(a, q: DiagonalForm, d: int) -> bool:
    norm = linalg.scale(Fraction(1, d), linalg.matmul(a, a))
    return all(v.is_integral() for row in norm for v in row) and \
        linalg.congruence(norm, q.gram()) == q.gram()


def reproduce_even_table() -> list[TableRowResult]:
    return [check_table_row(row) for row in load_even_table()]


def certificate_from_json(obj: dict) -> tuple[DiagonalForm, QuadElement, linalg.Matrix]:
    fld = FieldDescriptor.from_json(obj.get("field", {"kind": "Q"}))
    f0 = DiagonalForm(fld, tuple(parse_scalar(v, fld) for v in obj["f0"]))
    a = parse_scalar(obj["a"], fld)
    A0 = _mat(obj["A0"], fld)
    return f0, a, A0
