"""Symbolic gluing plans and their trace fields.

A plan is a base field k, a dimension n, arithmetic pieces (each carrying
``f_a = f0 + a x_n^2``) and a list of gluing steps.  Each step contributes the
field of definition of its gluing isometry; folding the steps gives the trace
field of the glued manifold.
"""

from __future__ import annotations

import functools
import itertools
from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence, Union

from . import linalg
from .arith import QQ, FieldDescriptor, QuadElement, is_totally_positive, parse_scalar, qf_is_square
from .fields import (
    DefinitionField,
    ExtElement,
    MultiquadraticField,
    field_of_definition,
    lift_matrix,
)
from .forms import (
    DiagonalForm,
    CriterionNotApplicable,
    _product,
    admissible,
    equivalent_scaled_family_qsqrt2,
    orthogonal_sum,
    same_square_class,
    similar_q,
    sqrt2_f0,
    standard_f0,
)
from .local import QSQRT2
from .report import Report
from .twist import verify_twist_conditions


class PlanError(ValueError):
    pass


class InconsistencyError(RuntimeError):
    """An explicit isometry contradicts the odd-dimensional close-up rule."""


@dataclass(frozen=True)
class Piece:
    label: str
    field: FieldDescriptor
    n: int
    f0: DiagonalForm
    a: QuadElement

    def __post_init__(self):
        if self.n < 2 or self.f0.rank != self.n:
            raise PlanError(f"piece {self.label}: f0 must have rank n = {self.n}")
        if self.f0.field != self.field:
            raise PlanError(f"piece {self.label}: f0 is not over {self.field}")
        if not admissible(self.f0):
            raise PlanError(f"piece {self.label}: f0 = {self.f0} is not admissible")
        a = QuadElement.coerce(self.a, self.field)
        if not is_totally_positive(a):
            raise PlanError(f"piece {self.label}: a = {a} is not totally positive")
        object.__setattr__(self, "a", a)

    @property
    def form(self) -> DiagonalForm:
        return orthogonal_sum(self.f0, DiagonalForm(self.field, (self.a,)))


# -- isometry specifications ------------------------------------------------


@dataclass(frozen=True)
class Canonical:
    pass


@dataclass(frozen=True)
class Identity:
    pass


@dataclass(frozen=True)
class ExplicitMatrix:
    entries: linalg.Matrix
    generator: QuadElement


@dataclass(frozen=True)
class TwistBlock:
    A0: linalg.Matrix
    a: QuadElement


IsometrySpec = Union[Canonical, Identity, ExplicitMatrix, TwistBlock]


# -- steps -----------------------------------------------------------------


@dataclass(frozen=True)
class Interbreed:
    left: str
    right: str
    iso: IsometrySpec = Canonical()


@dataclass(frozen=True)
class CloseUp:
    piece: str
    iso: IsometrySpec = Canonical()


@dataclass(frozen=True)
class Double:
    piece: str


@dataclass(frozen=True)
class Twist:
    piece: str
    iso: TwistBlock


GluingStep = Union[Interbreed, CloseUp, Double, Twist]


@dataclass(frozen=True)
class GluingPlan:
    base: FieldDescriptor
    n: int
    pieces: tuple[Piece, ...]
    steps: tuple[GluingStep, ...]
    metadata: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        labels = [p.label for p in self.pieces]
        if len(set(labels)) != len(labels):
            raise PlanError("duplicate piece labels")
        for p in self.pieces:
            if p.field != self.base:
                raise PlanError(f"piece {p.label} is over {p.field}, plan base is {self.base}")
            if p.n != self.n:
                raise PlanError(f"piece {p.label} has dimension {p.n}, plan has {self.n}")
        known = set(labels)
        for s in self.steps:
            for lab in _step_labels(s):
                if lab not in known:
                    raise PlanError(f"step {s} references unknown piece {lab!r}")

    @property
    def piece_map(self) -> dict[str, Piece]:
        return {p.label: p for p in self.pieces}


def _step_labels(step: GluingStep) -> tuple[str, ...]:
    if isinstance(step, Interbreed):
        return (step.left, step.right)
    return (step.piece,)


# -- single-step rules -------------------------------------------------------


def canonical_step_field(a_i, a_j, k: FieldDescriptor = QQ) -> Optional[QuadElement]:
    """Square class a_i a_j adjoined by a canonical gluing, or None when it is a square."""
    a_i, a_j = QuadElement.coerce(a_i, k), QuadElement.coerce(a_j, k)
    if not (is_totally_positive(a_i) and is_totally_positive(a_j)):
        raise ValueError("canonical gluings need totally positive scalars")
    prod = a_i * a_j
    return None if qf_is_square(prod) is not None else prod


def canonical_matrix(a_i, a_j, n: int, k: FieldDescriptor = QQ) -> linalg.Matrix:
    """``diag(I, sqrt(a_i / a_j))`` over k(sqrt(a_i a_j)), so that f_{a_j} o A = f_{a_i}.

    sqrt(a_i / a_j) = sqrt(a_i a_j) / a_j.
    """
    a_i, a_j = QuadElement.coerce(a_i, k), QuadElement.coerce(a_j, k)
    g = a_i * a_j
    zero = ExtElement(0, 0, g)
    rows = [[ExtElement(1 if r == c else 0, 0, g) for c in range(n + 1)] for r in range(n)]
    root = qf_is_square(g)
    last = ExtElement(0, a_j.inverse(), g) if root is None else ExtElement(root / a_j, 0, g)
    rows.append([zero] * n + [last])
    return tuple(tuple(r) for r in rows)


def _explicit_field(iso: ExplicitMatrix, source: DiagonalForm, target: DiagonalForm,
                    allow_reflection: bool = False) -> DefinitionField:
    entries = lift_matrix(iso.entries, iso.generator)
    return field_of_definition(entries, source, allow_reflection, target=target, generator=iso.generator)


def apply_step(current: MultiquadraticField, step: GluingStep, pieces: Mapping[str, Piece]) -> MultiquadraticField:
    """Field after one gluing step; the degree grows by a factor 1 or 2."""
    k = current.base
    if isinstance(step, Double):
        # the identity of H_f extends the gluing isometry
        return current
    if isinstance(step, Twist):
        p = pieces[step.piece]
        cert = verify_twist_conditions(p.f0, step.iso.a, step.iso.A0)
        return current.compositum(cert.resulting_field)
    if isinstance(step, Interbreed):
        left, right = pieces[step.left], pieces[step.right]
    else:
        left = right = pieces[step.piece]
    if left.n != right.n:
        raise PlanError("dimension mismatch across a gluing step")
    iso = step.iso
    if isinstance(iso, Identity):
        return current
    if isinstance(iso, Canonical):
        cls = canonical_step_field(left.a, right.a, k)
        return current if cls is None else current.adjoin(cls)
    if isinstance(iso, TwistBlock):
        raise PlanError("twist isometries belong in Twist steps")
    if isinstance(step, CloseUp) and left.n % 2 == 1:
        _odd_close_up(iso, left)
        return current
    res = _explicit_field(iso, left.form, right.form)
    return current.adjoin(res.generator) if res.extended else current


def _odd_close_up(iso: ExplicitMatrix, piece: Piece) -> None:
    """Odd-dimensional close-ups never enlarge the field.

    A matrix that is not projectively rational cannot extend a gluing isometry
    here: in odd dimension sigma(A) = A rho is excluded by orientation, so the
    only allowed relation is sigma(A) = c A.  Anything else is a modeling error.
    """
    res = _explicit_field(iso, piece.form, piece.form, allow_reflection=True)
    if res.extended:
        kind = "conjugate to itself composed with the reflection" if res.reflection else "not projectively rational"
        raise InconsistencyError(
            f"close-up of {piece.label} in odd dimension {piece.n}: the isometry is {kind}; "
            "odd-dimensional close-ups must be defined over k"
        )


# -- commensurability --------------------------------------------------------


def _scales_f0(f0: DiagonalForm, a: QuadElement) -> bool:
    """Whether a f0 ~= f0 is certified over Q(sqrt 2) for the <-sqrt2, 1, ...> family."""
    if qf_is_square(a) is not None:
        return True
    if f0 != sqrt2_f0(f0.rank) or f0.rank % 2:
        return False
    try:
        return equivalent_scaled_family_qsqrt2(a, f0.rank).equivalent
    except CriterionNotApplicable:
        return False


def commensurable_pieces(p: Piece, q: Piece) -> Optional[bool]:
    """True / False, or None when undecided, for similarity of the pieces' forms."""
    if p.field != q.field or p.n != q.n:
        return False
    if p.f0 == q.f0 and p.a == q.a:
        return True
    return _commensurable(p.f0, p.a, q.f0, q.a)


@functools.lru_cache(maxsize=4096)
def _commensurable(f0p: DiagonalForm, ap: QuadElement, f0q: DiagonalForm, aq: QuadElement) -> Optional[bool]:
    fp = orthogonal_sum(f0p, DiagonalForm(f0p.field, (ap,)))
    fq = orthogonal_sum(f0q, DiagonalForm(f0q.field, (aq,)))
    if fp.field.is_rational:
        verdict = similar_q(fp, fq)
        return {"similar": True, "inequivalent": False}.get(verdict.result)
    if fp.rank % 2 == 0 and not same_square_class(_product(fp), _product(fq)):
        return False
    if f0p == f0q and _scales_f0(f0p, ap) and _scales_f0(f0q, aq):
        return True
    return None


# -- whole plans --------------------------------------------------------------


@dataclass(frozen=True)
class Verdict:
    trace_field: MultiquadraticField
    degree_over_base: int
    arithmeticity: str  # "arithmetic-candidate" | "nonarithmetic" | "quasi-arithmetic"
    rule: str
    history: tuple[MultiquadraticField, ...] = ()

    def to_json(self) -> dict:
        return {
            "trace_field": self.trace_field.to_json(),
            "degree": self.degree_over_base,
            "verdict": self.arithmeticity,
            "rule": self.rule,
        }


def trace_field(plan: GluingPlan) -> Verdict:
    pieces = plan.piece_map
    current = MultiquadraticField(plan.base)
    history = [current]
    for step in plan.steps:
        nxt = apply_step(current, step, pieces)
        if not current.is_subfield_of(nxt) or nxt.degree not in (current.degree, 2 * current.degree):
            raise InconsistencyError(f"step {step} left the quadratic-extension bound")
        current = nxt
        history.append(current)
    comm = _pairwise_commensurability(plan.pieces)
    if plan.n % 2 == 1 and comm is True and current.degree > 1:
        raise InconsistencyError(
            "odd-dimensional gluing of commensurable pieces produced a proper extension"
        )
    if current.degree > 1:
        verdict, rule = "nonarithmetic", "trace-field-exceeds-base"
    elif comm is False:
        verdict, rule = "nonarithmetic", "noncommensurable-pieces"
    elif comm is True:
        verdict, rule = "quasi-arithmetic", "commensurable-pieces-base-field"
    else:
        verdict, rule = "arithmetic-candidate", "commensurability-undecided"
    return Verdict(current, current.degree, verdict, rule, tuple(history))


def _pairwise_commensurability(pieces: Sequence[Piece]) -> Optional[bool]:
    distinct = {}
    for p in pieces:
        distinct.setdefault((p.f0, p.a), p)
    undecided = False
    for p, q in itertools.combinations(distinct.values(), 2):
        c = commensurable_pieces(p, q)
        if c is False:
            return False
        if c is None:
            undecided = True
    return None if undecided else True


def field_degree(k: MultiquadraticField) -> int:
    return k.degree


# -- Delta_5 --------------------------------------------------------------------


def delta5_obstruction() -> Report:
    """Reproduce the argument that the Coxeter simplex Delta_5 is not commensurable
    to any gluing of arithmetic pieces."""
    rep = Report("Delta_5 obstruction")
    f_q = standard_f0(6)
    f_k = standard_f0(6, QSQRT2)
    delta_field = MultiquadraticField.of(QQ, [2])
    rep.add("recorded inputs", {"form": str(f_q)}, {"trace_field": str(delta_field)},
            "known trace field and ambient form of Delta_5")

    adm_k = admissible(f_k)
    rep.add("admissible over Q(sqrt2)", str(f_k), adm_k, "admissibility", ok=not adm_k)
    sanity = admissible(sqrt2_f0(6))
    rep.add("sanity: <-sqrt2,1,...,1> admissible over Q(sqrt2)", str(sqrt2_f0(6)), sanity,
            "admissibility", ok=sanity)
    adm_q = admissible(f_q)
    rep.add("admissible over Q", str(f_q), adm_q, "admissibility", ok=adm_q)
    rep.add("field of the pieces", ["Q", "Q(sqrt2)"], "Q",
            "piece fields lie in the trace field; only the admissible choice remains")

    # odd-dimensional gluings of commensurable Q-pieces stay over Q
    f0 = standard_f0(5)
    pieces = (Piece("P1", QQ, 5, f0, QQ(1)), Piece("P4", QQ, 5, f0, QQ(4)),
              Piece("P9", QQ, 5, f0, QQ(9)))
    plan = GluingPlan(QQ, 5, pieces, (
        Interbreed("P1", "P4"), Interbreed("P4", "P9"), CloseUp("P1"), Double("P9"),
    ))
    v = trace_field(plan)
    rep.add("odd-dimensional commensurable gluing", "n = 5, a in {1, 4, 9}",
            {"trace_field": str(v.trace_field), "verdict": v.arithmeticity},
            "odd-dimension-commensurable-gluing", ok=v.degree_over_base == 1)
    odd_pair = commensurable_pieces(Piece("A", QQ, 5, f0, QQ(1)), Piece("B", QQ, 5, f0, QQ(2)))
    rep.add("n = 5 pieces with a = 1, 2 commensurable?", "f0 + x^2 vs f0 + 2x^2", odd_pair,
            "even-rank similarity preserves the discriminant", ok=odd_pair is False)
    degree = MultiquadraticField(QQ).degree
    contradiction = degree != delta_field.degree
    rep.add("trace field comparison", {"forced": "Q", "Delta_5": str(delta_field)},
            f"[Q(sqrt2):Q] = {delta_field.degree} vs forced degree {degree}",
            "contradiction", ok=contradiction)
    rep.conclusion = (
        "Delta_5 is not commensurable to any gluing of arithmetic pieces"
        if rep.status == "pass" else "obstruction could not be reproduced"
    )
    return rep


# -- JSON ------------------------------------------------------------------------


def _parse_iso(obj: dict, k: FieldDescriptor) -> IsometrySpec:
    kind = obj.get("type", "canonical")
    if kind == "canonical":
        return Canonical()
    if kind == "identity":
        return Identity()
    if kind == "matrix":
        g = parse_scalar(obj["generator"], k)
        entries = tuple(
            tuple(
                ExtElement(parse_scalar(v.get("base", "0"), k), parse_scalar(v.get("sqrt", "0"), k), g)
                if isinstance(v, dict) and ("base" in v or "sqrt" in v)
                else ExtElement(parse_scalar(v, k), 0, g)
                for v in row
            )
            for row in obj["entries"]
        )
        return ExplicitMatrix(entries, g)
    if kind == "twist":
        a = parse_scalar(obj["a"], k)
        A0 = tuple(tuple(parse_scalar(v, k) for v in row) for row in obj["A0"])
        return TwistBlock(A0, a)
    raise PlanError(f"unknown isometry type {kind!r}")


def _iso_json(iso: IsometrySpec):
    if isinstance(iso, Canonical):
        return {"type": "canonical"}
    if isinstance(iso, Identity):
        return {"type": "identity"}
    if isinstance(iso, ExplicitMatrix):
        return {"type": "matrix", "generator": iso.generator.to_json(),
                "entries": [[v.to_json() for v in row] for row in lift_matrix(iso.entries, iso.generator)]}
    return {"type": "twist", "a": iso.a.to_json(), "A0": [[v.to_json() for v in row] for row in iso.A0]}


def plan_from_json(obj: dict) -> GluingPlan:
    k = FieldDescriptor.from_json(obj.get("base_field", {"kind": "Q"}))
    n = int(obj["n"])
    f0 = DiagonalForm(k, tuple(parse_scalar(v, k) for v in obj["f0"]))
    pieces = []
    for p in obj["pieces"]:
        pf0 = DiagonalForm(k, tuple(parse_scalar(v, k) for v in p["f0"])) if "f0" in p else f0
        pieces.append(Piece(p["label"], k, n, pf0, parse_scalar(p["a"], k)))
    steps = []
    for s in obj.get("steps", []):
        op = s["op"]
        iso = _parse_iso(s.get("isometry", {"type": "canonical"}), k)
        if op == "interbreed":
            steps.append(Interbreed(s["left"], s["right"], iso))
        elif op in ("close_up", "close-up", "closeup"):
            steps.append(CloseUp(s["piece"], iso))
        elif op == "double":
            steps.append(Double(s["piece"]))
        elif op == "twist":
            if not isinstance(iso, TwistBlock):
                raise PlanError("twist steps need a twist isometry")
            steps.append(Twist(s["piece"], iso))
        else:
            raise PlanError(f"unknown step op {op!r}")
    return GluingPlan(k, n, tuple(pieces), tuple(steps), dict(obj.get("metadata", {})))


def plan_to_json(plan: GluingPlan) -> dict:
    f0 = plan.pieces[0].f0 if plan.pieces else None
    steps = []
    for s in plan.steps:
        if isinstance(s, Interbreed):
            steps.append({"op": "interbreed", "left": s.left, "right": s.right, "isometry": _iso_json(s.iso)})
        elif isinstance(s, CloseUp):
            steps.append({"op": "close_up", "piece": s.piece, "isometry": _iso_json(s.iso)})
        elif isinstance(s, Double):
            steps.append({"op": "double", "piece": s.piece})
        else:
            steps.append({"op": "twist", "piece": s.piece, "isometry": _iso_json(s.iso)})
    out = {
        "base_field": plan.base.to_json(),
        "n": plan.n,
        "f0": [d.to_json() for d in f0.entries] if f0 else [],
        "pieces": [],
        "steps": steps,
    }
    for p in plan.pieces:
        entry = {"label": p.label, "a": p.a.to_json()}
        if f0 is not None and p.f0 != f0:
            entry["f0"] = [d.to_json() for d in p.f0.entries]
        out["pieces"].append(entry)
    if plan.metadata:
        out["metadata"] = plan.metadata
    return out
