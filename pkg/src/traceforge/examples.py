"""End-to-end runs of the worked constructions: multiquadratic trace fields from
rational primes, from split primes of Z[sqrt 2], and the Delta_5 obstruction."""

from __future__ import annotations

import sympy

from .arith import QQ
from .fields import brute_force_degree
from .forms import (
    CriterionNotApplicable,
    equivalent_q,
    equivalent_scaled_family_qsqrt2,
    scale_form,
    sqrt2_f0,
    standard_f0,
)
from .gluing import GluingPlan, Interbreed, Piece, delta5_obstruction, plan_to_json, trace_field
from .local import QSQRT2, find_split_primes
from .report import Report


def primes_1_mod_4(r: int) -> list[int]:
    out, p = [], 2
    while len(out) < r:
        p = int(sympy.nextprime(p))
        if p % 4 == 1:
            out.append(p)
    return out


def star_plan(base, n, f0, scalars, metadata=None) -> GluingPlan:
    """Pieces ``f0 + a x_n^2`` for a in {1} + scalars, each glued canonically to the a = 1 piece."""
    pieces = [Piece("P0", base, n, f0, base(1))]
    pieces += [Piece(f"P{i}", base, n, f0, a) for i, a in enumerate(scalars, 1)]
    steps = tuple(Interbreed("P0", p.label) for p in pieces[1:])
    meta = {"implicit_piece": "P0 carries a = 1 so r scalars give r generators"}
    meta.update(metadata or {})
    return GluingPlan(base, n, tuple(pieces), steps, meta)


def run_rational_prime_family(r: int, n: int) -> Report:
    """Trace field Q(sqrt a_1, ..., sqrt a_r) from the first r primes = 1 mod 4."""
    if r < 1:
        raise ValueError("r must be >= 1")
    if n < 4 or n % 4:
        raise ValueError(f"n = {n} must be a positive multiple of 4")
    rep = Report(f"rational prime family r={r} n={n}")
    primes = primes_1_mod_4(r)
    rep.add("primes = 1 mod 4", {"r": r}, primes, "first r primes in the progression 1 mod 4")
    f0 = standard_f0(n)
    for p in primes:
        v = equivalent_q(scale_form(p, f0), f0)
        rep.add(f"{p} f0 ~= f0", {"a": str(p), "f0": str(f0)}, v.result,
                "Hasse-Minkowski over Q; eps_p(a f0) = (-1/p)^v_p(a)", ok=v.equivalent)
    plan = star_plan(QQ, n, f0, [QQ(p) for p in primes])
    verdict = trace_field(plan)
    expected = 2**r
    rep.add("trace field", {"plan_steps": len(plan.steps)}, str(verdict.trace_field),
            "canonical gluing adjoins sqrt(a_i a_j)")
    rep.add("degree", {"expected": expected}, verdict.degree_over_base,
            "independent square classes give degree 2^r", ok=verdict.degree_over_base == expected)
    rep.data = {"primes": primes, "plan": plan_to_json(plan), "verdict": verdict.to_json()}
    rep.conclusion = f"trace field {verdict.trace_field} of degree {verdict.degree_over_base} over Q"
    return rep


def run_qsqrt2_family(r: int, n: int, norm_bound: int = 500) -> Report:
    """Trace field k(sqrt a_1, ..., sqrt a_r) over k = Q(sqrt 2) from split primes."""
    if r < 1:
        raise ValueError("r must be >= 1")
    if n < 2 or n % 2:
        raise ValueError(f"n = {n} must be even")
    delta = -QSQRT2.sqrt_m() if n % 4 == 0 else QSQRT2.sqrt_m()
    rep = Report(f"Q(sqrt2) split prime family r={r} n={n}")
    search = find_split_primes(delta, r, norm_bound)
    gens = [sp.generator for sp in search.primes]
    rep.add("split primes", {"delta": str(delta), "count": r, "norm_bound": norm_bound},
            [str(g) for g in gens], "primes splitting in k(sqrt delta) with totally positive generators",
            ok=len(gens) == r)
    f0 = sqrt2_f0(n)
    for sp in search.primes:
        try:
            v = equivalent_scaled_family_qsqrt2(sp, n)
            ok, result = v.equivalent, v.result
        except CriterionNotApplicable as exc:
            ok, result = False, f"not applicable: {exc}"
        rep.add(f"{sp.generator} f0 ~= f0", {"a": str(sp.generator), "f0": str(f0)}, result,
                "a is a norm from k(sqrt delta), so (delta, a)_v = 1 everywhere", ok=ok)
    if not gens:
        rep.status = "fail"
        rep.conclusion = "no split primes within the norm bound"
        return rep
    plan = star_plan(QSQRT2, n, f0, gens, {"delta": str(delta)})
    verdict = trace_field(plan)
    brute = brute_force_degree(QSQRT2, gens)
    rep.add("trace field", {"plan_steps": len(plan.steps)}, str(verdict.trace_field),
            "canonical gluing adjoins sqrt(a_i a_j)")
    rep.add("degree", {"expected": 2 ** len(gens), "subset_products": brute}, verdict.degree_over_base,
            "subset-product squareness", ok=verdict.degree_over_base == brute == 2 ** len(gens))
    rep.data = {"generators": [g.to_json() for g in gens], "truncated": search.truncated,
                "plan": plan_to_json(plan), "verdict": verdict.to_json()}
    rep.conclusion = f"trace field {verdict.trace_field} of degree {verdict.degree_over_base} over Q(sqrt2)"
    if len(gens) < r:
        rep.conclusion = f"partial: only {len(gens)} of {r} primes found; " + rep.conclusion
    return rep


def run_delta5() -> Report:
    return delta5_obstruction()

