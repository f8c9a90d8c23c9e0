"""Acceptance criteria, one test each, with the stated runtime budgets.

Each test records a PASS/FAIL line; the lines are printed at the end of the run
(see conftest.py) and also directly to stdout.
"""

import random
import subprocess
import sys
import time
from contextlib import contextmanager
from fractions import Fraction
from pathlib import Path

import pytest

from oracles import blocks_unpruned, delta_is_square_mod_prime, legendre_enum, rational_degree_oracle
from traceforge.arith import QQ, is_squarefree, padic_valuation
from traceforge.examples import run_delta5, run_qsqrt2_family, run_rational_prime_family
from traceforge.fields import MultiquadraticField
from traceforge.forms import equivalent_q, equivalent_scaled_family_qsqrt2, scale_form, standard_f0
from traceforge.gluing import Canonical, CloseUp, Double, ExplicitMatrix, GluingPlan, Interbreed, Piece, \
    Twist, TwistBlock, trace_field
from traceforge.local import QSQRT2, find_split_primes
from traceforge.twist import build_odd_twist, reproduce_even_table, search_blocks

RESULTS = []
TESTS = Path(__file__).parent


@contextmanager
def criterion(number, title, budget):
    start = time.perf_counter()
    ok = False
    try:
        yield
        ok = True
    finally:
        elapsed = time.perf_counter() - start
        within = elapsed < budget
        status = "PASS" if ok and within else "FAIL"
        line = f"[{status}] criterion {number}: {title} ({elapsed:.2f}s, budget {budget:g}s)"
        RESULTS.append(line)
        print(line)
    assert within, f"criterion {number} took {elapsed:.2f}s, budget {budget}s"


def test_1_even_table():
    with criterion(1, "even-d twist table 10/10", 1.0):
        rows = reproduce_even_table()
        assert [r.d for r in rows] == [2, 6, 10, 14, 22, 26, 30, 34, 38, 42]
        for r in rows:
            assert r.passed, (r.d, r.checks)
            assert r.field == MultiquadraticField.of(QQ, [r.d])


def test_2_scaled_form_equivalence():
    with criterion(2, "a f0 ~= f0 for n = 6, 10; witnesses at n = 4", 1.0):
        rnd = random.Random(20240601)
        scalars = [Fraction(rnd.randint(1, 50), rnd.randint(1, 50)) for _ in range(20)]
        for n in (6, 10):
            f0 = standard_f0(n)
            for a in scalars:
                assert equivalent_q(scale_form(a, f0), f0).equivalent, (n, a)
        f0 = standard_f0(4)
        for p in (3, 7, 11):
            v = equivalent_q(scale_form(p, f0), f0)
            assert v.result == "inequivalent"
            assert v.witness.invariant == "hasse" and v.witness.place == str(p)
            expected = legendre_enum(-1, p) ** padic_valuation(p, p)
            assert (v.witness.left, v.witness.right) == (expected, 1)


def test_3_rational_prime_family():
    with criterion(3, "Q(sqrt5, sqrt13, sqrt17) of degree 8", 1.0):
        rep = run_rational_prime_family(3, 4)
        assert rep.status == "pass"
        assert rep.data["primes"] == [5, 13, 17]
        checks = [s for s in rep.steps if s.check.endswith("f0 ~= f0")]
        assert len(checks) == 3 and all(s.ok and s.result == "equivalent" for s in checks)
        assert rep.data["verdict"]["degree"] == 8 == rational_degree_oracle([5, 13, 17])
        plan_field = MultiquadraticField.of(QQ, [5, 13, 17])
        assert str(plan_field) in rep.conclusion


def test_4_qsqrt2_family():
    with criterion(4, "split primes over Q(sqrt2) on both branches", 5.0):
        sqrt2 = QSQRT2.sqrt_m()
        for n, sign in ((4, -1), (6, 1)):
            found = find_split_primes(sign * sqrt2, 2, 500)
            assert len(found.primes) >= 2
            for sp in found.primes:
                assert delta_is_square_mod_prime(sp.prime.rational_prime, sp.prime.residue_map, sign)
                assert equivalent_scaled_family_qsqrt2(sp, n).equivalent
            r = len(found.primes)
            rep = run_qsqrt2_family(r, n, 500)
            assert rep.status == "pass"
            assert rep.data["verdict"]["degree"] == 2**r


def test_5_delta5():
    with criterion(5, "Delta_5 obstruction", 1.0):
        rep = run_delta5()
        assert rep.status == "pass"
        adm = next(s for s in rep.steps if s.check == "admissible over Q(sqrt2)")
        assert adm.inputs == "<-1, 1, 1, 1, 1, 1>" and adm.result is False
        assert any(s.rule == "contradiction" and s.ok for s in rep.steps)
        assert "not commensurable" in rep.conclusion


def test_6_closed_form_twists():
    with criterion(6, "odd closed-form twists for 3 <= d <= 99, n = 4, 6, 8", 5.0):
        count = 0
        for d in range(3, 100, 2):
            if not is_squarefree(d):
                continue
            expected = MultiquadraticField.of(QQ, [d])
            for n in (4, 6, 8):
                cert = build_odd_twist(d, n)
                assert all(cert.checks.values()) and cert.resulting_field == expected
                piece = Piece("M", QQ, n, cert.f0, QQ(1))
                plan = GluingPlan(QQ, n, (piece,), (Twist("M", TwistBlock(cert.A0, cert.a)),))
                assert trace_field(plan).trace_field == expected
                count += 1
        assert count == 3 * 40


def test_7_property_suites():
    with criterion(7, "property suites and exhaustive block search", 60.0):
        res = subprocess.run(
            [sys.executable, "-m", "pytest", "-q", "-p", "no:cacheprovider", str(TESTS / "test_properties.py")],
            capture_output=True, text=True, cwd=TESTS.parent, check=False,
        )
        assert res.returncode == 0, res.stdout[-2000:]
        got = [
            (int(b.q.entries[0].x), int(b.q.entries[1].x)) + tuple(int(v.x) for row in b.A for v in row)
            for b in search_blocks(3, 3, 3)
        ]
        assert got == blocks_unpruned(3, 3, 3)


def _rho_rational(size, lam, e, g):
    """lam * R * rho^e, R permuting the positive directions of f0 (an isometry of f0 + <1>)."""
    from traceforge.fields import ExtElement

    middle = list(range(1, size - 1))
    random.Random(size * 7 + e).shuffle(middle)
    perm = [0] + middle + [size - 1]
    rows = []
    for i in range(size):
        row = []
        for j in range(size):
            v = 1 if perm[i] == j else 0
            if e and j == size - 1:
                v = -v
            row.append(ExtElement(lam[0] * v, lam[1] * v, g))
        rows.append(tuple(row))
    return tuple(rows)


def test_8_doubling_and_odd_close_up():
    with criterion(8, "Double keeps fields; odd rho-rational close-ups stay over k", 1.0):
        rnd = random.Random(5)
        f0 = standard_f0(4)
        for _ in range(50):
            scalars = [rnd.randint(1, 60) for _ in range(rnd.randint(2, 4))]
            pieces = tuple(Piece(f"P{i}", QQ, 4, f0, QQ(a)) for i, a in enumerate(scalars))
            steps = tuple(Interbreed("P0", p.label, Canonical()) for p in pieces[1:])
            running = trace_field(GluingPlan(QQ, 4, pieces, steps)).trace_field
            doubled = trace_field(GluingPlan(QQ, 4, pieces, steps + (Double("P1"),)))
            assert doubled.trace_field == running and doubled.history[-2] == doubled.history[-1]
        for n in (3, 5, 7):
            piece = Piece("M", QQ, n, standard_f0(n), QQ(1))
            for g in (2, 3, 5):
                for lam in ((1, 0), (0, 1), (1, 1), (2, -1)):
                    for e in (0, 1):
                        iso = ExplicitMatrix(_rho_rational(n + 1, lam, e, QQ(g)), QQ(g))
                        v = trace_field(GluingPlan(QQ, n, (piece,), (CloseUp("M", iso),)))
                        assert v.degree_over_base == 1


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-s"]))
