from fractions import Fraction

import pytest

from oracles import rational_degree_oracle
from traceforge import linalg
from traceforge.arith import QQ, QuadElement
from traceforge.fields import (
    ExtElement,
    MultiquadraticField,
    NotASimilitudeError,
    brute_force_degree,
    field_of_definition,
    reflection_matrix,
)
from traceforge.forms import DiagonalForm, orthogonal_sum, standard_f0
from traceforge.local import QSQRT2

SQRT2 = QSQRT2.sqrt_m()


def diag(entries, one):
    return linalg.diagonal(entries, zero=one * 0)


def test_ext_element_arithmetic():
    r = ExtElement.sqrt(QQ(2))
    assert r * r == 2
    x = ExtElement(1, 1, QQ(2))
    assert x * x.conjugate() == -1 == x.relative_norm()
    assert x * x.inverse() == 1
    assert (x + 3) - 3 == x and 1 / x == x.inverse()
    with pytest.raises(ZeroDivisionError):
        ExtElement(0, 0, QQ(2)).inverse()
    with pytest.raises(ValueError):
        r + ExtElement.sqrt(QQ(3))
    with pytest.raises(AttributeError):
        r.u = 5


def test_ext_element_over_sqrt2_base():
    g = QuadElement(1, 1, QSQRT2)  # 1 + sqrt2 is not totally positive, and not a square
    s = ExtElement.sqrt(g)
    assert s * s == g
    assert s.to_json() == {"base": QuadElement(0, 0, QSQRT2).to_json(), "sqrt": QuadElement(1, 0, QSQRT2).to_json()}


def test_rational_matrix_is_defined_over_k():
    f = standard_f0(4)
    a = diag([Fraction(1)] * 4, Fraction(1))
    res = field_of_definition(a, f)
    assert not res.extended and res.generator is None and res.multiplier == 1


def test_scalar_sqrt_is_projectively_rational():
    f = standard_f0(4)
    r = ExtElement.sqrt(QQ(2))
    res = field_of_definition(diag([r] * 4, r), f)
    assert not res.extended and res.multiplier == 2


def test_canonical_gluing_needs_sqrt_of_product():
    f0 = standard_f0(3)
    f, target = orthogonal_sum(f0, DiagonalForm.of([1])), orthogonal_sum(f0, DiagonalForm.of([2]))
    one = ExtElement(1, 0, QQ(2))
    a = diag([one, one, one, ExtElement(0, Fraction(1, 2), QQ(2))], one)  # sqrt(1/2)
    res = field_of_definition(a, f, target=target)
    assert res.extended and res.generator == QQ(2) and res.multiplier == 1


def test_not_a_similitude():
    f = standard_f0(3)
    with pytest.raises(NotASimilitudeError):
        field_of_definition(diag([Fraction(1), Fraction(1), Fraction(2)], Fraction(1)), f)
    with pytest.raises(ValueError):
        field_of_definition(diag([Fraction(1)] * 2, Fraction(1)), f)


def test_reflection_case_is_flagged():
    # a = diag(1, .., 1, sqrt g) gives a^-1 sigma(a) = rho; it is a similitude of
    # <1,..,1, 1> onto <1,..,1, 1/g>
    g = QQ(3)
    one = ExtElement(1, 0, g)
    n = 3
    a = diag([one] * (n - 1) + [ExtElement.sqrt(g)], one)
    f = DiagonalForm.of([1] * n)
    target = DiagonalForm.of([1] * (n - 1) + [Fraction(1, 3)])
    res = field_of_definition(a, f, allow_reflection=True, target=target)
    assert res.extended and res.reflection
    assert not field_of_definition(a, f, target=target).reflection
    assert reflection_matrix(3) == ((1, 0, 0), (0, 1, 0), (0, 0, -1))


def test_multiquadratic_basics():
    k = MultiquadraticField.of(QQ, [2, 3])
    assert k.degree == 4 and k.contains_class(6) and not k.contains_class(5)
    assert k.adjoin(Fraction(6, 25)) is k
    assert k == MultiquadraticField.of(QQ, [6, 3]) == MultiquadraticField.of(QQ, [12, 18])
    assert k != MultiquadraticField.of(QQ, [2, 5])
    assert MultiquadraticField.of(QQ, [2]).is_subfield_of(k)
    with pytest.raises(ValueError):
        k.adjoin(0)


def test_rational_generators_are_canonical():
    a = MultiquadraticField.of(QQ, [6, 3])
    b = MultiquadraticField.of(QQ, [3, 2])
    assert a.generators == b.generators
    assert a.to_json() == b.to_json()


@pytest.mark.parametrize(
    "values",
    [[2, 3, 6], [65, 85], [5, 13, 17], [-1, 2, -2], [Fraction(3, 7), 21, 5, 15], [4, 9], [30, 42, 35]],
)
def test_rational_degree_matches_oracles(values):
    k = MultiquadraticField.of(QQ, values)
    assert k.degree == rational_degree_oracle(values) == brute_force_degree(QQ, values)


def test_sqrt2_base_degree():
    base = QSQRT2
    vals = [QuadElement(3, 0, base), QuadElement(3, 1, base), QuadElement(9, 3, base)]
    k = MultiquadraticField.of(base, vals)
    # 9 + 3 sqrt2 = 3 (3 + sqrt2), a product of the first two
    assert k.degree == 4 == brute_force_degree(base, vals)
    assert MultiquadraticField.of(base, [SQRT2 * SQRT2]).degree == 1
    assert MultiquadraticField.of(base, [QuadElement(3, 2, base)]).degree == 1  # (1 + sqrt2)^2


def test_compositum():
    a = MultiquadraticField.of(QQ, [2])
    b = MultiquadraticField.of(QQ, [3, 6])
    assert a.compositum(b) == MultiquadraticField.of(QQ, [2, 3])
    with pytest.raises(ValueError):
        a.compositum(MultiquadraticField.of(QSQRT2, []))
