from fractions import Fraction

import pytest

from oracles import (
    delta_is_square_mod_prime,
    hasse_oracle,
    hilbert_brute,
    legendre_enum,
    split_primes_oracle,
)
from traceforge.arith import QuadElement
from traceforge.forms import DiagonalForm, scale_form, standard_f0
from traceforge.local import (
    QSQRT2,
    REAL,
    Place,
    QuadPrime,
    classify_prime_zsqrt2,
    find_split_primes,
    hasse_invariant,
    hasse_profile,
    hilbert_symbol,
    legendre,
    prime_of_element,
    relevant_places,
    scaled_hasse_formula,
    splits_in_sqrt_ext,
    totally_positive_generator,
)

SQRT2 = QSQRT2.sqrt_m()


def test_legendre_examples():
    assert legendre(2, 7) == 1
    assert legendre(-1, 5) == 1
    assert legendre(3, 7) == -1 == legendre_enum(3, 7)
    assert legendre(14, 7) == 0


@pytest.mark.parametrize("p", [2, 9, 15, 1])
def test_legendre_rejects_bad_modulus(p):
    with pytest.raises(ValueError):
        legendre(3, p)


@pytest.mark.parametrize("p", [3, 5, 7, 11, 13, 31])
def test_legendre_matches_enumeration(p):
    assert [legendre(a, p) for a in range(-p, 2 * p)] == [legendre_enum(a, p) for a in range(-p, 2 * p)]


def test_hilbert_examples():
    assert hilbert_symbol(3, -3, 3) == 1
    assert hilbert_symbol(2, 2, REAL) == 1
    assert hilbert_symbol(-1, -1, 2) == -1 == hilbert_brute(-1, -1, 2)
    assert hilbert_symbol(-1, -1, REAL) == -1
    with pytest.raises(ValueError):
        hilbert_symbol(0, 3, 5)


@pytest.mark.parametrize("a", [1, 3, 5, 7])
@pytest.mark.parametrize("b", [1, 3, 5, 7])
def test_hilbert_at_2_unit_pairs_mod_2_8(a, b):
    assert hilbert_symbol(a, b, 2) == hilbert_brute(a, b, 2, k=8)


@pytest.mark.parametrize("p", [2, 3, 5, 7])
def test_hilbert_table_against_brute_force(p):
    reps = [1, -1, 2, -2, 3, -3, 5, 6, -7, 10, 14, Fraction(3, 4), Fraction(-5, 9)]
    for a in reps:
        for b in reps:
            assert hilbert_symbol(a, b, p) == hilbert_brute(a, b, p), (a, b, p)


def test_place_parsing_and_order():
    assert Place.parse("inf") == REAL and Place.parse("5") == Place(5)
    assert str(REAL) == "inf"
    assert sorted([Place(5), REAL, Place(2)]) == [REAL, Place(2), Place(5)]
    with pytest.raises(ValueError):
        Place(6)


def test_relevant_places():
    assert relevant_places([3, Fraction(-5, 7)]) == [REAL, Place(2), Place(3), Place(5), Place(7)]


def test_hasse_examples():
    assert all(hasse_invariant([1, 1, 1], v) == 1 for v in (REAL, 2, 3, 5))
    f6 = standard_f0(6)
    for a in (2, 3, 7, Fraction(5, 11)):
        for p in (2, 3, 5, 7, 11):
            assert hasse_invariant(scale_form(a, f6), p) == 1
    f4 = scale_form(3, standard_f0(4))
    assert hasse_invariant(f4, 3) == -1 == hasse_oracle([-3, 3, 3, 3], 3)


def test_hasse_rejects_degenerate():
    with pytest.raises(ValueError):
        hasse_invariant([1, 0, 2], 3)


def test_scaled_formula_examples():
    assert scaled_hasse_formula(5, 4, 5) == 1
    assert scaled_hasse_formula(3, 4, 3) == -1
    for a in (2, 3, 6, Fraction(7, 5), 30):
        for n in (6, 10):
            assert all(scaled_hasse_formula(a, n, v) == 1 for v in (REAL, 2, 3, 5, 7))


def test_profile_examples():
    assert hasse_profile(DiagonalForm.of([1, 1])).to_json() == {
        "rank": 2, "signature": [2, 0], "disc": 1, "eps_minus_one": []}
    assert hasse_profile(standard_f0(7)).to_json() == {
        "rank": 7, "signature": [6, 1], "disc": -1, "eps_minus_one": []}
    # minus places frozen from the pairwise brute-force oracle: eps_2 = eps_3 = -1
    entries = [3, -1, 1, 1, 1]
    prof = hasse_profile(DiagonalForm.of(entries))
    assert prof.to_json() == {"rank": 5, "signature": [4, 1], "disc": -3, "eps_minus_one": ["2", "3"]}
    assert [p for p in (0, 2, 3) if hasse_oracle(entries, p) == -1] == [2, 3]


def test_classify_primes():
    seven = classify_prime_zsqrt2(7)
    assert [p.splitting_type for p in seven] == ["split", "split"]
    assert sorted(p.residue_map for p in seven) == [3, 4]
    for p in seven:
        assert abs(p.pi.norm()) == 7 and (p.residue_map**2 - 2) % 7 == 0
    (five,) = classify_prime_zsqrt2(5)
    assert five.splitting_type == "inert" and five.pi == QuadElement(5, 0, QSQRT2)
    (two,) = classify_prime_zsqrt2(2)
    assert two.splitting_type == "ramified" and two.pi == SQRT2


@pytest.mark.parametrize("p", [3, 5, 7, 11, 13, 17, 19, 23, 31, 41, 47])
def test_classification_by_residue_mod_8(p):
    kinds = {prime.splitting_type for prime in classify_prime_zsqrt2(p)}
    assert kinds == ({"split"} if p % 8 in (1, 7) else {"inert"})


def test_quad_prime_validation():
    QuadPrime(QuadElement(3, 1, QSQRT2), 7, "split", 4)
    with pytest.raises(ValueError):
        QuadPrime(QuadElement(3, 1, QSQRT2), 7, "split", 3)  # 3 + 3 != 0 mod 7
    with pytest.raises(ValueError):
        QuadPrime(QuadElement(3, 1, QSQRT2), 7, "split", 5)  # 5^2 != 2 mod 7
    with pytest.raises(ValueError):
        QuadPrime(QuadElement(3, 1, QSQRT2), 7, "inert", None)  # 7 = -1 mod 8
    with pytest.raises(ValueError):
        QuadPrime(QuadElement(3, 0, QSQRT2), 7, "split", 4)  # norm 9
    with pytest.raises(ValueError):
        QuadPrime(QuadElement(5, 0, QSQRT2), 5, "inert", 1)


def test_splitting_examples_above_7():
    by_t = {p.residue_map: p for p in classify_prime_zsqrt2(7)}
    assert splits_in_sqrt_ext(by_t[3], -SQRT2) is True
    assert splits_in_sqrt_ext(by_t[4], -SQRT2) is False
    assert delta_is_square_mod_prime(7, 3, -1) and not delta_is_square_mod_prime(7, 4, -1)


def test_square_residue_always_splits():
    for prime in classify_prime_zsqrt2(17):
        assert splits_in_sqrt_ext(prime, QuadElement(4, 0, QSQRT2))


def test_splitting_rejects_characteristic_2():
    (two,) = classify_prime_zsqrt2(2)
    with pytest.raises(ValueError):
        splits_in_sqrt_ext(two, SQRT2)


@pytest.mark.parametrize("p", [3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 41])
@pytest.mark.parametrize("sign", [1, -1])
def test_splitting_matches_residue_field_exhaustion(p, sign):
    for prime in classify_prime_zsqrt2(p):
        assert splits_in_sqrt_ext(prime, sign * SQRT2) == delta_is_square_mod_prime(
            p, prime.residue_map, sign)


@pytest.mark.parametrize("p", [7, 17, 23, 31, 41, 47])
def test_conjugate_residue_maps_swap_branches(p):
    a, b = classify_prime_zsqrt2(p)
    assert splits_in_sqrt_ext(a, SQRT2) == splits_in_sqrt_ext(b, -SQRT2)
    assert splits_in_sqrt_ext(a, -SQRT2) == splits_in_sqrt_ext(b, SQRT2)


def _key(sp):
    return (sp.prime.rational_prime, sp.prime.residue_map)


def test_first_split_prime_each_branch():
    # first entries frozen from the exhaustion oracle: the inert prime 3 for both
    for sign in (-1, 1):
        found = find_split_primes(sign * SQRT2, 1, 200)
        assert [_key(sp) for sp in found.primes] == split_primes_oracle(sign, 1, 200) == [(3, None)]
        assert not found.truncated


@pytest.mark.parametrize("sign", [-1, 1])
def test_split_prime_lists_match_oracle(sign):
    found = find_split_primes(sign * SQRT2, 6, 500)
    assert [_key(sp) for sp in found.primes] == split_primes_oracle(sign, 6, 500)


def test_split_prime_generators_are_totally_positive_and_generate():
    for sign in (-1, 1):
        for sp in find_split_primes(sign * SQRT2, 5, 500).primes:
            g = sp.generator
            assert g.sign() > 0 and g.conjugate().sign() > 0
            assert abs(g.norm()) == abs(sp.prime.pi.norm())
            assert prime_of_element(g) == sp.prime


def test_find_split_primes_count_zero_and_truncation():
    assert find_split_primes(SQRT2, 0, 100).primes == ()
    res = find_split_primes(SQRT2, 50, 60)
    assert res.truncated and 0 < len(res.primes) < 50


def test_find_split_primes_rejects_other_delta():
    with pytest.raises(ValueError):
        find_split_primes(QuadElement(3, 0, QSQRT2), 1, 100)


def test_totally_positive_generator_unit_search():
    g, k, sign = totally_positive_generator(QuadElement(1, 1, QSQRT2) * 3)
    assert g.sign() > 0 and g.conjugate().sign() > 0
    assert totally_positive_generator(QuadElement(3, 1, QSQRT2), window=range(0, 1)) is not None
