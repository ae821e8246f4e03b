import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import element_to_dict, star_oracle
from so2deg.euler_ring import (
    UNIT,
    ZERO,
    EulerElement,
    NotInvertible,
    PartialEulerElement,
    TriState,
    add,
    invert,
    is_invertible,
    parse_element,
    partial_add,
    partial_is_nonzero,
    partial_sub,
    product,
    scalar_mul,
    star,
    sub,
)

coeff = st.integers(-50, 50)
elements = st.builds(
    EulerElement,
    coeff,
    st.dictionaries(st.integers(1, 12), coeff, max_size=5),
)
invertibles = st.builds(
    EulerElement,
    st.sampled_from([-1, 1]),
    st.dictionaries(st.integers(1, 12), coeff, max_size=5),
)


def test_star_matches_multiplication_table():
    a = EulerElement(2, {1: 3, 4: -1})
    b = EulerElement(-1, {1: 1, 2: 5})
    assert star(a, b) == EulerElement(-2, {1: -3 + 2, 2: 10, 4: 1})


@given(elements, elements)
def test_star_agrees_with_oracle(a, b):
    assert element_to_dict(star(a, b)) == star_oracle(element_to_dict(a), element_to_dict(b))


@given(elements, elements, elements)
def test_ring_axioms(a, b, c):
    assert add(a, b) == add(b, a)
    assert star(a, b) == star(b, a)
    assert star(star(a, b), c) == star(a, star(b, c))
    assert add(add(a, b), c) == add(a, add(b, c))
    assert star(a, add(b, c)) == add(star(a, b), star(a, c))
    assert star(UNIT, a) == a
    assert add(ZERO, a) == a
    assert sub(a, a) == ZERO


@given(invertibles)
def test_inverse(a):
    assert is_invertible(a)
    assert star(a, invert(a)) == UNIT


@given(elements)
def test_invertible_iff_unit_coordinate(a):
    if a.a0 in (-1, 1):
        assert star(a, invert(a)) == UNIT
    else:
        with pytest.raises(NotInvertible):
            invert(a)


def test_invert_examples():
    assert invert(EulerElement(-1, {1: 2})) == EulerElement(-1, {1: -2})
    with pytest.raises(NotInvertible):
        invert(EulerElement(2, {}))
    with pytest.raises(NotInvertible):
        invert(ZERO)


@given(elements, st.integers(-5, 5))
def test_scalar_mul_is_repeated_addition(a, g):
    acc = ZERO
    for _ in range(abs(g)):
        acc = add(acc, a) if g > 0 else sub(acc, a)
    assert scalar_mul(g, a) == acc


@given(elements)
def test_text_round_trip(a):
    assert parse_element(str(a)) == a


def test_text_format():
    assert str(EulerElement(0, {1: 1})) == "(0; 1:1)"
    assert str(UNIT) == "(1;)"
    assert EulerElement(0, {3: 0}).is_zero()


def test_product_of_empty_is_unit():
    assert product([]) == UNIT


@given(elements, elements)
def test_operator_overloads(a, b):
    assert a + b == add(a, b)
    assert a - b == sub(a, b)
    assert a * b == star(a, b)


def test_partial_arithmetic_tracks_unknowns():
    a = PartialEulerElement({0: -1}, unknown={1})
    b = PartialEulerElement.from_element(EulerElement(1, {1: 1, 2: 3}))
    s = partial_add(a, b)
    assert s.get(0) == 0
    assert s.get(1) is None
    assert s.get(2) == 3
    assert partial_is_nonzero(s) is TriState.YES
    d = partial_sub(b, b)
    assert partial_is_nonzero(d) is TriState.NO
    only_unknown = partial_sub(a, PartialEulerElement({0: -1}))
    assert partial_is_nonzero(only_unknown) is TriState.UNDETERMINED


def test_partial_unknown_tail():
    a = PartialEulerElement({0: 0}, tail_known_zero=False)
    assert a.get(7) is None
    assert partial_is_nonzero(a) is TriState.UNDETERMINED
    assert not a.is_fully_known()


@given(elements, elements)
def test_partial_agrees_with_exact(a, b):
    pa, pb = PartialEulerElement.from_element(a), PartialEulerElement.from_element(b)
    assert partial_add(pa, pb).to_element() == add(a, b)
    assert partial_sub(pa, pb).to_element() == sub(a, b)
    expected = TriState.NO if sub(a, b).is_zero() else TriState.YES
    assert partial_is_nonzero(partial_sub(pa, pb)) is expected


@settings(max_examples=50)
@given(st.lists(elements, max_size=6))
def test_product_is_order_free(xs):
    assert product(xs) == product(reversed(xs))


def test_listed_examples():
    assert scalar_mul(1, EulerElement(4, {2: 1})) == EulerElement(4, {2: 1})
    assert scalar_mul(-2, EulerElement(1, {1: 3})) == EulerElement(-2, {1: -6})
    assert is_invertible(UNIT) and not is_invertible(ZERO)
    assert is_invertible(EulerElement(-1, {7: 4}))
    assert invert(UNIT) == UNIT
    assert invert(EulerElement(1, {2: 5})) == EulerElement(1, {2: -5})
    assert invert(EulerElement(-1, {1: 3})) == EulerElement(-1, {1: -3})
    three = PartialEulerElement({0: 0, 1: 3})
    assert partial_sub(three, three).get(1) == 0
    assert partial_sub(PartialEulerElement({2: 1}), PartialEulerElement({}, unknown={2})).get(2) is None
    mostly_unknown = PartialEulerElement({1: -1}, unknown={0}, tail_known_zero=False)
    assert partial_is_nonzero(mostly_unknown) is TriState.YES


@given(elements)
def test_zero_absorbs(a):
    assert star(ZERO, a) == ZERO


@given(elements, elements, st.sets(st.integers(0, 12), max_size=3))
def test_partial_refinement_is_monotone(a, b, hidden):
    pa = PartialEulerElement.from_element(a)
    masked = PartialEulerElement({k: v for k, v in pa.known.items() if k not in hidden}, unknown=hidden)
    coarse = partial_add(masked, PartialEulerElement.from_element(b))
    fine = partial_add(pa, PartialEulerElement.from_element(b))
    for k in range(13):
        if coarse.get(k) is not None:
            assert coarse.get(k) == fine.get(k)


def test_big_integers_do_not_overflow():
    big = EulerElement(1, {1: 10**30})
    assert star(big, big).torus[1] == 2 * 10**30
