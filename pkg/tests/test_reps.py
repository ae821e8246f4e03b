import pytest
from hypothesis import given
from hypothesis import strategies as st

from oracles import isotropy_oracle
from so2deg.reps import (
    ZERO_REP,
    SO2Rep,
    contains_mode,
    direct_sum,
    fixed_subspace,
    has_isotropy_exactly,
    is_nontrivial,
    isotropy_modes,
    parse_rep,
)

reps = st.builds(SO2Rep, st.dictionaries(st.integers(0, 24), st.integers(0, 4), max_size=6))


def test_dimension_counts_planes_twice():
    v = SO2Rep({0: 3, 1: 1, 4: 2})
    assert v.dimension == 3 + 2 + 4
    assert v[0] == 3 and v[4] == 2 and v[9] == 0


def test_text_form():
    v = SO2Rep({0: 1, 2: 3})
    assert str(v) == "R[1,0]+R[3,2]"
    assert parse_rep("R[1,0]+R[3,2]") == v
    assert parse_rep("0") == ZERO_REP


@given(reps)
def test_parse_round_trip(v):
    assert parse_rep(str(v)) == v


@given(reps, reps)
def test_direct_sum(a, b):
    s = direct_sum(a, b)
    assert s.dimension == a.dimension + b.dimension
    assert s == direct_sum(b, a)


@given(reps)
def test_fixed_subspace_and_triviality(v):
    assert fixed_subspace(v) == SO2Rep({0: v[0]})
    assert is_nontrivial(v) == any(k > 0 and v[k] > 0 for k in v.modes)


@given(reps)
def test_isotropy_against_subset_gcds(v):
    assert set(isotropy_modes(v)) == isotropy_oracle([k for k in v.modes if v[k] > 0])


def test_isotropy_examples():
    v = SO2Rep({4: 1, 6: 1})
    assert has_isotropy_exactly(v, 2)
    assert has_isotropy_exactly(v, 4)
    assert not has_isotropy_exactly(v, 3)
    assert contains_mode(v, 6) and not contains_mode(v, 2)
    with pytest.raises(ValueError):
        has_isotropy_exactly(v, 0)


def test_trivial_rep_has_no_isotropy_modes():
    assert isotropy_modes(SO2Rep({0: 5})) == frozenset()


def test_listed_examples():
    assert direct_sum(ZERO_REP, SO2Rep({2: 1})) == SO2Rep({2: 1})
    assert direct_sum(SO2Rep({0: 1}), SO2Rep({0: 1})) == SO2Rep({0: 2})
    assert direct_sum(SO2Rep({1: 1}), SO2Rep({1: 2}), SO2Rep({3: 1})) == SO2Rep({1: 3, 3: 1})
    assert fixed_subspace(SO2Rep({0: 3})) == SO2Rep({0: 3})
    assert fixed_subspace(SO2Rep({5: 2})) == ZERO_REP
    assert fixed_subspace(SO2Rep({0: 1, 1: 1})) == SO2Rep({0: 1})
    assert not is_nontrivial(SO2Rep({0: 4}))
    assert is_nontrivial(SO2Rep({1: 1})) and is_nontrivial(SO2Rep({0: 1, 2: 1}))
    assert contains_mode(SO2Rep({1: 1, 0: 1}), 1)
    assert not contains_mode(SO2Rep({0: 2}), 1)
    assert not contains_mode(SO2Rep({1: 1, 3: 2}), 2)
    assert has_isotropy_exactly(SO2Rep({2: 1}), 2)


@given(reps)
def test_fixed_iff_trivial(v):
    assert (fixed_subspace(v) == v) == (not is_nontrivial(v))


@given(reps, reps, reps)
def test_direct_sum_associative_with_identity(a, b, c):
    assert direct_sum(direct_sum(a, b), c) == direct_sum(a, direct_sum(b, c))
    assert direct_sum(a, ZERO_REP) == a
