import math
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sunflowerkit import SetFamily, gamma_check, link, norm, sparsity
from sunflowerkit.bitsets import mask_of

from .oracles import oracle_gamma, oracle_sparsity

C42 = SetFamily.complete(4, 2)


def test_construction_canonicalizes_order():
    f = SetFamily.from_elements(4, 2, [[3, 4], [1, 2]], weights=[7, 5])
    assert f.element_lists() == [[1, 2], [3, 4]]
    assert f.weight(mask_of([1, 2])) == 5
    assert f.weight(mask_of([3, 4])) == 7


def test_construction_rejects_bad_input():
    with pytest.raises(ValueError):
        SetFamily.from_elements(4, 2, [[1, 2], [1, 2]])  # duplicate member
    with pytest.raises(ValueError):
        SetFamily.from_elements(4, 2, [[1, 2], [1, 2, 3]])  # non-uniform
    with pytest.raises(ValueError):
        SetFamily.from_elements(4, 2, [[1, 5]])  # outside ground set
    with pytest.raises(ValueError):
        SetFamily.from_elements(4, 2, [[1, 2]], weights=[1, 2])  # length
    with pytest.raises(ValueError):
        SetFamily.from_elements(4, 2, [[1, 2]], weights=[-1])  # negative
    with pytest.raises(ValueError):
        SetFamily.from_elements(4, 2, [[1, 2]], weights=[True])  # bool


def test_complete_family_sizes():
    assert len(C42) == 6
    assert len(SetFamily.complete(5, 0)) == 1
    assert len(SetFamily.complete(6, 3)) == 20


def test_link_keeps_uniformity():
    sub = link(C42, mask_of([1]))
    assert sub.m == 2
    assert sub.element_lists() == [[1, 2], [1, 3], [1, 4]]
    assert len(link(C42, mask_of([1, 2, 3]))) == 0


def test_norm_dedupes_and_simplifies():
    f = SetFamily.from_elements(
        4, 2, [[1, 2], [3, 4]], weights=[Fraction(1, 2), Fraction(3, 2)]
    )
    val = norm(f, [mask_of([1, 2]), mask_of([1, 2]), mask_of([3, 4])])
    assert val == 2 and isinstance(val, int)  # whole Fractions collapse to int
    assert f.total_norm == 2


def test_sparsity_values():
    assert sparsity(C42) == 0.0
    tri = SetFamily.from_elements(4, 2, [[1, 2], [1, 3], [2, 3]])
    assert sparsity(tri) == pytest.approx(math.log(2))
    assert sparsity(tri) == pytest.approx(oracle_sparsity(4, 2, 3))
    empty = SetFamily.from_elements(4, 2, [])
    assert sparsity(empty) == math.inf


# [DERIVED] by tests/oracles.py::oracle_gamma on the complete 2-sets of [4]:
# b=1.9 passes with worst ratio 3*1.9/6 = 0.95; b=2.0 ties at S={1} and a tie
# violates, witness is the lex-smallest singleton
def test_gamma_frozen_example():
    rep = gamma_check(C42, 1.9)
    assert rep.holds and rep.witness is None
    assert rep.ratio == pytest.approx(0.95)
    assert rep.candidates_checked == 10

    rep2 = gamma_check(C42, 2.0)
    assert not rep2.holds
    assert rep2.witness_elements == (1,)
    assert rep2.ratio == pytest.approx(1.0)


def test_gamma_exact_rational_weights():
    # weights chosen so the float ratio would round the wrong way
    eps = Fraction(1, 10**18)
    f = SetFamily.from_elements(
        4, 2, [[1, 2], [3, 4]], weights=[Fraction(1, 2) + eps, Fraction(1, 2) - eps]
    )
    rep = gamma_check(f, 2)
    assert not rep.holds  # link{1} * b = (1/2+eps)*2 > 1 exactly
    assert rep.witness_elements == (1,)


def test_gamma_float_weights_use_float_path():
    f = SetFamily.from_elements(4, 2, [[1, 2], [3, 4]], weights=[0.5, 0.5])
    rep = gamma_check(f, 1.2)  # pair ratio 0.5 * 1.2^2 = 0.72, worst case
    assert rep.holds
    assert not f.is_exact


def test_gamma_errors():
    with pytest.raises(ValueError):
        gamma_check(C42, 0)
    with pytest.raises(ValueError):
        gamma_check(SetFamily.from_elements(4, 2, []), 2)
    with pytest.raises(ValueError):
        gamma_check(SetFamily.from_elements(4, 2, [[1, 2]], weights=[0]), 2)


def test_scaled_int_weights_overflow_falls_back():
    f = SetFamily.from_elements(4, 2, [[1, 2], [3, 4]], weights=[1 << 70, 1])
    assert f.scaled_int_weights() is None
    rep = gamma_check(f, 1.0000001)  # float path still runs
    assert not rep.holds


@st.composite
def small_families(draw):
    n = draw(st.integers(2, 8))
    m = draw(st.integers(1, min(4, n)))
    from itertools import combinations

    pool = list(combinations(range(1, n + 1), m))
    size = draw(st.integers(1, min(len(pool), 12)))
    idx = draw(st.permutations(range(len(pool))))
    sets = [pool[i] for i in idx[:size]]
    exact = draw(st.booleans())
    if exact:
        weights = draw(
            st.lists(
                st.fractions(min_value=0, max_value=4, max_denominator=8),
                min_size=size,
                max_size=size,
            )
        )
        if sum(weights) == 0:
            weights[0] = Fraction(1)
    else:
        weights = None
    b = draw(st.sampled_from([0.5, 1, 1.5, 2, 2.5, 3, 4]))
    return n, m, sets, weights, b


@given(small_families())
@settings(max_examples=120, deadline=None)
def test_gamma_matches_all_subsets_oracle(case):
    n, m, sets, weights, b = case
    fam = SetFamily.from_elements(n, m, sets, weights=weights)
    w = weights if weights is not None else [1] * len(sets)
    holds, witness, _ = oracle_gamma(n, sets, w, b)
    rep = gamma_check(fam, b)
    assert rep.holds == holds
    assert rep.witness_elements == witness
