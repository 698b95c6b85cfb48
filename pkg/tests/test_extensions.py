import math
from itertools import combinations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sunflowerkit import (
    SetFamily,
    check_kappa_monotone,
    check_phase2,
    extend,
    iterated_extend,
    log_ratio,
    sparsity,
)

from .oracles import oracle_extension


def test_log_ratio_handles_empty():
    assert log_ratio(6, 0) == math.inf
    assert log_ratio(6, 6) == 0.0
    assert log_ratio(6, 3) == pytest.approx(math.log(2))


# [DERIVED] by tests/oracles.py::oracle_extension: the 3-sets of [4]
# containing {1,2} are exactly {1,2,3} and {1,2,4}
def test_extend_frozen_example():
    f = SetFamily.from_elements(4, 2, [[1, 2]])
    res = extend(f, 3)
    assert res.family.element_lists() == [[1, 2, 3], [1, 2, 4]]
    assert res.source_m == 2 and res.l == 3
    assert len(res) == 2
    assert [tuple(s) for s in res.family.element_lists()] == oracle_extension(4, [[1, 2]], 3)


def test_extend_unit_weights_and_bounds():
    f = SetFamily.from_elements(5, 2, [[1, 2], [3, 4]])
    res = extend(f, 4)
    assert res.family.weights is None
    assert res.family.m == 4
    assert extend(f, 2).family.element_lists() == f.element_lists()
    with pytest.raises(ValueError):
        extend(f, 1)
    with pytest.raises(ValueError):
        extend(f, 6)


def test_extend_strategies_agree():
    f = SetFamily.from_elements(8, 2, [[1, 2], [2, 3], [5, 8]])
    for l in (3, 5, 7):
        a = extend(f, l, strategy="closure")
        b = extend(f, l, strategy="filter")
        assert a.family == b.family


def test_extend_empty_family():
    f = SetFamily.from_elements(5, 2, [])
    assert len(extend(f, 4)) == 0


def test_iterated_extend_records_trail():
    f = SetFamily.from_elements(9, 1, [[2]])
    res = iterated_extend(f, 8)
    assert res.family.m == 8
    assert res.family == extend(f, 8).family
    # trail covers the source then each doubling hop 1 -> 2 -> 4 -> 8
    assert [l for l, _ in res.kappa_steps] == [1, 2, 4, 8]
    kappas = [k for _, k in res.kappa_steps]
    assert kappas == sorted(kappas, reverse=True)  # monotone along the trail


def test_kappa_check_frozen_example():
    f = SetFamily.from_elements(4, 2, [[1, 2]])
    chk = check_kappa_monotone(f, 3)
    assert chk.holds
    assert chk.kappa_source == pytest.approx(math.log(6))
    assert chk.kappa_extension == pytest.approx(math.log(2))
    assert chk.extension_size == 2


def test_phase2_frozen_example():
    # F = {{1,2}} in [4]: missing m-sets 5, Ext(F,4) = {[4]} so missing 2m-sets 0
    f = SetFamily.from_elements(4, 2, [[1, 2]])
    chk = check_phase2(f)
    assert chk.holds
    assert chk.missing_m == 5 and chk.missing_2m == 0
    assert chk.lhs == math.inf
    with pytest.raises(ValueError):
        check_phase2(SetFamily.from_elements(5, 3, [[1, 2, 3]]))  # needs 2m <= n


@st.composite
def random_uniform_family(draw):
    n = draw(st.integers(2, 10))
    m = draw(st.integers(1, min(4, n)))
    pool = list(combinations(range(1, n + 1), m))
    size = draw(st.integers(1, min(len(pool), 15)))
    idx = draw(st.permutations(range(len(pool))))
    return n, m, [pool[i] for i in idx[:size]]


@given(random_uniform_family(), st.data())
@settings(max_examples=100, deadline=None)
def test_kappa_never_increases_under_extension(case, data):
    n, m, sets = case
    f = SetFamily.from_elements(n, m, sets)
    l = data.draw(st.integers(m, n))
    chk = check_kappa_monotone(f, l)
    assert chk.holds
    res = extend(f, l)
    assert sparsity(res.family) <= sparsity(f) + 1e-12


@given(random_uniform_family())
@settings(max_examples=60, deadline=None)
def test_extension_matches_oracle(case):
    n, m, sets = case
    l = min(n, m + 2)
    res = extend(SetFamily.from_elements(n, m, sets), l)
    assert [tuple(s) for s in res.family.element_lists()] == oracle_extension(n, sets, l)
