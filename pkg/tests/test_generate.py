from hypothesis import given, strategies as st

from fractlang.generate import (
    random_interpretation,
    random_lmc,
    random_lmc_pair,
    random_lts,
    random_pterm,
    random_term,
    random_weights,
)
from fractlang.terms import check_well_formed, is_probabilistic, size

import random

seeds = st.integers(0, 2**32 - 1)


@given(seeds)
def test_terms_closed_guarded_and_small(seed):
    e = random_term(seed)
    check_well_formed(e)
    assert size(e) <= 30
    assert is_probabilistic(e) is not True


@given(seeds)
def test_pterms_use_choice_only(seed):
    e = random_pterm(seed)
    check_well_formed(e)
    assert is_probabilistic(e) is not False


@given(seeds)
def test_lts_shape(seed):
    lts = random_lts(seed)
    assert 1 <= len(lts) <= 6
    assert len(lts.alphabet) <= 4
    assert all(1 <= len(row) <= 2 for row in lts.out)


@given(seeds)
def test_lmc_shape(seed):
    m = random_lmc(seed)
    assert 1 <= len(m) <= 5
    assert set(m.alphabet) <= {"a", "b"}
    m1, x1, m2, x2 = random_lmc_pair(seed)
    assert 0 <= x2 < len(m2) <= 6


@given(seeds, st.integers(1, 5))
def test_weights_sum_to_one(seed, k):
    ws = random_weights(random.Random(seed), k)
    assert sum(ws) == 1 and all(w > 0 for w in ws)


@given(seeds)
def test_interpretations_are_contractions(seed):
    sigma = random_interpretation(seed, "abc", dim=2)
    assert 0.2 - 1e-9 <= sigma.max_coeff() <= 0.8 + 1e-9


def test_same_seed_same_output():
    assert random_term(7) == random_term(7)
    assert random_lmc(7) == random_lmc(7)
