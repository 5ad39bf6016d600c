from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from fractlang.generate import random_pterm, random_term
from fractlang.lts import (
    Lmc,
    StateBudgetExceeded,
    step,
    step_prob,
    underlying_lts,
    unfold,
    unfold_prob,
)
from fractlang.terms import Choice, Prefix, parse_pterm, parse_term, unfold_mu

seeds = st.integers(0, 2**32 - 1)

E1 = "mu w. mu v. (a1.a2.v + a1.a3.w)"
E2 = "mu v. a1.(a2.v + a3.v)"


def test_step_prefix():
    e = parse_term("mu v. b.v")
    assert step(Prefix("a", e)) == [("a", e)]


def test_step_unroll_e1():
    e1 = parse_term(E1)
    f1 = parse_term(f"mu v. (a1.a2.v + a1.a3.({E1}))")
    assert set(step(e1)) == {("a1", Prefix("a2", f1)), ("a1", Prefix("a3", e1))}


def test_step_loop():
    e = parse_term("mu v. a.v")
    assert step(e) == [("a", e)]


def test_step_prob_prefix_and_idempotence():
    e = parse_pterm("mu v. (a.v +[1/3] b.v)")
    assert step_prob(Prefix("a", e)) == {("a", e): 1}
    assert step_prob(Choice(e, Fraction(1, 2), e)) == step_prob(e)


def test_step_prob_loop():
    e = parse_pterm("mu v. (a.v +[1/3] b.v)")
    assert step_prob(e) == {("a", e): Fraction(1, 3), ("b", e): Fraction(2, 3)}


def test_step_prob_merges_duplicates():
    e = parse_pterm("mu v. (a.v +[1/3] a.v)")
    assert step_prob(e) == {("a", e): 1}


def test_zero_weight_edges_dropped():
    e = parse_pterm("mu v. (a.v +[1] b.v)")
    m = unfold_prob(e)
    assert underlying_lts(m).edges == [(0, "a", 0)]


def test_unfold_unroll_pair():
    l1 = unfold(parse_term(E1))
    assert (len(l1), len(l1.edges)) == (4, 6)
    l2 = unfold(parse_term(E2))
    assert (len(l2), len(l2.edges)) == (2, 3)
    assert {(a, j) for i, a, j in l2.edges if i == 1} == {("a2", 0), ("a3", 0)}


def test_unfold_loop():
    lts = unfold(parse_term("mu v. a.v"))
    assert lts.edges == [(0, "a", 0)]


def test_dump_is_deterministic():
    e = parse_term(E1)
    assert unfold(e).dump() == unfold(parse_term(E1)).dump()
    assert unfold(e).dump().splitlines()[0] == "state 0 mu v0. mu v1. a1.a2.v1 + a1.a3.v0"


def test_state_budget():
    with pytest.raises(StateBudgetExceeded):
        unfold(parse_term(E1), max_states=2)


def test_lmc_rows_must_sum_to_one():
    with pytest.raises(ValueError):
        Lmc.from_weights([{("a", 0): Fraction(1, 2)}])


@given(seeds)
def test_unfolded_lts_is_productive_and_reachable(seed):
    lts = unfold(random_term(seed))
    assert lts.is_productive()
    assert lts.reachable() == set(range(len(lts)))


@given(seeds)
def test_unfolded_lmc_rows_are_distributions(seed):
    m = unfold_prob(random_pterm(seed))
    for row in m.out:
        assert row
        assert sum(p for _, p in row) == 1
        assert all(p > 0 for _, p in row)


@given(seeds)
def test_step_of_mu_is_step_of_unfolding(seed):
    e = random_term(seed)
    assert set(step(e)) == set(step(unfold_mu(e)))
    p = random_pterm(seed)
    assert step_prob(p) == step_prob(unfold_mu(p))
