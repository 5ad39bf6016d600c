import itertools
import random
from fractions import Fraction

import numpy as np
import pytest
from scipy.spatial import cKDTree
from hypothesis import given, strategies as st

from fractlang.fractal import Interpretation, UnknownAction, solve
from fractlang.generate import random_lmc, random_lmc_pair, random_pterm
from fractlang.lts import Lmc, underlying_lts, unfold_prob
from fractlang.measure import (
    WeightedAutomaton,
    measure_table,
    sample_measure,
    trace_measure,
    tzeng_equiv,
)
from fractlang.terms import Choice, Prefix, parse_pterm, unfold_mu

seeds = st.integers(0, 2**32 - 1)


def chain(text):
    return unfold_prob(parse_pterm(text))


COIN3 = "mu v. (a.v +[1/3] b.v)"
COIN2 = "mu v. (a.v +[1/2] b.v)"


def test_cylinder_examples():
    m = chain(COIN3)
    assert trace_measure(m, 0, "a") == Fraction(1, 3)
    assert trace_measure(m, 0, "ab") == Fraction(2, 9)
    assert trace_measure(m, 0, "") == 1


def test_absent_action_has_measure_zero():
    m = chain("mu v. (a.v +[1/2] a.a.v)")
    assert trace_measure(m, 0, "ab") == 0
    with pytest.raises(UnknownAction):
        trace_measure(m, 0, "ab", strict=True)


def test_weighted_automaton_is_stochastic():
    assert WeightedAutomaton.from_lmc(chain(COIN3)).stochastic()


def test_self_mixture_equivalent():
    e = parse_pterm(COIN3)
    assert tzeng_equiv(unfold_prob(e), 0, unfold_prob(Choice(e, Fraction(1, 2), e)), 0) == (True, None)


def test_coins_differ_at_a():
    m2, m3 = chain(COIN2), chain(COIN3)
    ok, w = tzeng_equiv(m2, 0, m3, 0)
    assert (ok, w) == (False, ("a",))
    assert trace_measure(m2, 0, w) != trace_measure(m3, 0, w)


def test_alpha_variants_equivalent():
    assert tzeng_equiv(chain(COIN3), 0, chain("mu w. (a.w +[1/3] b.w)"), 0)[0]


def test_deep_difference_found():
    # agree on every word of length <= 2, differ on length 3
    m1 = chain("mu v. a.a.(a.v +[1/2] b.v)")
    m2 = chain("mu v. a.a.(a.v +[1/3] b.v)")
    ok, w = tzeng_equiv(m1, 0, m2, 0)
    assert not ok and len(w) == 3


@given(seeds)
def test_additivity(seed):
    m = random_lmc(seed)
    table = measure_table(m, 5, ("a", "b"))
    for (x, w), p in table.items():
        if len(w) < 5:
            assert p == table[(x, w + ("a",))] + table[(x, w + ("b",))]
        if not w:
            assert p == 1


def words(depth, alphabet=("a", "b")):
    for n in range(depth + 1):
        yield from itertools.product(alphabet, repeat=n)


@given(seeds)
def test_prefix_recursion(seed):
    e = random_pterm(seed, max_size=16)
    m_e, m_ae = unfold_prob(e), unfold_prob(Prefix("a", e))
    for u in words(3):
        assert trace_measure(m_ae, 0, ("a",) + u) == trace_measure(m_e, 0, u)
        assert trace_measure(m_ae, 0, ("b",) + u) == 0


@given(seeds)
def test_choice_recursion(seed):
    rng = random.Random(seed)
    e1, e2 = random_pterm(rng, max_size=12), random_pterm(rng, max_size=12)
    r = Fraction(rng.randint(0, 6), 6)
    m1, m2, mix = unfold_prob(e1), unfold_prob(e2), unfold_prob(Choice(e1, r, e2))
    for w in words(3):
        assert trace_measure(mix, 0, w) == r * trace_measure(m1, 0, w) + (1 - r) * trace_measure(m2, 0, w)


@given(seeds)
def test_unfolding_recursion(seed):
    e = random_pterm(seed, max_size=16)
    m, u = unfold_prob(e), unfold_prob(unfold_mu(e))
    for w in words(3):
        assert trace_measure(m, 0, w) == trace_measure(u, 0, w)


def _brute_equal(m1, x1, m2, x2, depth):
    alphabet = sorted(set(m1.alphabet) | set(m2.alphabet))
    return all(trace_measure(m1, x1, w) == trace_measure(m2, x2, w) for w in words(depth, alphabet))


@given(seeds)
def test_tzeng_agrees_with_brute_force(seed):
    m1, x1, m2, x2 = random_lmc_pair(seed)
    ok, w = tzeng_equiv(m1, x1, m2, x2)
    assert ok == _brute_equal(m1, x1, m2, x2, len(m1) + len(m2))
    if not ok:
        assert trace_measure(m1, x1, w) != trace_measure(m2, x2, w)


# -- the measure equation on dyadic boxes of [0, 1] -------------------------------------

HALF = {"a": Fraction(0), "b": Fraction(1, 2)}  # sigma_x(t) = t/2 + HALF[x]


def box_of(word):
    lo, width = Fraction(0), Fraction(1)
    for a in word:
        width /= 2
        lo += width * (0 if a == "a" else 1)
    return lo, lo + width


def word_of(lo, hi):
    """Inverse of box_of on dyadic boxes; None for the empty box."""
    lo, hi = max(lo, Fraction(0)), min(hi, Fraction(1))
    if hi <= lo:
        return None
    for w in words(8):
        if box_of(w) == (lo, hi):
            return w
    raise AssertionError(f"not a dyadic box: {lo}, {hi}")


def preimage(a, box):
    lo, hi = box
    return 2 * (lo - HALF[a]), 2 * (hi - HALF[a])


@pytest.mark.parametrize("text", [COIN3, "mu v. (a.b.v +[1/4] b.(a.v +[2/3] b.b.v))"])
def test_measure_equation_on_boxes(text):
    m = chain(text)
    for x in range(len(m)):
        for w in words(4):
            if not w:
                continue
            rhs = Fraction(0)
            for (a, y), r in m.out[x]:
                pre = word_of(*preimage(a, box_of(w)))
                if pre is not None:
                    rhs += r * trace_measure(m, y, pre)
            assert trace_measure(m, x, w) == rhs


# -- sampling -----------------------------------------------------------------------------


@pytest.fixture(scope="module")
def gasket_maps(fixtures_dir):
    return Interpretation.load(fixtures_dir / "gasket.interp")


@pytest.fixture(scope="module")
def interval_maps(fixtures_dir):
    return Interpretation.load(fixtures_dir / "interval.interp")


def test_deterministic_walk_hits_fixed_point(gasket_maps):
    pts = sample_measure(chain("mu v. a.v"), 0, gasket_maps, 40, 50, seed=3)
    assert np.allclose(pts, [0.5, np.sqrt(3) / 2], atol=1e-9)


def test_fixed_seed_reproducible(interval_maps):
    m = chain(COIN2)
    a = sample_measure(m, 0, interval_maps, 30, 1000, seed=11)
    assert a.tobytes() == sample_measure(m, 0, interval_maps, 30, 1000, seed=11).tobytes()
    assert a.tobytes() != sample_measure(m, 0, interval_maps, 30, 1000, seed=12).tobytes()


def test_samples_keyed_by_index(interval_maps):
    m = chain(COIN3)
    many = sample_measure(m, 0, interval_maps, 20, 500, seed=5)
    few = sample_measure(m, 0, interval_maps, 20, 40, seed=5)
    assert np.array_equal(many[:40], few)


def test_cylinder_frequencies(interval_maps):
    m = chain("mu v. (a.v +[1/3] b.(a.v +[1/2] b.v))")
    pts = sample_measure(m, 0, interval_maps, 25, 40000, seed=1)[:, 0]
    for w in words(2):
        if not w:
            continue
        lo, hi = box_of(w)
        freq = np.mean((pts >= float(lo)) & (pts < float(hi)))
        p = float(trace_measure(m, 0, w))
        assert abs(freq - p) <= 4 * np.sqrt(p * (1 - p) / len(pts)) + 1e-12


def test_samples_lie_on_the_support(gasket_maps):
    text = "mu v. (a.v +[1/3] (b.(b.v +[1/2] c.v) +[1/2] c.(b.v +[1/2] c.v)))"
    m = chain(text)
    sv = solve(underlying_lts(m), gasket_maps, 8)
    pts = sample_measure(m, 0, gasket_maps, 8, 2000, seed=2)
    d, _ = cKDTree(sv[0].points).query(pts)
    assert d.max() <= sv[0].guarantee + 1e-9


def test_sample_arguments_checked(interval_maps):
    with pytest.raises(ValueError):
        sample_measure(chain(COIN2), 0, interval_maps, 0, 10, seed=0)


def test_lmc_root_other_than_zero():
    m = Lmc.from_weights([{("a", 1): Fraction(1)}, {("b", 1): Fraction(1)}])
    assert trace_measure(m, 1, "bb") == 1
    assert tzeng_equiv(m, 1, chain("mu v. b.v"), 0)[0]
