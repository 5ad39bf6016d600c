"""Seeded random generators for terms, transition systems, chains and maps.

All generators take a ``random.Random`` (or a seed) and are deterministic in
it, so hypothesis can drive them through an integer seed strategy.
"""

from __future__ import annotations

import random
from fractions import Fraction
from typing import Sequence

import numpy as np

from .fractal import Interpretation
from .lts import Lmc, Lts
from .terms import Choice, Mu, Node, Prefix, Sum, Var, check_well_formed, size

__all__ = [
    "random_term",
    "random_pterm",
    "random_lts",
    "random_lmc",
    "random_lmc_pair",
    "random_interpretation",
    "random_weights",
]

ACTIONS = ("a", "b", "c", "d")
_PROBS = (Fraction(1, 2), Fraction(1, 3), Fraction(2, 3), Fraction(1, 4), Fraction(3, 4), Fraction(2, 5))


def _rng(seed) -> random.Random:
    return seed if isinstance(seed, random.Random) else random.Random(seed)


class _TermGen:
    def __init__(self, rng: random.Random, actions: Sequence[str], probabilistic: bool):
        self.rng = rng
        self.actions = tuple(actions)
        self.prob = probabilistic

    @staticmethod
    def min_size(bound: list[str], guarded: list[str]) -> int:
        if guarded:
            return 1  # a variable
        if bound:
            return 2  # a.v
        return 3  # mu v. a.v

    def term(self, budget: int, bound: list[str], guarded: list[str]) -> Node:
        rng = self.rng
        if guarded and (budget <= 1 or rng.random() < 0.25):
            return Var(rng.choice(guarded))
        if not bound:
            return self.mu(budget, bound, guarded)
        kinds = ["prefix"]
        if budget >= 1 + 2 * self.min_size(bound, guarded):
            kinds += ["sum", "sum"]
        if budget >= 3 + len(bound) and rng.random() < 0.3:
            kinds.append("mu")
        kind = rng.choice(kinds)
        if kind == "prefix":
            return Prefix(rng.choice(self.actions), self.term(budget - 1, bound, list(bound)))
        if kind == "mu":
            return self.mu(budget, bound, guarded)
        lo = self.min_size(bound, guarded)
        left = rng.randint(lo, budget - 1 - lo)
        lt = self.term(left, bound, guarded)
        rt = self.term(budget - 1 - size(lt), bound, guarded)
        if self.prob:
            return Choice(lt, rng.choice(_PROBS), rt)
        return Sum(lt, rt)

    def mu(self, budget: int, bound: list[str], guarded: list[str]) -> Node:
        name = f"v{len(bound)}"
        body = self.term(max(budget - 1, 2), bound + [name], guarded)
        return Mu.bind(name, body)


def random_term(seed, max_size: int = 30, actions: Sequence[str] = ACTIONS[:3]) -> Node:
    """A closed guarded term built from prefix, sum, recursion and variables."""
    rng = _rng(seed)
    e = _TermGen(rng, actions, False).term(rng.randint(3, max_size), [], [])
    check_well_formed(e)
    assert size(e) <= max_size
    return e


def random_pterm(seed, max_size: int = 30, actions: Sequence[str] = ACTIONS[:2]) -> Node:
    """Like :func:`random_term` with probabilistic choice in place of sums."""
    rng = _rng(seed)
    e = _TermGen(rng, actions, True).term(rng.randint(3, max_size), [], [])
    check_well_formed(e)
    assert size(e) <= max_size
    return e


def random_lts(seed, max_states: int = 6, max_actions: int = 4, max_out: int = 2) -> Lts:
    """A productive LTS: every state has between 1 and ``max_out`` edges."""
    rng = _rng(seed)
    n = rng.randint(1, max_states)
    alphabet = ACTIONS[: rng.randint(1, max_actions)]
    edges = []
    for i in range(n):
        for _ in range(rng.randint(1, max_out)):
            edges.append((i, rng.choice(alphabet), rng.randrange(n)))
    return Lts.from_edges(n, edges)


def random_weights(rng: random.Random, k: int, denominator: int = 6) -> list[Fraction]:
    """``k`` positive rationals with the given denominator summing to 1."""
    denominator = max(denominator, k)
    cuts = sorted(rng.sample(range(1, denominator), k - 1))
    bounds = [0, *cuts, denominator]
    return [Fraction(bounds[i + 1] - bounds[i], denominator) for i in range(k)]


def random_lmc(seed, max_states: int = 5, alphabet: Sequence[str] = ("a", "b"), max_out: int = 3) -> Lmc:
    rng = _rng(seed)
    n = rng.randint(1, max_states)
    rows = []
    for _ in range(n):
        keys = list({(rng.choice(alphabet), rng.randrange(n)) for _ in range(rng.randint(1, max_out))})
        keys.sort()
        rows.append(dict(zip(keys, random_weights(rng, len(keys), rng.choice((2, 3, 4, 6))))))
    return Lmc.from_weights(rows)


def _split_state(m: Lmc, rng: random.Random) -> Lmc:
    """Duplicate one state and share its incoming weight between the copies.

    Trace measures are unchanged, but the chain is no longer isomorphic.
    """
    n = len(m)
    victim = rng.randrange(n)
    rows = []
    for row in m.out:
        new: dict[tuple[str, int], Fraction] = {}
        for (a, j), p in row:
            if j == victim:
                share = p * rng.choice((Fraction(1, 2), Fraction(1, 3), Fraction(1)))
                for key, w in (((a, j), share), ((a, n), p - share)):
                    if w:
                        new[key] = new.get(key, Fraction(0)) + w
            else:
                new[(a, j)] = new.get((a, j), Fraction(0)) + p
        rows.append(new)
    rows.append(dict(rows[victim]))
    perm = list(range(n + 1))
    rng.shuffle(perm)
    inv = {old: new for new, old in enumerate(perm)}
    shuffled = [None] * (n + 1)
    for old, row in enumerate(rows):
        shuffled[inv[old]] = {(a, inv[j]): p for (a, j), p in row.items()}
    return Lmc.from_weights(shuffled, root=inv[m.root])


def _perturb(m: Lmc, rng: random.Random) -> Lmc:
    """Move weight between two edges of one state (may or may not change the measure)."""
    rows = [dict(row) for row in m.out]
    candidates = [i for i, r in enumerate(rows) if len(r) >= 2]
    if not candidates:
        return m
    i = rng.choice(candidates)
    k1, k2 = rng.sample(sorted(rows[i]), 2)
    delta = min(rows[i][k1], Fraction(1, 12))
    rows[i][k1] -= delta
    rows[i][k2] += delta
    return Lmc.from_weights(rows, root=m.root)


def random_lmc_pair(seed, max_states: int = 5, alphabet: Sequence[str] = ("a", "b")) -> tuple[Lmc, int, Lmc, int]:
    """Two chains with roots, a mix of equivalent, nearly equivalent and unrelated pairs."""
    rng = _rng(seed)
    m1 = random_lmc(rng, max_states, alphabet)
    kind = rng.randrange(3)
    if kind == 0 and len(m1) < max_states:
        m2 = _split_state(m1, rng)
    elif kind == 1:
        m2 = _perturb(m1, rng)
    else:
        m2 = random_lmc(rng, max_states, alphabet)
    return m1, m1.root, m2, m2.root


def random_interpretation(seed, actions: Sequence[str], dim: int = 2, coeff: tuple[float, float] = (0.2, 0.8)) -> Interpretation:
    """Random affine contractions; each linear part is scaled to a random norm in ``coeff``."""
    rng = _rng(seed)
    gen = np.random.default_rng(rng.getrandbits(64))
    maps = {}
    for a in actions:
        lin = gen.normal(size=(dim, dim))
        norm = float(np.linalg.norm(lin, 2)) or 1.0
        lin = lin / norm * rng.uniform(*coeff)
        off = gen.uniform(-1.0, 1.0, size=dim)
        maps[a] = (lin, off)
    return Interpretation.from_matrices(maps)

