"""Trace measures of labelled Markov chains.

The trace measure of a state on the cylinder of streams starting with
``w = a1...an`` is the total weight of the paths labelled ``w``.  In matrix
form, with ``M_a[x][y]`` the probability of ``x --a--> y``, it is
``e_x M_{a1} ... M_{an} 1``.  Everything here is exact (``Fraction``), except
the Monte Carlo sampler used for rendering.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .fractal import Interpretation, UnknownAction
from .lts import Lmc

__all__ = [
    "WeightedAutomaton",
    "trace_measure",
    "measure_table",
    "tzeng_equiv",
    "sample_measure",
    "sample_words",
]

Word = tuple[str, ...]


@dataclass(frozen=True)
class WeightedAutomaton:
    """Sparse rational matrices ``M_a`` of an LMC, rows as ``{target: weight}``."""

    size: int
    matrices: dict[str, tuple[dict[int, Fraction], ...]]

    @classmethod
    def from_lmc(cls, lmc: Lmc, alphabet: Iterable[str] = ()) -> "WeightedAutomaton":
        letters = set(lmc.alphabet) | set(alphabet)
        rows: dict[str, list[dict[int, Fraction]]] = {a: [dict() for _ in range(len(lmc))] for a in letters}
        for x, row in enumerate(lmc.out):
            for (a, y), p in row:
                rows[a][x][y] = rows[a][x].get(y, Fraction(0)) + p
        return cls(len(lmc), {a: tuple(r) for a, r in rows.items()})

    @classmethod
    def disjoint_union(cls, m1: Lmc, m2: Lmc) -> "WeightedAutomaton":
        """States of ``m2`` are shifted by ``len(m1)``."""
        w1 = cls.from_lmc(m1, m2.alphabet)
        w2 = cls.from_lmc(m2, m1.alphabet)
        n = w1.size
        mats = {
            a: w1.matrices[a] + tuple({y + n: p for y, p in row.items()} for row in w2.matrices[a])
            for a in w1.matrices
        }
        return cls(n + w2.size, mats)

    def step(self, vec: dict[int, Fraction], a: str) -> dict[int, Fraction]:
        """Row vector times ``M_a``."""
        try:
            mat = self.matrices[a]
        except KeyError:
            raise UnknownAction(a) from None
        out: dict[int, Fraction] = {}
        for x, vx in vec.items():
            for y, p in mat[x].items():
                out[y] = out.get(y, 0) + vx * p
        return {y: v for y, v in out.items() if v != 0}

    def stochastic(self) -> bool:
        return all(
            sum((sum(self.matrices[a][x].values(), Fraction(0)) for a in self.matrices), Fraction(0)) == 1
            for x in range(self.size)
        )


def trace_measure(lmc: Lmc, x: int, word: Sequence[str], *, strict: bool = False) -> Fraction:
    """Exact measure of the cylinder ``B_word`` under the trace measure of ``x``.

    Actions that occur nowhere in the chain give measure 0, unless ``strict``
    is set, in which case they raise :class:`UnknownAction`.
    """
    wa = WeightedAutomaton.from_lmc(lmc)
    vec = {x: Fraction(1)}
    for a in word:
        if a not in wa.matrices:
            if strict:
                raise UnknownAction(a)
            return Fraction(0)
        vec = wa.step(vec, a)
        if not vec:
            return Fraction(0)
    return sum(vec.values(), Fraction(0))


def measure_table(lmc: Lmc, depth: int, alphabet: Iterable[str] | None = None) -> dict[tuple[int, Word], Fraction]:
    """Cylinder measures of every state on every word of length ``<= depth``."""
    letters = sorted(set(alphabet) if alphabet is not None else lmc.alphabet)
    wa = WeightedAutomaton.from_lmc(lmc, letters)
    table = {}
    for x in range(len(lmc)):
        frontier = [((), {x: Fraction(1)})]
        for n in range(depth + 1):
            nxt = []
            for w, vec in frontier:
                table[(x, w)] = sum(vec.values(), Fraction(0))
                if n < depth:
                    nxt.extend((w + (a,), wa.step(vec, a)) for a in letters)
            frontier = nxt
    return table


def tzeng_equiv(m1: Lmc, x1: int, m2: Lmc, x2: int) -> tuple[bool, Word | None]:
    """Decide whether ``x1`` and ``x2`` have the same trace measure.

    Spans the row space reachable from ``e_x1 - e_x2`` in the disjoint union
    by breadth-first search over words, keeping a reduced basis (so at most
    ``len(m1) + len(m2)`` vectors are ever expanded).  The states agree iff
    every reached vector has coordinate sum 0.  Returns ``(True, None)`` or
    ``(False, w)`` with ``w`` a word whose cylinder measures differ.
    """
    wa = WeightedAutomaton.disjoint_union(m1, m2)
    letters = sorted(wa.matrices)
    start = {x1: Fraction(1)}
    y = x2 + len(m1)
    start[y] = start.get(y, 0) - 1
    start = {k: v for k, v in start.items() if v != 0}

    basis: dict[int, dict[int, Fraction]] = {}  # pivot -> vector with 1 at pivot
    queue = deque([((), start)])
    while queue:
        w, vec = queue.popleft()
        if sum(vec.values(), Fraction(0)) != 0:
            return False, w
        if not _insert(basis, vec):
            continue
        for a in letters:
            queue.append((w + (a,), wa.step(vec, a)))
    return True, None


def _insert(basis: dict[int, dict[int, Fraction]], vec: dict[int, Fraction]) -> bool:
    """Add ``vec`` to the echelon basis unless it already lies in its span."""
    v = dict(vec)
    for pivot in sorted(basis):
        c = v.get(pivot)
        if c:
            for k, b in basis[pivot].items():
                nv = v.get(k, 0) - c * b
                if nv:
                    v[k] = nv
                else:
                    v.pop(k, None)
    if not v:
        return False
    pivot = min(v)
    scale = v[pivot]
    new = {k: val / scale for k, val in v.items()}
    # keep the basis fully reduced so that a single pass above suffices
    for p, b in basis.items():
        c = b.get(pivot)
        if c:
            for k, val in new.items():
                nv = b.get(k, 0) - c * val
                if nv:
                    b[k] = nv
                else:
                    b.pop(k, None)
    basis[pivot] = new
    return True


# -- sampling ---------------------------------------------------------------------


def sample_words(lmc: Lmc, x: int, length: int, count: int, seed: int) -> tuple[list[str], np.ndarray]:
    """Draw ``count`` independent runs of ``length`` steps from ``x``.

    Returns the sorted action list and an integer array of shape
    ``(count, length)`` indexing into it.  Uniforms come from a Philox
    counter-based stream keyed by ``seed``; run ``i`` consumes positions
    ``i*length ... (i+1)*length - 1``, so each run depends only on
    ``(seed, i)``.
    """
    letters = lmc.alphabet
    code = {a: k for k, a in enumerate(letters)}
    n = len(lmc)
    width = max((len(row) for row in lmc.out), default=1)
    cum = np.full((n, width), 2.0)
    act = np.zeros((n, width), dtype=np.int64)
    dst = np.zeros((n, width), dtype=np.int64)
    for i, row in enumerate(lmc.out):
        acc = Fraction(0)
        for k, ((a, j), p) in enumerate(row):
            acc += p
            cum[i, k] = float(acc)
            act[i, k] = code[a]
            dst[i, k] = j
        cum[i, len(row) - 1] = 2.0  # rounding must never push past the last edge

    u = np.random.Generator(np.random.Philox(key=seed)).random((count, length))
    state = np.full(count, x, dtype=np.int64)
    out = np.empty((count, length), dtype=np.int64)
    for t in range(length):
        k = (u[:, t, None] >= cum[state]).sum(axis=1)
        out[:, t] = act[state, k]
        state = dst[state, k]
    return letters, out


def sample_measure(
    lmc: Lmc,
    x: int,
    interp: Interpretation,
    truncation: int,
    samples: int,
    seed: int,
    p0=None,
) -> np.ndarray:
    """Sample points of the subfractal measure of ``x``.

    Each sample walks ``truncation`` steps, then evaluates the resulting word
    on ``p0`` (last letter first).  A sample is within ``c**N`` times the
    distance from ``p0`` to the attractor of an exact draw.  Returns an array
    of shape ``(samples, dim)``.
    """
    if truncation < 1 or samples < 1:
        raise ValueError("truncation and sample count must be positive")
    letters, words = sample_words(lmc, x, truncation, samples, seed)
    maps = [interp[a] for a in letters]
    base = np.zeros(interp.dim) if p0 is None else np.asarray(p0, dtype=np.float64).reshape(interp.dim)
    pts = np.tile(base, (samples, 1))
    for t in range(truncation - 1, -1, -1):
        col = words[:, t]
        for k, m in enumerate(maps):
            sel = col == k
            if sel.any():
                pts[sel] = m(pts[sel])
    return pts
