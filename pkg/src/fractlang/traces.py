"""Trace sets and trace equivalence of LTS states.

Trace languages of an LTS are prefix-closed, so after determinization every
non-empty subset is accepting and the only rejecting state is the empty
("dead") subset.  Two states are trace equivalent iff the subset automata
started from them reach the dead state along exactly the same words.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Iterable

from .lts import Lts

__all__ = ["TraceSet", "Dfa", "traces", "determinize", "trace_equiv", "equiv_oracle", "Word"]

Word = tuple[str, ...]


@dataclass(frozen=True)
class TraceSet:
    depth: int
    words: frozenset[Word]

    def __contains__(self, w) -> bool:
        return tuple(w) in self.words

    def __len__(self):
        return len(self.words)

    def of_length(self, n: int) -> set[Word]:
        return {w for w in self.words if len(w) == n}


def traces(lts: Lts, x: int, depth: int) -> TraceSet:
    """All words of length ``<= depth`` labelling a path from ``x``.

    Plain path enumeration, meant as an oracle: no determinization involved.
    """
    words: set[Word] = {()}
    frontier = [((), x)]
    for _ in range(depth):
        nxt = set()
        for w, s in frontier:
            for a, t in lts.out[s]:
                nxt.add((w + (a,), t))
        words.update(w for w, _ in nxt)
        frontier = list(nxt)
    return TraceSet(depth, frozenset(words))


@dataclass
class Dfa:
    """Subset automaton of an LTS, built lazily; state 0 is the start, ``dead`` the empty subset."""

    lts: Lts
    alphabet: tuple[str, ...]
    subsets: list[frozenset[int]] = field(default_factory=list)
    index: dict[frozenset[int], int] = field(default_factory=dict)
    trans: dict[tuple[int, str], int] = field(default_factory=dict)

    def state(self, subset: frozenset[int]) -> int:
        i = self.index.get(subset)
        if i is None:
            i = self.index[subset] = len(self.subsets)
            self.subsets.append(subset)
        return i

    @property
    def dead(self) -> int:
        return self.state(frozenset())

    def delta(self, i: int, a: str) -> int:
        key = (i, a)
        j = self.trans.get(key)
        if j is None:
            succ = frozenset(t for s in self.subsets[i] for b, t in self.lts.out[s] if b == a)
            j = self.trans[key] = self.state(succ)
        return j

    def accepts(self, word: Iterable[str]) -> bool:
        i = 0
        for a in word:
            i = self.delta(i, a)
        return bool(self.subsets[i])

    def complete(self) -> "Dfa":
        """Explore every reachable subset (normally construction is on demand)."""
        todo = [0]
        seen = {0}
        while todo:
            i = todo.pop()
            for a in self.alphabet:
                j = self.delta(i, a)
                if j not in seen:
                    seen.add(j)
                    todo.append(j)
        self.dead
        return self


def determinize(lts: Lts, start: int, alphabet: Iterable[str] | None = None) -> Dfa:
    alpha = tuple(sorted(set(alphabet) if alphabet is not None else lts.alphabet))
    d = Dfa(lts, alpha)
    d.state(frozenset([start]))
    return d


class _UnionFind:
    def __init__(self):
        self.parent: dict = {}

    def find(self, x):
        self.parent.setdefault(x, x)
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, x, y) -> bool:
        rx, ry = self.find(x), self.find(y)
        if rx == ry:
            return False
        self.parent[rx] = ry
        return True


def trace_equiv(l1: Lts, x1: int, l2: Lts, x2: int) -> tuple[bool, Word | None]:
    """Decide ``tr(x1) == tr(x2)``.

    Returns ``(True, None)`` or ``(False, w)`` where ``w`` is a shortest word in
    exactly one of the two trace sets (ties broken lexicographically).
    """
    alphabet = sorted(set(l1.alphabet) | set(l2.alphabet))
    d1 = determinize(l1, x1, alphabet)
    d2 = determinize(l2, x2, alphabet)

    # Hopcroft-Karp: union the pair, then propagate along every letter.
    uf = _UnionFind()
    todo = [(0, 0)]
    uf.union((1, 0), (2, 0))
    equivalent = True
    while todo:
        p, q = todo.pop()
        if bool(d1.subsets[p]) != bool(d2.subsets[q]):
            equivalent = False
            break
        for a in alphabet:
            p2, q2 = d1.delta(p, a), d2.delta(q, a)
            if uf.union((1, p2), (2, q2)):
                todo.append((p2, q2))
    if equivalent:
        return True, None
    return False, _shortest_witness(d1, d2, alphabet)


def _shortest_witness(d1: Dfa, d2: Dfa, alphabet: list[str]) -> Word:
    # BFS expanding letters in sorted order meets words in (length, lex) order.
    seen = {(0, 0)}
    queue = deque([((0, 0), ())])
    while queue:
        (p, q), w = queue.popleft()
        for a in alphabet:
            nxt = (d1.delta(p, a), d2.delta(q, a))
            if nxt in seen:
                continue
            wa = w + (a,)
            if bool(d1.subsets[nxt[0]]) != bool(d2.subsets[nxt[1]]):
                return wa
            seen.add(nxt)
            queue.append((nxt, wa))
    raise AssertionError("no distinguishing word although the languages differ")


def equiv_oracle(l1: Lts, x1: int, l2: Lts, x2: int, depth: int) -> bool:
    """Compare trace sets up to ``depth`` by brute-force enumeration."""
    return traces(l1, x1, depth).words == traces(l2, x2, depth).words
