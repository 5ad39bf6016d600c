"""Small-step semantics and finite reachable transition systems.

``step`` and ``step_prob`` are the syntactic transition structures on classical
and probabilistic terms.  ``unfold`` / ``unfold_prob`` close a term under them;
states are compared up to alpha-equivalence (structural equality on the
locally nameless representation), which keeps the reachable set finite.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from typing import Hashable, Iterable, Sequence

from .terms import Bound, Choice, Mu, Node, Prefix, Sum, Var, pretty, unfold_mu

__all__ = [
    "Lts",
    "Lmc",
    "StateBudgetExceeded",
    "step",
    "step_prob",
    "unfold",
    "unfold_prob",
    "underlying_lts",
    "DEFAULT_STATE_BUDGET",
]

DEFAULT_STATE_BUDGET = 100_000


class StateBudgetExceeded(RuntimeError):
    def __init__(self, n: int):
        super().__init__(f"more than {n} reachable states")
        self.n = n


@dataclass(frozen=True)
class Lts:
    """A finite labelled transition system.

    ``out[i]`` lists the ``(action, target)`` pairs leaving state ``i`` in a
    fixed order.  ``states`` holds whatever labels the states (terms when the
    system came from :func:`unfold`).
    """

    states: tuple[Hashable, ...]
    out: tuple[tuple[tuple[str, int], ...], ...]
    root: int = 0

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, str, int]], root: int = 0, states=None) -> "Lts":
        out: list[dict[tuple[str, int], None]] = [dict() for _ in range(n)]
        for i, a, j in edges:
            if not (0 <= i < n and 0 <= j < n):
                raise ValueError(f"edge {(i, a, j)} out of range")
            out[i][(a, j)] = None
        return cls(tuple(states) if states is not None else tuple(range(n)), tuple(tuple(d) for d in out), root)

    def __len__(self):
        return len(self.states)

    @property
    def edges(self) -> list[tuple[int, str, int]]:
        return [(i, a, j) for i, succ in enumerate(self.out) for a, j in succ]

    @property
    def alphabet(self) -> list[str]:
        return sorted({a for succ in self.out for a, _ in succ})

    def is_productive(self) -> bool:
        return all(self.out)

    def reachable(self, start: int | None = None) -> set[int]:
        start = self.root if start is None else start
        seen = {start}
        todo = [start]
        while todo:
            i = todo.pop()
            for _, j in self.out[i]:
                if j not in seen:
                    seen.add(j)
                    todo.append(j)
        return seen

    def dump(self) -> str:
        lines = [f"state {i} {_label(s)}" for i, s in enumerate(self.states)]
        lines += [f"edge {i} {a} {j}" for i, a, j in self.edges]
        return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class Lmc:
    """A finite labelled Markov chain with exact rational transition weights."""

    states: tuple[Hashable, ...]
    out: tuple[tuple[tuple[tuple[str, int], Fraction], ...], ...]
    root: int = 0

    @classmethod
    def from_weights(cls, rows: Sequence[dict[tuple[str, int], Fraction]], root: int = 0, states=None) -> "Lmc":
        out = []
        for i, row in enumerate(rows):
            total = sum(row.values(), Fraction(0))
            if total != 1:
                raise ValueError(f"weights of state {i} sum to {total}, not 1")
            if any(p < 0 for p in row.values()):
                raise ValueError(f"negative weight at state {i}")
            out.append(tuple((k, Fraction(p)) for k, p in row.items() if p != 0))
        n = len(rows)
        for row in out:
            for (_, j), _p in row:
                if not 0 <= j < n:
                    raise ValueError(f"target {j} out of range")
        return cls(tuple(states) if states is not None else tuple(range(n)), tuple(out), root)

    def __len__(self):
        return len(self.states)

    @property
    def alphabet(self) -> list[str]:
        return sorted({a for row in self.out for (a, _), _ in row})

    def weight(self, i: int, a: str, j: int) -> Fraction:
        for (b, k), p in self.out[i]:
            if b == a and k == j:
                return p
        return Fraction(0)

    def dump(self) -> str:
        lines = [f"state {i} {_label(s)}" for i, s in enumerate(self.states)]
        lines += [f"edge {i} {a} {j} {p}" for i, row in enumerate(self.out) for (a, j), p in row]
        return "\n".join(lines) + "\n"


def _label(s) -> str:
    return pretty(s, canonical=True) if isinstance(s, Node) else str(s)


def step(e: Node) -> list[tuple[str, Node]]:
    """All ``(a, f)`` with ``e --a--> f``, duplicates removed, in a fixed order."""
    out: dict[tuple[str, Node], None] = {}
    _step_into(e, out)
    if not out:
        raise AssertionError(f"term has no transitions: {pretty(e)}")
    return list(out)


def _step_into(e: Node, out: dict) -> None:
    match e:
        case Prefix(a, body):
            out[(a, body)] = None
        case Sum(l, r):
            _step_into(l, out)
            _step_into(r, out)
        case Mu():
            _step_into(unfold_mu(e), out)
        case Var() | Bound():
            raise ValueError(f"cannot step an open term at variable {e!r}")
        case Choice():
            raise TypeError("probabilistic term passed to step(); use step_prob()")
        case _:
            raise TypeError(f"not a term: {e!r}")


def step_prob(e: Node) -> dict[tuple[str, Node], Fraction]:
    """The transition distribution of a probabilistic term (support only)."""
    out: dict[tuple[str, Node], Fraction] = {}
    _step_prob_into(e, Fraction(1), out)
    out = {k: p for k, p in out.items() if p != 0}
    assert sum(out.values()) == 1
    return out


def _step_prob_into(e: Node, weight: Fraction, out: dict) -> None:
    if weight == 0:
        return
    match e:
        case Prefix(a, body):
            key = (a, body)
            out[key] = out.get(key, Fraction(0)) + weight
        case Choice(l, r_, rt):
            _step_prob_into(l, weight * r_, out)
            _step_prob_into(rt, weight * (1 - r_), out)
        case Mu():
            _step_prob_into(unfold_mu(e), weight, out)
        case Var() | Bound():
            raise ValueError(f"cannot step an open term at variable {e!r}")
        case Sum():
            raise TypeError("classical term passed to step_prob(); use step()")
        case _:
            raise TypeError(f"not a term: {e!r}")


def unfold(e: Node, *, max_states: int = DEFAULT_STATE_BUDGET) -> Lts:
    """Breadth-first reachable LTS of ``e``; ``e`` is state 0."""
    index = {e: 0}
    states = [e]
    out: list[tuple[tuple[str, int], ...]] = []
    queue = deque([e])
    while queue:
        t = queue.popleft()
        succ = []
        for a, f in step(t):
            j = index.get(f)
            if j is None:
                if len(states) >= max_states:
                    raise StateBudgetExceeded(max_states)
                j = index[f] = len(states)
                states.append(f)
                queue.append(f)
            succ.append((a, j))
        out.append(tuple(succ))
    return Lts(tuple(states), tuple(out), 0)


def unfold_prob(e: Node, *, max_states: int = DEFAULT_STATE_BUDGET) -> Lmc:
    """Breadth-first reachable LMC of a probabilistic term; ``e`` is state 0."""
    index = {e: 0}
    states = [e]
    out = []
    queue = deque([e])
    while queue:
        t = queue.popleft()
        row = []
        for (a, f), p in step_prob(t).items():
            j = index.get(f)
            if j is None:
                if len(states) >= max_states:
                    raise StateBudgetExceeded(max_states)
                j = index[f] = len(states)
                states.append(f)
                queue.append(f)
            row.append(((a, j), p))
        out.append(tuple(row))
    return Lmc(tuple(states), tuple(out), 0)


def underlying_lts(m: Lmc) -> Lts:
    """Forget the weights, keeping exactly the positive-probability edges."""
    return Lts(m.states, tuple(tuple(k for k, p in row if p > 0) for row in m.out), m.root)
