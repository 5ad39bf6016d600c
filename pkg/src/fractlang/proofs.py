"""Checking equational derivations, and a random rewriter for soundness fuzzing.

A derivation is a list of numbered steps, each stating an equation together
with the rule that justifies it.  Text format, one step per line::

    goal: <lhs> == <rhs>                         # optional
    <idx>: <RULE>(<premise idx>, ...) <lhs> == <rhs> [key=value, ...]

Rules: ``ID CM AS DS FP AE`` (axioms, accepted in either orientation),
``UA(i)``, ``CN(i, j, ...) [ctx=<g>, subst=v1 v2 ...]``,
``Cong(i) [path=0.1]``, and the equational rules ``Refl() Sym(i) Trans(i, j)``.
The axiom shapes depend on the system: ``classic`` uses ``+``, ``prob`` uses
``+[r]`` with exact rational side conditions.
"""

from __future__ import annotations

import random
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

from .terms import (
    Choice,
    Mu,
    Node,
    Prefix,
    Sum,
    TermSyntaxError,
    WellFormednessError,
    binder_names,
    free_vars,
    map_at,
    open_body,
    parse_pterm,
    parse_term,
    pretty,
    replace_at,
    size,
    subterm_at,
    subterms,
    substitute_many,
    unfold_mu,
)

__all__ = [
    "Step",
    "Derivation",
    "Verdict",
    "MalformedDerivation",
    "RULES",
    "parse_derivation",
    "format_derivation",
    "check",
    "rewrite_random",
]

AXIOMS = ("ID", "CM", "AS", "DS", "FP", "AE")
RULES = AXIOMS + ("UA", "CN", "Cong", "Refl", "Sym", "Trans")
_ARITY = {r: 0 for r in AXIOMS} | {"Refl": 0, "Sym": 1, "Trans": 2, "UA": 1, "Cong": 1}


class MalformedDerivation(ValueError):
    pass


@dataclass(frozen=True)
class Step:
    index: int
    rule: str
    premises: tuple[int, ...]
    lhs: Node
    rhs: Node
    path: tuple[int, ...] | None = None
    ctx: Node | None = None
    subst: tuple[str, ...] = ()


@dataclass
class Derivation:
    steps: list[Step]
    goal: tuple[Node, Node] | None = None
    system: str = "classic"


@dataclass(frozen=True)
class Verdict:
    ok: bool
    step: int | None = None
    reason: str = ""

    def __bool__(self):
        return self.ok


# -- parsing -------------------------------------------------------------------

_STEP_RE = re.compile(r"^\s*(\d+)\s*:\s*([A-Za-z]+)\s*\(([^)]*)\)\s*(.*)$")
_ANNOT_RE = re.compile(r"\s\[\s*((?:path|ctx|subst)\s*=.*)\]\s*$")


def _parser_for(system: str) -> Callable[..., Node]:
    if system == "classic":
        return parse_term
    if system == "prob":
        return parse_pterm
    raise ValueError(f"unknown system {system!r}")


def _parse_equation(text: str, parse, where: str) -> tuple[Node, Node]:
    parts = text.split("==")
    if len(parts) != 2:
        raise MalformedDerivation(f"{where}: expected exactly one '=='")
    try:
        return parse(parts[0], closed=False), parse(parts[1], closed=False)
    except (TermSyntaxError, WellFormednessError, ValueError) as exc:
        raise MalformedDerivation(f"{where}: {exc}") from exc


def parse_derivation(text: str, system: str = "classic") -> Derivation:
    parse = _parser_for(system)
    steps: list[Step] = []
    goal = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        where = f"line {lineno}"
        if line.startswith("goal:"):
            goal = _parse_equation(line[len("goal:"):], parse, where)
            continue
        m = _STEP_RE.match(line)
        if m is None:
            raise MalformedDerivation(f"{where}: cannot read step {line!r}")
        idx, rule, prem, rest = int(m.group(1)), m.group(2), m.group(3), m.group(4)
        if rule not in RULES:
            raise MalformedDerivation(f"{where}: unknown rule {rule!r}")
        try:
            premises = tuple(int(p) for p in prem.replace(",", " ").split())
        except ValueError as exc:
            raise MalformedDerivation(f"{where}: bad premise list {prem!r}") from exc
        annot: dict[str, str] = {}
        am = _ANNOT_RE.search(" " + rest)
        if am is not None:
            rest = (" " + rest)[: am.start()]
            for item in am.group(1).split(","):
                key, _, value = item.partition("=")
                annot[key.strip()] = value.strip()
        lhs, rhs = _parse_equation(rest, parse, where)
        path = None
        if "path" in annot:
            try:
                path = tuple(int(c) for c in annot["path"].split(".") if c != "")
            except ValueError as exc:
                raise MalformedDerivation(f"{where}: bad path {annot['path']!r}") from exc
        ctx = None
        if "ctx" in annot:
            try:
                ctx = parse(annot["ctx"], closed=False)
            except (TermSyntaxError, WellFormednessError, ValueError) as exc:
                raise MalformedDerivation(f"{where}: bad context: {exc}") from exc
        subst = tuple(annot.get("subst", "").split())
        steps.append(Step(idx, rule, premises, lhs, rhs, path, ctx, subst))
    return Derivation(steps, goal, system)


def format_derivation(d: Derivation) -> str:
    lines = []
    if d.goal is not None:
        lines.append(f"goal: {pretty(d.goal[0])} == {pretty(d.goal[1])}")
    for s in d.steps:
        extra = []
        if s.path is not None:
            extra.append("path=" + ".".join(map(str, s.path)))
        if s.ctx is not None:
            extra.append(f"ctx={pretty(s.ctx)}")
        if s.subst:
            extra.append("subst=" + " ".join(s.subst))
        tail = f" [{', '.join(extra)}]" if extra else ""
        prem = ", ".join(map(str, s.premises))
        lines.append(f"{s.index}: {s.rule}({prem}) {pretty(s.lhs)} == {pretty(s.rhs)}{tail}")
    return "\n".join(lines) + "\n"


# -- axiom instances -------------------------------------------------------------


class _Reject(Exception):
    pass


def _either(lhs: Node, rhs: Node, test: Callable[[Node, Node], bool]) -> bool:
    return test(lhs, rhs) or test(rhs, lhs)


def _classic_axiom(rule: str, lhs: Node, rhs: Node) -> bool:
    match rule:
        case "ID":
            return _either(lhs, rhs, lambda x, y: isinstance(x, Sum) and x.left == y and x.right == y)
        case "CM":
            return isinstance(lhs, Sum) and rhs == Sum(lhs.right, lhs.left)
        case "AS":
            def assoc(x, y):
                return (
                    isinstance(x, Sum)
                    and isinstance(x.right, Sum)
                    and y == Sum(Sum(x.left, x.right.left), x.right.right)
                )

            return _either(lhs, rhs, assoc)
        case "DS":
            def dist(x, y):
                return (
                    isinstance(x, Prefix)
                    and isinstance(x.body, Sum)
                    and y == Sum(Prefix(x.action, x.body.left), Prefix(x.action, x.body.right))
                )

            return _either(lhs, rhs, dist)
    return _common_axiom(rule, lhs, rhs)


def _prob_axiom(rule: str, lhs: Node, rhs: Node) -> bool:
    match rule:
        case "ID":
            return _either(lhs, rhs, lambda x, y: isinstance(x, Choice) and x.left == y and x.right == y)
        case "CM":
            return isinstance(lhs, Choice) and rhs == Choice(lhs.right, 1 - lhs.prob, lhs.left)
        case "AS":
            # (e1 +[r] e2) +[s] e3  ==  e1 +[rs] (e2 +[s(1-r)/(1-rs)] e3)
            undefined = False
            for x, y in ((lhs, rhs), (rhs, lhs)):
                if not (isinstance(x, Choice) and isinstance(x.left, Choice)):
                    continue
                r, s = x.left.prob, x.prob
                if r * s == 1:
                    undefined = True
                    continue
                t = s * (1 - r) / (1 - r * s)
                if y == Choice(x.left.left, r * s, Choice(x.left.right, t, x.right)):
                    return True
            if undefined:
                raise _Reject("(AS) needs rs != 1; the weight s(1-r)/(1-rs) is undefined")
            return False
        case "DS":
            def dist(x, y):
                return (
                    isinstance(x, Prefix)
                    and isinstance(x.body, Choice)
                    and y == Choice(Prefix(x.action, x.body.left), x.body.prob, Prefix(x.action, x.body.right))
                )

            return _either(lhs, rhs, dist)
    return _common_axiom(rule, lhs, rhs)


def _common_axiom(rule: str, lhs: Node, rhs: Node) -> bool:
    match rule:
        case "FP":
            return _either(lhs, rhs, lambda x, y: isinstance(x, Mu) and unfold_mu(x) == y)
        case "AE":
            # bound names are not part of the representation: the two sides
            # must be the same binder up to renaming, which excludes capture
            return isinstance(lhs, Mu) and isinstance(rhs, Mu) and lhs == rhs
    raise AssertionError(rule)


# -- checking --------------------------------------------------------------------


def check(d: Derivation, system: str | None = None) -> Verdict:
    """Validate every step of ``d``; the verdict names the first bad step.

    Raises :class:`MalformedDerivation` for structural problems (dangling
    premise indices, wrong premise counts, missing instantiation data).
    """
    system = system or d.system
    axiom = {"classic": _classic_axiom, "prob": _prob_axiom}.get(system)
    if axiom is None:
        raise ValueError(f"unknown system {system!r}")
    if not d.steps:
        raise MalformedDerivation("empty derivation")
    proved: dict[int, tuple[Node, Node]] = {}
    last = -1
    for s in d.steps:
        if s.index <= last:
            raise MalformedDerivation(f"step {s.index}: indices must increase")
        last = s.index
        for p in s.premises:
            if p not in proved:
                raise MalformedDerivation(f"step {s.index}: premise {p} is not an earlier step")
        want = _ARITY.get(s.rule)
        if want is not None and len(s.premises) != want:
            raise MalformedDerivation(f"step {s.index}: {s.rule} takes {want} premise(s), got {len(s.premises)}")
        try:
            reason = _check_step(s, [proved[p] for p in s.premises], axiom)
        except _Reject as exc:
            reason = str(exc)
        if reason:
            return Verdict(False, s.index, reason)
        proved[s.index] = (s.lhs, s.rhs)
    final = d.steps[-1]
    if d.goal is not None and (final.lhs, final.rhs) != d.goal:
        return Verdict(False, final.index, "final step does not conclude the goal")
    return Verdict(True)


def _check_step(s: Step, prem: list[tuple[Node, Node]], axiom) -> str:
    lhs, rhs = s.lhs, s.rhs
    match s.rule:
        case "Refl":
            return "" if lhs == rhs else "sides differ"
        case "Sym":
            (l1, r1), = prem
            return "" if (lhs, rhs) == (r1, l1) else "not the premise reversed"
        case "Trans":
            (l1, r1), (l2, r2) = prem
            if r1 != l2:
                return "premises do not chain"
            return "" if (lhs, rhs) == (l1, r2) else "conclusion does not match the chained premises"
        case "UA":
            (g, eg), = prem
            if lhs != g:
                return "left side differs from the premise's left side"
            if not isinstance(rhs, Mu):
                return "right side is not a mu term"
            if eg != open_body(rhs.body, g):
                return "premise right side is not e[g/v]"
            return ""
        case "Cong":
            if s.path is None:
                raise MalformedDerivation(f"step {s.index}: Cong needs path=")
            (l1, r1), = prem
            try:
                if subterm_at(lhs, s.path) != l1:
                    return "subterm at path is not the premise's left side"
                if replace_at(lhs, s.path, r1) != rhs:
                    return "right side is not the left side with the premise's right side at path"
            except IndexError as exc:
                return f"bad path: {exc}"
            return ""
        case "CN":
            return _check_cn(s, prem)
    return "" if axiom(s.rule, lhs, rhs) else f"not an instance of ({s.rule})"


def _check_cn(s: Step, prem: list[tuple[Node, Node]]) -> str:
    if s.ctx is None or not s.subst:
        raise MalformedDerivation(f"step {s.index}: CN needs ctx= and subst=")
    if len(s.subst) != len(prem) or len(set(s.subst)) != len(s.subst):
        raise MalformedDerivation(f"step {s.index}: CN needs one distinct variable per premise")
    g = s.ctx
    if free_vars(g) != set(s.subst):
        return "context's free variables are not exactly the substituted ones"
    bound = binder_names(g)
    for _, f in prem:
        clash = free_vars(f) & bound
        if clash:
            return f"free variable {sorted(clash)[0]!r} of a premise is bound in the context"
    left = substitute_many(g, {v: e for v, (e, _) in zip(s.subst, prem)})
    right = substitute_many(g, {v: f for v, (_, f) in zip(s.subst, prem)})
    if (s.lhs, s.rhs) != (left, right):
        return "conclusion is not g[e/v] == g[f/v]"
    return ""


# -- random rewriting ----------------------------------------------------------------

_PROBS = tuple(Fraction(n, d) for d in (2, 3, 4, 5) for n in range(1, d))

# A move is a function of the subterm it rewrites.  Moves are enumerated on one
# opening of the term and replayed by map_at on another, so they must depend on
# the subterm's shape only, never on a captured copy of it.


def _classic_moves(t: Node, rng: random.Random, room: int):
    moves = []
    match t:
        case Sum(l, r):
            if l == r:
                moves.append(lambda t: t.left)
            moves.append(lambda t: Sum(t.right, t.left))
            if isinstance(r, Sum):
                moves.append(lambda t: Sum(Sum(t.left, t.right.left), t.right.right))
            if isinstance(l, Sum):
                moves.append(lambda t: Sum(t.left.left, Sum(t.left.right, t.right)))
            if isinstance(l, Prefix) and isinstance(r, Prefix) and l.action == r.action:
                moves.append(lambda t: Prefix(t.left.action, Sum(t.left.body, t.right.body)))
        case Prefix(_, b) if isinstance(b, Sum):
            moves.append(lambda t: Sum(Prefix(t.action, t.body.left), Prefix(t.action, t.body.right)))
    return moves + _mu_and_growth_moves(t, rng, room, lambda t: Sum(t, t))


def _assoc_left(t: Node) -> Node:
    r, s = t.left.prob, t.prob
    return Choice(t.left.left, r * s, Choice(t.left.right, s * (1 - r) / (1 - r * s), t.right))


def _assoc_right(t: Node) -> Node:
    p, q = t.prob, t.right.prob
    s = p + (1 - p) * q
    return Choice(Choice(t.left, p / s, t.right.left), s, t.right.right)


def _prob_moves(t: Node, rng: random.Random, room: int):
    moves = []
    match t:
        case Choice(l, r, rt):
            if l == rt:
                moves.append(lambda t: t.left)
            moves.append(lambda t: Choice(t.right, 1 - t.prob, t.left))
            if isinstance(l, Choice) and l.prob * r != 1:
                moves.append(_assoc_left)
            if isinstance(rt, Choice) and r != 1 and r + (1 - r) * rt.prob != 0:
                moves.append(_assoc_right)
            if isinstance(l, Prefix) and isinstance(rt, Prefix) and l.action == rt.action:
                moves.append(lambda t: Prefix(t.left.action, Choice(t.left.body, t.prob, t.right.body)))
        case Prefix(_, b) if isinstance(b, Choice):
            moves.append(lambda t: Choice(Prefix(t.action, t.body.left), t.body.prob, Prefix(t.action, t.body.right)))
    p = rng.choice(_PROBS)
    return moves + _mu_and_growth_moves(t, rng, room, lambda t: Choice(t, p, t))


def _mu_and_growth_moves(t: Node, rng: random.Random, room: int, duplicate):
    moves = []
    n = size(t)
    if isinstance(t, Mu):
        name = rng.choice("uvwxyz")
        moves.append(lambda t: Mu(t.body, name))
        if size(unfold_mu(t)) - n <= room:
            moves.append(unfold_mu)
    if n + 1 <= room:
        moves.append(duplicate)
    return moves


def rewrite_random(
    e: Node,
    seed: int | random.Random,
    steps: int,
    *,
    max_size: int = 200,
    system: str | None = None,
) -> Node:
    """Apply ``steps`` random axiom instances (either orientation) at random positions.

    Every move is an instance of ID, CM, AS, DS, FP or AE applied under a
    context, so the result is provably equivalent to ``e``.  Moves that grow
    the term are only offered while the result stays within ``max_size`` nodes.
    ``system`` picks the axioms (``classic`` or ``prob``); by default it is
    guessed from the term, which is ambiguous only for choice-free terms.
    """
    rng = seed if isinstance(seed, random.Random) else random.Random(seed)
    if system is None:
        system = "prob" if _uses_choice(e) else "classic"
    moves_for = {"classic": _classic_moves, "prob": _prob_moves}[system]
    for _ in range(steps):
        room = max_size - size(e)
        candidates = []
        for path, sub in subterms(e):
            for move in moves_for(sub, rng, room):
                candidates.append((path, move))
        if not candidates:
            break
        path, move = rng.choice(candidates)
        e = map_at(e, path, move)
    return e


def _uses_choice(e: Node) -> bool:
    stack = [e]
    while stack:
        t = stack.pop()
        match t:
            case Choice():
                return True
            case Sum(l, r):
                stack.extend((l, r))
            case Prefix(_, b) | Mu(b, _):
                stack.append(b)
    return False
