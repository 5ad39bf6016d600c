"""Process terms: abstract syntax, concrete grammar, substitution.

Terms are stored locally nameless.  Variables bound by a ``mu`` are de Bruijn
indices (:class:`Bound`), free variables keep their names (:class:`Var`).  The
binder name the user wrote survives on :class:`Mu` as a printing hint only, so
structural equality *is* alpha-equivalence.

The same node classes carry both calculi: a classical term uses :class:`Sum`,
a probabilistic term uses :class:`Choice`.  Parsers enforce that the two are
never mixed.

Concrete grammar (``+`` for classical sums, ``+[r]`` for probabilistic choice)::

    term   := 'mu' IDENT '.' term | sum
    sum    := unit (PLUS unit)*            # left associative
    unit   := 'mu' IDENT '.' term          # scopes maximally to the right
            | ACTION '.' unit              # prefix binds tighter than PLUS
            | IDENT                        # variable
            | '(' term ')'

``#`` starts a comment running to the end of the line.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field, fields
from fractions import Fraction
from typing import Iterator, Sequence

__all__ = [
    "Node",
    "Var",
    "Bound",
    "Prefix",
    "Sum",
    "Choice",
    "Mu",
    "TermSyntaxError",
    "WellFormednessError",
    "ProbabilityRangeError",
    "parse_term",
    "parse_pterm",
    "pretty",
    "substitute",
    "substitute_many",
    "alpha_eq",
    "free_vars",
    "open_body",
    "unfold_mu",
    "check_well_formed",
    "is_probabilistic",
    "size",
    "subterm_at",
    "subterms",
    "replace_at",
    "map_at",
    "positions",
    "binder_names",
]

ACTION_RE = re.compile(r"[a-z][a-z0-9]*\Z")


class Node:
    """Base class of term nodes; equality is structural (hence alpha-equivalence)."""

    _eq_fields: tuple[str, ...] = ()

    def _key(self):
        return tuple(getattr(self, name) for name in self._eq_fields)

    def __hash__(self):
        h = self.__dict__.get("_hash")
        if h is None:
            h = hash((type(self).__name__,) + self._key())
            object.__setattr__(self, "_hash", h)
        return h

    def __eq__(self, other):
        if self is other:
            return True
        if type(self) is not type(other):
            return NotImplemented if not isinstance(other, Node) else False
        if hash(self) != hash(other):
            return False
        return self._key() == other._key()

    def __str__(self):
        return pretty(self)


def _node(cls):
    cls = dataclass(frozen=True, eq=False, repr=True)(cls)
    cls._eq_fields = tuple(f.name for f in fields(cls) if f.compare)
    return cls


@_node
class Var(Node):
    """A free variable, referenced by name."""

    name: str


@_node
class Bound(Node):
    """A variable bound by the ``index``-th enclosing :class:`Mu` (0 = innermost)."""

    index: int


@_node
class Prefix(Node):
    action: str
    body: Node


@_node
class Sum(Node):
    left: Node
    right: Node


@_node
class Choice(Node):
    """Probabilistic choice ``left +[prob] right``; ``prob`` weights the left branch."""

    left: Node
    prob: Fraction
    right: Node


@_node
class Mu(Node):
    body: Node
    name: str = field(default="v", compare=False)

    @classmethod
    def bind(cls, name: str, body: Node) -> "Mu":
        """Build ``mu name. body`` from a body mentioning ``Var(name)``."""
        return cls(close(body, name), name)


# -- errors ------------------------------------------------------------------


class TermSyntaxError(SyntaxError):
    def __init__(self, message: str, pos: int, expected: Sequence[str] = (), text: str = ""):
        line = text.count("\n", 0, pos) + 1
        col = pos - (text.rfind("\n", 0, pos) + 1) + 1
        exp = f" (expected {', '.join(expected)})" if expected else ""
        super().__init__(f"{message} at line {line}, column {col}{exp}")
        self.pos = pos
        self.expected = tuple(expected)
        self.line = line
        self.column = col


class WellFormednessError(ValueError):
    """A term is not closed (``kind == 'free-variable'``) or not guarded (``'unguarded'``)."""

    def __init__(self, kind: str, variable: str):
        what = {"free-variable": "free variable", "unguarded": "unguarded variable"}[kind]
        super().__init__(f"{what} {variable!r}")
        self.kind = kind
        self.variable = variable


class ProbabilityRangeError(ValueError):
    pass


# -- locally nameless plumbing -----------------------------------------------


def _rebuild(e: Node, kids: tuple[Node, ...]) -> Node:
    """``e`` with new children, or ``e`` itself when nothing changed (keeps sharing)."""
    match e:
        case Prefix(a, b):
            return e if kids[0] is b else Prefix(a, kids[0])
        case Sum(l, r):
            return e if (kids[0] is l and kids[1] is r) else Sum(kids[0], kids[1])
        case Choice(l, p, r):
            return e if (kids[0] is l and kids[1] is r) else Choice(kids[0], p, kids[1])
        case Mu(b, n):
            return e if kids[0] is b else Mu(kids[0], n)
    raise TypeError(f"not a term: {e!r}")


def _loose_bound(e: Node) -> int:
    """One more than the largest dangling index in ``e`` (0 if locally closed); cached."""
    h = e.__dict__.get("_loose")
    if h is None:
        match e:
            case Bound(i):
                h = i + 1
            case Var():
                h = 0
            case Prefix(_, b):
                h = _loose_bound(b)
            case Sum(l, r) | Choice(l, _, r):
                h = max(_loose_bound(l), _loose_bound(r))
            case Mu(b, _):
                h = max(_loose_bound(b) - 1, 0)
            case _:
                raise TypeError(f"not a term: {e!r}")
        object.__setattr__(e, "_loose", h)
    return h


def open_body(body: Node, replacement: Node, level: int = 0) -> Node:
    """Replace the variable bound at ``level`` by the locally closed ``replacement``."""
    if _loose_bound(body) <= level:
        return body
    match body:
        case Bound(i):
            return replacement if i == level else body
        case Mu(b, _):
            return _rebuild(body, (open_body(b, replacement, level + 1),))
    return _rebuild(body, tuple(open_body(k, replacement, level) for k in _children(body)))


def close(term: Node, name: str, level: int = 0) -> Node:
    """Abstract the free variable ``name`` into a bound index at ``level``."""
    match term:
        case Var(n):
            return Bound(level) if n == name else term
        case Bound():
            return term
        case Mu(b, _):
            return _rebuild(term, (close(b, name, level + 1),))
    return _rebuild(term, tuple(close(k, name, level) for k in _children(term)))


def unfold_mu(term: Mu) -> Node:
    """The one-step unfolding ``e[mu v e / v]`` of ``term = mu v e``."""
    return open_body(term.body, term)


def substitute(e: Node, g: Node, v: str) -> Node:
    """``e[g/v]``: replace the free occurrences of ``v`` in ``e`` by ``g``.

    Bound variables are indices, so no binder of ``e`` can capture a free
    variable of ``g``; renaming only happens when the result is printed.
    """
    return substitute_many(e, {v: g})


def substitute_many(e: Node, mapping: dict[str, Node]) -> Node:
    """Simultaneous substitution of free variables."""
    match e:
        case Var(n):
            return mapping.get(n, e)
        case Bound():
            return e
    return _rebuild(e, tuple(substitute_many(k, mapping) for k in _children(e)))


def alpha_eq(e1: Node, e2: Node) -> bool:
    return e1 == e2


def free_vars(e: Node) -> set[str]:
    out: set[str] = set()
    stack = [e]
    while stack:
        t = stack.pop()
        match t:
            case Var(n):
                out.add(n)
            case Prefix(_, b) | Mu(b, _):
                stack.append(b)
            case Sum(l, r) | Choice(l, _, r):
                stack.extend((l, r))
    return out


def binder_names(e: Node) -> set[str]:
    """Surface names of all ``mu`` binders in ``e``."""
    out: set[str] = set()
    stack = [e]
    while stack:
        t = stack.pop()
        match t:
            case Mu(b, n):
                out.add(n)
                stack.append(b)
            case Prefix(_, b):
                stack.append(b)
            case Sum(l, r) | Choice(l, _, r):
                stack.extend((l, r))
    return out


def _loose_indices(e: Node, depth: int = 0) -> set[int]:
    """Bound indices escaping ``depth`` binders, reported relative to the top of ``e``."""
    match e:
        case Bound(i):
            return {i - depth} if i >= depth else set()
        case Var():
            return set()
        case Prefix(_, b):
            return _loose_indices(b, depth)
        case Sum(l, r) | Choice(l, _, r):
            return _loose_indices(l, depth) | _loose_indices(r, depth)
        case Mu(b, _):
            return _loose_indices(b, depth + 1)
    raise TypeError(f"not a term: {e!r}")


def size(e: Node) -> int:
    """Number of nodes (cached on the node)."""
    n = e.__dict__.get("_size")
    if n is None:
        match e:
            case Var() | Bound():
                n = 1
            case Prefix(_, b) | Mu(b, _):
                n = 1 + size(b)
            case Sum(l, r) | Choice(l, _, r):
                n = 1 + size(l) + size(r)
            case _:
                raise TypeError(f"not a term: {e!r}")
        object.__setattr__(e, "_size", n)
    return n


def is_probabilistic(e: Node) -> bool | None:
    """True if ``e`` uses choice, False if it uses sums, None if it uses neither."""
    stack = [e]
    kind = None
    while stack:
        t = stack.pop()
        match t:
            case Sum(l, r):
                if kind is True:
                    raise ValueError("term mixes + and +[r]")
                kind = False
                stack.extend((l, r))
            case Choice(l, _, r):
                if kind is False:
                    raise ValueError("term mixes + and +[r]")
                kind = True
                stack.extend((l, r))
            case Prefix(_, b) | Mu(b, _):
                stack.append(b)
    return kind


# -- well-formedness -----------------------------------------------------------


def _first_unguarded(e: Node, guarded: list[bool], names: list[str]) -> str | None:
    match e:
        case Bound(i):
            return None if guarded[-1 - i] else names[-1 - i]
        case Var():
            return None
        case Prefix(_, b):
            return _first_unguarded(b, [True] * len(guarded), names)
        case Sum(l, r) | Choice(l, _, r):
            return _first_unguarded(l, guarded, names) or _first_unguarded(r, guarded, names)
        case Mu(b, n):
            return _first_unguarded(b, guarded + [False], names + [n])
    raise TypeError(f"not a term: {e!r}")


def check_well_formed(e: Node, *, closed: bool = True) -> None:
    """Raise :class:`WellFormednessError` unless ``e`` is guarded (and closed, if asked)."""
    if closed:
        fv = sorted(free_vars(e))
        if fv:
            raise WellFormednessError("free-variable", fv[0])
    bad = _first_unguarded(e, [], [])
    if bad is not None:
        raise WellFormednessError("unguarded", bad)


# -- positions -----------------------------------------------------------------
#
# A position is a tuple of child indices: Prefix/Mu have child 0, Sum/Choice
# have children 0 and 1.  Going under a Mu opens its body with a fresh name
# that the parser can never produce, so subterms are always locally closed.

_fresh_counter = itertools.count()


def _fresh() -> str:
    return f"%{next(_fresh_counter)}"


def _children(e: Node) -> tuple[Node, ...]:
    match e:
        case Prefix(_, b):
            return (b,)
        case Sum(l, r) | Choice(l, _, r):
            return (l, r)
        case Mu(b, _):
            return (b,)
    return ()


def subterm_at(e: Node, path: Sequence[int]) -> Node:
    for i in path:
        if isinstance(e, Mu):
            if i != 0:
                raise IndexError(f"bad position component {i}")
            e = open_body(e.body, Var(_fresh()))
            continue
        kids = _children(e)
        if not 0 <= i < len(kids):
            raise IndexError(f"bad position component {i}")
        e = kids[i]
    return e


def map_at(e: Node, path: Sequence[int], fn) -> Node:
    """Apply ``fn`` to the subterm at ``path`` and rebuild the term around the result.

    Binders crossed on the way down are opened and later closed with the same
    fresh name, so ``fn`` sees a locally closed term.
    """
    if not path:
        return fn(e)
    i, rest = path[0], path[1:]
    match e:
        case Prefix(a, b) if i == 0:
            return Prefix(a, map_at(b, rest, fn))
        case Sum(l, r) if i in (0, 1):
            return Sum(map_at(l, rest, fn), r) if i == 0 else Sum(l, map_at(r, rest, fn))
        case Choice(l, p, r) if i in (0, 1):
            if i == 0:
                return Choice(map_at(l, rest, fn), p, r)
            return Choice(l, p, map_at(r, rest, fn))
        case Mu(b, n) if i == 0:
            x = _fresh()
            return Mu(close(map_at(open_body(b, Var(x)), rest, fn), x), n)
    raise IndexError(f"bad position component {i}")


def replace_at(e: Node, path: Sequence[int], new: Node) -> Node:
    return map_at(e, path, lambda _: new)


def positions(e: Node, prefix: tuple[int, ...] = ()) -> Iterator[tuple[int, ...]]:
    yield prefix
    for i, kid in enumerate(_children(e)):
        yield from positions(kid, prefix + (i,))


def subterms(e: Node, prefix: tuple[int, ...] = ()) -> Iterator[tuple[tuple[int, ...], Node]]:
    """Every ``(path, subterm_at(e, path))``, opening each binder only once."""
    yield prefix, e
    if isinstance(e, Mu):
        yield from subterms(open_body(e.body, Var(_fresh())), prefix + (0,))
        return
    for i, kid in enumerate(_children(e)):
        yield from subterms(kid, prefix + (i,))


# -- printing ------------------------------------------------------------------


def _fmt_prob(p: Fraction) -> str:
    return str(p)


def pretty(e: Node, *, canonical: bool = False) -> str:
    """Render a term in the concrete grammar.

    Binder names come from the hints on :class:`Mu` unless ``canonical`` is set,
    in which case binders are named ``v0, v1, ...`` by nesting depth.  A name is
    changed when keeping it would capture a free variable or shadow a binder
    still referenced inside.
    """
    return _pp(e, [], "top", canonical)


def _pick_name(body: Node, hint: str, env: list[str]) -> str:
    used = free_vars(body)
    used |= {env[-i] for i in _loose_indices(body, 1) if 0 < i <= len(env)}
    if hint not in used:
        return hint
    base = hint.rstrip("0123456789'") or "v"
    for k in itertools.count(1):
        cand = f"{base}{k}"
        if cand not in used:
            return cand
    raise AssertionError


def _pp(e: Node, env: list[str], ctx: str, canonical: bool) -> str:
    match e:
        case Var(n):
            return n
        case Bound(i):
            if i >= len(env):
                return f"#{i}"
            return env[-1 - i]
        case Prefix(a, b):
            return f"{a}.{_pp(b, env, 'prefix', canonical)}"
        case Sum(l, r):
            s = f"{_pp(l, env, 'left', canonical)} + {_pp(r, env, 'right', canonical)}"
            return f"({s})" if ctx in ("prefix", "right") else s
        case Choice(l, p, r):
            s = f"{_pp(l, env, 'left', canonical)} +[{_fmt_prob(p)}] {_pp(r, env, 'right', canonical)}"
            return f"({s})" if ctx in ("prefix", "right") else s
        case Mu(b, n):
            name = _pick_name(b, f"v{len(env)}" if canonical else n, env)
            s = f"mu {name}. {_pp(b, env + [name], 'top', canonical)}"
            return s if ctx == "top" else f"({s})"
    raise TypeError(f"not a term: {e!r}")


# -- parsing -------------------------------------------------------------------

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+|\#[^\n]*)
  | (?P<choice>\+\s*\[(?P<prob>[^\]]*)\])
  | (?P<plus>\+)
  | (?P<dot>\.)
  | (?P<lpar>\()
  | (?P<rpar>\))
  | (?P<ident>[A-Za-z_][A-Za-z0-9_']*)
    """,
    re.VERBOSE,
)


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    toks = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise TermSyntaxError(f"unexpected character {text[pos]!r}", pos, (), text)
        kind = m.lastgroup
        if kind == "prob":
            kind = "choice"
        if kind != "ws":
            value = m.group("prob") if kind == "choice" else m.group(0)
            toks.append((kind, value, m.start()))
        pos = m.end()
    toks.append(("eof", "", len(text)))
    return toks


def parse_probability(literal: str) -> Fraction:
    """Exact value of a ``p/q`` or decimal literal."""
    try:
        r = Fraction(literal.strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise ValueError(f"bad probability literal {literal!r}") from exc
    if not 0 <= r <= 1:
        raise ProbabilityRangeError(f"probability {r} outside [0, 1]")
    return r


class _Parser:
    def __init__(self, text: str, probabilistic: bool):
        self.text = text
        self.toks = _tokenize(text)
        self.i = 0
        self.prob = probabilistic

    def peek(self, k: int = 0):
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def fail(self, expected: Sequence[str]):
        kind, value, pos = self.peek()
        what = "end of input" if kind == "eof" else repr(value)
        raise TermSyntaxError(f"unexpected {what}", pos, expected, self.text)

    def expect(self, kind: str, expected: str) -> str:
        tok = self.peek()
        if tok[0] != kind:
            self.fail([expected])
        self.i += 1
        return tok[1]

    def parse(self) -> Node:
        t = self.term()
        if self.peek()[0] != "eof":
            self.fail(["'+[r]'" if self.prob else "'+'", "end of input"])
        return t

    def term(self) -> Node:
        if self.peek()[0] == "ident" and self.peek()[1] == "mu":
            return self.mu()
        return self.sum()

    def mu(self) -> Node:
        self.i += 1
        kind, name, _ = self.peek()
        if kind != "ident" or name == "mu":
            self.fail(["variable name"])
        self.i += 1
        self.expect("dot", "'.'")
        return Mu.bind(name, self.term())

    def sum(self) -> Node:
        left = self.unit()
        while True:
            kind, value, pos = self.peek()
            if kind == "plus":
                if self.prob:
                    raise TermSyntaxError("bare '+' in probabilistic term", pos, ["'+[r]'"], self.text)
                self.i += 1
                left = Sum(left, self.unit())
            elif kind == "choice":
                if not self.prob:
                    raise TermSyntaxError("'+[r]' in classical term", pos, ["'+'"], self.text)
                self.i += 1
                try:
                    r = parse_probability(value)
                except ProbabilityRangeError:
                    raise
                except ValueError:
                    raise TermSyntaxError(f"bad probability {value!r}", pos, ["rational p/q or decimal"], self.text)
                left = Choice(left, r, self.unit())
            else:
                return left

    def unit(self) -> Node:
        kind, value, pos = self.peek()
        if kind == "ident" and value == "mu":
            return self.mu()
        if kind == "ident":
            self.i += 1
            if self.peek()[0] == "dot":
                if not ACTION_RE.match(value):
                    raise TermSyntaxError(
                        f"bad action label {value!r}", pos, ["lowercase alphanumeric action"], self.text
                    )
                self.i += 1
                return Prefix(value, self.unit())
            return Var(value)
        if kind == "lpar":
            self.i += 1
            t = self.term()
            self.expect("rpar", "')'")
            return t
        self.fail(["action", "variable", "'('", "'mu'"])
        raise AssertionError


def parse_term(text: str, *, closed: bool = True) -> Node:
    """Parse a classical process term.

    With ``closed=False`` free variables are allowed (contexts and open
    equations in derivations); guardedness of bound variables is always checked.
    """
    t = _Parser(text, probabilistic=False).parse()
    check_well_formed(t, closed=closed)
    return t


def parse_pterm(text: str, *, closed: bool = True) -> Node:
    """Parse a probabilistic process term (choice written ``e1 +[r] e2``)."""
    t = _Parser(text, probabilistic=True).parse()
    check_well_formed(t, closed=closed)
    return t
