"""Named-syntax reference implementations used as test oracles.

Terms are nested tuples: ("var", x), ("pre", a, e), ("sum", l, r), ("mu", x, e).
Nothing here touches the locally nameless machinery of the package.
"""

import itertools
import random

from fractlang.terms import Mu, Prefix, Sum, Var


def free(t):
    tag = t[0]
    if tag == "var":
        return {t[1]}
    if tag == "pre":
        return free(t[2])
    if tag == "sum":
        return free(t[1]) | free(t[2])
    return free(t[2]) - {t[1]}


def all_names(t):
    tag = t[0]
    if tag == "var":
        return {t[1]}
    if tag == "pre":
        return all_names(t[2])
    if tag == "sum":
        return all_names(t[1]) | all_names(t[2])
    return {t[1]} | all_names(t[2])


_counter = itertools.count()


def subst(t, g, v):
    """Textbook capture-avoiding substitution t[g/v] with binder renaming."""
    tag = t[0]
    if tag == "var":
        return g if t[1] == v else t
    if tag == "pre":
        return ("pre", t[1], subst(t[2], g, v))
    if tag == "sum":
        return ("sum", subst(t[1], g, v), subst(t[2], g, v))
    x, body = t[1], t[2]
    if x == v or v not in free(body):
        return t
    if x in free(g):
        avoid = free(g) | all_names(body) | {v}
        y = x
        while y in avoid:
            y = f"r{next(_counter)}"
        body = subst(body, ("var", y), x)
        x = y
    return ("mu", x, subst(body, g, v))


def to_node(t):
    tag = t[0]
    if tag == "var":
        return Var(t[1])
    if tag == "pre":
        return Prefix(t[1], to_node(t[2]))
    if tag == "sum":
        return Sum(to_node(t[1]), to_node(t[2]))
    return Mu.bind(t[1], to_node(t[2]))


def guarded(t):
    """Every occurrence of a bound variable has a prefix between it and its binder.

    Checked by walking every root-to-leaf path and remembering, per binder,
    whether a prefix has been crossed since.
    """

    def walk(t, env):
        tag = t[0]
        if tag == "var":
            return env.get(t[1], True)
        if tag == "pre":
            return walk(t[2], {k: True for k in env})
        if tag == "sum":
            return walk(t[1], env) and walk(t[2], env)
        return walk(t[2], {**env, t[1]: False})

    return walk(t, {})


def random_named(rng: random.Random, depth: int = 4, names="uvw", actions="abc"):
    """Arbitrary named term (possibly open, unguarded, with shadowing)."""
    r = rng.random()
    if depth == 0 or r < 0.2:
        return ("var", rng.choice(names))
    if r < 0.45:
        return ("pre", rng.choice(actions), random_named(rng, depth - 1, names, actions))
    if r < 0.7:
        return ("sum", random_named(rng, depth - 1, names, actions), random_named(rng, depth - 1, names, actions))
    return ("mu", rng.choice(names), random_named(rng, depth - 1, names, actions))
