"""Regular subfractals: contraction interpretations and the GIFS fixed point.

An LTS together with an affine contraction for every action is a
directed-graph IFS.  Its solution assigns to every state the compact set of
limit points of the streams that state emits, and is the unique fixed point of
the system operator

    (F K)_x = union over edges x --a--> y of sigma_a(K_y).

Compact sets are approximated by finite point clouds, so Hausdorff distances
between approximations are computed exactly (up to float rounding).
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Iterator, Mapping, Sequence

import numpy as np
from scipy.spatial import cKDTree

from .lts import Lts

__all__ = [
    "AffineContraction",
    "Interpretation",
    "CompactApprox",
    "SolutionVector",
    "NotAContraction",
    "UnknownAction",
    "DimensionMismatch",
    "certify_contraction",
    "eval_stream",
    "system_step",
    "iterate",
    "solve",
    "check_solution",
    "hausdorff",
    "product_hausdorff",
    "CantorInterpretation",
    "cantor_interpretation",
]

CONTRACTION_MARGIN = 1e-9


class NotAContraction(ValueError):
    def __init__(self, sigma_max: float):
        super().__init__(f"largest singular value {sigma_max!r} is not below 1")
        self.sigma_max = sigma_max


class UnknownAction(KeyError):
    pass


class DimensionMismatch(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class AffineContraction:
    """``x -> linear @ x + offset`` with ``coeff`` >= the operator 2-norm of ``linear``."""

    linear: np.ndarray
    offset: np.ndarray
    coeff: float

    @property
    def dim(self) -> int:
        return self.offset.shape[0]

    def __call__(self, points: np.ndarray) -> np.ndarray:
        return points @ self.linear.T + self.offset

    def fixed_point(self) -> np.ndarray:
        return np.linalg.solve(np.eye(self.dim) - self.linear, self.offset)


def certify_contraction(linear, offset) -> AffineContraction:
    """Build an :class:`AffineContraction`, certifying its Lipschitz constant.

    The constant is the largest singular value, the square root of the top
    eigenvalue of ``A^T A`` (symmetric, so ``eigvalsh`` is accurate to a few
    ulps).  Raises :class:`NotAContraction` when it is not below ``1 - 1e-9``.
    """
    a = np.atleast_2d(np.asarray(linear, dtype=np.float64))
    b = np.atleast_1d(np.asarray(offset, dtype=np.float64))
    d = b.shape[0]
    if a.shape != (d, d) or not 1 <= d <= 3:
        raise DimensionMismatch(f"linear part {a.shape} does not fit offset of length {d} (need d <= 3)")
    top = float(np.linalg.eigvalsh(a.T @ a)[-1])
    sigma = math.sqrt(max(top, 0.0))
    if sigma >= 1 - CONTRACTION_MARGIN:
        raise NotAContraction(sigma)
    a.setflags(write=False)
    b.setflags(write=False)
    return AffineContraction(a, b, sigma)


@dataclass(frozen=True)
class Interpretation:
    dim: int
    maps: Mapping[str, AffineContraction]

    def __post_init__(self):
        for a, m in self.maps.items():
            if m.dim != self.dim:
                raise DimensionMismatch(f"map {a!r} has dimension {m.dim}, expected {self.dim}")

    def __getitem__(self, a: str) -> AffineContraction:
        try:
            return self.maps[a]
        except KeyError:
            raise UnknownAction(a) from None

    def max_coeff(self, actions: Iterable[str] | None = None) -> float:
        actions = self.maps if actions is None else actions
        return max((self[a].coeff for a in actions), default=0.0)

    @classmethod
    def from_matrices(cls, maps_by_action: Mapping[str, tuple[Sequence, Sequence]]) -> "Interpretation":
        maps = {a: certify_contraction(lin, off) for a, (lin, off) in maps_by_action.items()}
        dims = {m.dim for m in maps.values()}
        if len(dims) != 1:
            raise DimensionMismatch(f"mixed dimensions {sorted(dims)}")
        return cls(dims.pop(), maps)

    @classmethod
    def parse(cls, text: str) -> "Interpretation":
        """Read the line format ``dim d`` / ``map a : <row-major linear> | <offset>``."""
        dim = None
        maps_by_action = {}
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            head, _, rest = line.partition(" ")
            if head == "dim":
                dim = int(rest)
            elif head == "map":
                name, sep, body = rest.partition(":")
                lin, sep2, off = body.partition("|")
                if not sep or not sep2:
                    raise ValueError(f"line {lineno}: expected 'map <a> : <linear> | <offset>'")
                if dim is None:
                    raise ValueError(f"line {lineno}: 'dim' must come first")
                nums = [float(Fraction(t)) for t in lin.split()]
                shift = [float(Fraction(t)) for t in off.split()]
                if len(nums) != dim * dim or len(shift) != dim:
                    raise DimensionMismatch(f"line {lineno}: expected {dim * dim} + {dim} numbers")
                maps_by_action[name.strip()] = (np.array(nums).reshape(dim, dim), shift)
            else:
                raise ValueError(f"line {lineno}: unknown directive {head!r}")
        if dim is None or not maps_by_action:
            raise ValueError("interpretation needs a 'dim' line and at least one 'map'")
        return cls.from_matrices(maps_by_action)

    @classmethod
    def load(cls, path) -> "Interpretation":
        return cls.parse(Path(path).read_text(encoding="utf-8"))

    def dumps(self) -> str:
        lines = [f"dim {self.dim}"]
        for a, m in sorted(self.maps.items()):
            lin = " ".join(repr(float(v)) for v in m.linear.ravel())
            off = " ".join(repr(float(v)) for v in m.offset)
            lines.append(f"map {a} : {lin} | {off}")
        return "\n".join(lines) + "\n"


def eval_stream(interp: Interpretation, word: Sequence[str], base) -> np.ndarray:
    """``sigma_{a1}(sigma_{a2}(... sigma_{an}(base)))``: the last letter acts first."""
    p = np.asarray(base, dtype=np.float64).reshape(interp.dim)
    for a in reversed(word):
        m = interp[a]
        p = m.linear @ p + m.offset
    return p


# -- compact approximations ------------------------------------------------------


@dataclass(frozen=True, eq=False)
class CompactApprox:
    """A finite point cloud standing in for a nonempty compact set.

    ``guarantee`` bounds the Hausdorff distance to the set being approximated.
    """

    points: np.ndarray
    guarantee: float = 0.0

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=np.float64)
        if pts.ndim == 1:
            pts = pts.reshape(-1, 1)
        if pts.ndim != 2 or pts.shape[0] == 0:
            raise ValueError("a compact approximation needs at least one point")
        object.__setattr__(self, "points", pts)

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    def __len__(self):
        return self.points.shape[0]


def _directed_brute(a: np.ndarray, b: np.ndarray) -> float:
    worst = 0.0
    chunk = max(1, 4_000_000 // max(1, len(b)))
    for i in range(0, len(a), chunk):
        diff = a[i : i + chunk, None, :] - b[None, :, :]
        d = np.sqrt(np.einsum("ijk,ijk->ij", diff, diff)).min(axis=1)
        worst = max(worst, float(d.max()))
    return worst


def _directed_tree(a: np.ndarray, b: np.ndarray) -> float:
    d, _ = cKDTree(b).query(a, k=1)
    return float(np.max(d))


def hausdorff(k1, k2, *, method: str = "auto") -> float:
    """Hausdorff distance between two finite point sets (or :class:`CompactApprox`).

    ``method`` is ``"brute"`` (all pairs), ``"tree"`` (k-d tree nearest
    neighbours) or ``"auto"`` (brute below four million pairs).
    """
    a = k1.points if isinstance(k1, CompactApprox) else np.asarray(k1, dtype=np.float64)
    b = k2.points if isinstance(k2, CompactApprox) else np.asarray(k2, dtype=np.float64)
    if a.ndim == 1:
        a = a.reshape(-1, 1)
    if b.ndim == 1:
        b = b.reshape(-1, 1)
    if a.shape[1] != b.shape[1]:
        raise DimensionMismatch(f"dimensions {a.shape[1]} and {b.shape[1]}")
    if len(a) == 0 or len(b) == 0:
        raise ValueError("Hausdorff distance is only defined for nonempty sets")
    if method == "auto":
        method = "brute" if len(a) * len(b) <= 4_000_000 else "tree"
    directed = {"brute": _directed_brute, "tree": _directed_tree}[method]
    return max(directed(a, b), directed(b, a))


def product_hausdorff(ks: Sequence, ls: Sequence) -> float:
    """Max-of-components Hausdorff distance between two vectors of compact sets."""
    if len(ks) != len(ls):
        raise DimensionMismatch("vectors of different length")
    return max(hausdorff(k, l) for k, l in zip(ks, ls))


# -- the system operator ----------------------------------------------------------


def _canonical(points: np.ndarray) -> np.ndarray:
    # lexicographically sorted, exact duplicates removed
    return np.unique(points, axis=0)


def _image(lts: Lts, interp: Interpretation, clouds: Sequence[np.ndarray], x: int) -> np.ndarray:
    parts = [interp[a](clouds[y]) for a, y in lts.out[x]]
    return _canonical(np.concatenate(parts, axis=0))


def system_step(lts: Lts, interp: Interpretation, clouds: Sequence[np.ndarray], threads: int = 1) -> list[np.ndarray]:
    """One application of the system operator to a vector of point clouds."""
    if not lts.is_productive():
        raise ValueError("system operator needs a productive LTS")
    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            return list(pool.map(lambda x: _image(lts, interp, clouds, x), range(len(lts))))
    return [_image(lts, interp, clouds, x) for x in range(len(lts))]


def _seed(interp: Interpretation, p0) -> np.ndarray:
    if p0 is None:
        p0 = np.zeros(interp.dim)
    return np.asarray(p0, dtype=np.float64).reshape(1, interp.dim)


def iterate(lts: Lts, interp: Interpretation, p0=None) -> Iterator[list[np.ndarray]]:
    """Endless iterates K(0), K(1), ... starting from the constant vector ``{p0}``."""
    clouds = [_seed(interp, p0)] * len(lts)
    while True:
        yield clouds
        clouds = system_step(lts, interp, clouds)


@dataclass
class SolutionVector:
    """Depth-``n`` approximation of the solution, one component per LTS state."""

    components: list[CompactApprox]
    depth: int
    coeff: float
    seed_distance: float
    snap: float | None = None
    history: list[float] = field(default_factory=list, repr=False)

    def __getitem__(self, x: int) -> CompactApprox:
        return self.components[x]

    def __len__(self):
        return len(self.components)


def solve(
    lts: Lts,
    interp: Interpretation,
    depth: int,
    p0=None,
    *,
    snap: float | None = None,
    max_points: int = 1_000_000,
    threads: int = 1,
) -> SolutionVector:
    """Iterate the system operator ``depth`` times from the constant vector ``{p0}``.

    Each component's ``guarantee`` is the a-priori Banach bound
    ``c**n * D / (1 - c)`` with ``c`` the largest contraction coefficient on
    the LTS's actions and ``D`` the distance between the first two iterates.

    With ``snap`` set, points are rounded to a grid of that pitch after every
    iteration; a rounding moves a point by at most half the grid diagonal and
    later iterations shrink that error by ``c``, which is added to the bound.
    Without ``snap``, snapping switches itself on (pitch: 1/4096 of the cloud's
    extent) once a component exceeds ``max_points``.
    """
    if depth < 0:
        raise ValueError("depth must be nonnegative")
    if not lts.is_productive():
        raise ValueError("solve needs a productive LTS")
    c = interp.max_coeff(lts.alphabet)
    seed = _seed(interp, p0)
    clouds = [seed] * len(lts)
    first = [_image(lts, interp, clouds, x) for x in range(len(lts))]
    dist0 = max(hausdorff(seed, k) for k in first)

    snap_error = 0.0
    pitch = snap
    for _ in range(depth):
        clouds = system_step(lts, interp, clouds, threads)
        if pitch is None and max(len(k) for k in clouds) > max_points:
            allpts = np.concatenate(clouds)
            pitch = float(np.max(allpts.max(axis=0) - allpts.min(axis=0))) / 4096 or 1e-12
        snap_error *= c
        if pitch is not None:
            clouds = [_canonical(np.round(k / pitch) * pitch) for k in clouds]
            snap_error += pitch * math.sqrt(interp.dim) / 2
    bound = (c**depth) * dist0 / (1 - c) + snap_error
    comps = [CompactApprox(k, bound) for k in clouds]
    return SolutionVector(comps, depth, c, dist0, pitch)


def check_solution(lts: Lts, interp: Interpretation, sv) -> float:
    """Largest Hausdorff gap between ``sv[x]`` and the union of its images along edges."""
    clouds = [k.points if isinstance(k, CompactApprox) else np.asarray(k, dtype=np.float64) for k in sv]
    clouds = [k.reshape(-1, interp.dim) for k in clouds]
    return max(hausdorff(clouds[x], _image(lts, interp, clouds, x)) for x in range(len(lts)))


# -- the symbolic Cantor interpretation ------------------------------------------------


class CantorInterpretation:
    """Every action prepends itself to a stream: ``sigma_a(a1, a2, ...) = (a, a1, a2, ...)``.

    On streams with the metric ``2**-n`` (``n`` = length of the common prefix)
    these maps are contractions with coefficient 1/2, and the solution of an
    LTS is ``x -> str(x)``.  Truncating at depth ``n`` replaces each stream by
    its first ``n`` letters, so the depth-``n`` solution is the set of
    length-``n`` traces.

    The stream metric built from the coefficients of a real interpretation
    (the product of the coefficients along the common prefix) is only needed
    to show the solution is compact; it is never computed here.
    """

    coeff = 0.5

    def __init__(self, alphabet: Iterable[str]):
        self.alphabet = tuple(sorted(set(alphabet)))
        if not self.alphabet:
            raise ValueError("the alphabet must be nonempty")

    def apply(self, a: str, words: Iterable[tuple[str, ...]]) -> set[tuple[str, ...]]:
        if a not in self.alphabet:
            raise UnknownAction(a)
        return {(a,) + w for w in words}

    def solve(self, lts: Lts, depth: int) -> list[frozenset[tuple[str, ...]]]:
        comps: list[frozenset] = [frozenset({()})] * len(lts)
        for _ in range(depth):
            comps = [
                frozenset().union(*(self.apply(a, comps[y]) for a, y in lts.out[x])) for x in range(len(lts))
            ]
        return comps


def cantor_interpretation(alphabet: Iterable[str]) -> CantorInterpretation:
    return CantorInterpretation(alphabet)
