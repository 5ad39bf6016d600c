"""Sierpinski gasket by recursive midpoint subdivision of a triangle.

Independent of the package: no contractions, no LTS, just geometry.
"""

import numpy as np

VERTICES = np.array([[0.0, 0.0], [1.0, 0.0], [0.5, np.sqrt(3) / 2]])


def subdivide(level: int, vertices=VERTICES) -> np.ndarray:
    """All corner points of the 3**level triangles left after ``level`` rounds."""
    tris = vertices[None, :, :]
    for _ in range(level):
        a, b, c = tris[:, 0], tris[:, 1], tris[:, 2]
        ab, bc, ca = (a + b) / 2, (b + c) / 2, (c + a) / 2
        tris = np.concatenate(
            [
                np.stack([a, ab, ca], axis=1),
                np.stack([ab, b, bc], axis=1),
                np.stack([ca, bc, c], axis=1),
            ]
        )
    return np.unique(tris.reshape(-1, 2), axis=0)


def in_gasket(x: float, y: float, level: int, vertices=VERTICES) -> bool:
    """Is (x, y) inside one of the level-``level`` triangles (closed)?"""
    a, b, c = vertices

    def inside(p, a, b, c):
        def cross(o, u, v):
            return (u[0] - o[0]) * (v[1] - o[1]) - (u[1] - o[1]) * (v[0] - o[0])

        d1, d2, d3 = cross(a, b, p), cross(b, c, p), cross(c, a, p)
        eps = 1e-12
        has_neg = d1 < -eps or d2 < -eps or d3 < -eps
        has_pos = d1 > eps or d2 > eps or d3 > eps
        return not (has_neg and has_pos)

    p = (x, y)
    if not inside(p, a, b, c):
        return False
    if level == 0:
        return True
    ab, bc, ca = (a + b) / 2, (b + c) / 2, (c + a) / 2
    return any(in_gasket(x, y, level - 1, np.array(t)) for t in ((a, ab, ca), (ab, b, bc), (ca, bc, c)))
