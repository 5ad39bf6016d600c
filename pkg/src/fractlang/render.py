"""Rasterize point clouds into binary PPM (sets) and PGM (densities) images."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .fractal import CompactApprox

__all__ = ["RenderConfig", "render_set", "render_measure", "pixel_of", "resolve_bbox", "write_image", "read_pnm"]

FOREGROUND = (255, 0, 0)
BACKGROUND = (255, 255, 255)
AUTO_MARGIN = 0.02


@dataclass(frozen=True)
class RenderConfig:
    """Image geometry.  ``bbox`` is ``(xmin, ymin, xmax, ymax)`` or ``"auto"``."""

    width: int = 512
    height: int = 512
    bbox: tuple[float, float, float, float] | str = "auto"
    depth: int = 8
    samples: int = 100_000
    truncation: int = 30
    output: str | None = None

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise ValueError("image dimensions must be positive")
        if self.bbox != "auto":
            xmin, ymin, xmax, ymax = (float(v) for v in self.bbox)
            if not (xmax > xmin and ymax > ymin):
                raise ValueError(f"degenerate bounding box {self.bbox}")
            object.__setattr__(self, "bbox", (xmin, ymin, xmax, ymax))


def _as_plane(points) -> np.ndarray:
    pts = points.points if isinstance(points, CompactApprox) else np.asarray(points, dtype=np.float64)
    if pts.ndim == 1:
        pts = pts.reshape(-1, 1)
    if pts.shape[1] == 1:
        # one-dimensional sets sit on a horizontal strip
        pts = np.column_stack([pts[:, 0], np.zeros(len(pts))])
    elif pts.shape[1] != 2:
        raise ValueError(f"can only render dimension 1 or 2, got {pts.shape[1]}")
    return pts


def resolve_bbox(pts: np.ndarray, cfg: RenderConfig) -> tuple[float, float, float, float]:
    """Explicit box, or the tight box grown by 2% (unit padding for flat axes)."""
    if cfg.bbox != "auto":
        return cfg.bbox
    lo = pts.min(axis=0)
    hi = pts.max(axis=0)
    span = hi - lo
    pad = np.where(span > 0, span * AUTO_MARGIN, 0.5)
    lo, hi = lo - pad, hi + pad
    return float(lo[0]), float(lo[1]), float(hi[0]), float(hi[1])


def pixel_of(pts: np.ndarray, bbox, width: int, height: int) -> tuple[np.ndarray, np.ndarray]:
    """Column and row indices, row 0 at the top of the image."""
    xmin, ymin, xmax, ymax = bbox
    col = np.floor((pts[:, 0] - xmin) / (xmax - xmin) * width).astype(np.int64)
    row = np.floor((pts[:, 1] - ymin) / (ymax - ymin) * height).astype(np.int64)
    col = np.clip(col, 0, width - 1)
    row = height - 1 - np.clip(row, 0, height - 1)
    return col, row


def _occupancy(points, cfg: RenderConfig) -> np.ndarray:
    pts = _as_plane(points)
    col, row = pixel_of(pts, resolve_bbox(pts, cfg), cfg.width, cfg.height)
    counts = np.zeros(cfg.height * cfg.width, dtype=np.int64)
    np.add.at(counts, row * cfg.width + col, 1)
    return counts.reshape(cfg.height, cfg.width)


def render_set(points, cfg: RenderConfig) -> bytes:
    """Binary PPM: red where at least one point lands, white elsewhere."""
    hit = _occupancy(points, cfg) > 0
    img = np.empty((cfg.height, cfg.width, 3), dtype=np.uint8)
    img[...] = BACKGROUND
    img[hit] = FOREGROUND
    return f"P6\n{cfg.width} {cfg.height}\n255\n".encode("ascii") + img.tobytes()


def render_measure(samples, cfg: RenderConfig) -> bytes:
    """Binary PGM of the sample histogram, log-scaled so the fullest pixel is 255."""
    counts = _occupancy(samples, cfg)
    peak = counts.max()
    gray = np.rint(255.0 * np.log1p(counts) / np.log1p(peak)).astype(np.uint8)
    return f"P5\n{cfg.width} {cfg.height}\n255\n".encode("ascii") + gray.tobytes()


def write_image(data: bytes, path) -> None:
    Path(path).write_bytes(data)


def read_pnm(data: bytes) -> np.ndarray:
    """Decode the images produced here (``P5`` or ``P6`` with maxval 255)."""
    magic, dims, maxval, body = data.split(b"\n", 3)
    w, h = (int(v) for v in dims.split())
    if maxval != b"255" or magic not in (b"P5", b"P6"):
        raise ValueError("unsupported image")
    arr = np.frombuffer(body, dtype=np.uint8)
    return arr.reshape(h, w, 3) if magic == b"P6" else arr.reshape(h, w)
