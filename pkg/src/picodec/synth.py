"""Deterministic synthetic test images.

The benchmark harness accepts any image; this module provides a reproducible
piecewise-smooth scene (gradient background, soft blob, sharp-edged disks, a
dark line) so experiments run without binary fixtures in the repository.
"""
from __future__ import annotations

import numpy as np

__all__ = ["synthetic_scene"]


def synthetic_scene(size: int = 256, lo: float = 0.1, hi: float = 0.9) -> np.ndarray:
    """Structured grayscale scene rescaled to the closed range [lo, hi]."""
    if size < 2:
        raise ValueError("size must be at least 2")
    if not 0 <= lo < hi <= 1:
        raise ValueError(f"need 0 <= lo < hi <= 1, got lo={lo}, hi={hi}")
    yy, xx = np.mgrid[0:size, 0:size] / (size - 1)
    img = 0.35 + 0.30 * xx + 0.20 * yy
    img += 0.28 * np.exp(-((xx - 0.30) ** 2 + (yy - 0.62) ** 2) / 0.02)
    disk = (xx - 0.66) ** 2 + (yy - 0.30) ** 2 < 0.19**2
    img = np.where(disk, 0.15 + 0.55 * yy, img)
    dot = (xx - 0.74) ** 2 + (yy - 0.76) ** 2 < 0.09**2
    img = np.where(dot, 0.95, img)
    line = np.abs(xx + 0.35 * yy - 0.55) < 0.012
    img = np.where(line, 0.04, img)
    radius = np.sqrt((xx - 0.22) ** 2 + (yy - 0.22) ** 2)
    rings = 0.5 + 0.5 * np.cos(80 * radius)
    img = np.where(radius < 0.18, 0.25 + 0.5 * rings, img)
    stripes = 0.5 + 0.5 * np.sin(60 * (xx + yy))
    patch = (np.abs(xx - 0.52) < 0.10) & (np.abs(yy - 0.85) < 0.10)
    img = np.where(patch, 0.2 + 0.6 * stripes, img)
    img = (img - img.min()) / (img.max() - img.min())
    return lo + (hi - lo) * img
