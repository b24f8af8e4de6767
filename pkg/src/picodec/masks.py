"""Pixel selection from nonnegative criterion fields.

Three routes from a per-pixel "importance" field to a pixel mask: exact top-k
(hard thresholding), Floyd-Steinberg error diffusion of the normalized field
(soft thresholding), and weighted Lloyd stippling (soft thresholding without
the raster-order bias of error diffusion).
"""
from __future__ import annotations

import numpy as np

from .image import as_image, laplacian

__all__ = [
    "as_field",
    "criterion_g",
    "criterion_e",
    "hard_threshold_select",
    "hard_threshold_subset",
    "floyd_steinberg_dither",
    "lloyd_stipple",
]


def as_field(field) -> np.ndarray:
    """Coerce to a 2D float64 criterion field; values must be finite and >= 0."""
    arr = np.asarray(field, dtype=np.float64)
    if arr.ndim != 2 or arr.size == 0:
        raise ValueError(f"expected a non-empty 2D field, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("criterion field contains non-finite values")
    if arr.min() < 0:
        raise ValueError("criterion field contains negative values")
    return arr


def criterion_g(u_n: np.ndarray, f: np.ndarray, alpha: float) -> np.ndarray:
    """Pointwise selection weight |u_n - f + alpha * laplacian(f)|."""
    u_n = as_image(u_n)
    f = as_image(f)
    if u_n.shape != f.shape:
        raise ValueError(f"dimension mismatch: {u_n.shape} vs {f.shape}")
    return np.abs(u_n - f + alpha * laplacian(f))


def criterion_e(u_n: np.ndarray) -> np.ndarray:
    """Pointwise selection weight |laplacian(u_n)| (data-free variant)."""
    return np.abs(laplacian(as_image(u_n)))


def hard_threshold_select(field: np.ndarray, count: int) -> np.ndarray:
    """Mask of the `count` largest field values, ties to the lower row-major index."""
    field = as_field(field)
    n = field.size
    if not 1 <= count <= n:
        raise ValueError(f"count {count} out of range 1..{n}")
    order = np.argsort(-field.ravel(), kind="stable")
    mask = np.zeros(n, dtype=bool)
    mask[order[:count]] = True
    return mask.reshape(field.shape)


def hard_threshold_subset(field: np.ndarray, count: int, allowed: np.ndarray) -> np.ndarray:
    """Top-`count` selection restricted to `allowed` pixels, same tie rule."""
    field = as_field(field)
    allowed = np.asarray(allowed, dtype=bool)
    if allowed.shape != field.shape:
        raise ValueError(f"dimension mismatch: {allowed.shape} vs {field.shape}")
    avail = int(allowed.sum())
    if not 1 <= count <= avail:
        raise ValueError(f"count {count} out of range 1..{avail}")
    key = np.where(allowed.ravel(), -field.ravel(), np.inf)
    order = np.argsort(key, kind="stable")
    mask = np.zeros(field.size, dtype=bool)
    mask[order[:count]] = True
    return mask.reshape(field.shape)


def _normalize_to_density(field: np.ndarray, density: float) -> np.ndarray:
    """Scale and clip the field so the clipped mean hits the target density.

    p = clip(s * field, 0, 1) with s solved exactly from the sorted values (the
    clipped mean is piecewise linear and increasing in s).  When even full
    saturation of every positive pixel cannot reach the density, the saturated
    field is returned as the closest achievable normalization.
    """
    flat = field.ravel()
    n = flat.size
    positive = np.sort(flat[flat > 0])[::-1]
    nnz = positive.size
    target = density * n
    if target >= nnz:
        return (field > 0).astype(np.float64)
    total = positive.sum()
    # with k pixels clipped at 1, mean*n = k + s * (sum of the rest)
    ks = np.arange(nnz, dtype=np.float64)
    tails = total - np.concatenate(([0.0], np.cumsum(positive[:-1])))
    with np.errstate(divide="ignore", invalid="ignore"):
        scales = (target - ks) / tails
    upper = 1.0 / positive  # scale at which positive[k] starts clipping
    lower = np.concatenate(([0.0], upper[:-1]))
    valid = (scales > lower) & (scales * positive <= 1.0) & (target > ks)
    idx = np.flatnonzero(valid)
    if idx.size > 0:
        s = float(scales[idx[0]])
    else:
        # float-boundary fallback: bisect the clipped mean
        lo, hi = 0.0, float(1.0 / positive[-1]) + 1.0
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if np.clip(flat * mid, 0.0, 1.0).mean() < density:
                lo = mid
            else:
                hi = mid
        s = hi
    return np.clip(field * s, 0.0, 1.0)


def floyd_steinberg_dither(field: np.ndarray, density: float) -> np.ndarray:
    """Halftone the normalized field into a mask of approximate mean `density`.

    Plain raster scan (left to right, top to bottom, no serpentine), threshold
    0.5, error weights 7/16 right, 3/16 down-left, 5/16 down, 1/16 down-right.
    Error diffusion conserves total mass up to boundary leakage, so the
    selected fraction stays within 2/sqrt(npixels) of the target.
    """
    field = as_field(field)
    if not 0 < density < 1:
        raise ValueError(f"density must be in (0, 1), got {density}")
    if not np.any(field > 0):
        raise ValueError("degenerate criterion: field is identically zero")
    p = _normalize_to_density(field, density)
    height, width = p.shape
    rows = p.tolist()
    out = np.zeros((height, width), dtype=bool)
    for y in range(height):
        row = rows[y]
        below = rows[y + 1] if y + 1 < height else None
        hits = []
        for x in range(width):
            value = row[x]
            if value >= 0.5:
                hits.append(x)
                err = value - 1.0
            else:
                err = value
            if x + 1 < width:
                row[x + 1] += err * 0.4375  # 7/16
            if below is not None:
                if x > 0:
                    below[x - 1] += err * 0.1875  # 3/16
                below[x] += err * 0.3125  # 5/16
                if x + 1 < width:
                    below[x + 1] += err * 0.0625  # 1/16
        out[y, hits] = True
    return out


def _nearest_site(py, px, sy, sx, chunk=4096):
    # Integer squared distances, argmin first occurrence = lowest site index.
    out = np.empty(py.size, dtype=np.int64)
    for start in range(0, py.size, chunk):
        stop = min(start + chunk, py.size)
        dy = py[start:stop, None] - sy[None, :]
        dx = px[start:stop, None] - sx[None, :]
        out[start:stop] = np.argmin(dy * dy + dx * dx, axis=1)
    return out


def lloyd_stipple(field: np.ndarray, count: int, seed: int, iters: int = 30) -> np.ndarray:
    """Place exactly `count` pixels by weighted Lloyd relaxation on the field.

    Sites are seeded by mass-proportional sampling without replacement.  Each
    round assigns every pixel to its nearest site (ties to the lower site
    index), moves each site to the field-weighted centroid of its cell rounded
    to the nearest pixel, and reseeds any zero-mass cell at the strongest
    pixel not already holding a site.  Coinciding sites are topped up at the
    end with the highest-field unselected pixels, so the returned mask always
    has exactly `count` set pixels.
    """
    field = as_field(field)
    height, width = field.shape
    n = field.size
    if not 1 <= count <= n:
        raise ValueError(f"count {count} out of range 1..{n}")
    flat = field.ravel()
    total = flat.sum()
    if total <= 0:
        raise ValueError("zero-mass criterion field")
    nz = np.flatnonzero(flat > 0)
    rng = np.random.default_rng(int(seed))
    m = min(count, nz.size)
    chosen = rng.choice(nz, size=m, replace=False, p=flat[nz] / total)
    sy = (chosen // width).astype(np.int64)
    sx = (chosen % width).astype(np.int64)
    py, px = np.divmod(np.arange(n, dtype=np.int64), width)

    for _ in range(iters):
        assign = _nearest_site(py, px, sy, sx)
        mass = np.bincount(assign, weights=flat, minlength=m)
        wy = np.bincount(assign, weights=flat * py, minlength=m)
        wx = np.bincount(assign, weights=flat * px, minlength=m)
        occupied = mass > 0
        safe = np.maximum(mass, 1.0)
        sy = np.where(occupied, np.floor(wy / safe + 0.5), sy).astype(np.int64)
        sx = np.where(occupied, np.floor(wx / safe + 0.5), sx).astype(np.int64)
        empties = np.flatnonzero(~occupied)
        if empties.size > 0:
            residual = flat.copy()
            residual[sy * width + sx] = 0.0
            for site in empties:
                spot = int(np.argmax(residual))
                sy[site], sx[site] = divmod(spot, width)
                residual[spot] = 0.0

    mask = np.zeros(n, dtype=bool)
    mask[sy * width + sx] = True
    shortfall = count - int(mask.sum())
    if shortfall > 0:
        mask |= hard_threshold_subset(field, shortfall, ~mask.reshape(field.shape)).ravel()
    return mask.reshape(field.shape)
