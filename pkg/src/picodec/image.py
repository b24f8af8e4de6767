"""Grayscale images on a regular grid: file I/O, synthetic noise, stencils, metrics.

An image is a 2D float64 numpy array in row-major layout with intensities
canonically in [0, 1].  PGM (P2/P5) is the native interchange format; 8-bit
grayscale PNG is supported through Pillow behind the same functions.
"""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

__all__ = [
    "PGMParseError",
    "NoiseSpec",
    "as_image",
    "quantize8",
    "load_pgm",
    "save_pgm",
    "load_png",
    "save_png",
    "load_image",
    "save_image",
    "add_gaussian_noise",
    "laplacian",
    "rmse8",
]


class PGMParseError(ValueError):
    """Raised when a PNM file cannot be parsed."""


@dataclass(frozen=True)
class NoiseSpec:
    """Additive Gaussian noise: standard deviation on the [0, 1] scale plus seed."""

    sigma: float
    seed: int = 0

    def __post_init__(self) -> None:
        if not np.isfinite(self.sigma) or self.sigma < 0:
            raise ValueError(f"sigma must be finite and >= 0, got {self.sigma}")


def as_image(data) -> np.ndarray:
    """Coerce to a 2D float64 array and check it is non-empty and finite."""
    arr = np.asarray(data, dtype=np.float64)
    if arr.ndim != 2 or arr.size == 0:
        raise ValueError(f"expected a non-empty 2D image, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("image contains non-finite values")
    return arr


def quantize8(img: np.ndarray) -> np.ndarray:
    """Clip to [0, 1] and quantize to uint8, rounding halves up (0.5 -> 128)."""
    img = as_image(img)
    return np.floor(np.clip(img, 0.0, 1.0) * 255.0 + 0.5).astype(np.uint8)


def _header_tokens(data: bytes, count: int) -> tuple[list[bytes], int]:
    # PNM headers are whitespace-delimited tokens; '#' starts a comment to EOL.
    tokens: list[bytes] = []
    i, n = 0, len(data)
    while len(tokens) < count:
        while i < n and data[i : i + 1].isspace():
            i += 1
        if i < n and data[i : i + 1] == b"#":
            while i < n and data[i : i + 1] != b"\n":
                i += 1
            continue
        if i >= n:
            raise PGMParseError("malformed header: fewer fields than expected")
        j = i
        while j < n and not data[j : j + 1].isspace() and data[j : j + 1] != b"#":
            j += 1
        tokens.append(data[i:j])
        i = j
    # exactly one whitespace byte separates the header from a binary raster
    if i < n and data[i : i + 1].isspace():
        i += 1
    return tokens, i


def load_pgm(path) -> np.ndarray:
    """Read a P2 (ASCII) or P5 (binary) PGM, scaled by its maxval to [0, 1]."""
    data = Path(path).read_bytes()
    if len(data) < 2:
        raise PGMParseError("malformed header: file too short")
    magic = data[:2]
    if magic not in (b"P2", b"P5"):
        raise PGMParseError(f"unsupported format: magic {magic!r} (only P2/P5 supported)")
    tokens, offset = _header_tokens(data, 4)
    try:
        width, height, maxval = (int(t) for t in tokens[1:])
    except ValueError as exc:
        raise PGMParseError(f"malformed header: non-integer field in {tokens[1:]}") from exc
    if width <= 0 or height <= 0:
        raise PGMParseError(f"malformed header: bad dimensions {width}x{height}")
    if not 0 < maxval <= 65535:
        raise PGMParseError(f"malformed header: maxval {maxval} out of range 1..65535")
    npix = width * height
    if magic == b"P2":
        body = b"\n".join(
            line.split(b"#", 1)[0] for line in data[offset:].split(b"\n")
        )
        fields = body.split()
        if len(fields) < npix:
            raise PGMParseError(
                f"truncated payload: expected {npix} samples, found {len(fields)}"
            )
        try:
            arr = np.array([int(t) for t in fields[:npix]], dtype=np.float64)
        except ValueError as exc:
            raise PGMParseError("malformed payload: non-integer sample") from exc
        if arr.min() < 0 or arr.max() > maxval:
            raise PGMParseError("malformed payload: sample out of range")
    else:
        itemsize = 1 if maxval < 256 else 2
        need = npix * itemsize
        raster = data[offset : offset + need]
        if len(raster) < need:
            raise PGMParseError(
                f"truncated payload: expected {need} raster bytes, found {len(raster)}"
            )
        dtype = np.uint8 if itemsize == 1 else np.dtype(">u2")
        arr = np.frombuffer(raster, dtype=dtype).astype(np.float64)
    return (arr / float(maxval)).reshape(height, width)


def save_pgm(img: np.ndarray, path) -> None:
    """Write a binary (P5) 8-bit PGM; values are clipped and quantized."""
    q = quantize8(img)
    height, width = q.shape
    header = f"P5\n{width} {height}\n255\n".encode("ascii")
    Path(path).write_bytes(header + q.tobytes())


def load_png(path) -> np.ndarray:
    from PIL import Image as PILImage

    with PILImage.open(path) as im:
        arr = np.asarray(im.convert("L"), dtype=np.float64)
    return arr / 255.0


def save_png(img: np.ndarray, path) -> None:
    from PIL import Image as PILImage

    PILImage.fromarray(quantize8(img), mode="L").save(Path(path), format="PNG")


def load_image(path) -> np.ndarray:
    """Dispatch on suffix: .pgm/.pnm via the PGM reader, .png via Pillow."""
    suffix = Path(path).suffix.lower()
    if suffix == ".png":
        return load_png(path)
    return load_pgm(path)


def save_image(img: np.ndarray, path) -> None:
    suffix = Path(path).suffix.lower()
    if suffix == ".png":
        save_png(img, path)
    else:
        save_pgm(img, path)


def add_gaussian_noise(img: np.ndarray, spec: NoiseSpec) -> np.ndarray:
    """Add zero-mean Gaussian noise and clip back to [0, 1].

    The generator is numpy's PCG64 with ziggurat normal sampling, seeded from
    spec.seed, so runs are reproducible across platforms.
    """
    img = as_image(img)
    if spec.sigma == 0:
        return img.copy()
    rng = np.random.default_rng(int(spec.seed))
    return np.clip(img + rng.normal(0.0, spec.sigma, img.shape), 0.0, 1.0)


def laplacian(img: np.ndarray) -> np.ndarray:
    """5-point Laplacian with unit grid spacing.

    Homogeneous Neumann boundary via mirrored ghost cells: an out-of-domain
    neighbor takes the value of the nearest in-domain pixel, so the stencil
    degenerates gracefully on 1-pixel-wide grids.
    """
    img = as_image(img)
    p = np.pad(img, 1, mode="edge")
    return (
        p[:-2, 1:-1] + p[2:, 1:-1] + p[1:-1, :-2] + p[1:-1, 2:] - 4.0 * img
    )


def rmse8(a: np.ndarray, b: np.ndarray) -> float:
    """Root mean squared error scaled to the 8-bit range: 255·sqrt(mean((a-b)^2))."""
    a = as_image(a)
    b = as_image(b)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    return 255.0 * float(np.sqrt(np.mean((a - b) ** 2)))
