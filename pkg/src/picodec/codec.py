"""Bit-exact binary payload format (.pic) and the decode dispatch.

Layout, little-endian:

  offset  0   magic       b"PIC1"
  offset  4   width       uint32
  offset  8   height      uint32
  offset 12   method id   uint8 (see METHOD_IDS)
  offset 13   reserved    3 zero bytes
  offset 16   alpha       float64
  offset 24   big_step_n  uint32, encoder step count for "l2-insta", else 0
  offset 28   mask bits   row-major, MSB-first per byte, zero-padded to a byte
  then        tonal       one uint8 per set mask bit, row-major order

Total size is therefore 28 + ceil(npixels / 8) + popcount(mask) bytes.
Tonal values quantize by round-half-up to 255 levels, so dequantization is
within 1/510 of the encoder's stored value per pixel.
"""
from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from .encoders import EncodeResult, EncoderConfig, decode_l2_insta
from .image import quantize8
from .solver import SolveControls, harmonic_inpaint

__all__ = [
    "MAGIC",
    "HEADER_SIZE",
    "METHOD_IDS",
    "METHOD_NAMES",
    "PayloadError",
    "Payload",
    "serialize",
    "deserialize",
    "decode",
]

MAGIC = b"PIC1"
_HEADER = struct.Struct("<4sIIB3xdI")
HEADER_SIZE = _HEADER.size  # 28

METHOD_IDS = {
    "h1": 0,
    "l2-insta": 1,
    "l2-dec": 2,
    "l2-inc": 3,
    "l2-inc-t-e": 4,
    "spar": 5,
    "dens": 6,
}
METHOD_NAMES = {v: k for k, v in METHOD_IDS.items()}


class PayloadError(ValueError):
    """Raised when payload bytes cannot be decoded."""


@dataclass(frozen=True)
class Payload:
    """Parsed payload: mask geometry plus quantized stored values."""

    width: int
    height: int
    method: str
    alpha: float
    big_step_n: int
    mask: np.ndarray
    tonal_values: np.ndarray  # uint8, one per set mask bit, row-major

    def tonal_image(self) -> np.ndarray:
        """Stored values dequantized onto the grid, zero off the mask."""
        img = np.zeros((self.height, self.width), dtype=np.float64)
        img[self.mask] = self.tonal_values.astype(np.float64) / 255.0
        return img


def serialize(result: EncodeResult, cfg: EncoderConfig) -> bytes:
    """Pack an encoding result into payload bytes."""
    if result.method not in METHOD_IDS:
        raise ValueError(f"unknown method {result.method!r}")
    height, width = result.mask.shape
    if width >= 2**32 or height >= 2**32:
        raise ValueError("image dimensions exceed the format limits")
    big_step_n = cfg.iterations_N if result.method == "l2-insta" else 0
    header = _HEADER.pack(
        MAGIC, width, height, METHOD_IDS[result.method], cfg.alpha, big_step_n
    )
    bits = np.packbits(result.mask.ravel())
    values = quantize8(result.tonal)[result.mask]
    return header + bits.tobytes() + values.tobytes()


def deserialize(data: bytes) -> Payload:
    """Parse payload bytes, validating structure before any arithmetic."""
    if len(data) < HEADER_SIZE:
        raise PayloadError(
            f"truncated header: need {HEADER_SIZE} bytes, found {len(data)}"
        )
    magic, width, height, method_id, alpha, big_step_n = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise PayloadError(f"bad magic: {magic!r}")
    if method_id not in METHOD_NAMES:
        raise PayloadError(f"unknown method id {method_id}")
    if width == 0 or height == 0:
        raise PayloadError(f"malformed dimensions {width}x{height}")
    npixels = width * height
    mask_bytes = (npixels + 7) // 8
    mask_end = HEADER_SIZE + mask_bytes
    if len(data) < mask_end:
        raise PayloadError(
            f"truncated mask: need {mask_bytes} bytes, found {len(data) - HEADER_SIZE}"
        )
    packed = np.frombuffer(data[HEADER_SIZE:mask_end], dtype=np.uint8)
    mask = np.unpackbits(packed, count=npixels).astype(bool).reshape(height, width)
    expected = int(mask.sum())
    values = np.frombuffer(data[mask_end:], dtype=np.uint8)
    if values.size != expected:
        raise PayloadError(
            f"value count mismatch: mask selects {expected} pixels, "
            f"found {values.size} tonal bytes"
        )
    return Payload(width, height, METHOD_NAMES[method_id], alpha, big_step_n, mask, values)


def decode(payload: Payload, controls: SolveControls | None = None) -> np.ndarray:
    """Reconstruct the image a payload describes.

    The rebuild-each-step method replays its total diffusion time in a single
    large implicit step; every other method uses harmonic inpainting.
    """
    if not payload.mask.any():
        raise PayloadError("empty mask: nothing to decode")
    tonal = payload.tonal_image()
    if payload.method == "l2-insta":
        return decode_l2_insta(
            payload.mask, tonal, payload.alpha, payload.big_step_n, controls
        )
    return harmonic_inpaint(payload.mask, tonal, controls)
