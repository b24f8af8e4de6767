"""Mask-building encoders and the denoising front-end.

All encoders map a raw (possibly noisy) image plus an EncoderConfig to an
EncodeResult holding the final pixel mask, the tonal image whose masked values
get stored, the last encoding reconstruction, and a per-iteration error trace
against the encoder input.

Methods:
  l2-insta     rebuild the mask from scratch each step, diffuse, keep the last
  l2-dec       shrink from the full grid, dropping the weakest pixels per pass
  l2-inc       grow from the empty mask, adding the strongest pixels per pass
  l2-inc-t-e   incremental variant that pins evolving values and ranks by |Lu|
  h1           one-shot thresholding of |Lf| for harmonic reconstruction
  spar         probabilistic sparsification by trial deletion
  dens         probabilistic densification by trial insertion
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .image import as_image, rmse8
from .masks import (
    criterion_e,
    criterion_g,
    floyd_steinberg_dither,
    hard_threshold_select,
    hard_threshold_subset,
    lloyd_stipple,
)
from .solver import SolveControls, harmonic_inpaint, implicit_step

__all__ = [
    "THRESHOLD_MODES",
    "METHOD_CHOICES",
    "EncoderConfig",
    "EncodeResult",
    "encode",
    "encode_l2_insta",
    "decode_l2_insta",
    "encode_l2_dec",
    "encode_l2_inc",
    "encode_l2_inc_t_e",
    "encode_h1",
    "encode_spar",
    "encode_dens",
    "denoise",
    "DENOISE_METHODS",
]

THRESHOLD_MODES = ("hard", "soft_fs", "soft_lloyd")


@dataclass(frozen=True)
class EncoderConfig:
    """Shared encoder knobs; each method reads the subset it needs."""

    alpha: float = 0.05
    density_c: float = 0.1
    iterations_N: int = 10
    fraction_q: float = 0.01
    threshold_mode: str = "hard"
    seed: int = 0
    spar_candidate_fraction: float = 0.02
    per_iter_pixels: int = 50
    dens_candidates: int = 100
    solver: SolveControls = field(default_factory=SolveControls)

    def __post_init__(self) -> None:
        if not np.isfinite(self.alpha) or self.alpha <= 0:
            raise ValueError(f"alpha must be finite and > 0, got {self.alpha}")
        if not 0 < self.density_c < 1:
            raise ValueError(f"density_c must be in (0, 1), got {self.density_c}")
        if self.iterations_N < 1:
            raise ValueError("iterations_N must be positive")
        if not 0 < self.fraction_q < 1:
            raise ValueError(f"fraction_q must be in (0, 1), got {self.fraction_q}")
        if self.threshold_mode not in THRESHOLD_MODES:
            raise ValueError(f"threshold_mode must be one of {THRESHOLD_MODES}")
        if not 0 < self.spar_candidate_fraction < 1:
            raise ValueError("spar_candidate_fraction must be in (0, 1)")
        if self.per_iter_pixels < 1:
            raise ValueError("per_iter_pixels must be positive")
        if self.dens_candidates < 1:
            raise ValueError("dens_candidates must be positive")


@dataclass
class EncodeResult:
    """Mask plus everything needed to serialize and inspect an encoding run."""

    method: str
    mask: np.ndarray
    tonal: np.ndarray
    u_final: np.ndarray
    trace: list[tuple[int, float]]

    @property
    def density(self) -> float:
        return float(self.mask.sum()) / self.mask.size


def _pixel_budget(cfg: EncoderConfig, npixels: int) -> int:
    target = int(np.floor(cfg.density_c * npixels))
    if target < 1:
        raise ValueError(
            f"density_c {cfg.density_c} selects no pixels on {npixels} pixels"
        )
    return target


def _batch_pixels(cfg: EncoderConfig, npixels: int) -> int:
    batch = int(np.floor(cfg.fraction_q * npixels))
    if batch < 1:
        raise ValueError(
            f"fraction_q {cfg.fraction_q} selects no pixels on {npixels} pixels"
        )
    return batch


def _select_mask(fieldv, count, mode, seed):
    if mode == "hard":
        return hard_threshold_select(fieldv, count)
    if mode == "soft_fs":
        return floyd_steinberg_dither(fieldv, count / fieldv.size)
    return lloyd_stipple(fieldv, count, seed)


def encode_l2_insta(f: np.ndarray, cfg: EncoderConfig) -> EncodeResult:
    """Rebuild the mask from the current iterate each step and diffuse once.

    Only the last mask is kept; the pixel budget is exact in hard mode and
    approximate under error diffusion.
    """
    f = as_image(f)
    target = _pixel_budget(cfg, f.size)
    u = f
    trace: list[tuple[int, float]] = []
    mask = None
    for it in range(cfg.iterations_N):
        fieldv = criterion_g(u, f, cfg.alpha)
        mask = _select_mask(fieldv, target, cfg.threshold_mode, cfg.seed + it)
        u = implicit_step(u, mask, f, cfg.alpha, cfg.solver)
        trace.append((it + 1, rmse8(f, u)))
    return EncodeResult("l2-insta", mask, f.copy(), u, trace)


def decode_l2_insta(
    mask: np.ndarray,
    tonal: np.ndarray,
    alpha: float,
    big_step_n: int,
    controls: SolveControls | None = None,
) -> np.ndarray:
    """Reconstruct with a single implicit step to the encoder's total time N*alpha.

    Starts from the stored values on the mask and zero elsewhere; the pinned
    pixels keep their stored values.
    """
    tonal = as_image(tonal)
    if big_step_n < 1:
        raise ValueError("big_step_n must be positive")
    if not np.any(np.asarray(mask)):
        raise ValueError("empty mask: nothing to reconstruct from")
    u0 = np.where(mask, tonal, 0.0)
    return implicit_step(u0, mask, tonal, alpha * big_step_n, controls)


def encode_l2_dec(f: np.ndarray, cfg: EncoderConfig) -> EncodeResult:
    """Shrink the mask from the full grid, dropping the weakest pixels per pass.

    Selection is hard thresholding restricted to the current mask; on stored
    pixels the criterion reduces to alpha*|Lf|, so the final mask equals the
    one-shot |Lf| threshold at the same count.
    """
    f = as_image(f)
    target = _pixel_budget(cfg, f.size)
    drop = _batch_pixels(cfg, f.size)
    mask = np.ones(f.shape, dtype=bool)
    u = f
    trace: list[tuple[int, float]] = []
    it = 0
    while int(mask.sum()) > target:
        fieldv = criterion_g(u, f, cfg.alpha)
        keep = max(int(mask.sum()) - drop, target)
        mask = hard_threshold_subset(fieldv, keep, mask)
        u = implicit_step(u, mask, f, cfg.alpha, cfg.solver)
        it += 1
        trace.append((it, rmse8(f, u)))
    return EncodeResult("l2-dec", mask, f.copy(), u, trace)


def _encode_incremental(f, cfg, method, data_free_criterion, pin_iterate):
    f = as_image(f)
    if cfg.threshold_mode == "soft_fs":
        raise ValueError(
            "error diffusion is biased for small batches; use hard or soft_lloyd"
        )
    target = _pixel_budget(cfg, f.size)
    batch = _batch_pixels(cfg, f.size)
    mask = np.zeros(f.shape, dtype=bool)
    u = f.copy()
    trace: list[tuple[int, float]] = []
    it = 0
    while int(mask.sum()) < target:
        want = min(batch, target - int(mask.sum()))
        fieldv = criterion_e(u) if data_free_criterion else criterion_g(u, f, cfg.alpha)
        allowed = ~mask
        if cfg.threshold_mode == "hard":
            new = hard_threshold_subset(fieldv, want, allowed)
        else:
            restricted = np.where(allowed, fieldv, 0.0)
            new = lloyd_stipple(restricted, want, cfg.seed + it) & allowed
            short = want - int(new.sum())
            if short > 0:  # stipple sites that landed on stored pixels
                new |= hard_threshold_subset(fieldv, short, allowed & ~new)
        mask = mask | new
        pinned_values = u if pin_iterate else f
        u = implicit_step(u, mask, pinned_values, cfg.alpha, cfg.solver)
        it += 1
        trace.append((it, rmse8(f, u)))
    tonal = u if pin_iterate else f
    return EncodeResult(method, mask, tonal.copy(), u, trace)


def encode_l2_inc(f: np.ndarray, cfg: EncoderConfig) -> EncodeResult:
    """Grow the mask from empty, adding the strongest unstored pixels per pass.

    Pinned values are taken from the input image; batches come from hard
    thresholding or Lloyd stippling of the criterion restricted to the
    remaining pixels.
    """
    return _encode_incremental(
        f, cfg, "l2-inc", data_free_criterion=False, pin_iterate=False
    )


def encode_l2_inc_t_e(f: np.ndarray, cfg: EncoderConfig) -> EncodeResult:
    """Incremental encoder that stores evolving values instead of raw input.

    Pixels are ranked by |Lu| of the current iterate and pinned at the value
    they hold when inserted, so the stored ("tonal") data is the final iterate
    restricted to the mask.  With noisy input this stores pre-smoothed values.
    """
    return _encode_incremental(
        f, cfg, "l2-inc-t-e", data_free_criterion=True, pin_iterate=True
    )


def encode_h1(f: np.ndarray, cfg: EncoderConfig) -> EncodeResult:
    """One-shot threshold of |Lf| at the pixel budget, no iteration.

    The reconstruction (and u_final) is the harmonic inpainting of the input
    from the selected pixels.
    """
    f = as_image(f)
    target = _pixel_budget(cfg, f.size)
    mask = _select_mask(criterion_e(f), target, cfg.threshold_mode, cfg.seed)
    u = harmonic_inpaint(mask, f, cfg.solver)
    return EncodeResult("h1", mask, f.copy(), u, [(0, rmse8(f, u))])


def encode_spar(f: np.ndarray, cfg: EncoderConfig) -> EncodeResult:
    """Probabilistic sparsification: trial-delete candidates, keep the cheap ones out.

    Each pass removes a random candidate subset of the stored pixels, inpaints
    without them, and reinstates every candidate except the per_iter_pixels
    with the smallest local error |f - u|.
    """
    f = as_image(f)
    target = _pixel_budget(cfg, f.size)
    rng = np.random.default_rng(int(cfg.seed))
    mask = np.ones(f.shape, dtype=bool)
    flat_mask = mask.ravel()
    u = f.copy()
    trace: list[tuple[int, float]] = []
    it = 0
    while int(flat_mask.sum()) > target:
        stored = np.flatnonzero(flat_mask)
        csize = max(1, int(np.floor(cfg.spar_candidate_fraction * stored.size)))
        csize = min(csize, stored.size - 1)  # keep the trial system determined
        cand = np.sort(rng.choice(stored, size=csize, replace=False))
        trial = flat_mask.copy()
        trial[cand] = False
        u = harmonic_inpaint(
            trial.reshape(f.shape), f, cfg.solver, initial_guess=u
        )
        local_err = np.abs(f.ravel()[cand] - u.ravel()[cand])
        n_del = min(cfg.per_iter_pixels, csize, stored.size - target)
        order = np.argsort(local_err, kind="stable")
        flat_mask[cand[order[:n_del]]] = False
        it += 1
        trace.append((it, rmse8(f, u)))
    u_final = harmonic_inpaint(mask, f, cfg.solver, initial_guess=u)
    return EncodeResult("spar", mask, f.copy(), u_final, trace)


def encode_dens(f: np.ndarray, cfg: EncoderConfig) -> EncodeResult:
    """Probabilistic densification: trial-insert candidates, keep the best batch.

    Starts from the single strongest |Lf| pixel, then repeatedly samples
    dens_candidates unstored pixels, scores each by the reconstruction error
    after adding it alone, and permanently adds the per_iter_pixels winners.
    """
    f = as_image(f)
    target = _pixel_budget(cfg, f.size)
    rng = np.random.default_rng(int(cfg.seed))
    mask = np.zeros(f.shape, dtype=bool)
    flat_mask = mask.ravel()
    flat_mask[int(np.argmax(criterion_e(f).ravel()))] = True
    u = harmonic_inpaint(mask, f, cfg.solver)
    trace: list[tuple[int, float]] = [(0, rmse8(f, u))]
    it = 0
    while int(flat_mask.sum()) < target:
        free = np.flatnonzero(~flat_mask)
        csize = min(cfg.dens_candidates, free.size)
        cand = np.sort(rng.choice(free, size=csize, replace=False))
        errs = np.empty(csize)
        for i, pix in enumerate(cand):
            trial = flat_mask.copy()
            trial[pix] = True
            u_trial = harmonic_inpaint(
                trial.reshape(f.shape), f, cfg.solver, initial_guess=u
            )
            errs[i] = rmse8(f, u_trial)
        n_add = min(cfg.per_iter_pixels, csize, target - int(flat_mask.sum()))
        order = np.argsort(errs, kind="stable")
        flat_mask[cand[order[:n_add]]] = True
        u = harmonic_inpaint(mask, f, cfg.solver, initial_guess=u)
        it += 1
        trace.append((it, rmse8(f, u)))
    return EncodeResult("dens", mask, f.copy(), u, trace)


_BASE_ENCODERS = {
    "h1": encode_h1,
    "l2-insta": encode_l2_insta,
    "l2-dec": encode_l2_dec,
    "l2-inc": encode_l2_inc,
    "l2-inc-t-e": encode_l2_inc_t_e,
    "spar": encode_spar,
    "dens": encode_dens,
}

# method id -> (base encoder, forced threshold mode or None)
_METHOD_TABLE = {
    "h1-t": ("h1", "hard"),
    "h1-h": ("h1", "soft_fs"),
    "l2-insta-t": ("l2-insta", "hard"),
    "l2-insta-h": ("l2-insta", "soft_fs"),
    "l2-dec": ("l2-dec", None),
    "l2-dec-t": ("l2-dec", "hard"),
    "l2-inc-t": ("l2-inc", "hard"),
    "l2-inc-h": ("l2-inc", "soft_lloyd"),
    "l2-inc-t-e": ("l2-inc-t-e", "hard"),
    "spar": ("spar", None),
    "dens": ("dens", None),
}

METHOD_CHOICES = tuple(_METHOD_TABLE)


def encode(f: np.ndarray, method: str, cfg: EncoderConfig) -> EncodeResult:
    """Dispatch on a method id like 'l2-inc-t' or 'h1-h'.

    The -t/-h suffix fixes the threshold mode (hard / the method's soft rule);
    ids without a suffix run with the mode from the config.
    """
    if method not in _METHOD_TABLE:
        raise ValueError(f"unknown method {method!r}; choices: {sorted(_METHOD_TABLE)}")
    base, mode = _METHOD_TABLE[method]
    if mode is not None and mode != cfg.threshold_mode:
        cfg = replace(cfg, threshold_mode=mode)
    return _BASE_ENCODERS[base](f, cfg)


DENOISE_METHODS = ("l2-insta-t", "l2-insta-h", "l2-inc-t", "l2-inc-h")


def denoise(
    f_noisy: np.ndarray,
    method: str,
    cfg: EncoderConfig | None = None,
    sigma: float | None = None,
) -> np.ndarray:
    """Denoise by encoding and returning the last reconstruction.

    Runs the chosen method with the denoising defaults: alpha = 0.01, a 1%
    pixel budget for the rebuild-each-step methods and 2% for the incremental
    ones (4% when sigma >= 0.2).  Incremental runs add 50-pixel batches; the
    rebuild methods take their step count from the config.
    """
    f_noisy = as_image(f_noisy)
    if method not in DENOISE_METHODS:
        raise ValueError(f"unknown denoise method {method!r}; choices: {DENOISE_METHODS}")
    base = cfg or EncoderConfig()
    insta = method.startswith("l2-insta")
    if insta:
        density = 0.01
    elif sigma is not None and sigma >= 0.2:
        density = 0.04
    else:
        density = 0.02
    run_cfg = replace(
        base,
        alpha=0.01,
        density_c=density,
        fraction_q=base.per_iter_pixels / f_noisy.size,
    )
    return encode(f_noisy, method, run_cfg).u_final
