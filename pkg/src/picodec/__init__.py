"""Diffusion-inpainting image codec with iterative mask selection."""

from .image import (
    NoiseSpec,
    PGMParseError,
    add_gaussian_noise,
    as_image,
    laplacian,
    load_image,
    load_pgm,
    load_png,
    quantize8,
    rmse8,
    save_image,
    save_pgm,
    save_png,
)
from .solver import (
    SolveControls,
    SolverConvergenceError,
    as_mask,
    harmonic_inpaint,
    implicit_step,
    linear_diffusion_filter,
    mask_density,
)
from .masks import (
    criterion_e,
    criterion_g,
    floyd_steinberg_dither,
    hard_threshold_select,
    hard_threshold_subset,
    lloyd_stipple,
)
from .encoders import (
    DENOISE_METHODS,
    METHOD_CHOICES,
    EncodeResult,
    EncoderConfig,
    decode_l2_insta,
    denoise,
    encode,
    encode_dens,
    encode_h1,
    encode_l2_dec,
    encode_l2_inc,
    encode_l2_inc_t_e,
    encode_l2_insta,
    encode_spar,
)
from .codec import (
    HEADER_SIZE,
    METHOD_IDS,
    Payload,
    PayloadError,
    decode,
    deserialize,
    serialize,
)
from .bench import ExperimentPlan, config_for, parse_plan, run_plan
from .synth import synthetic_scene

__version__ = "0.1.0"
