"""Command-line front-end: encode, decode, denoise, bench.

Exit codes: 0 success, 1 usage error, 2 runtime failure.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .bench import parse_plan, run_plan
from .codec import decode, deserialize, serialize
from .encoders import (
    DENOISE_METHODS,
    METHOD_CHOICES,
    EncoderConfig,
    denoise,
    encode,
)
from .image import (
    NoiseSpec,
    add_gaussian_noise,
    load_image,
    rmse8,
    save_image,
)
from .solver import linear_diffusion_filter

EXIT_OK, EXIT_USAGE, EXIT_RUNTIME = 0, 1, 2

_THRESHOLD_FLAGS = {"hard": "hard", "fs": "soft_fs", "lloyd": "soft_lloyd"}


class UsageError(Exception):
    """Invalid flag combination or value."""


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on bad flags; the contract reserves 2 for runtime failures
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _needs(method: str) -> tuple[bool, bool]:
    """(needs --iterations, needs --fraction) for a method id."""
    if method.startswith("l2-insta"):
        return True, False
    if method.startswith(("l2-dec", "l2-inc")):
        return False, True
    return False, False


def _encoder_config(args) -> EncoderConfig:
    if not 0 < args.density < 1:
        raise UsageError(f"--density must be in (0, 1), got {args.density}")
    if args.alpha <= 0:
        raise UsageError(f"--alpha must be positive, got {args.alpha}")
    needs_iter, needs_frac = _needs(args.method)
    if needs_iter and args.iterations is None:
        raise UsageError(f"{args.method} requires --iterations")
    if not needs_iter and args.iterations is not None:
        raise UsageError(f"--iterations is not valid for {args.method}")
    if needs_frac and args.fraction is None:
        raise UsageError(f"{args.method} requires --fraction")
    if not needs_frac and args.fraction is not None:
        raise UsageError(f"--fraction is not valid for {args.method}")
    kwargs = dict(
        alpha=args.alpha,
        density_c=args.density,
        threshold_mode=_THRESHOLD_FLAGS[args.threshold],
        seed=args.seed,
    )
    if args.iterations is not None:
        kwargs["iterations_N"] = args.iterations
    if args.fraction is not None:
        kwargs["fraction_q"] = args.fraction
    try:
        return EncoderConfig(**kwargs)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def _cmd_encode(args) -> int:
    cfg = _encoder_config(args)
    f = load_image(args.input)
    result = encode(f, args.method, cfg)
    data = serialize(result, cfg)
    Path(args.output).write_bytes(data)
    if args.trace:
        lines = ["iteration,rmse8"]
        lines += [f"{it},{err:.6f}" for it, err in result.trace]
        Path(args.trace).write_text("\n".join(lines) + "\n")
    if args.preview:
        save_image(decode(deserialize(data)), args.preview)
    iterations = result.trace[-1][0]
    print(
        f"density={result.density:.6f} iterations={iterations} "
        f"rmse8={rmse8(f, result.u_final):.4f} bytes={len(data)}"
    )
    return EXIT_OK


def _cmd_decode(args) -> int:
    payload = deserialize(Path(args.input).read_bytes())
    save_image(decode(payload), args.output)
    print(
        f"method={payload.method} size={payload.width}x{payload.height} "
        f"density={payload.tonal_values.size / (payload.width * payload.height):.6f}"
    )
    return EXIT_OK


def _cmd_denoise(args) -> int:
    if args.sigma < 0:
        raise UsageError(f"--sigma must be >= 0, got {args.sigma}")
    if args.eta <= 0:
        raise UsageError(f"--eta must be positive, got {args.eta}")
    f = load_image(args.input)
    noisy = add_gaussian_noise(f, NoiseSpec(args.sigma, args.noise_seed))
    cfg = EncoderConfig(iterations_N=args.iterations, seed=args.seed)
    denoised = denoise(noisy, args.method, cfg, sigma=args.sigma)
    filtered = linear_diffusion_filter(noisy, args.eta)
    outdir = Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    save_image(denoised, outdir / "denoised.pgm")
    save_image(filtered, outdir / "filtered.pgm")
    print(
        f"rmse8: noisy={rmse8(f, noisy):.4f} "
        f"{args.method}={rmse8(f, denoised):.4f} "
        f"filter(eta={args.eta:g})={rmse8(f, filtered):.4f}"
    )
    return EXIT_OK


def _cmd_bench(args) -> int:
    if args.jobs < 1:
        raise UsageError(f"--jobs must be positive, got {args.jobs}")
    plan = parse_plan(args.plan)
    paths = run_plan(plan, jobs=args.jobs, sweep=args.sweep)
    for path in paths:
        print(path)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="picodec", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    enc = sub.add_parser("encode", help="encode an image into a .pic payload")
    enc.add_argument("--input", required=True)
    enc.add_argument("--output", required=True)
    enc.add_argument("--method", required=True, choices=sorted(METHOD_CHOICES))
    enc.add_argument("--density", type=float, required=True)
    enc.add_argument("--alpha", type=float, default=0.05)
    enc.add_argument("--iterations", type=int, default=None)
    enc.add_argument("--fraction", type=float, default=None)
    enc.add_argument("--threshold", choices=sorted(_THRESHOLD_FLAGS), default="hard")
    enc.add_argument("--seed", type=int, default=0)
    enc.add_argument("--trace", default=None, help="write the iteration/rmse8 CSV here")
    enc.add_argument("--preview", default=None, help="decode immediately to this image")
    enc.set_defaults(func=_cmd_encode)

    dec = sub.add_parser("decode", help="reconstruct an image from a payload")
    dec.add_argument("--input", required=True)
    dec.add_argument("--output", required=True)
    dec.set_defaults(func=_cmd_decode)

    den = sub.add_parser("denoise", help="denoise by encoding, with a filter baseline")
    den.add_argument("--input", required=True)
    den.add_argument("--sigma", type=float, required=True)
    den.add_argument("--noise-seed", type=int, default=0)
    den.add_argument("--method", choices=sorted(DENOISE_METHODS), default="l2-inc-t")
    den.add_argument("--iterations", type=int, default=60,
                     help="step count for the rebuild-each-step methods")
    den.add_argument("--eta", type=float, default=1.2,
                     help="total diffusion time of the linear filter baseline")
    den.add_argument("--seed", type=int, default=0)
    den.add_argument("--outdir", default=".")
    den.set_defaults(func=_cmd_denoise)

    ben = sub.add_parser("bench", help="run an experiment plan")
    ben.add_argument("--plan", required=True)
    ben.add_argument("--jobs", type=int, default=1)
    ben.add_argument("--sweep", action="store_true",
                     help="grid-search alpha / iteration count per cell")
    ben.set_defaults(func=_cmd_bench)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"picodec: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except Exception as exc:
        print(f"picodec: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


def run() -> None:
    raise SystemExit(main())


if __name__ == "__main__":
    run()
