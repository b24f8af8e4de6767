import re

import numpy as np
import pytest

from picodec import load_pgm, save_pgm
from picodec.bench import (
    SWEEP_ALPHAS,
    SWEEP_ITERATIONS,
    config_for,
    parse_plan,
    run_plan,
    sweep_values,
)
from picodec.cli import main


@pytest.fixture()
def img16(scene256, tmp_path):
    path = tmp_path / "tiny.pgm"
    save_pgm(scene256[::16, ::16], path)
    return path


def _write_plan(path, img, outdir, **extra):
    lines = [
        "# tiny smoke plan",
        f"input = {img}",
        f"outdir = {outdir}",
        "sigmas = 0 0.05",
        "densities = 0.1",
        "methods = h1-t l2-insta-t",
        "seeds = 1",
        "alpha = 0.4",
        "iterations = 3",
    ]
    lines += [f"{k} = {v}" for k, v in extra.items()]
    path.write_text("\n".join(lines) + "\n")
    return path


def test_parse_plan_round_trip(img16, tmp_path):
    plan_path = _write_plan(
        tmp_path / "p.plan", img16, tmp_path / "out",
        **{"method.l2-insta-t.iterations": 2},
    )
    plan = parse_plan(plan_path)
    assert plan.sigmas == [0.0, 0.05]
    assert plan.methods == ["h1-t", "l2-insta-t"]
    assert plan.defaults == {"alpha": 0.4, "iterations": 3.0}
    assert plan.overrides == {"l2-insta-t": {"iterations": 2.0}}
    cfg = config_for(plan, "l2-insta-t", 0.1, seed=1)
    assert cfg.alpha == 0.4 and cfg.iterations_N == 2 and cfg.seed == 1
    assert config_for(plan, "h1-t", 0.1, seed=1).iterations_N == 3


@pytest.mark.parametrize(
    "mutation,message",
    [
        ({"input": ""}, "needs an input image"),
        ({"methods": "h1-t warp9"}, "unknown method"),
        ({"sigmas": ""}, "is empty"),
        ({"densities": "0 0.1"}, "density must be in"),
        ({"bogus": "1"}, "unknown plan key"),
        ({"method.spar.alpha": "0.1"}, "not in plan"),
        ({"method.h1-t.speed": "0.1"}, "unknown override key"),
    ],
)
def test_plan_validation_errors(img16, tmp_path, mutation, message):
    lines = {
        "input": str(img16),
        "outdir": str(tmp_path / "out"),
        "sigmas": "0",
        "densities": "0.1",
        "methods": "h1-t",
        "seeds": "1",
    }
    overrides = {k: v for k, v in mutation.items() if k.startswith("method.")}
    lines.update({k: v for k, v in mutation.items() if not k.startswith("method.")})
    text = "\n".join(f"{k} = {v}" for k, v in lines.items() if v != "")
    text += "".join(f"\n{k} = {v}" for k, v in overrides.items())
    path = tmp_path / "bad.plan"
    path.write_text(text + "\n")
    with pytest.raises(ValueError, match=message):
        parse_plan(path)


def test_plan_rejects_non_assignment(tmp_path):
    path = tmp_path / "bad.plan"
    path.write_text("just some words\n")
    with pytest.raises(ValueError, match="expected key=value"):
        parse_plan(path)


def test_sweep_grids():
    assert sweep_values("l2-insta-t") == [
        {"iterations": float(n)} for n in SWEEP_ITERATIONS
    ]
    assert sweep_values("l2-inc-t") == [{"alpha": a} for a in SWEEP_ALPHAS]
    assert sweep_values("h1-t") == [{}]


def test_run_plan_reproduces_artifacts_bytewise(img16, tmp_path):
    outs = []
    for name, jobs in (("a", 1), ("b", 1), ("c", 2)):
        outdir = tmp_path / name
        plan = parse_plan(_write_plan(tmp_path / f"{name}.plan", img16, outdir))
        paths = run_plan(plan, jobs=jobs)
        assert [p.name for p in paths] == ["decode_density0.1.csv", "ufinal_density0.1.csv"]
        outs.append(outdir)
    names = sorted(p.name for p in outs[0].iterdir())
    assert "h1-t_sigma0.05_c0.1_seed1.pic" in names
    for other in outs[1:]:
        assert sorted(p.name for p in other.iterdir()) == names
        for name in names:
            assert (outs[0] / name).read_bytes() == (other / name).read_bytes()
    table = (outs[0] / "decode_density0.1.csv").read_text().splitlines()
    assert table[0] == "sigma,seed,h1-t,l2-insta-t"
    assert len(table) == 3  # header + one row per sigma
    assert (outs[0] / "errors.log").read_text() == ""


def test_run_plan_isolates_failing_cells(img16, tmp_path):
    outdir = tmp_path / "out"
    plan = parse_plan(
        _write_plan(tmp_path / "p.plan", img16, outdir, densities="0.002")
    )
    run_plan(plan)  # density picks zero pixels on 16x16: every cell fails
    table = (outdir / "decode_density0.002.csv").read_text().splitlines()
    assert all(row.endswith("nan,nan") for row in table[1:])
    log = (outdir / "errors.log").read_text().splitlines()
    assert len(log) == 4
    assert all("selects no pixels" in line for line in log)


def test_run_plan_sweep_smoke(img16, tmp_path):
    outdir = tmp_path / "out"
    plan_path = tmp_path / "p.plan"
    plan_path.write_text(
        f"input = {img16}\noutdir = {outdir}\nsigmas = 0.05\n"
        "densities = 0.1\nmethods = l2-insta-t\nseeds = 1\n"
    )
    run_plan(parse_plan(plan_path), sweep=True)
    assert (outdir / "l2-insta-t_sigma0.05_c0.1_seed1.pic").exists()


def test_cli_encode_decode_round_trip(img16, tmp_path, capsys):
    payload = tmp_path / "out.pic"
    trace = tmp_path / "trace.csv"
    preview = tmp_path / "preview.pgm"
    code = main([
        "encode", "--input", str(img16), "--output", str(payload),
        "--method", "l2-insta-t", "--density", "0.2", "--alpha", "0.4",
        "--iterations", "3", "--trace", str(trace), "--preview", str(preview),
    ])
    assert code == 0
    line = capsys.readouterr().out.strip()
    assert re.fullmatch(
        r"density=0\.\d{6} iterations=3 rmse8=\d+\.\d{4} bytes=\d+", line
    )
    rows = trace.read_text().splitlines()
    assert rows[0] == "iteration,rmse8" and len(rows) == 4
    assert load_pgm(preview).shape == (16, 16)

    decoded = tmp_path / "decoded.pgm"
    code = main(["decode", "--input", str(payload), "--output", str(decoded)])
    assert code == 0
    assert "method=l2-insta size=16x16" in capsys.readouterr().out
    assert np.array_equal(load_pgm(decoded), load_pgm(preview))


@pytest.mark.parametrize(
    "argv",
    [
        ["encode", "--input", "x.pgm", "--output", "y.pic",
         "--method", "h1-t", "--density", "1.5"],
        ["encode", "--input", "x.pgm", "--output", "y.pic",
         "--method", "l2-inc-t", "--density", "0.1", "--fraction", "0.01",
         "--iterations", "5"],
        ["encode", "--input", "x.pgm", "--output", "y.pic",
         "--method", "l2-inc-t", "--density", "0.1"],
        ["encode", "--input", "x.pgm", "--output", "y.pic",
         "--method", "warp9", "--density", "0.1"],
        ["denoise", "--input", "x.pgm", "--sigma", "-1"],
        ["bench", "--plan", "p.plan", "--jobs", "0"],
        [],
    ],
)
def test_cli_usage_errors_exit_1(argv, capsys):
    assert main(argv) == 1
    capsys.readouterr()


def test_cli_runtime_errors_exit_2(img16, tmp_path, capsys):
    garbage = tmp_path / "garbage.pic"
    garbage.write_bytes(b"JUNKJUNKJUNKJUNKJUNKJUNKJUNKJUNK")
    assert main(["decode", "--input", str(garbage), "--output", str(tmp_path / "o.pgm")]) == 2
    assert main([
        "encode", "--input", str(tmp_path / "missing.pgm"),
        "--output", str(tmp_path / "o.pic"), "--method", "h1-t", "--density", "0.1",
    ]) == 2
    assert "picodec:" in capsys.readouterr().err


def test_cli_denoise_writes_both_outputs(img16, tmp_path, capsys):
    outdir = tmp_path / "dn"
    code = main([
        "denoise", "--input", str(img16), "--sigma", "0.1",
        "--iterations", "5", "--outdir", str(outdir),
    ])
    assert code == 0
    assert (outdir / "denoised.pgm").exists()
    assert (outdir / "filtered.pgm").exists()
    out = capsys.readouterr().out
    assert out.startswith("rmse8: noisy=") and "filter(eta=1.2)" in out


def test_cli_bench_prints_tables(img16, tmp_path, capsys):
    outdir = tmp_path / "bench"
    plan = _write_plan(tmp_path / "p.plan", img16, outdir)
    assert main(["bench", "--plan", str(plan), "--jobs", "2"]) == 0
    printed = capsys.readouterr().out.splitlines()
    assert printed == [
        str(outdir / "decode_density0.1.csv"),
        str(outdir / "ufinal_density0.1.csv"),
    ]
