"""Command-line entry point: ``skincal simulate|calibrate|baseline|estimate|validate``."""

from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path
from typing import Optional, Sequence

from . import fileio
from .calibration import CalibrationConfig, calibrate
from .core import SkinGeometry
from .errors import SkinCalError
from .force import estimate_force
from .report import write_report
from .sim import (
    DEFAULT_DEAD_FRACTION,
    DEFAULT_GAIN_RANGE,
    DEFAULT_NOISE_SIGMA,
    DEFAULT_OFFSET_MEAN,
    DEFAULT_OFFSET_STD,
    DEFAULT_STIFFNESS_SPREAD,
    PressureSchedule,
    default_skin,
    generate_sweep,
    rest_frames,
)
from .validation import mean_baseline, mean_relative_error, run_trials

SEED_ENV = "TAXEL_CALIB_SEED"

log = logging.getLogger("skincal")


def parse_range(text: str) -> tuple[float, float, float]:
    """``start:stop:step`` with stop inclusive."""
    try:
        start, stop, step = (float(v) for v in text.split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected start:stop:step, got {text!r}") from None
    if step <= 0 or stop < start:
        raise argparse.ArgumentTypeError(f"empty or backwards range {text!r}")
    return start, stop, step


def expand_range(start: float, stop: float, step: float) -> list[float]:
    n = int((stop - start) / step + 1e-9) + 1
    return [round(start + j * step, 12) for j in range(n)]


def resolve_seed(flag: Optional[int], config: dict[str, str]) -> int:
    if flag is not None:
        return flag
    if SEED_ENV in os.environ:
        return int(os.environ[SEED_ENV])
    return int(config.get("seed", 0))


def _config(path: Optional[str]) -> dict[str, str]:
    return fileio.load_config(path) if path else {}


def _pick(flag, config: dict[str, str], key: str, default, conv=float):
    if flag is not None:
        return flag
    if key in config:
        return conv(config[key])
    return default


# -- subcommands ------------------------------------------------------------

def cmd_simulate(args) -> int:
    cfg = _config(args.config)
    seed = resolve_seed(args.seed, cfg)
    geometry = SkinGeometry(int(_pick(args.triangles, cfg, "n_triangles", 23, int)),
                            int(_pick(args.taxels_per_triangle, cfg, "taxels_per_triangle", 10,
                                      int)),
                            _pick(args.taxel_area, cfg, "taxel_area", 2.0e-5))
    skin = default_skin(
        seed, geometry,
        noise_sigma=_pick(args.noise, cfg, "noise_sigma", DEFAULT_NOISE_SIGMA),
        dead_fraction=_pick(args.dead_fraction, cfg, "dead_fraction", DEFAULT_DEAD_FRACTION),
        gain_range=(float(cfg.get("gain_min", DEFAULT_GAIN_RANGE[0])),
                    float(cfg.get("gain_max", DEFAULT_GAIN_RANGE[1]))),
        offset_mean=float(cfg.get("offset_mean", DEFAULT_OFFSET_MEAN)),
        offset_std=float(cfg.get("offset_std", DEFAULT_OFFSET_STD)),
        stiffness_spread=float(cfg.get("stiffness_spread", DEFAULT_STIFFNESS_SPREAD)),
    )
    levels = args.levels or parse_range(cfg.get("levels", "0:70:1"))
    dwell = int(_pick(args.dwell, cfg, "dwell", 3, int))
    schedule = PressureSchedule.linear(*levels, dwell_samples=dwell)
    dataset = generate_sweep(skin, schedule)
    fileio.write_sweep_csv(dataset, args.out)
    truth = args.truth or str(Path(args.out).with_suffix(".truth.txt"))
    fileio.write_ground_truth(skin, truth)
    if args.rest_frames:
        fileio.write_frames_csv(rest_frames(skin, args.n_rest), args.rest_frames)
    print(f"wrote {len(dataset)} samples x {geometry.n_taxels} taxels to {args.out}; "
          f"ground truth in {truth}")
    return 0


def cmd_calibrate(args) -> int:
    cfg = _config(args.config)
    defaults = CalibrationConfig()
    config = CalibrationConfig(
        amplitude_threshold=int(_pick(args.amplitude_threshold, cfg, "amplitude_threshold",
                                      defaults.amplitude_threshold, int)),
        activation_threshold=int(_pick(args.activation_threshold, cfg, "activation_threshold",
                                       defaults.activation_threshold, int)),
        pressure_bin_width=_pick(args.bin_width, cfg, "pressure_bin_width",
                                 defaults.pressure_bin_width),
        min_points=int(cfg.get("min_points", defaults.min_points)),
    )
    raw = fileio.parse_sweep_csv(args.sweep)
    n = raw.geometry.n_taxels
    per_tri = int(_pick(args.taxels_per_triangle, cfg, "taxels_per_triangle",
                        10 if n % 10 == 0 else n, int))
    if n % per_tri:
        raise SkinCalError(f"{n} taxels do not split into triangles of {per_tri}")
    geometry = SkinGeometry(n // per_tri, per_tri,
                            _pick(args.taxel_area, cfg, "taxel_area", raw.geometry.taxel_area))
    dataset = fileio.parse_sweep_csv(args.sweep, geometry)
    model = calibrate(dataset, config)
    fileio.write_model_file(model, args.model)
    if args.report:
        write_report(model, dataset, args.report, config.pressure_bin_width, args.plots)
    print(f"fitted {len(model.included)} taxels, excluded {len(model.excluded)}; "
          f"model written to {args.model}")
    return 0


def cmd_baseline(args) -> int:
    frames = fileio.parse_frames_csv(args.frames)
    if not frames:
        raise SkinCalError(f"{args.frames}: no frames")
    fileio.write_baseline(mean_baseline(frames), args.out)
    print(f"baseline from {len(frames)} frames written to {args.out}")
    return 0


def cmd_estimate(args) -> int:
    model = fileio.load_model_file(args.model)
    baseline = fileio.load_baseline(args.baseline)
    lines = ["frame,total_force_n,n_activated,n_clamped"]
    for k, frame in enumerate(fileio.parse_frames_csv(args.frames)):
        est = estimate_force(frame, baseline, model)
        lines.append(f"{k},{est.total_force:.3f},{est.n_activated},{len(est.clamped)}")
    _emit("\n".join(lines) + "\n", args.out)
    return 0


def cmd_validate(args) -> int:
    model = fileio.load_model_file(args.model)
    skin = fileio.load_ground_truth(args.truth)
    if skin.geometry != model.geometry:
        raise SkinCalError("model and ground truth describe different skins")
    seed = resolve_seed(args.seed, {"seed": str(skin.rng_seed + 1)})
    masses = expand_range(*args.masses)
    trials = run_trials(model, skin, masses, args.trials, args.patch_size,
                        args.baseline_frames, seed)
    lines = ["trial,mass_kg,patch_start,true_force_n,estimated_force_n,relative_error,clamped"]
    for k, t in enumerate(trials):
        lines.append(f"{k},{t.mass:g},{t.patch[0]},{t.true_force:.4f},"
                     f"{t.estimate.total_force:.4f},{t.relative_error:.4f},"
                     f"{len(t.estimate.clamped)}")
    _emit("\n".join(lines) + "\n", args.out)
    print(f"mean relative error: {100 * mean_relative_error(trials):.2f} % "
          f"over {len(trials)} trials")
    return 0


def _emit(text: str, out: Optional[str]) -> None:
    if out:
        fileio.atomic_write_text(out, text)
    else:
        sys.stdout.write(text)


# -- parser -----------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="skincal",
                                description="Calibrate capacitive tactile skins from "
                                            "uniform-pressure sweeps.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", help="generate a synthetic calibration sweep")
    s.add_argument("--config", help="key = value skin config file")
    s.add_argument("--seed", type=int)
    s.add_argument("--levels", type=parse_range, help="kPa levels start:stop:step (default 0:70:1)")
    s.add_argument("--dwell", type=int, help="samples per level (default 3)")
    s.add_argument("--noise", type=float, help="count noise sigma (default 1.0)")
    s.add_argument("--dead-fraction", type=float)
    s.add_argument("--triangles", type=int)
    s.add_argument("--taxels-per-triangle", type=int)
    s.add_argument("--taxel-area", type=float, help="m^2")
    s.add_argument("--out", default="sweep.csv")
    s.add_argument("--truth", help="ground-truth sidecar (default <out>.truth.txt)")
    s.add_argument("--rest-frames", help="also write rest frames for `baseline` here")
    s.add_argument("--n-rest", type=int, default=20)
    s.set_defaults(func=cmd_simulate)

    c = sub.add_parser("calibrate", help="fit a skin model from a sweep CSV")
    c.add_argument("sweep")
    c.add_argument("--config")
    c.add_argument("--model", default="model.txt")
    c.add_argument("--report", help="directory for summary.txt, curves.csv, average.csv")
    c.add_argument("--plots", action="store_true", help="per-taxel SVG plots in the report")
    c.add_argument("--amplitude-threshold", type=int)
    c.add_argument("--activation-threshold", type=int)
    c.add_argument("--bin-width", type=float, help="Pa")
    c.add_argument("--taxels-per-triangle", type=int)
    c.add_argument("--taxel-area", type=float, help="m^2")
    c.set_defaults(func=cmd_calibrate)

    b = sub.add_parser("baseline", help="average rest frames into a baseline file")
    b.add_argument("frames")
    b.add_argument("--out", default="baseline.csv")
    b.set_defaults(func=cmd_baseline)

    e = sub.add_parser("estimate", help="estimate total force for each frame")
    e.add_argument("frames")
    e.add_argument("--model", required=True)
    e.add_argument("--baseline", required=True)
    e.add_argument("--out")
    e.set_defaults(func=cmd_estimate)

    v = sub.add_parser("validate", help="known-mass trials against the simulator")
    v.add_argument("--model", required=True)
    v.add_argument("--truth", required=True)
    v.add_argument("--masses", type=parse_range, default=(0.2, 1.0, 0.2), help="kg")
    v.add_argument("--trials", type=int, default=20)
    v.add_argument("--patch-size", type=int, default=30)
    v.add_argument("--baseline-frames", type=int, default=20)
    v.add_argument("--seed", type=int)
    v.add_argument("--out")
    v.set_defaults(func=cmd_validate)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 2
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (SkinCalError, OSError, ValueError) as exc:
        print(f"skincal {args.command}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
