"""Command-line entry point: ``qcnn-toric <subcommand> [flags]``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from .harness import (
    ExperimentConfig,
    NoCrossingError,
    ResourceError,
    emit_results,
    estimate_threshold,
    final_layer_curves,
    load_results,
    parse_grid,
    run_field_sweep,
    run_noise_sweep,
)

log = logging.getLogger("qcnn_toric")

# flag dest -> config key
_FLAG_KEYS = {
    "depth": "depth",
    "grid": "grid",
    "samples": "samples",
    "sweep": "sweep",
    "px": "p_x",
    "pz": "p_z",
    "hx": "h_x",
    "hz": "h_z",
    "penalty": "penalty",
    "delta": "delta",
    "seed": "seed",
    "tol": "tol",
}


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", type=Path, help="JSON file with config keys; flags override it")
    p.add_argument("--depth", type=int)
    p.add_argument("--grid", type=parse_grid, help="start:stop:step (stop inclusive) or a,b,c")
    p.add_argument("--sweep", help="swept parameter (p_z, p_x, h_z, h_x)")
    p.add_argument("--px", type=float)
    p.add_argument("--pz", type=float)
    p.add_argument("--hx", type=float)
    p.add_argument("--hz", type=float)
    p.add_argument("--penalty", type=float)
    p.add_argument("--delta", type=float)
    p.add_argument("--samples", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--tol", type=float)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--out", type=Path, help="output file (stdout if omitted)")
    p.add_argument("-v", "--verbose", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qcnn-toric", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name, text in [
        ("verify", "run the circuit and pooling self-checks"),
        ("noise-sweep", "pool noisy toric-code syndromes over a p grid"),
        ("field-sweep", "pool exact ground-state snapshots over a field grid"),
        ("multicritical", "field sweep along h_x = h_z with a tilted first stage"),
        ("threshold", "estimate where successive-depth curves cross"),
    ]:
        p = sub.add_parser(name, help=text, description=text)
        _common(p)
        if name == "verify":
            p.add_argument("--max-side", type=int, default=9, help="largest lattice checked")
        if name == "threshold":
            p.add_argument("--input", type=Path, help="result file to analyse instead of running")
            p.add_argument("--depths", default="3,4,5", help="comma-separated depths to simulate")
            p.add_argument("--basis", default="XZ", choices=("X", "Z", "XZ"))
    return parser


def config_from_args(args: argparse.Namespace, mode: str) -> ExperimentConfig:
    data = {}
    if args.config is not None:
        try:
            data = json.loads(args.config.read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise SystemExit(f"cannot read config {args.config}: {exc}")
        if "grid" in data:
            data["grid"] = parse_grid(data["grid"])
    for dest, key in _FLAG_KEYS.items():
        value = getattr(args, dest, None)
        if value is not None:
            data[key] = value
    data["mode"] = mode
    if mode in ("field-sweep", "multicritical"):
        data.setdefault("depth", 1)
    return ExperimentConfig.from_dict(data)


def _write(text: str, out: Path | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        out.write_text(text)


def _verify(args: argparse.Namespace) -> int:
    from .verification import run_checks

    failures = 0
    for name, ok, detail in run_checks(max_side=args.max_side):
        failures += not ok
        print(f"{'PASS' if ok else 'FAIL'} {name}: {detail}")
    return 1 if failures else 0


def _threshold(args: argparse.Namespace) -> int:
    if args.input is not None:
        result = load_results(args.input)
    else:
        runs = {}
        for depth in (int(d) for d in args.depths.split(",")):
            args.depth = depth
            runs[depth] = run_noise_sweep(config_from_args(args, "noise-sweep"), workers=args.workers)
        result = final_layer_curves(runs)
        if args.out is not None:
            emit_results(result, args.format, args.out)
    try:
        est = estimate_threshold(result, basis=args.basis)
    except NoCrossingError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    for (lo, hi), value in est.pairwise.items():
        print(f"crossing {lo}-{hi}: {value:.6g}")
    print(f"threshold: {est.crossing:.6g} +/- {est.spread:.2g}")
    return 0


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    np.seterr(all="ignore")
    try:
        if args.command == "verify":
            return _verify(args)
        if args.command == "threshold":
            return _threshold(args)
        cfg = config_from_args(args, args.command)
        if args.command == "noise-sweep":
            result = run_noise_sweep(cfg, workers=args.workers)
        else:
            result = run_field_sweep(cfg, workers=args.workers)
        _write(emit_results(result, args.format), args.out)
    except (ValueError, ResourceError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
