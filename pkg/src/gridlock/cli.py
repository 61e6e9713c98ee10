"""Command line entry point: ``gridlock <mode> [options]``."""
from __future__ import annotations

import argparse
import sys
from dataclasses import replace

from .harness import MODES, ExperimentSpec, emit_outputs, load_manifest, run


def _horizons(text: str) -> list[int]:
    try:
        return [int(x) for x in text.replace(",", " ").split()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad horizon list {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="gridlock",
                                 description="Random-walk parking experiments and verification suites.")
    ap.add_argument("mode", choices=MODES)
    ap.add_argument("--p", type=float, default=0.5, help="car density")
    ap.add_argument("--t", type=_horizons, nargs="+", action="extend", default=None,
                    help="horizons, comma or space separated")
    ap.add_argument("--replicas", type=int, default=100)
    ap.add_argument("--seed", type=int, default=0, help="master seed (unsigned 64-bit)")
    ap.add_argument("--strategy", choices=("greedy", "t", "never"), default="greedy")
    ap.add_argument("--removal", choices=("none", "barrier"), default="none")
    ap.add_argument("--k", type=int, default=9)
    ap.add_argument("--ell", type=int, default=5)
    ap.add_argument("--estimator", choices=("ring", "origin"), default="ring",
                    help="ring average (default) or the origin's own car")
    ap.add_argument("--workers", type=int, default=1, help="worker processes")
    ap.add_argument("--out", default=None, help="output directory (created if missing)")
    ap.add_argument("--from-manifest", default=None, metavar="FILE",
                    help="rerun the spec stored in a manifest; --out and --workers still apply")
    return ap


def spec_from_args(args: argparse.Namespace) -> ExperimentSpec:
    if args.from_manifest:
        spec = load_manifest(args.from_manifest)
        if spec.mode != args.mode:
            raise ValueError(f"manifest is for mode {spec.mode!r}, not {args.mode!r}")
        return replace(spec, out=args.out or spec.out, workers=args.workers)
    return ExperimentSpec(args.mode, args.p, tuple(t for part in args.t or () for t in part), args.replicas, args.seed,
                          args.strategy, args.removal, args.k, args.ell, args.out,
                          args.workers, args.estimator)


def main(argv: list[str] | None = None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        spec = spec_from_args(args)
    except (ValueError, OSError) as exc:
        ap.print_usage(sys.stderr)
        print(f"gridlock: error: {exc}", file=sys.stderr)
        return 2
    try:
        results = run(spec)
    except ValueError as exc:
        print(f"gridlock: error: {exc}", file=sys.stderr)
        return 2
    for c in results.checks:
        print(f"{'PASS' if c.passed else 'FAIL'} {c.name} {c.detail}".rstrip())
    for note in results.notes:
        print(f"note: {note}")
    if results.slope is not None:
        print(f"slope {results.slope:.4f}")
    if spec.out:
        for path in emit_outputs(results, spec):
            print(f"wrote {path}")
    return 0 if results.passed else 1


if __name__ == "__main__":
    sys.exit(main())
