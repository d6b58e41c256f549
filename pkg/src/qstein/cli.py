"""Command-line entry point: ``qstein <mode> --pair FILE [options]``."""
from __future__ import annotations

import argparse
import json
import sys

from .errors import InvariantViolation, ParseError
from .io import rows_to_csv, write_csv, write_manifest
from .sweep import (EXIT_INPUT, MODES, ExperimentConfig, build_manifest, run_sweep)


def _list(kind):
    def parse(text: str):
        try:
            return [kind(t) for t in text.split(",") if t.strip()]
        except ValueError:
            raise argparse.ArgumentTypeError(f"expected a comma-separated list, got {text!r}")
    return parse


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="qstein",
                                 description="Error-exponent toolkit for two-state quantum discrimination.")
    sub = ap.add_subparsers(dest="mode", required=True)
    for mode in MODES:
        sp = sub.add_parser(mode)
        sp.add_argument("--pair", required=mode != "selftest",
                        help="pair file (JSON) or catalog:<name>")
        sp.add_argument("--n", type=_list(int), default=[1, 2, 4])
        sp.add_argument("--eps", type=_list(float), default=[0.1, 0.25, 0.5])
        sp.add_argument("--e2", type=_list(float), default=[0.0])
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--c-const", type=float, default=0.4784)
        sp.add_argument("--tol", type=float, default=1e-6, help="oracle duality-gap tolerance")
        sp.add_argument("--max-dim", type=int, default=4096,
                        help="largest dense n-copy dimension")
        sp.add_argument("--out", help="CSV path; a .manifest.json is written alongside")
        sp.add_argument("--timing", action="store_true",
                        help="fill runtime_ms (makes output run-dependent)")
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else 0
    try:
        cfg = ExperimentConfig(
            state_pair_path=args.pair or "",
            n_values=args.n, eps_values=args.eps, E2_values=args.e2,
            mode=args.mode, seed=args.seed, C=args.c_const, output_path=args.out,
            tolerances={"oracle_gap": args.tol, "max_dim": args.max_dim},
            timing=args.timing,
        )
        result = run_sweep(cfg)
    except (ParseError, InvariantViolation) as exc:
        print(f"qstein: input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    if args.out:
        write_csv(args.out, result.rows)
        write_manifest(args.out, build_manifest(cfg, result))
    else:
        sys.stdout.write(rows_to_csv(result.rows))
    for c in result.failures:
        print(f"FAIL {c.name}: {c.detail}", file=sys.stderr)
    print(json.dumps(result.summary()), file=sys.stderr)
    return result.exit_code


if __name__ == "__main__":
    sys.exit(main())
