"""Command-line entry points: run, ablate, report."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .config import load_experiment
from .core import ConfigError, UsageError
from .harness import Mask, ablate, run_experiment, setup_logging
from .report import report

log = logging.getLogger("intero")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="intero",
        description="Interoceptive agent experiments: single runs, "
        "factorial ablations, and report generation.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute one experiment")
    p_run.add_argument("--config", required=True, type=Path, help="TOML experiment file")
    p_run.add_argument("--seed", required=True, type=int, help="master seed")
    p_run.add_argument("--out", required=True, type=Path, help="output directory")
    p_run.add_argument("--mask", default=None,
                       help="module mask label, e.g. HAE, -AE, H-- (default: all on)")
    p_run.add_argument("--baseline", choices=["random"], default=None,
                       help="replace the learned policy with a reference policy")

    p_ab = sub.add_parser("ablate", help="run the 2x2x2 module ablation")
    p_ab.add_argument("--config", required=True, type=Path)
    p_ab.add_argument("--seeds", required=True, type=int,
                      help="number of seeds (runs seeds 0..N-1 per mask)")
    p_ab.add_argument("--jobs", type=int, default=1, help="parallel worker processes")
    p_ab.add_argument("--out", required=True, type=Path)

    p_rep = sub.add_parser("report", help="build report.md and figures from run output")
    p_rep.add_argument("--runs", required=True, type=Path,
                       help="a run directory, or a directory of run directories")

    return parser


def main(argv=None) -> int:
    setup_logging()
    args = build_parser().parse_args(argv)
    try:
        if args.command == "run":
            cfg = load_experiment(args.config)
            mask = Mask.from_label(args.mask) if args.mask else Mask()
            run_dir = run_experiment(cfg, args.seed, args.out, mask=mask,
                                     baseline=args.baseline)
            log.info("run complete: %s", run_dir)
            print(run_dir)
        elif args.command == "ablate":
            cfg = load_experiment(args.config)
            out = ablate(cfg, args.seeds, args.out, jobs=args.jobs)
            log.info("ablation complete: %s", out)
            print(out)
        elif args.command == "report":
            path = report(args.runs)
            log.info("report written: %s", path)
            print(path)
    except (ConfigError, UsageError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # pragma: no cover - defensive
        log.error("failed: %s", exc, exc_info=True)
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
