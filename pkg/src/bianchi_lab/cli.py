"""Command-line front end: ``bianchi-lab <subcommand> --config run.toml [overrides]``.

Exit statuses: 0 pass, 1 verification failure, 2 usage/config error, 3 integration failure.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .errors import ConfigError
from .io_cli import COMMANDS, config_from_mapping, override, parse_toml, run


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bianchi-lab",
        description="Normalized Ricci flow and first-eigenvalue envelopes on Bianchi classes.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", type=Path, help="TOML run description")
        p.add_argument("--out-dir", type=Path, default=Path("."), help="output directory")
        p.add_argument("--class", dest="class_", metavar="CLASS")
        p.add_argument("--initial", type=float, nargs=3, metavar=("A", "B", "C"))
        norm = p.add_mutually_exclusive_group()
        norm.add_argument("--normalize", dest="normalize", action="store_true", default=None)
        norm.add_argument("--no-normalize", dest="normalize", action="store_false")
        p.add_argument("--t-end", type=float)
        p.add_argument("--convention", choices=("component", "endomorphism"))
        p.add_argument("--lambda-tau", type=float)
        p.add_argument("--seed", type=int)
        p.add_argument("--outputs", nargs="+", choices=("csv", "json"))
        p.add_argument("--rel-tol", type=float)
        p.add_argument("--abs-tol", type=float)
        p.add_argument("--max-step", type=float)
        p.add_argument("--sample-spacing", type=float)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 2
    try:
        data = {}
        if args.config is not None:
            try:
                text = args.config.read_text()
            except OSError as exc:
                raise ConfigError(f"cannot read config {args.config}: {exc}") from None
            data = parse_toml(text)
        data = override(
            data,
            **{"class": args.class_},
            initial=args.initial,
            normalize=args.normalize,
            t_end=args.t_end,
            convention=args.convention,
            lambda_tau=args.lambda_tau,
            seed=args.seed,
            outputs=args.outputs,
            rel_tol=args.rel_tol,
            abs_tol=args.abs_tol,
            max_step=args.max_step,
            sample_spacing=args.sample_spacing,
        )
        config = config_from_mapping(data)
    except ConfigError as exc:
        print(f"bianchi-lab: {exc}", file=sys.stderr)
        return exc.exit_status

    summary = run(config, args.command, args.out_dir)
    status = "PASS" if summary.passed else "FAIL"
    print(f"{args.command} {config.cls.slug}: {status}")
    if summary.error:
        print(f"  {summary.error['type']}: {summary.error['message']}", file=sys.stderr)
    for name, ok in sorted(summary.checks.items()):
        if not ok:
            print(f"  failed check: {name}", file=sys.stderr)
    return summary.exit_status


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
