"""`ionsqueeze` command line: validate configs, run scenarios and sweeps.

Exit codes: 0 success, 1 configuration error, 2 numerical-health failure,
3 I/O error.  Error text always names the violated invariant.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .errors import ConfigError, NumericalHealthError
from .scenarios import ScenarioConfig, execute_run


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ionsqueeze",
        description="Config-driven runs of the lattice-squeezing simulators.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="execute a scenario (or sweep) config")
    run_p.add_argument("config", help="path to a JSON run configuration")
    run_p.add_argument("--out", help="output directory (default: <config stem>-run)")
    run_p.add_argument("--workers", type=int, default=1, help="parallel sweep sub-runs")
    run_p.add_argument("--seed", type=int, help="override the config rng_seed")
    run_p.add_argument("--format", choices=("csv", "json"), help="override data file format")

    val_p = sub.add_parser("validate", help="parse and validate a config, run nothing")
    val_p.add_argument("config", help="path to a JSON run configuration")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "validate":
            cfg = ScenarioConfig.from_file(args.config)
            tail = f" (sweep over {cfg.sweep.field}, {len(cfg.sweep.values)} values)" if cfg.sweep else ""
            print(f"ok: scenario '{cfg.scenario}'{tail}")
            return 0

        with open(args.config, encoding="utf-8") as fh:
            try:
                raw = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ConfigError(f"config is not valid JSON: {exc}") from exc
        if not isinstance(raw, dict):
            raise ConfigError("config root must be an object")
        if args.seed is not None:
            raw["rng_seed"] = args.seed
        if args.format is not None:
            raw.setdefault("output", {})["format"] = args.format
        cfg = ScenarioConfig.from_dict(raw)

        out = Path(args.out) if args.out else Path(f"{Path(args.config).stem}-run")
        if args.workers < 1:
            raise ConfigError(f"--workers must be >= 1, got {args.workers}")
        manifest = execute_run(cfg, out, workers=args.workers)
        for key, value in sorted(manifest["summary"].items()):
            print(f"{key} = {value}")
        print(f"run directory: {out}")
        return 0
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except NumericalHealthError as exc:
        print(f"numerical-health error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
