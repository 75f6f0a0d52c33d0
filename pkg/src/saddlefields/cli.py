"""Command-line front end: run / grid / sphere / catalog subcommands.

Exit status contract: 0 all assertions pass, 2 assertion failure,
3 configuration error, 4 numerical non-stabilization.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .errors import (CertificationFailure, ConfigError, NoStabilization,
                     SaddleFieldsError)
from .scenario import run_scenario, write_catalog

EXIT_OK = 0
EXIT_ASSERTION = 2
EXIT_CONFIG = 3
EXIT_NUMERICAL = 4


def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="saddlefields",
        description="Saddle-graph cross fields, umbilic loci and certified indices")
    p.add_argument("--out", default=None, help="output directory override")
    p.add_argument("--exact", action="store_true",
                   help="parse function coefficients as exact rationals")
    p.add_argument("--seed", type=int, default=None, help="seed override")
    sub = p.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run all analyses of a scenario")
    run_p.add_argument("scenario", help="scenario JSON file")

    grid_p = sub.add_parser("grid", help="run only the field-grid analyses")
    grid_p.add_argument("scenario", help="scenario JSON file")

    sph_p = sub.add_parser("sphere", help="build and certify the saddle sphere")
    sph_p.add_argument("params", nargs="?", default=None,
                       help="JSON file of construction parameter overrides")

    cat_p = sub.add_parser("catalog", help="emit a seeded saddle catalog")
    cat_p.add_argument("seed", type=int)
    cat_p.add_argument("count", type=int)
    return p


def _report_exit(report: dict) -> int:
    if report.get("non_stabilized"):
        return EXIT_NUMERICAL
    return EXIT_OK if report["all_passed"] else EXIT_ASSERTION


def _cmd_run(args) -> int:
    report = run_scenario(args.scenario, out_dir=args.out, seed=args.seed,
                          exact=args.exact or None)
    print(json.dumps({k: report[k] for k in ("name", "all_passed")}, sort_keys=True))
    return _report_exit(report)


def _cmd_grid(args) -> int:
    cfg = json.loads(Path(args.scenario).read_text())
    analyses = [a for a in cfg.get("analyses", [])
                if isinstance(a, dict) and a.get("kind") == "field-grid"]
    if not analyses:
        raise ConfigError("scenario has no field-grid analyses")
    cfg = dict(cfg)
    cfg["analyses"] = analyses
    report = run_scenario(cfg, out_dir=args.out, seed=args.seed,
                          exact=args.exact or None)
    return _report_exit(report)


def _cmd_sphere(args) -> int:
    overrides = {}
    if args.params:
        try:
            overrides = json.loads(Path(args.params).read_text())
        except FileNotFoundError as exc:
            raise ConfigError(f"params file not found: {args.params}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"params file is not valid JSON: {exc}") from exc
    scenario = {"name": "sphere-build",
                "analyses": [{"kind": "sphere-build", "params": overrides}]}
    report = run_scenario(scenario, out_dir=args.out or "out")
    print(json.dumps({k: report[k] for k in ("name", "all_passed")}, sort_keys=True))
    return _report_exit(report)


def _cmd_catalog(args) -> int:
    path = write_catalog(args.seed, args.count, args.out or "out")
    print(str(path))
    return EXIT_OK


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    handler = {"run": _cmd_run, "grid": _cmd_grid,
               "sphere": _cmd_sphere, "catalog": _cmd_catalog}[args.command]
    try:
        return handler(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NoStabilization, CertificationFailure) as exc:
        print(f"numerical non-stabilization: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except SaddleFieldsError as exc:
        print(f"analysis error: {exc}", file=sys.stderr)
        return EXIT_ASSERTION


if __name__ == "__main__":
    sys.exit(main())
