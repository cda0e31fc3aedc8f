"""Command line front end: ``dispersive-lab <experiment> --config FILE [--out DIR] [--seed N] [--jobs N]``.

Exit status: 0 when every check is PASS, MARGINAL or RECORDED, 1 on any failure, 2 on
configuration errors.
"""
from __future__ import annotations

import argparse
import dataclasses
import logging
import sys
import time

from .config import EXPERIMENTS, ConfigError, ExperimentConfig, load_config, output_dir
from .experiments import run
from .io import write_csv, write_json, write_snapshots
from .nonlin import SpecError

log = logging.getLogger("dispersive_lab")

OK_VERDICTS = ("PASS", "MARGINAL")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="dispersive-lab", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="experiment", required=True)
    for name in EXPERIMENTS:
        s = sub.add_parser(name, help=f"run the {name} experiment")
        s.add_argument("--config", required=False, help="INI file; defaults apply when omitted")
        s.add_argument("--out", help="output directory (overrides config and environment)")
        s.add_argument("--seed", type=int, help="seed for random data")
        s.add_argument("--jobs", type=int, help="worker processes for parameter sweeps")
        s.add_argument("-v", "--verbose", action="store_true")
    return p


def resolve_config(args) -> ExperimentConfig:
    if args.config:
        cfg = load_config(args.config)
        if cfg.name != args.experiment:
            raise ConfigError(f"config is for {cfg.name!r}, subcommand is {args.experiment!r}")
    else:
        cfg = ExperimentConfig(args.experiment)
    changes = {}
    if args.seed is not None:
        changes["seed"] = args.seed
    if args.jobs is not None:
        changes["jobs"] = args.jobs
    return dataclasses.replace(cfg, **changes) if changes else cfg


def write_outputs(result, cfg: ExperimentConfig, out):
    out.mkdir(parents=True, exist_ok=True)
    write_csv(out / "series.csv", result.columns, result.rows)
    write_json(out / "run.json", {"config": cfg.to_dict(), **result.to_dict()})
    if cfg.snapshots and result.trajectory is not None:
        write_snapshots(out / "snapshots.bin", result.trajectory)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        cfg = resolve_config(args)
        out = output_dir(cfg, args.out)
    except (ConfigError, SpecError, OSError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    start = time.perf_counter()
    try:
        result = run(cfg)
    except (ConfigError, SpecError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        # bad parameter combinations surface as ValueError from the modules
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    write_outputs(result, cfg, out)
    log.info("%s finished in %.1f s", cfg.name, time.perf_counter() - start)
    for c in result.checks:
        print(f"{c['verdict']:<12} {c['name']}")
    print(f"{result.verdict:<12} {cfg.name} -> {out}")
    return 0 if all(c["verdict"] in OK_VERDICTS + ("RECORDED",) for c in result.checks) else 1


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
