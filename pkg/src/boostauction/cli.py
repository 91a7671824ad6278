"""Command-line entry point.

    boostauction generate --config gen.json --out instances/
    boostauction simulate --config sim.json --instances instances/ --out results/
    boostauction verify --suites fixtures,value_boost --samples 1000 --seed 0
    boostauction replay-examples

Configs are JSON documents carrying ``schema_version``.  Every output file
echoes the config that produced it, and is written to a temporary file first
and renamed into place.  Exit codes: 0 success, 1 a check failed, 2 bad usage
or config.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
from pathlib import Path

import numpy as np

from .boosts import BENCHMARK, NONE, UNIFORM
from .fixtures import replay_examples
from .instance import (GeneratorParams, InvalidInstanceError, assign_budgets_via_benchmark,
                       generate_instance, instance_to_dict, load_instance)
from .simulator import ExperimentConfig, format_lift_table, run_sweep, write_traces_csv
from .suites import SUITES, run_suites

SCHEMA_VERSION = 1
EXIT_OK, EXIT_CHECK, EXIT_USAGE = 0, 1, 2
MANIFEST = "manifest.json"


class ConfigError(ValueError):
    pass


def dumps(doc) -> str:
    return json.dumps(doc, indent=1, sort_keys=True) + "\n"


def write_atomic(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        Path(tmp).unlink(missing_ok=True)
        raise


def load_config(path) -> dict:
    try:
        doc = json.loads(Path(path).read_text())
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise ConfigError("config must be a JSON object")
    version = doc.get("schema_version")
    if version != SCHEMA_VERSION:
        raise ConfigError(f"unsupported schema_version {version!r}, expected {SCHEMA_VERSION}")
    return doc


# --------------------------------------------------------------------------
# generate


def budget_seed(seed: int) -> int:
    """Seed of the budget draw for instance seed ``seed``, kept apart from the generator's stream."""
    return int(np.random.SeedSequence([seed, 1]).generate_state(1)[0])


def cmd_generate(config: dict, out: Path) -> int:
    """Write ``batch`` instances with seeds ``seed, seed + 1, ...`` plus a manifest.

    A ``budgets`` section (``rho``, ``mu_lo``, ``mu_hi``) adds benchmark
    budgets; without it instances are unbudgeted.
    """
    if "seed" not in config:
        raise ConfigError("generate config needs a seed")
    seed = int(config["seed"])
    batch = int(config.get("batch", 1))
    if batch < 1:
        raise ConfigError("batch must be at least 1")
    base = dict(config.get("generator", {}))
    base.pop("seed", None)
    budgets = config.get("budgets")
    entries = []
    for k in range(batch):
        s = seed + k
        try:
            params = GeneratorParams(**base, seed=s)
        except TypeError as exc:
            raise ConfigError(f"bad generator params: {exc}") from None
        inst = generate_instance(params)
        entry = {"file": f"instance_{k:04d}.json", "seed": s}
        if budgets is not None:
            bs = budget_seed(s)
            aug = assign_budgets_via_benchmark(
                inst, float(budgets.get("rho", params.rho)),
                (float(budgets.get("mu_lo", params.mu_lo)), float(budgets.get("mu_hi", params.mu_hi))),
                seed=bs)
            doc = instance_to_dict(aug.instance, aug.order, aug.mu)
            entry["budget_seed"] = bs
            entry["constrained"] = [int(i) for i in np.nonzero(aug.constrained)[0]]
        else:
            doc = instance_to_dict(inst)
        doc["seed"] = s
        write_atomic(out / entry["file"], dumps(doc))
        entries.append(entry)
    write_atomic(out / MANIFEST, dumps({"schema_version": SCHEMA_VERSION, "config": config,
                                        "instances": entries}))
    print(f"wrote {batch} instance(s) to {out}")
    return EXIT_OK


# --------------------------------------------------------------------------
# simulate


_SCHEME_PREFIX = {"uboost": UNIFORM, "uniform": UNIFORM, "benchmark": BENCHMARK, "none": NONE}


def parse_scheme(item) -> tuple:
    """``"uboost-0.3"``, ``"benchmark-1.2"`` or ``["uniform", 0.3]`` -> ``(scheme, c)``."""
    if isinstance(item, str):
        name, _, c = item.rpartition("-")
        if not name:
            raise ConfigError(f"scheme {item!r} needs a weight, e.g. uboost-0.3")
    else:
        try:
            name, c = item
        except (TypeError, ValueError):
            raise ConfigError(f"bad scheme entry {item!r}") from None
    try:
        return _SCHEME_PREFIX[str(name).lower()], float(c)
    except (KeyError, ValueError):
        raise ConfigError(f"bad scheme entry {item!r}") from None


def _instance_files(folder: Path) -> list:
    man = folder / MANIFEST
    if man.exists():
        files = [folder / e["file"] for e in json.loads(man.read_text())["instances"]]
    else:
        files = sorted(folder.glob("instance_*.json"))
    if not files:
        raise ConfigError(f"no instances found in {folder}")
    missing = [str(f) for f in files if not f.exists()]
    if missing:
        raise ConfigError(f"missing instance file(s): {', '.join(missing)}")
    return files


def _mean_rows(reports) -> list:
    keys = ("welfare_lift", "revenue_lift", "initial_welfare_lift", "initial_revenue_lift")
    rows = []
    for k, first in enumerate(reports[0].rows):
        row = {"label": first.label, "scheme": first.scheme, "c": first.c}
        for key in keys:
            row[key] = float(np.mean([getattr(r.rows[k], key) for r in reports]))
        rows.append(row)
    return rows


def cmd_simulate(config: dict, instances: Path, out: Path) -> int:
    """Sweep every instance; per-instance trace CSVs, a JSON summary and a lift table."""
    try:
        exp = ExperimentConfig.from_dict(config.get("experiment", {}))
        exp.check()
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad experiment config: {exc}") from None
    schemes = [parse_scheme(s) for s in config.get("schemes", [])]
    reports, per_instance = [], []
    for path in _instance_files(instances):
        rec = load_instance(path)
        if any(s == BENCHMARK for s, _ in schemes) and rec.order is None:
            raise ConfigError(f"{path.name} has no benchmark order; benchmark boosts need one")
        rep = run_sweep(rec.instance, schemes, exp, rec.order)
        reports.append(rep)
        stem = path.stem
        write_atomic(out / f"{stem}_trace.csv", rep.to_csv())
        per_instance.append({"instance": path.name, **rep.to_dict()})
    rows = _mean_rows(reports) if schemes else []
    summary = {"schema_version": SCHEMA_VERSION, "config": config,
               "mechanism": reports[0].mechanism, "instances": len(reports),
               "mean_rows": rows, "per_instance": per_instance}
    table = format_lift_table(reports[0].mechanism, rows)
    write_atomic(out / "summary.json", dumps(summary))
    write_atomic(out / "summary.txt", table)
    sys.stdout.write(table)
    return EXIT_OK


# --------------------------------------------------------------------------
# verify / replay


def cmd_verify(suites: list, samples: int, seed: int, out: Path | None) -> int:
    """Run property suites; exit 1 iff any suite records a violation."""
    try:
        results = run_suites(suites, samples, seed)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    for r in results:
        print(r.line())
    ok = all(r.ok for r in results)
    report = {"schema_version": SCHEMA_VERSION,
              "config": {"suites": suites, "samples": samples, "seed": seed},
              "ok": ok, "suites": [r.to_dict() for r in results]}
    if out is not None:
        write_atomic(out, dumps(report))
    return EXIT_OK if ok else EXIT_CHECK


def cmd_replay(out: Path | None) -> int:
    rep = replay_examples()
    sys.stdout.write(rep.format())
    if out is not None:
        write_atomic(out, dumps({"schema_version": SCHEMA_VERSION, **rep.to_dict()}))
    return EXIT_OK if rep.ok else EXIT_CHECK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="boostauction",
                                description="Boosted position auctions with auto-bidders.")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="write seeded instance files and a manifest")
    g.add_argument("--config", required=True, type=Path)
    g.add_argument("--out", required=True, type=Path)

    s = sub.add_parser("simulate", help="run boost sweeps over an instance folder")
    s.add_argument("--config", required=True, type=Path)
    s.add_argument("--instances", required=True, type=Path)
    s.add_argument("--out", required=True, type=Path)

    v = sub.add_parser("verify", help="run randomised property suites")
    v.add_argument("--suites", default=",".join(SUITES),
                   help=f"comma-separated subset of: {', '.join(SUITES)}")
    v.add_argument("--samples", type=int, default=1000)
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--out", type=Path, default=None, help="write the JSON report here")

    r = sub.add_parser("replay-examples", help="check the hand-built examples")
    r.add_argument("--out", type=Path, default=None, help="write the JSON report here")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "generate":
            return cmd_generate(load_config(args.config), args.out)
        if args.command == "simulate":
            return cmd_simulate(load_config(args.config), args.instances, args.out)
        if args.command == "verify":
            if args.samples < 0:
                raise ConfigError("--samples must be non-negative")
            names = [x.strip() for x in args.suites.split(",") if x.strip()]
            return cmd_verify(names, args.samples, args.seed, args.out)
        return cmd_replay(args.out)
    except (ConfigError, InvalidInstanceError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
