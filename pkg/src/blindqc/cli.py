"""Command-line entry point.

Every subcommand reads an optional JSON config, lets flags override it, prints
a JSON summary on stdout and, with ``--out``, writes the same summary plus
command-specific files to that directory. Exit status is 0 on PASS, 1 when a
bound is violated and 2 on a usage or config error.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
import time
from pathlib import Path

from . import harness
from .mbqc import BrickworkPattern
from .qsim import SimulatorCapError
from .rbsp import STRATEGIES

EXIT_PASS, EXIT_VIOLATION, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _load_config(path) -> dict:
    if path is None:
        return {}
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise UsageError("config must be a JSON object")
    return data


def _merge(cfg: dict, args: argparse.Namespace, keys) -> dict:
    out = dict(cfg)
    for key in keys:
        value = getattr(args, key, None)
        if value is not None and value is not False:
            out[key] = value
    return out


def _pattern(cfg: dict) -> BrickworkPattern:
    if "pattern_file" in cfg:
        return BrickworkPattern.load(cfg["pattern_file"])
    if "pattern" in cfg:
        return BrickworkPattern.from_json(cfg["pattern"])
    raise UsageError("run-ubqc needs 'pattern' ({n, m, angles}) or 'pattern_file' in the config")


def _dump(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def _write_csv(rows: list[dict], columns) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=list(columns), lineterminator="\n")
    writer.writeheader()
    for r in rows:
        writer.writerow({k: repr(v) if isinstance(v, float) else v for k, v in r.items()})
    return buf.getvalue()


def _emit(summary: dict, out: Path | None, files: dict[str, str], plot=None) -> int:
    sys.stdout.write(_dump(summary))
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
        (out / "summary.json").write_text(_dump(summary))
        for name, text in files.items():
            (out / name).write_text(text)
        if plot is not None:
            plot(out)
    return EXIT_PASS if summary["verdict"] == "PASS" else EXIT_VIOLATION


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_run_ubqc(args) -> int:
    cfg = _merge(_load_config(args.config), args, ("seed", "trials", "compare_plain", "preparation",
                                                   "strategy"))
    pattern = _pattern(cfg)
    uc = harness.UbqcConfig(
        pattern=pattern,
        preparation=cfg.get("preparation", "ideal"),
        N=cfg.get("N"),
        T=float(cfg.get("T", 0.5)),
        mu=cfg.get("mu"),
        epsilon=cfg.get("epsilon"),
        strategy=cfg.get("strategy", "honest"),
        trials=int(cfg.get("trials", 1)),
        master_seed=int(cfg.get("seed", 0)),
        compare_plain=bool(cfg.get("compare_plain", False)),
        tv_tolerance=float(cfg.get("tv_tolerance", 0.05)),
    )
    if uc.preparation not in ("ideal", "rbsp"):
        raise UsageError(f"unknown preparation {uc.preparation!r}")
    if uc.trials < 1:
        raise UsageError("trials must be at least 1")
    summary, transcripts = harness.ubqc_campaign(uc, workers=args.workers)
    summary["config"]["tv_tolerance"] = uc.tv_tolerance

    def plot(out):
        from .plotting import plot_output_distributions, plot_rate_vs_bound
        if summary["output_distribution"]:
            plot_output_distributions(summary, out / "output_distribution.png")
        if "abort_test" in summary:
            plot_rate_vs_bound(summary, out / "abort_rate.png")

    text = "".join(json.dumps({"trial": i, "events": [json.loads(x) for x in t.splitlines()]}, sort_keys=True)
                   + "\n" for i, t in enumerate(transcripts))
    return _emit(summary, args.out, {"transcripts.jsonl": text}, plot if args.plot else None)


def cmd_rbsp_mc(args) -> int:
    cfg = _merge(_load_config(args.config), args, ("seed", "trials", "N", "T", "mu", "strategy"))
    missing = [k for k in ("N", "T") if k not in cfg]
    if missing:
        raise UsageError(f"rbsp-mc needs {', '.join(missing)}")
    rc = harness.RbspConfig(N=int(cfg["N"]), T=float(cfg["T"]), mu=cfg.get("mu"),
                            strategy=cfg.get("strategy", "honest"), trials=int(cfg.get("trials", 1000)),
                            master_seed=int(cfg.get("seed", 0)), lossless=cfg.get("lossless"))
    if rc.trials < 1:
        raise UsageError("trials must be at least 1")
    summary, rows = harness.rbsp_montecarlo(rc, workers=args.workers)
    files = {}
    if args.per_trial:
        files["per_trial.csv"] = _write_csv(rows, rows[0].keys())

    def plot(out):
        from .plotting import plot_rate_vs_bound
        plot_rate_vs_bound(summary, out / "rate_vs_bound.png")

    return _emit(summary, args.out, files, plot if args.plot else None)


def cmd_bound_table(args) -> int:
    cfg = _load_config(args.config)
    grid = {k: cfg.get(k) for k in ("S", "epsilon", "T")}
    for key, flag in (("S", args.S), ("epsilon", args.epsilon), ("T", args.T)):
        if flag:
            grid[key] = flag
    if not all(grid.values()):
        raise UsageError("bound-table needs non-empty S, epsilon and T grids")
    rows = harness.bound_table(grid["S"], grid["epsilon"], grid["T"])
    ok = all(r["total_bound"] <= r["epsilon"] for r in rows)
    summary = {"command": "bound-table", "config": grid, "rows": len(rows),
               "max_total_over_epsilon": max(r["total_bound"] / r["epsilon"] for r in rows),
               "verdict": "PASS" if ok else "FAIL"}
    table = _write_csv(rows, harness.TABLE_COLUMNS)
    if args.out is None:
        sys.stdout.write(table)
        return EXIT_PASS if ok else EXIT_VIOLATION

    def plot(out):
        from .plotting import plot_bound_table
        plot_bound_table(rows, out / "bound_table.png")

    return _emit(summary, args.out, {"bound_table.csv": table}, plot if args.plot else None)


def cmd_blindness_check(args) -> int:
    cfg = _merge(_load_config(args.config), args, ("S", "preparation", "p_fail", "q", "epsilon"))
    if int(cfg.get("S", 1)) > 2:
        raise UsageError("joint states are built for S <= 2 only; larger S is covered by the "
                         "per-qubit bound S * epsilon_prep (see 'epsilon_prep' in an S=1 report)")
    summary = harness.blindness_check(cfg)
    return _emit(summary, args.out, {})


def cmd_i1dc_test(args) -> int:
    cfg = _merge(_load_config(args.config), args, ("seed", "trials", "k_max"))
    summary = harness.i1dc_check(k_max=int(cfg.get("k_max", 10)), instances=int(cfg.get("trials", 1000)),
                                 exhaustive=tuple(cfg.get("exhaustive", (2, 3))),
                                 master_seed=int(cfg.get("seed", 0)))
    return _emit(summary, args.out, {})


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def _u64(text: str) -> int:
    value = int(text, 0)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must fit in 64 unsigned bits")
    return value


def _positive(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return value


def _float_list(text: str) -> list[float]:
    return [float(x) for x in text.split(",") if x]


def _int_list(text: str) -> list[int]:
    return [int(x) for x in text.split(",") if x]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="blindqc", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, trials=True):
        p.add_argument("--config", type=Path, help="JSON config file")
        p.add_argument("--out", type=Path, help="directory for summary.json and data files")
        p.add_argument("--seed", type=_u64, help="master seed (overrides the config)")
        if trials:
            p.add_argument("--trials", type=_positive, help="number of trials (overrides the config)")
        p.add_argument("--plot", action="store_true", help="also render PNG figures into --out")
        p.add_argument("--workers", type=int, default=0, help="worker processes; output does not depend on it")

    p = sub.add_parser("run-ubqc", help="blind runs of a brickwork pattern")
    common(p)
    p.add_argument("--compare-plain", action="store_true", help="also sample the unblinded computation")
    p.add_argument("--preparation", choices=("ideal", "rbsp"))
    p.add_argument("--strategy", choices=sorted(STRATEGIES))
    p.set_defaults(func=cmd_run_ubqc)

    p = sub.add_parser("rbsp-mc", help="Monte Carlo of the remote preparation abort/fail rates")
    common(p)
    p.add_argument("--N", type=_positive)
    p.add_argument("--T", type=float)
    p.add_argument("--mu", type=float)
    p.add_argument("--strategy", choices=sorted(STRATEGIES))
    p.add_argument("--per-trial", action="store_true", help="write per_trial.csv")
    p.set_defaults(func=cmd_rbsp_mc)

    p = sub.add_parser("bound-table", help="pulse counts for target blindness levels")
    common(p, trials=False)
    p.add_argument("--S", type=_int_list, help="comma-separated computation sizes")
    p.add_argument("--epsilon", type=_float_list, help="comma-separated targets")
    p.add_argument("--T", type=_float_list, help="comma-separated transmittances")
    p.set_defaults(func=cmd_bound_table)

    p = sub.add_parser("blindness-check", help="exact distance between joint cq-states")
    common(p, trials=False)
    p.add_argument("--S", type=int)
    p.add_argument("--preparation", choices=("ideal", "rbsp", "depolarized"))
    p.add_argument("--p-fail", dest="p_fail", type=float)
    p.add_argument("--q", type=float)
    p.add_argument("--epsilon", type=float)
    p.set_defaults(func=cmd_blindness_check)

    p = sub.add_parser("i1dc-test", help="fidelity check of the chain folding")
    common(p)
    p.add_argument("--k-max", dest="k_max", type=_positive)
    p.set_defaults(func=cmd_i1dc_test)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    start = time.perf_counter()
    try:
        code = args.func(args)
    except (UsageError, ValueError, KeyError, SimulatorCapError) as exc:
        print(f"blindqc: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    # wall time goes to stderr so saved reports stay byte-identical across reruns
    print(f"blindqc: {args.command} finished in {time.perf_counter() - start:.2f}s", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
