"""Experiment drivers behind the command line: seeding, campaigns and verdicts.

Per-trial generators come from ``SeedSequence([master_seed, stream, trial])``:
the master seed and the trial index are mixed by numpy's SeedSequence hash, so
trial ``i`` sees the same stream however the trials are scheduled. ``stream``
separates independent uses of one master seed (0 for the protocol under test,
1 for the plain reference run).
"""
from __future__ import annotations

import itertools
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy import stats

from .analysis import PreparationModel, certify, fail_abort_bound
from .core import plus_state
from .i1dc import client_theta, i1dc_branches, run_i1dc
from .mbqc import BrickworkPattern, run_plain_mbqc
from .rbsp import ChannelModel, make_strategy, required_pulses, run_rbsp
from .ubqc import RbspPreparation, run_ubqc

SIGNIFICANCE = 1e-3


def trial_rng(master_seed: int, trial: int, stream: int = 0) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([int(master_seed), int(stream), int(trial)]))


def clopper_pearson(k: int, n: int, confidence: float = 0.95) -> tuple[float, float]:
    ci = stats.binomtest(k, n).proportion_ci(confidence_level=confidence, method="exact")
    return float(ci.low), float(ci.high)


def binomial_verdict(k: int, n: int, bound: float, significance: float = SIGNIFICANCE) -> dict:
    """One-sided exact test of ``rate <= bound``; FAIL only on a significant excess."""
    p_value = float(stats.binom.sf(k - 1, n, bound)) if k > 0 else 1.0
    low, high = clopper_pearson(k, n)
    return {
        "count": k,
        "trials": n,
        "rate": k / n,
        "ci95": [low, high],
        "bound": bound,
        "p_value": p_value,
        "significance": significance,
        "verdict": "PASS" if p_value >= significance else "FAIL",
    }


def total_variation(a: dict, b: dict) -> float:
    keys = set(a) | set(b)
    return 0.5 * sum(abs(a.get(k, 0.0) - b.get(k, 0.0)) for k in keys)


def distribution_report(samples) -> dict:
    """Per-outcome rate with its exact 95% interval, keyed by the output bit string."""
    n = len(samples)
    counts: dict = {}
    for s in samples:
        counts[s] = counts.get(s, 0) + 1
    return {"".join(map(str, k)): {"count": c, "rate": c / n, "ci95": list(clopper_pearson(c, n))}
            for k, c in sorted(counts.items())}


def empirical(samples) -> dict:
    out: dict = {}
    for s in samples:
        out[s] = out.get(s, 0) + 1
    n = len(samples)
    return {k: v / n for k, v in sorted(out.items())}


def _map(fn, args, workers: int):
    if workers and workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(fn, args, chunksize=max(1, len(args) // (8 * workers))))
    return [fn(a) for a in args]


# ---------------------------------------------------------------------------
# rbsp Monte Carlo
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RbspConfig:
    N: int
    T: float
    mu: float | None = None
    strategy: str = "honest"
    trials: int = 1000
    master_seed: int = 0
    lossless: bool | None = None


def _rbsp_trial(args) -> tuple[int, bool, bool, tuple]:
    cfg, i = args
    out = run_rbsp(cfg.N, ChannelModel(cfg.T, cfg.mu), make_strategy(cfg.strategy, cfg.lossless),
                   trial_rng(cfg.master_seed, i), quantum=False)
    return i, out.aborted, out.fail_event, out.declared


def rbsp_montecarlo(cfg: RbspConfig, workers: int = 0) -> tuple[dict, list]:
    """Run the campaign and test the relevant event rate against ``exp(-N T^4/18)``.

    The honest server is judged on aborts, any other strategy on runs that
    fail without being caught.
    """
    rows = _map(_rbsp_trial, [(cfg, i) for i in range(cfg.trials)], workers)
    aborts = sum(1 for _, a, _, _ in rows if a)
    fails = sum(1 for _, _, f, _ in rows if f)
    undetected = sum(1 for _, a, f, _ in rows if f and not a)
    strategy = make_strategy(cfg.strategy, cfg.lossless)
    honest = strategy.name == "honest"
    bound = fail_abort_bound(cfg.N, cfg.T)
    event, count = ("abort", aborts) if honest else ("undetected_fail", undetected)
    summary = {
        "command": "rbsp-mc",
        "config": {"N": cfg.N, "T": cfg.T, "mu": ChannelModel(cfg.T, cfg.mu).mu, "strategy": strategy.name,
                   "lossless": strategy.lossless, "trials": cfg.trials, "seed": cfg.master_seed},
        "seed": cfg.master_seed,
        "trials": cfg.trials,
        "aborts": aborts,
        "fails": fails,
        "undetected_fails": undetected,
        "bound": bound,
        "tested_event": event,
        "test": binomial_verdict(count, cfg.trials, bound),
    }
    summary["verdict"] = summary["test"]["verdict"]
    per_trial = [{"trial": i, "aborted": int(a), "fail_event": int(f), "declared_zero": d[0],
                  "declared_one": d[1], "declared_multi": d[2]} for i, a, f, d in rows]
    return summary, per_trial


# ---------------------------------------------------------------------------
# bound table
# ---------------------------------------------------------------------------

TABLE_COLUMNS = ("S", "epsilon", "T", "N", "per_call_bound", "total_bound")


def bound_table(S_values, eps_values, T_values) -> list[dict]:
    if not (S_values and eps_values and T_values):
        raise ValueError("every grid needs at least one value")
    rows = []
    for S in S_values:
        for eps in eps_values:
            for T in T_values:
                N = required_pulses(int(S), float(eps), float(T))
                per = fail_abort_bound(N, float(T))
                rows.append({"S": int(S), "epsilon": float(eps), "T": float(T), "N": N,
                             "per_call_bound": per, "total_bound": int(S) * per})
    return rows


# ---------------------------------------------------------------------------
# blindness check
# ---------------------------------------------------------------------------

def preparation_from_config(cfg: dict) -> PreparationModel:
    kind = cfg.get("preparation", "ideal")
    if kind == "ideal":
        return PreparationModel.ideal()
    if kind == "rbsp":
        if "p_fail" in cfg:
            return PreparationModel.rbsp_endstate(float(cfg["p_fail"]))
        return PreparationModel.rbsp_endstate(fail_abort_bound(int(cfg["N"]), float(cfg["T"])))
    if kind == "depolarized":
        return PreparationModel.depolarized(float(cfg["q"]))
    raise ValueError(f"unknown preparation {kind!r}")


def blindness_check(cfg: dict) -> dict:
    S = int(cfg.get("S", 1))
    prep = preparation_from_config(cfg)
    report = certify(S, prep)
    tol = 1e-10
    ok = report["joint_distance"] <= report["certified_epsilon"] + tol
    if cfg.get("preparation", "ideal") == "ideal":
        ok = ok and report["phi_independent"]
    if "epsilon" in cfg:
        ok = ok and report["certified_epsilon"] <= float(cfg["epsilon"]) + tol
    return {"command": "blindness-check", "config": cfg, **report, "tolerance": tol,
            "verdict": "PASS" if ok else "FAIL"}


# ---------------------------------------------------------------------------
# i1dc property run
# ---------------------------------------------------------------------------

def i1dc_check(k_max: int = 10, instances: int = 1000, exhaustive=(2, 3), master_seed: int = 0) -> dict:
    worst = 1.0
    checked = 0
    for k in exhaustive:
        for sigmas in itertools.product(range(8), repeat=k):
            for res, _ in i1dc_branches(sigmas):
                worst = min(worst, res.final_state.fidelity(plus_state(client_theta(sigmas, res.t_bits))))
                checked += 1
    for i in range(instances):
        rng = trial_rng(master_seed, i)
        k = int(rng.integers(1, k_max + 1))
        sigmas = [int(s) for s in rng.integers(0, 8, k)]
        res = run_i1dc(sigmas, rng)
        worst = min(worst, res.final_state.fidelity(plus_state(client_theta(sigmas, res.t_bits))))
        checked += 1
    return {"command": "i1dc-test", "config": {"k_max": k_max, "trials": instances,
                                                "exhaustive": list(exhaustive), "seed": master_seed},
            "cases": checked, "min_fidelity": worst, "threshold": 1 - 1e-9,
            "verdict": "PASS" if worst >= 1 - 1e-9 else "FAIL"}


# ---------------------------------------------------------------------------
# ubqc campaign
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class UbqcConfig:
    pattern: BrickworkPattern
    preparation: str = "ideal"
    N: int | None = None
    T: float = 0.5
    mu: float | None = None
    epsilon: float | None = None
    strategy: str = "honest"
    trials: int = 1
    master_seed: int = 0
    compare_plain: bool = False
    tv_tolerance: float = 0.05

    def rbsp_pulses(self) -> int:
        if self.N is not None:
            return int(self.N)
        if self.epsilon is None:
            raise ValueError("rbsp preparation needs N or epsilon")
        return required_pulses(self.pattern.size, self.epsilon, self.T)


def _ubqc_trial(args):
    cfg, i = args
    prep = "ideal"
    if cfg.preparation == "rbsp":
        prep = RbspPreparation(cfg.rbsp_pulses(), ChannelModel(cfg.T, cfg.mu), make_strategy(cfg.strategy))
    run = run_ubqc(cfg.pattern, preparation=prep, seed=np.random.SeedSequence([cfg.master_seed, 0, i]))
    out = None if run.aborted else run.result.corrected_outputs
    return out, run.transcript.to_jsonl("client")


def _plain_trial(args):
    cfg, i = args
    return run_plain_mbqc(cfg.pattern, trial_rng(cfg.master_seed, i, stream=1)).corrected_outputs


def ubqc_campaign(cfg: UbqcConfig, workers: int = 0) -> tuple[dict, list[str]]:
    args = [(cfg, i) for i in range(cfg.trials)]
    results = _map(_ubqc_trial, args, workers)
    outputs = [o for o, _ in results if o is not None]
    aborts = sum(1 for o, _ in results if o is None)
    transcripts = [t for _, t in results]
    summary = {
        "command": "run-ubqc",
        "config": {"pattern": cfg.pattern.to_json(), "preparation": cfg.preparation, "trials": cfg.trials,
                   "seed": cfg.master_seed, "compare_plain": cfg.compare_plain},
        "seed": cfg.master_seed,
        "trials": cfg.trials,
        "completed": len(outputs),
        "aborts": aborts,
        "output_distribution": distribution_report(outputs) if outputs else {},
    }
    checks = []
    if cfg.preparation == "rbsp":
        N = cfg.rbsp_pulses()
        # union bound over the S preparation calls
        bound = min(1.0, cfg.pattern.size * fail_abort_bound(N, cfg.T))
        summary["config"].update({"N": N, "T": cfg.T, "mu": ChannelModel(cfg.T, cfg.mu).mu,
                                  "strategy": cfg.strategy, "epsilon": cfg.epsilon})
        summary["abort_test"] = binomial_verdict(aborts, cfg.trials, bound)
        checks.append(summary["abort_test"]["verdict"] == "PASS")
    if cfg.compare_plain:
        plain = _map(_plain_trial, args, workers)
        tv = total_variation(empirical(outputs), empirical(plain)) if outputs else 1.0
        summary["plain_distribution"] = distribution_report(plain)
        summary["tv_distance"] = tv
        summary["tv_tolerance"] = cfg.tv_tolerance
        checks.append(tv <= cfg.tv_tolerance)
    summary["verdict"] = "PASS" if all(checks) else "FAIL"
    return summary, transcripts
