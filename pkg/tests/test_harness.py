import json
import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from blindqc import cli, harness
from blindqc.mbqc import BrickworkPattern


def tail(k, n, p):
    return sum(math.comb(n, j) * p**j * (1 - p) ** (n - j) for j in range(k, n + 1))


@given(st.integers(0, 40), st.floats(0.001, 0.5))
def test_binomial_pvalue_matches_hand_sum(k, p):
    v = harness.binomial_verdict(k, 40, p)
    assert v["p_value"] == pytest.approx(tail(k, 40, p), rel=1e-9, abs=1e-300)
    assert 0 <= v["ci95"][0] <= v["rate"] <= v["ci95"][1] <= 1


@pytest.mark.parametrize("k,n", [(3, 50), (0, 20), (20, 20), (7, 1000)])
def test_clopper_pearson_endpoints_solve_tail_equations(k, n):
    low, high = harness.clopper_pearson(k, n)
    if k > 0:
        assert tail(k, n, low) == pytest.approx(0.025, abs=1e-6)
    if k < n:
        assert 1 - tail(k + 1, n, high) == pytest.approx(0.025, abs=1e-6)


def test_trial_streams_do_not_depend_on_schedule():
    a = [harness.trial_rng(5, i).integers(0, 2**32) for i in range(6)]
    b = [harness.trial_rng(5, i).integers(0, 2**32) for i in reversed(range(6))]
    assert a == b[::-1]
    assert harness.trial_rng(5, 0).integers(0, 2**32) != harness.trial_rng(5, 0, stream=1).integers(0, 2**32)


def test_parallel_campaign_equals_serial():
    cfg = harness.RbspConfig(N=80, T=0.7, trials=64, master_seed=3)
    assert harness.rbsp_montecarlo(cfg, workers=0) == harness.rbsp_montecarlo(cfg, workers=2)


def test_campaign_reports_bound_and_interval():
    summary, rows = harness.rbsp_montecarlo(harness.RbspConfig(N=50, T=0.9, trials=2000))
    assert summary["bound"] == pytest.approx(math.exp(-1.8225), rel=1e-12)
    assert summary["test"]["ci95"][0] <= summary["test"]["rate"] <= summary["test"]["ci95"][1]
    assert summary["verdict"] == "PASS" and len(rows) == 2000


def test_bound_table_halving_epsilon():
    a, b = harness.bound_table([10], [1e-3, 5e-4], [0.5])
    assert b["N"] - a["N"] == pytest.approx(18 * math.log(2) / 0.5**4, abs=1)
    with pytest.raises(ValueError):
        harness.bound_table([], [0.1], [0.5])


def test_blindness_check_examples():
    assert harness.blindness_check({"S": 1})["certified_epsilon"] < 1e-12
    dep = harness.blindness_check({"S": 1, "preparation": "depolarized", "q": 0.2})
    assert dep["certified_epsilon"] == pytest.approx(0.1, abs=1e-9)
    assert harness.blindness_check({"S": 1, "preparation": "rbsp", "p_fail": 0.01})["certified_epsilon"] <= 0.01 + 1e-12


def test_ubqc_with_remote_preparation_abort_rate():
    pattern = BrickworkPattern.from_angles(2, 1, [1, 2])
    cfg = harness.UbqcConfig(pattern, preparation="rbsp", epsilon=0.01, T=0.5, trials=30)
    summary, transcripts = harness.ubqc_campaign(cfg)
    assert summary["config"]["N"] == math.ceil(18 * math.log(2 / 0.01) / 0.5**4)
    assert summary["abort_test"]["bound"] <= 0.01
    assert summary["verdict"] == "PASS" and len(transcripts) == 30


def run_cli(argv, capsys):
    code = cli.main(argv)
    return code, capsys.readouterr()


def test_cli_exit_codes(tmp_path, capsys):
    assert run_cli(["blindness-check", "--preparation", "depolarized", "--q", "0.2"], capsys)[0] == 0
    code, _ = run_cli(["blindness-check", "--preparation", "depolarized", "--q", "0.2", "--epsilon", "0.05"], capsys)
    assert code == 1
    assert run_cli(["blindness-check", "--S", "3"], capsys)[0] == 2
    assert run_cli(["rbsp-mc", "--T", "0.5"], capsys)[0] == 2
    assert run_cli(["run-ubqc", "--config", str(tmp_path / "missing.json")], capsys)[0] == 2
    with pytest.raises(SystemExit) as exc:
        cli.main(["no-such-command"])
    assert exc.value.code == 2


def test_cli_writes_reports(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"pattern": {"n": 2, "m": 1, "angles": [1, 2]}, "trials": 64, "seed": 3}))
    out = tmp_path / "out"
    code, captured = run_cli(["run-ubqc", "--config", str(cfg), "--compare-plain", "--out", str(out), "--plot"],
                             capsys)
    assert code == 0
    summary = json.loads((out / "summary.json").read_text())
    assert summary == json.loads(captured.out)
    assert summary["seed"] == 3 and summary["config"]["pattern"]["angles"] == [1, 2]
    lines = (out / "transcripts.jsonl").read_text().splitlines()
    assert len(lines) == 64 and json.loads(lines[0])["trial"] == 0
    assert (out / "output_distribution.png").read_bytes()[:4] == b"\x89PNG"
    assert "finished" in captured.err


def test_cli_bound_table_csv(capsys):
    code, captured = run_cli(["bound-table", "--S", "100", "--epsilon", "1e-6", "--T", "0.5"], capsys)
    assert code == 0
    header, row = captured.out.splitlines()
    assert header == "S,epsilon,T,N,per_call_bound,total_bound"
    assert row.split(",")[3] == "5306"


def test_summary_config_reruns_identically(tmp_path, capsys):
    code, first = run_cli(["rbsp-mc", "--N", "40", "--T", "0.6", "--trials", "100", "--seed", "9"], capsys)
    cfg = tmp_path / "again.json"
    cfg.write_text(json.dumps(json.loads(first.out)["config"]))
    code2, second = run_cli(["rbsp-mc", "--config", str(cfg)], capsys)
    assert code == code2 and first.out == second.out
