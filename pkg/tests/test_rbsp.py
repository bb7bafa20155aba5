import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from blindqc.analysis import CptpMap
from blindqc.core import plus_state, projector, trace_distance
from blindqc.rbsp import (ChannelModel, Honest, SuppressSingles, abort_threshold, make_strategy, required_pulses,
                          run_rbsp, sample_received_count, strategy_suppress_singles, vacuum_abort_test)


def poisson_pmf(k, lam):
    return math.exp(-lam) * lam**k / math.factorial(k)


@pytest.mark.parametrize("T,mu,lossless", [(0.5, None, False), (0.8, 1.5, False), (0.5, None, True)])
def test_photon_counts_follow_poisson(T, mu, lossless):
    ch = ChannelModel(T, mu)
    lam = ch.mu if lossless else T * ch.mu
    n = 200_000
    counts = sample_received_count(ch, np.random.default_rng(0), n, lossless=lossless)
    for k in range(4):
        p = poisson_pmf(k, lam)
        assert abs(np.mean(counts == k) - p) < 5 * math.sqrt(p * (1 - p) / n)


def test_channel_defaults_and_validation():
    assert ChannelModel(0.3).mu == 0.3
    for bad in (0.0, 1.2, -0.1):
        with pytest.raises(ValueError):
            ChannelModel(bad)
    with pytest.raises(ValueError):
        ChannelModel(0.5, 0.0)


def test_abort_threshold_boundary():
    limit = 100 * (math.exp(-0.25) + 0.25 / 6)
    assert abort_threshold(100, 0.5) == pytest.approx(limit)
    assert not vacuum_abort_test(100, 0.5, math.floor(limit))
    assert vacuum_abort_test(100, 0.5, math.floor(limit) + 1)
    with pytest.raises(ValueError):
        vacuum_abort_test(10, 0.5, 11)


def test_required_pulses_by_hand():
    assert required_pulses(100, 1e-6, 0.5) == 5306
    assert required_pulses(1, 0.5, 1.0) == math.ceil(18 * math.log(2))
    for args in ((0, 0.1, 0.5), (1, 0.0, 0.5), (1, 0.1, 0.0)):
        with pytest.raises(ValueError):
            required_pulses(*args)


@given(st.integers(1, 1000), st.floats(1e-9, 0.5), st.floats(0.05, 1.0))
def test_required_pulses_is_minimal(S, eps, T):
    N = required_pulses(S, eps, T)
    assert S * math.exp(-N * T**4 / 18) <= eps * (1 + 1e-12)
    if N > 1:
        assert (N - 1) < 18 * math.log(S / eps) / T**4


def test_strategies():
    counts = np.array([0, 1, 2, 3, 1])
    assert list(Honest().declare_many(counts, counts)) == [0, 1, 2, 3, 1]
    assert list(SuppressSingles().declare_many(counts, counts)) == [0, 0, 2, 3, 0]
    assert [strategy_suppress_singles(c) for c in range(4)] == [0, 0, 2, 3]
    assert make_strategy("suppress-singles").lossless
    assert not make_strategy("honest").lossless
    with pytest.raises(ValueError):
        make_strategy("nope")


def test_honest_run_hands_over_the_client_qubit():
    rng = np.random.default_rng(2)
    flag = CptpMap.append_flag()
    runs = 0
    for _ in range(20):
        out = run_rbsp(60, ChannelModel(0.9), Honest(), rng)
        if out.aborted:
            continue
        runs += 1
        assert out.final_qubit.fidelity(plus_state(out.theta_client)) > 1 - 1e-9
        assert sum(out.declared) == 60 and out.measured == out.declared
        if not out.fail_event:
            assert trace_distance(out.server_state, flag(projector(plus_state(out.theta_client)))) < 1e-9
    assert runs > 10


def test_suppress_singles_always_fails_and_lossy_always_aborts():
    rng = np.random.default_rng(3)
    for _ in range(20):
        out = run_rbsp(200, ChannelModel(0.5), SuppressSingles(lossless=False), rng, quantum=False)
        assert out.fail_event and out.aborted


def test_seeded_runs_repeat():
    a = run_rbsp(80, ChannelModel(0.7), Honest(), np.random.default_rng(9))
    b = run_rbsp(80, ChannelModel(0.7), Honest(), np.random.default_rng(9))
    assert a.declared_counts == b.declared_counts and a.theta_client == b.theta_client
