import itertools

import pytest
from hypothesis import given
from hypothesis import strategies as st

from blindqc.core import Angle8, plus_state
from blindqc.i1dc import client_theta, i1dc_branches, run_i1dc, t_from_s

angles = st.lists(st.integers(0, 7), min_size=1, max_size=9)


def test_suffix_parities_by_hand():
    assert t_from_s([]) == (0,)
    assert t_from_s([1]) == (1, 0)
    assert t_from_s([1, 0, 1]) == (0, 1, 1, 0)


@pytest.mark.parametrize("s1,s2", list(itertools.product(range(8), repeat=2)))
def test_two_qubit_chain_by_hand(s1, s2):
    results = {res.s_bits: res for res, _ in i1dc_branches([s1, s2])}
    assert client_theta([s1, s2], results[(0,)].t_bits) == Angle8(s1 + s2)
    assert client_theta([s1, s2], results[(1,)].t_bits) == Angle8(s2 - s1)
    for res in results.values():
        assert res.final_state.fidelity(plus_state(client_theta([s1, s2], res.t_bits))) > 1 - 1e-12


@given(angles, st.lists(st.floats(0, 0.999999), min_size=8, max_size=8))
def test_folded_qubit_matches_client_angle(sigmas, us):
    res = run_i1dc(sigmas, us)
    assert len(res.s_bits) == len(sigmas) - 1
    assert res.final_state.fidelity(plus_state(client_theta(sigmas, res.t_bits))) >= 1 - 1e-9


@given(st.lists(st.integers(0, 7), min_size=1, max_size=5))
def test_branches_are_uniform(sigmas):
    probs = [p for _, p in i1dc_branches(sigmas)]
    assert len(probs) == 2 ** (len(sigmas) - 1)
    assert all(p == pytest.approx(probs[0]) for p in probs)
    assert sum(probs) == pytest.approx(1.0)


def test_errors():
    with pytest.raises(ValueError):
        run_i1dc([], [0.1])
    with pytest.raises(ValueError):
        client_theta([1, 2], [0])
