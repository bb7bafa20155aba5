import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from blindqc.core import plus_state
from blindqc.mbqc import (BrickworkPattern, adapted_angle, edge_rule, enumerate_branches, output_distribution,
                          positions, run_plain_mbqc)
from blindqc.qsim import SimulatorCapError, project

H = np.array([[1, 1], [1, -1]]) / math.sqrt(2)


def horizontals(n, m):
    return {((x, y), (x + 1, y)) for y in range(1, m + 1) for x in range(1, n)}


def test_edges_small_grid_by_hand():
    assert edge_rule(4, 2) == horizontals(4, 2) | {((3, 1), (3, 2))}
    assert edge_rule(5, 2) == horizontals(5, 2) | {((3, 1), (3, 2)), ((5, 1), (5, 2))}


def test_edges_second_brick_row_by_hand():
    expected = horizontals(9, 3) | {((3, 1), (3, 2)), ((5, 1), (5, 2)), ((7, 2), (7, 3)), ((9, 2), (9, 3))}
    assert edge_rule(9, 3) == expected


def test_measurement_order_is_column_major():
    assert positions(2, 3) == [(1, 1), (1, 2), (1, 3), (2, 1), (2, 2), (2, 3)]


def test_dependencies_by_hand():
    p = BrickworkPattern.from_angles(4, 2, [0] * 8)
    assert p.x_deps[(3, 1)] == {(2, 1)}
    assert p.x_deps[(1, 2)] == frozenset()
    assert p.z_deps[(3, 2)] == {(1, 2), (2, 1)}
    assert p.z_deps[(4, 1)] == {(2, 1)}
    assert p.z_deps[(3, 1)] == {(1, 1), (2, 2)}
    assert p.z_deps[(4, 2)] == {(2, 2)}
    assert p.z_deps[(2, 1)] == frozenset()


@given(st.integers(0, 7), st.integers(0, 1), st.integers(0, 1))
def test_adapted_angle(phi, sx, sz):
    assert adapted_angle(phi, sx, sz).index == ((-phi if sx else phi) + 4 * sz) % 8


@given(st.integers(0, 7), st.integers(0, 7))
def test_two_qubit_output_closed_form(phi1, phi2):
    # one wire, two sites: P(out = 0) = |<+_{phi2}| H |+_{-phi1}>|^2
    expected = abs(np.vdot(plus_state(phi2), H @ plus_state(-phi1))) ** 2
    dist = output_distribution(BrickworkPattern.from_angles(2, 1, [phi1, phi2]))
    assert dist.get((0,), 0.0) == pytest.approx(expected, abs=1e-12)


@given(st.lists(st.integers(0, 7), min_size=4, max_size=4))
def test_branch_probabilities_sum_to_one(angles):
    p = BrickworkPattern.from_angles(2, 2, angles)
    assert sum(pr for _, pr in enumerate_branches(p, min_prob=0.0)) == pytest.approx(1.0, abs=1e-12)


def test_without_adaptation_outputs_depend_on_history():
    # the unadapted run measures at the bare angles; the first outcome then leaks into the output
    p = BrickworkPattern.from_angles(2, 1, [2, 1])
    state = p.resource_state()
    conditionals = []
    for s1 in (0, 1):
        _, post = project(state, 0, 2, s1)
        p0, _ = project(post, 0, 1, 0)
        conditionals.append(p0)
    assert abs(conditionals[0] - conditionals[1]) > 0.1


def test_sampled_run_matches_enumeration():
    p = BrickworkPattern.from_angles(3, 1, [1, 5, 2])
    exact = output_distribution(p)
    rng = np.random.default_rng(1)
    n = 4000
    hits = sum(run_plain_mbqc(p, rng).corrected_outputs == (0,) for _ in range(n))
    assert abs(hits / n - exact[(0,)]) < 5 * math.sqrt(0.25 / n)


def test_json_round_trip(tmp_path):
    p = BrickworkPattern.from_angles(3, 2, [1, 2, 3, 4, 5, 6])
    path = tmp_path / "p.json"
    path.write_text(json.dumps(p.to_json()))
    assert BrickworkPattern.load(path).angle_list() == p.angle_list()


def test_invalid_patterns():
    with pytest.raises(ValueError):
        BrickworkPattern.from_angles(2, 2, [0, 1, 2])
    with pytest.raises(ValueError):
        edge_rule(0, 2)
    with pytest.raises(ValueError):
        BrickworkPattern(2, 1, {(3, 1): 1})
    with pytest.raises(SimulatorCapError):
        BrickworkPattern.from_angles(5, 3, [0] * 15).resource_state()
