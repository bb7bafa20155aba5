import cmath
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from blindqc.core import (Angle8, check_density, hermitian_eigenvalues, is_hermitian, minus_state, phase,
                          plus_state, projector, trace_distance)

indices = st.integers(min_value=-40, max_value=40)


def random_density(rng, dim, rank=None):
    rank = rank or dim
    g = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


@given(indices, indices)
def test_angle_group_laws(a, b):
    assert Angle8(a) + Angle8(b) == Angle8(a + b)
    assert Angle8(a) - Angle8(b) + Angle8(b) == Angle8(a)
    assert -(-Angle8(a)) == Angle8(a)
    assert 0 <= Angle8(a).index < 8


def test_pi_is_four():
    assert Angle8(4).radians == pytest.approx(math.pi)
    assert Angle8(3).flip() == Angle8(7)


@given(indices)
def test_phase_matches_exponential(k):
    assert phase(k) == pytest.approx(cmath.exp(1j * math.pi * k / 4), abs=1e-13)


@given(indices)
def test_plus_minus_orthonormal(k):
    p, m = plus_state(k), minus_state(k)
    assert np.vdot(p, p).real == pytest.approx(1.0)
    assert abs(np.vdot(p, m)) < 1e-15
    assert np.allclose(p, np.array([1, cmath.exp(1j * math.pi * k / 4)]) / math.sqrt(2))


def _char_poly_roots_2x2(m):
    # independent eigenvalue route for Hermitian 2x2: roots of x^2 - tr x + det
    tr = np.trace(m).real
    det = (m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]).real
    disc = math.sqrt(max(tr * tr / 4 - det, 0.0))
    return sorted([tr / 2 - disc, tr / 2 + disc])


@given(st.integers(0, 2**32 - 1))
def test_trace_distance_matches_closed_form_for_qubits(seed):
    rng = np.random.default_rng(seed)
    a, b = random_density(rng, 2), random_density(rng, 2)
    roots = _char_poly_roots_2x2(a - b)
    assert trace_distance(a, b) == pytest.approx(0.5 * sum(abs(r) for r in roots), abs=1e-12)


def test_trace_distance_pure_states_oracle():
    # pure states: D = sqrt(1 - |<a|b>|^2) = |sin((j - k) pi / 8)| for equatorial states
    for j in range(8):
        for k in range(8):
            assert trace_distance(projector(plus_state(j)), projector(plus_state(k))) == pytest.approx(
                abs(math.sin((j - k) * math.pi / 8)), abs=1e-12)


@given(st.integers(0, 2**32 - 1), st.integers(2, 6))
def test_trace_distance_metric_properties(seed, dim):
    rng = np.random.default_rng(seed)
    a, b, c = (random_density(rng, dim) for _ in range(3))
    ab = trace_distance(a, b)
    assert 0.0 <= ab <= 1.0
    assert ab == pytest.approx(trace_distance(b, a), abs=1e-12)
    assert trace_distance(a, a) < 1e-12
    assert ab <= trace_distance(a, c) + trace_distance(c, b) + 1e-12


def test_trace_distance_rejects_bad_input():
    with pytest.raises(ValueError):
        trace_distance(np.eye(2) / 2, np.eye(3) / 3)
    with pytest.raises(ValueError):
        trace_distance(np.array([[1, 1], [0, 0]], dtype=complex), np.eye(2) / 2)


def test_eigenvalues_rejects_non_hermitian():
    with pytest.raises(ValueError):
        hermitian_eigenvalues(np.array([[0, 1], [0, 0]], dtype=complex))
    assert is_hermitian(np.eye(3))


def test_check_density():
    check_density(np.eye(2) / 2)
    with pytest.raises(ValueError):
        check_density(np.eye(2))
    with pytest.raises(ValueError):
        check_density(np.diag([1.5, -0.5]))
