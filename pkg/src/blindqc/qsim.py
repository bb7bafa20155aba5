"""Small dense state-vector simulator.

Only the operations the protocols need are provided: Hadamard, controlled-Z,
and single-qubit measurements in the (X, Y) plane. Qubit 0 is the leftmost
tensor factor. Measurements remove the measured qubit from the register, so
indices always refer to positions in the *current* register.

Branch choice is never random inside this module: the caller passes a number
``u`` in [0, 1) and the first branch whose cumulative Born probability exceeds
``u`` is taken.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import ATOL, AngleLike, as_angle, phase, plus_state

MAX_QUBITS = 14

_H = np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2)


class SimulatorCapError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class PureState:
    num_qubits: int
    amplitudes: np.ndarray

    def __post_init__(self) -> None:
        if self.num_qubits < 0:
            raise ValueError("negative qubit count")
        if self.num_qubits > MAX_QUBITS:
            raise SimulatorCapError(f"{self.num_qubits} qubits exceeds the cap of {MAX_QUBITS}")
        amps = np.array(self.amplitudes, dtype=complex).reshape(-1)
        if amps.size != 2**self.num_qubits:
            raise ValueError(f"expected {2**self.num_qubits} amplitudes, got {amps.size}")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def from_vector(cls, vec) -> PureState:
        vec = np.asarray(vec, dtype=complex).reshape(-1)
        n = int(round(math.log2(vec.size)))
        if 2**n != vec.size:
            raise ValueError("vector length is not a power of two")
        return cls(n, vec)

    @classmethod
    def zeros(cls, n: int) -> PureState:
        vec = np.zeros(2**n, dtype=complex)
        vec[0] = 1.0
        return cls(n, vec)

    @classmethod
    def plus_product(cls, angles) -> PureState:
        """Tensor product of ``|+_a>`` over ``angles`` (left to right)."""
        vec = np.ones(1, dtype=complex)
        for a in angles:
            vec = np.kron(vec, plus_state(a))
        return cls(len(angles), vec)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def tensor(self, other: PureState) -> PureState:
        return PureState(self.num_qubits + other.num_qubits, np.kron(self.amplitudes, other.amplitudes))

    def fidelity(self, other) -> float:
        """``|<self|other>|^2``; ``other`` may be a PureState or a raw vector."""
        vec = other.amplitudes if isinstance(other, PureState) else np.asarray(other, dtype=complex)
        return float(abs(np.vdot(self.amplitudes, vec)) ** 2)

    def _tensor(self) -> np.ndarray:
        return self.amplitudes.reshape((2,) * self.num_qubits)

    def _check(self, q: int) -> None:
        if not 0 <= q < self.num_qubits:
            raise IndexError(f"qubit {q} out of range for {self.num_qubits}-qubit register")


@dataclass(frozen=True, eq=False)
class MeasurementOutcome:
    bit: int
    probability: float
    post_state: PureState


def apply_h(state: PureState, target: int) -> PureState:
    state._check(target)
    t = np.moveaxis(state._tensor(), target, 0)
    t = np.tensordot(_H, t, axes=([1], [0]))
    return PureState(state.num_qubits, np.moveaxis(t, 0, target).reshape(-1))


def apply_cz(state: PureState, a: int, b: int) -> PureState:
    state._check(a)
    state._check(b)
    if a == b:
        raise ValueError("controlled-Z needs two distinct qubits")
    t = state._tensor().copy()
    idx = [slice(None)] * state.num_qubits
    idx[a] = 1
    idx[b] = 1
    t[tuple(idx)] *= -1
    return PureState(state.num_qubits, t.reshape(-1))


def branch_amplitudes(state: PureState, target: int, delta: AngleLike) -> tuple[np.ndarray, np.ndarray]:
    """Unnormalized post-measurement vectors for outcomes ``|+_delta>`` and ``|-_delta>``."""
    state._check(target)
    t = np.moveaxis(state._tensor(), target, 0)
    a0, a1 = t[0].reshape(-1), t[1].reshape(-1)
    rot = phase(as_angle(delta)).conjugate() * a1
    return (a0 + rot) / math.sqrt(2), (a0 - rot) / math.sqrt(2)


def measure_rotated(state: PureState, target: int, delta: AngleLike, branch_select: float) -> MeasurementOutcome:
    """Measure ``target`` in the ``{|+_delta>, |-_delta>}`` basis; bit 0 is ``|+_delta>``."""
    if not 0.0 <= branch_select < 1.0:
        raise ValueError("branch_select must lie in [0, 1)")
    v0, v1 = branch_amplitudes(state, target, delta)
    p0 = float(np.vdot(v0, v0).real)
    p1 = float(np.vdot(v1, v1).real)
    total = p0 + p1
    p0, p1 = p0 / total, p1 / total
    bit = 0 if branch_select < p0 else 1
    vec, prob = (v0, p0) if bit == 0 else (v1, p1)
    vec = vec / math.sqrt(prob * total)
    return MeasurementOutcome(bit, prob, PureState(state.num_qubits - 1, vec))


def measure_pauli_x(state: PureState, target: int, branch_select: float) -> MeasurementOutcome:
    return measure_rotated(state, target, 0, branch_select)


def outcome_probabilities(state: PureState, target: int, delta: AngleLike) -> tuple[float, float]:
    v0, v1 = branch_amplitudes(state, target, delta)
    p0 = float(np.vdot(v0, v0).real)
    p1 = float(np.vdot(v1, v1).real)
    s = p0 + p1
    return p0 / s, p1 / s


def project(state: PureState, target: int, delta: AngleLike, bit: int) -> tuple[float, PureState | None]:
    """Force a measurement outcome; returns its probability and the renormalized branch."""
    v0, v1 = branch_amplitudes(state, target, delta)
    vec = v0 if bit == 0 else v1
    prob = float(np.vdot(vec, vec).real) / state.norm() ** 2
    if prob < ATOL**2:
        return prob, None
    return prob, PureState(state.num_qubits - 1, vec / np.linalg.norm(vec))


def pure_to_density(state: PureState | np.ndarray) -> np.ndarray:
    vec = state.amplitudes if isinstance(state, PureState) else np.asarray(state, dtype=complex).reshape(-1)
    return np.outer(vec, vec.conj())


def branch_stream(source):
    """Normalize a source of branch selectors into an iterator of floats in [0, 1).

    ``source`` may be a numpy Generator, an integer seed, or an iterable of floats.
    """
    if isinstance(source, np.random.Generator):
        return _generator_stream(source)
    if isinstance(source, (int, np.integer)):
        return _generator_stream(np.random.default_rng(int(source)))
    return iter(source)


def _generator_stream(rng: np.random.Generator):
    while True:
        yield float(rng.random())
