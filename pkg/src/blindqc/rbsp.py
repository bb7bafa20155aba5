"""Remote blind qubit preparation from weak coherent pulses.

The client sends ``N`` phase-randomized pulses with random polarizations. The
server reports a photon number per pulse, the client aborts when too many
vacua are reported, and otherwise the server chains one qubit per non-empty
pulse through the interlaced 1-D cluster to obtain ``|+_theta>``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .analysis import endstate_from_qubit
from .core import Angle8
from .i1dc import client_theta, couple_and_measure, t_from_s
from .qsim import PureState, branch_stream


class ConsistencyError(RuntimeError):
    """A run reached a state the protocol rules out."""


@dataclass(frozen=True)
class ChannelModel:
    """Transmittance lower bound ``T`` and source mean photon number ``mu`` (defaults to ``T``)."""

    T: float
    mu: float | None = None

    def __post_init__(self) -> None:
        if not 0.0 < self.T <= 1.0:
            raise ValueError(f"transmittance must lie in (0, 1], got {self.T}")
        if self.mu is None:
            object.__setattr__(self, "mu", float(self.T))
        if self.mu <= 0:
            raise ValueError(f"mean photon number must be positive, got {self.mu}")

    @property
    def received_mean(self) -> float:
        return self.T * self.mu


def sample_received_count(channel: ChannelModel, rng: np.random.Generator, size=None, lossless: bool = False):
    """Photons reaching the server: Poisson with mean ``T * mu`` (or ``mu`` without loss)."""
    lam = channel.mu if lossless else channel.received_mean
    return rng.poisson(lam, size)


def abort_threshold(N: int, T: float) -> float:
    return N * (math.exp(-T * T) + T * T / 6)


def vacuum_abort_test(N: int, T: float, reported_zero_count: int) -> bool:
    """True when the reported vacua exceed ``N (e^{-T^2} + T^2/6)``."""
    if N < 1:
        raise ValueError("N must be positive")
    if not 0 <= reported_zero_count <= N:
        raise ValueError("reported vacuum count must lie in [0, N]")
    return reported_zero_count > abort_threshold(N, T)


def required_pulses(S: int, epsilon: float, T: float) -> int:
    """Smallest ``N`` with ``N >= 18 ln(S/epsilon) / T^4``."""
    if S < 1:
        raise ValueError("S must be at least 1")
    if not 0.0 < epsilon < 1.0:
        raise ValueError("epsilon must lie in (0, 1)")
    if not 0.0 < T <= 1.0:
        raise ValueError("T must lie in (0, 1]")
    return max(1, math.ceil(18 * math.log(S / epsilon) / T**4))


class ServerStrategy:
    """Memoryless photon-number declaration policy.

    ``declare`` sees the polarization only for pulses holding two or more
    photons, the only case in which the server can learn it.
    """

    name = "abstract"
    lossless = False

    def declare(self, true_count: int, sigma: Angle8 | None = None) -> int:
        raise NotImplementedError

    def declare_many(self, true_counts: np.ndarray, sigmas: np.ndarray) -> np.ndarray:
        return np.array([self.declare(int(c), Angle8(int(s)) if c >= 2 else None)
                         for c, s in zip(true_counts, sigmas)], dtype=np.int64)

    def __repr__(self) -> str:
        return f"{type(self).__name__}(lossless={self.lossless})"


class Honest(ServerStrategy):
    name = "honest"

    def declare(self, true_count, sigma=None):
        return int(true_count)

    def declare_many(self, true_counts, sigmas):
        return np.asarray(true_counts, dtype=np.int64).copy()


class SuppressSingles(ServerStrategy):
    """Report vacuum for zero or one photon, the truth otherwise."""

    name = "suppress-singles"

    def __init__(self, lossless: bool = True):
        self.lossless = lossless

    def declare(self, true_count, sigma=None):
        return strategy_suppress_singles(true_count)

    def declare_many(self, true_counts, sigmas):
        c = np.asarray(true_counts, dtype=np.int64)
        return np.where(c <= 1, 0, c)


def strategy_suppress_singles(true_count: int) -> int:
    return 0 if true_count <= 1 else int(true_count)


STRATEGIES = {"honest": Honest, "suppress-singles": SuppressSingles}


def make_strategy(name: str, lossless: bool | None = None) -> ServerStrategy:
    key = name.lower().replace("_", "-")
    if key == "suppresssingles":
        key = "suppress-singles"
    if key not in STRATEGIES:
        raise ValueError(f"unknown strategy {name!r}; choose from {sorted(STRATEGIES)}")
    strat = STRATEGIES[key]()
    if lossless is not None:
        strat.lossless = lossless
    return strat


def _classify(counts: np.ndarray) -> tuple[int, int, int]:
    return int(np.sum(counts == 0)), int(np.sum(counts == 1)), int(np.sum(counts >= 2))


@dataclass(frozen=True)
class RbspOutcome:
    aborted: bool
    fail_event: bool
    theta_client: Angle8 | None
    server_state: np.ndarray | None
    final_qubit: PureState | None = None
    measured: tuple[int, int, int] = (0, 0, 0)
    declared: tuple[int, int, int] = (0, 0, 0)
    declared_counts: tuple[int, ...] = field(default=(), repr=False)
    t_bits: tuple[int, ...] = field(default=(), repr=False)


def run_rbsp(N: int, channel: ChannelModel, strategy: ServerStrategy, rng: np.random.Generator,
             quantum: bool = True) -> RbspOutcome:
    """One run of the preparation protocol.

    With ``quantum=False`` only the photon statistics, the abort decision and
    the fail event are produced; the chain is not simulated.
    """
    if N < 1:
        raise ValueError("N must be positive")
    sigmas = rng.integers(0, 8, N)
    true_counts = sample_received_count(channel, rng, N, lossless=strategy.lossless)
    declared = strategy.declare_many(true_counts, sigmas)
    if declared.shape != true_counts.shape or np.any(declared < 0):
        raise ConsistencyError("strategy produced an invalid declaration vector")

    measured_split = _classify(true_counts)
    declared_split = _classify(declared)
    if sum(measured_split) != N or sum(declared_split) != N:
        raise ConsistencyError("photon-number classes do not sum to N")

    aborted = vacuum_abort_test(N, channel.T, declared_split[0])
    fail_event = not bool(np.any((true_counts == 1) & (declared == 1)))
    common = dict(measured=measured_split, declared=declared_split,
                  declared_counts=tuple(int(c) for c in declared))
    if aborted:
        return RbspOutcome(True, fail_event, None, None, **common)

    kept = np.flatnonzero(declared > 0)
    if kept.size == 0:
        raise ConsistencyError("no abort although every pulse was declared empty")
    if not quantum:
        return RbspOutcome(False, fail_event, None, None, **common)

    chain = [Angle8(int(s)) for s in sigmas[kept]]
    # a pulse declared non-empty without photons is replaced by a server-chosen |+>
    server_angles = [a if true_counts[k] > 0 else Angle8(0) for a, k in zip(chain, kept)]
    stream = branch_stream(rng)
    state = PureState.plus_product([server_angles[0]])
    s_bits = []
    for sigma in server_angles[1:]:
        bit, state = couple_and_measure(state, sigma, next(stream))
        s_bits.append(bit)
    t_bits = t_from_s(s_bits)
    theta = client_theta(chain, t_bits)
    server_state = endstate_from_qubit(state, theta, failed=fail_event)
    return RbspOutcome(False, fail_event, theta, server_state, state, t_bits=t_bits, **common)
