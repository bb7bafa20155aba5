"""Approximate-blindness calculus for small computations.

Joint client/server states are classical-quantum: the client holds the
computation angles ``phi`` and the pad bits ``r``, the server holds the
prepared systems and the announced angles ``delta = phi + theta + 4 r``.
Every classical register is block-diagonal, so a joint state is stored as a
map from ``(phi, r, delta)`` to a weight and the tuple of preparation angles
``theta``; the quantum block is the tensor product of the prepared states.

The minimum over all server maps is never computed. Distances are taken to
the ideal state pushed through one caller-fixed map, which gives an upper
bound on the blindness parameter.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import reduce
from typing import Sequence

import numpy as np

from .core import (AngleLike, as_angle, basis_projector, check_density, plus_state, projector, trace_distance,
                   trace_norm_hermitian)

REGISTER_DIM = 9
FLAGGED_DIM = 2 * REGISTER_DIM


# ---------------------------------------------------------------------------
# maps and prepared states
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class CptpMap:
    """A channel given by Kraus operators ``rho -> sum_k K rho K^dagger``."""

    kraus: tuple
    name: str = "custom"

    def __post_init__(self) -> None:
        ops = tuple(np.asarray(k, dtype=complex) for k in self.kraus)
        if not ops:
            raise ValueError("a channel needs at least one Kraus operator")
        d_in = ops[0].shape[1]
        total = sum(k.conj().T @ k for k in ops)
        if not np.allclose(total, np.eye(d_in), atol=1e-10):
            raise ValueError("Kraus operators are not trace preserving")
        object.__setattr__(self, "kraus", ops)

    @property
    def input_dim(self) -> int:
        return self.kraus[0].shape[1]

    @property
    def output_dim(self) -> int:
        return self.kraus[0].shape[0]

    def __call__(self, rho: np.ndarray) -> np.ndarray:
        return sum(k @ rho @ k.conj().T for k in self.kraus)

    @classmethod
    def identity(cls, dim: int = 2) -> CptpMap:
        return cls((np.eye(dim),), "identity")

    @classmethod
    def append_flag(cls, inner: CptpMap | None = None) -> CptpMap:
        """Apply ``inner`` (identity by default), embed in the 9-level register, append flag ``|0>``."""
        inner = inner or cls.identity(2)
        iso = np.zeros((FLAGGED_DIM, inner.output_dim), dtype=complex)
        for k in range(inner.output_dim):
            iso[2 * k, k] = 1.0  # register level k, flag 0
        return cls(tuple(iso @ k for k in inner.kraus), f"append-flag[{inner.name}]")


def embed_qubit(rho: np.ndarray) -> np.ndarray:
    """Place a qubit operator on levels 0 and 1 of the 9-level register."""
    out = np.zeros((REGISTER_DIM, REGISTER_DIM), dtype=complex)
    out[:2, :2] = rho
    return out


def flagged(register_op: np.ndarray, flag: int) -> np.ndarray:
    return np.kron(register_op, basis_projector(flag, 2))


def endstate_model(theta: AngleLike, p_fail: float, inner: CptpMap | None = None) -> np.ndarray:
    """Worst-case prepared state: the intended qubit with flag 0, or the classical angle with flag 1."""
    if not 0.0 <= p_fail <= 1.0:
        raise ValueError(f"p_fail must lie in [0, 1], got {p_fail}")
    theta = as_angle(theta)
    good = projector(plus_state(theta))
    if inner is not None:
        good = inner(good)
    ok = flagged(embed_qubit(good), 0)
    leak = flagged(basis_projector(theta.index, REGISTER_DIM), 1)
    return (1.0 - p_fail) * ok + p_fail * leak


def endstate_from_qubit(qubit, theta: AngleLike, failed: bool) -> np.ndarray:
    """Per-run server state: the held qubit when the preparation succeeded, full leakage otherwise."""
    if failed:
        return flagged(basis_projector(as_angle(theta).index, REGISTER_DIM), 1)
    vec = qubit.amplitudes if hasattr(qubit, "amplitudes") else np.asarray(qubit)
    return flagged(embed_qubit(projector(vec)), 0)


@dataclass(frozen=True, eq=False)
class PreparationModel:
    """The eight states ``rho^theta`` a preparation procedure delivers."""

    states: tuple
    name: str = "explicit"

    def __post_init__(self) -> None:
        if len(self.states) != 8:
            raise ValueError("a preparation model needs one state per angle")
        mats = tuple(check_density(np.asarray(s, dtype=complex)) for s in self.states)
        if len({m.shape for m in mats}) != 1:
            raise ValueError("all prepared states must share one dimension")
        object.__setattr__(self, "states", mats)

    @property
    def dim(self) -> int:
        return self.states[0].shape[0]

    def __getitem__(self, theta: AngleLike) -> np.ndarray:
        return self.states[as_angle(theta).index]

    @classmethod
    def ideal(cls) -> PreparationModel:
        return cls(tuple(projector(plus_state(k)) for k in range(8)), "ideal")

    @classmethod
    def through_map(cls, channel: CptpMap) -> PreparationModel:
        return cls(tuple(channel(projector(plus_state(k))) for k in range(8)), f"ideal->{channel.name}")

    @classmethod
    def rbsp_endstate(cls, p_fail: float, inner: CptpMap | None = None) -> PreparationModel:
        return cls(tuple(endstate_model(k, p_fail, inner) for k in range(8)), f"rbsp(p_fail={p_fail})")

    @classmethod
    def depolarized(cls, q: float) -> PreparationModel:
        if not 0.0 <= q <= 1.0:
            raise ValueError("depolarizing weight must lie in [0, 1]")
        return cls(tuple((1 - q) * projector(plus_state(k)) + q * np.eye(2) / 2 for k in range(8)),
                   f"depolarized(q={q})")

    def default_map(self) -> CptpMap:
        """The map the bound is taken against when the caller does not choose one."""
        if self.dim == 2:
            return CptpMap.identity(2)
        if self.dim == FLAGGED_DIM:
            return CptpMap.append_flag()
        raise ValueError(f"no default map for {self.dim}-dimensional preparations")


def epsilon_prep(prep: PreparationModel, channel: CptpMap) -> float:
    """``max_theta`` of the trace distance between ``rho^theta`` and the mapped ideal qubit."""
    if channel.output_dim != prep.dim:
        raise ValueError(f"map outputs dimension {channel.output_dim}, preparation has {prep.dim}")
    worst = 0.0
    for k in range(8):
        diff = prep[k] - channel(projector(plus_state(k)))
        worst = max(worst, 0.5 * trace_norm_hermitian(diff))
    return worst


# ---------------------------------------------------------------------------
# closed-form bounds
# ---------------------------------------------------------------------------

def blindness_bound(S: int, eps_prep: float) -> float:
    return S * eps_prep


def hoeffding_abort_bound(N: int, delta: float) -> float:
    if delta <= 0:
        raise ValueError("delta must be positive")
    return math.exp(-2.0 * delta * delta * N)


def fail_abort_bound(N: int, T: float) -> float:
    """``exp(-N T^4 / 18)``, computed as the Hoeffding bound at ``delta = T^2/6``."""
    if not 0.0 < T <= 1.0:
        raise ValueError("T must lie in (0, 1]")
    return hoeffding_abort_bound(N, T * T / 6)


def delta_budget(T: float, mu: float) -> float:
    """Sum of the two Hoeffding tolerances available at source mean ``mu``."""
    if not 0.0 < T <= 1.0 or mu <= 0:
        raise ValueError("need T in (0, 1] and mu > 0")
    return math.exp(-mu) * (1.0 + mu - math.exp((1.0 - T) * mu))


# ---------------------------------------------------------------------------
# joint states
# ---------------------------------------------------------------------------

MAX_JOINT_SIZE = 2


def _normalize_prior(S: int, prior) -> dict[tuple[int, ...], float]:
    keys = list(itertools.product(range(8), repeat=S))
    if prior is None:
        return {k: 1.0 / len(keys) for k in keys}
    if isinstance(prior, dict):
        probs = {tuple(int(a) for a in k): float(v) for k, v in prior.items()}
    else:
        arr = np.asarray(prior, dtype=float).reshape(-1)
        if arr.size != len(keys):
            raise ValueError(f"prior needs {len(keys)} entries, got {arr.size}")
        probs = dict(zip(keys, arr.tolist()))
    if any(v < 0 for v in probs.values()) or abs(sum(probs.values()) - 1.0) > 1e-12:
        raise ValueError("prior must be a probability vector")
    return {k: v for k, v in probs.items() if v > 0}


@dataclass(frozen=True, eq=False)
class JointState:
    """Block-sparse classical-quantum state of client and server.

    ``blocks`` maps ``(phi, r, delta)`` to ``(weight, theta)``; the quantum
    part of a block is ``kron(prep[theta_1], ..., prep[theta_S])``.
    """

    S: int
    prep: PreparationModel
    prior: dict
    blocks: dict = field(repr=False)

    def quantum_block(self, thetas: Sequence[int]) -> np.ndarray:
        return reduce(np.kron, (self.prep[t] for t in thetas))

    def trace(self) -> float:
        return float(sum(w for w, _ in self.blocks.values()))

    def server_marginal(self) -> np.ndarray:
        """Dense server state over ``(system_1, delta_1, ..., system_S, delta_S)``."""
        d = self.prep.dim * 8
        if d**self.S > 4096:
            raise ValueError("server marginal too large to expand densely")
        out = np.zeros((d**self.S, d**self.S), dtype=complex)
        for (phi, r, delta), (w, thetas) in self.blocks.items():
            parts = [np.kron(self.prep[t], basis_projector(dl, 8)) for t, dl in zip(thetas, delta)]
            out += w * reduce(np.kron, parts)
        return out

    def dense(self) -> np.ndarray:
        """Full matrix over ``(phi_i, r_i, system_i, delta_i)`` per position; only for ``S = 1``."""
        if self.S != 1:
            raise ValueError("dense expansion is restricted to S = 1")
        d = self.prep.dim
        out = np.zeros((8 * 2 * d * 8,) * 2, dtype=complex)
        for (phi, r, delta), (w, thetas) in self.blocks.items():
            out += w * reduce(np.kron, [basis_projector(phi[0], 8), basis_projector(r[0], 2),
                                         self.prep[thetas[0]], basis_projector(delta[0], 8)])
        return out


def build_joint_state(S: int, prep: PreparationModel, prior=None) -> JointState:
    if S > MAX_JOINT_SIZE:
        raise ValueError(f"exact joint states are limited to S <= {MAX_JOINT_SIZE}; "
                         "use blindness_bound(S, epsilon_prep(...)) for larger computations")
    if S < 1:
        raise ValueError("S must be at least 1")
    probs = _normalize_prior(S, prior)
    blocks = {}
    scale = 1.0 / (2**S * 8**S)
    for phi, p in probs.items():
        for r in itertools.product((0, 1), repeat=S):
            for thetas in itertools.product(range(8), repeat=S):
                delta = tuple((f + t + 4 * b) % 8 for f, t, b in zip(phi, thetas, r))
                blocks[(phi, r, delta)] = (p * scale, thetas)
    return JointState(S, prep, probs, blocks)


def joint_trace_distance(a: JointState, b: JointState) -> float:
    """Exact trace distance between two block-sparse joint states."""
    if a.S != b.S or a.prep.dim != b.prep.dim:
        raise ValueError("joint states have different shapes")
    cache: dict = {}

    def block_norm(wa, ta, wb, tb):
        key = (wa, ta, wb, tb)
        if key not in cache:
            ma = a.quantum_block(ta) if wa else 0.0
            mb = b.quantum_block(tb) if wb else 0.0
            cache[key] = trace_norm_hermitian(wa * ma - wb * mb)
        return cache[key]

    total = 0.0
    for key in a.blocks.keys() | b.blocks.keys():
        wa, ta = a.blocks.get(key, (0.0, None))
        wb, tb = b.blocks.get(key, (0.0, None))
        if wa == 0.0:
            total += wb
        elif wb == 0.0:
            total += wa
        else:
            total += block_norm(wa, ta, wb, tb)
    return 0.5 * total


def position_marginal(prep: PreparationModel, phi: AngleLike) -> np.ndarray:
    """Server view of one position for a known ``phi``, averaged over ``theta`` and ``r``."""
    phi = as_angle(phi)
    d = prep.dim
    out = np.zeros((d * 8, d * 8), dtype=complex)
    for theta in range(8):
        for r in (0, 1):
            delta = (phi.index + theta + 4 * r) % 8
            out += np.kron(prep[theta], basis_projector(delta, 8)) / 16
    return out


def certify(S: int, prep: PreparationModel, channel: CptpMap | None = None, prior=None) -> dict:
    """Exact blindness figures at a fixed map.

    Returns the preparation error, the certified bound ``S * eps_prep``, the
    exact joint-state distance to the mapped ideal state, and the largest
    change of the single-position server view across ``phi``.
    """
    channel = channel or prep.default_map()
    eps = epsilon_prep(prep, channel)
    actual = build_joint_state(S, prep, prior)
    reference = build_joint_state(S, PreparationModel.through_map(channel), prior)
    distance = joint_trace_distance(actual, reference)
    base = position_marginal(prep, 0)
    phi_dev = max(trace_distance(position_marginal(prep, k), base) for k in range(8))
    return {
        "S": S,
        "preparation": prep.name,
        "map": channel.name,
        "epsilon_prep": eps,
        "certified_epsilon": blindness_bound(S, eps),
        "joint_distance": distance,
        "phi_dependence": phi_dev,
        "phi_independent": phi_dev < 1e-12,
    }
