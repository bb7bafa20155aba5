"""Interlaced 1-D cluster computation.

The server folds a chain of ``|+_sigma_l>`` qubits into a single qubit: each
step applies ``CZ (H x 1)`` to the running qubit and the next input, then
measures the running qubit in the X basis. The client recovers the angle of the
surviving qubit from the suffix parities of the outcomes.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .core import Angle8, AngleLike, as_angle
from .qsim import PureState, apply_cz, apply_h, branch_stream, measure_pauli_x, project


@dataclass(frozen=True)
class I1dcResult:
    t_bits: tuple[int, ...]
    s_bits: tuple[int, ...]
    final_state: PureState


def t_from_s(s_bits: Sequence[int]) -> tuple[int, ...]:
    """``t_i = s_i xor ... xor s_{k-1}`` for ``i < k`` and ``t_k = 0``."""
    t = [0]
    acc = 0
    for s in reversed(s_bits):
        acc ^= int(s) & 1
        t.append(acc)
    return tuple(reversed(t))


def client_theta(sigmas: Sequence[AngleLike], t_bits: Sequence[int]) -> Angle8:
    """``sum_l (-1)^{t_l} sigma_l`` on the eighth-turn grid."""
    if len(sigmas) != len(t_bits):
        raise ValueError(f"{len(sigmas)} angles but {len(t_bits)} parity bits")
    total = 0
    for sigma, t in zip(sigmas, t_bits):
        idx = as_angle(sigma).index
        total += -idx if t else idx
    return Angle8(total)


def couple_and_measure(current: PureState, sigma: AngleLike, u: float) -> tuple[int, PureState]:
    """One chain step: returns the outcome and the surviving qubit."""
    pair = current.tensor(PureState.plus_product([sigma]))
    pair = apply_cz(apply_h(pair, 0), 0, 1)
    res = measure_pauli_x(pair, 0, u)
    return res.bit, res.post_state


def run_i1dc(sigmas: Sequence[AngleLike], randomness) -> I1dcResult:
    if len(sigmas) == 0:
        raise ValueError("the chain needs at least one qubit")
    stream = branch_stream(randomness)
    state = PureState.plus_product([sigmas[0]])
    s_bits = []
    for sigma in sigmas[1:]:
        bit, state = couple_and_measure(state, sigma, next(stream))
        s_bits.append(bit)
    return I1dcResult(t_from_s(s_bits), tuple(s_bits), state)


def i1dc_branches(sigmas: Sequence[AngleLike]):
    """Every outcome sequence of the chain with its probability.

    Yields ``(I1dcResult, probability)``; zero-probability branches are skipped.
    """
    def walk(state, rest, s_bits, prob):
        if not rest:
            yield I1dcResult(t_from_s(s_bits), tuple(s_bits), state), prob
            return
        pair = apply_cz(apply_h(state.tensor(PureState.plus_product([rest[0]])), 0), 0, 1)
        for bit in (0, 1):
            p, post = project(pair, 0, 0, bit)
            if post is not None:
                yield from walk(post, rest[1:], s_bits + [bit], prob * p)

    if len(sigmas) == 0:
        raise ValueError("the chain needs at least one qubit")
    yield from walk(PureState.plus_product([sigmas[0]]), list(sigmas[1:]), [], 1.0)
