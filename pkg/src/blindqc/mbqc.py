"""Brickwork resource states and the unblinded adaptive MBQC evaluator.

Positions are ``(x, y)`` tuples, 1-indexed, with ``x`` the column (layer) and
``y`` the row. Measurements run column by column, top row first.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .core import Angle8, AngleLike, as_angle
from .qsim import MAX_QUBITS, PureState, SimulatorCapError, apply_cz, branch_stream, measure_rotated, project

Position = tuple[int, int]
Edge = tuple[Position, Position]


def positions(n: int, m: int) -> list[Position]:
    """All positions in measurement order (column-major)."""
    return [(x, y) for x in range(1, n + 1) for y in range(1, m + 1)]


def edge_rule(n: int, m: int) -> frozenset[Edge]:
    """Controlled-Z edges of the ``n x m`` brickwork graph.

    Horizontal neighbours in a row are always joined. Columns ``j = 3 mod 8``
    (odd rows ``i``) and ``j = 7 mod 8`` (even rows) carry vertical pairs at
    columns ``j`` and ``j + 2``, kept only when both ends exist.
    """
    if n < 1 or m < 1:
        raise ValueError("brickwork dimensions must be positive")
    edges: set[Edge] = set()
    for y in range(1, m + 1):
        for x in range(1, n):
            edges.add(((x, y), (x + 1, y)))
    for j in range(1, n + 1):
        if j % 8 == 3:
            rows = range(1, m, 2)
        elif j % 8 == 7:
            rows = range(2, m, 2)
        else:
            continue
        for i in rows:
            for col in (j, j + 2):
                if col <= n:
                    edges.add(((col, i), (col, i + 1)))
    return frozenset(edges)


def neighbors(edges, pos: Position) -> set[Position]:
    out = set()
    for a, b in edges:
        if a == pos:
            out.add(b)
        elif b == pos:
            out.add(a)
    return out


def flow_dependencies(n: int, m: int) -> tuple[dict[Position, frozenset], dict[Position, frozenset]]:
    """X and Z dependency sets from the row-successor flow ``f(x, y) = (x + 1, y)``."""
    edges = edge_rule(n, m)
    order = positions(n, m)
    rank = {p: i for i, p in enumerate(order)}
    x_deps = {p: frozenset({(p[0] - 1, p[1])} if p[0] > 1 else ()) for p in order}
    z_sets: dict[Position, set] = {p: set() for p in order}
    for p in order:
        if p[0] == n:
            continue
        succ = (p[0] + 1, p[1])
        for q in neighbors(edges, succ):
            if q != p and rank[p] < rank[q]:
                z_sets[q].add(p)
    z_deps = {p: frozenset(s) for p, s in z_sets.items()}
    return x_deps, z_deps


def adapted_angle(phi: AngleLike, s_x: int, s_z: int) -> Angle8:
    """``(-1)^{s_x} phi + s_z pi``."""
    phi = as_angle(phi)
    return Angle8((-phi.index if s_x else phi.index) + 4 * s_z)


@dataclass(frozen=True)
class BrickworkPattern:
    n: int
    m: int
    phi: dict[Position, Angle8]
    edges: frozenset = field(init=False)
    x_deps: dict = field(init=False, repr=False)
    z_deps: dict = field(init=False, repr=False)
    order: tuple = field(init=False, repr=False)

    def __post_init__(self) -> None:
        order = tuple(positions(self.n, self.m))
        phi = {p: as_angle(self.phi.get(p, 0)) for p in order}
        extra = set(self.phi) - set(order)
        if extra:
            raise ValueError(f"angles given for positions outside the grid: {sorted(extra)}")
        x_deps, z_deps = flow_dependencies(self.n, self.m)
        object.__setattr__(self, "phi", phi)
        object.__setattr__(self, "order", order)
        object.__setattr__(self, "edges", edge_rule(self.n, self.m))
        object.__setattr__(self, "x_deps", x_deps)
        object.__setattr__(self, "z_deps", z_deps)

    @property
    def size(self) -> int:
        return self.n * self.m

    @property
    def outputs(self) -> tuple[Position, ...]:
        return tuple((self.n, y) for y in range(1, self.m + 1))

    @classmethod
    def from_angles(cls, n: int, m: int, angles) -> BrickworkPattern:
        """Build from a flat list of angle indices in measurement order."""
        angles = list(angles)
        if len(angles) != n * m:
            raise ValueError(f"expected {n * m} angles, got {len(angles)}")
        return cls(n, m, dict(zip(positions(n, m), (Angle8(a) for a in angles))))

    def angle_list(self) -> list[int]:
        return [self.phi[p].index for p in self.order]

    def to_json(self) -> dict:
        return {"n": self.n, "m": self.m, "angles": self.angle_list()}

    @classmethod
    def from_json(cls, data: dict) -> BrickworkPattern:
        return cls.from_angles(int(data["n"]), int(data["m"]), data["angles"])

    @classmethod
    def load(cls, path) -> BrickworkPattern:
        return cls.from_json(json.loads(Path(path).read_text()))

    def corrections(self, outcomes: dict[Position, int], pos: Position) -> tuple[int, int]:
        """Parities ``(s_X, s_Z)`` for ``pos`` given the logical outcomes so far."""
        s_x = sum(outcomes[q] for q in self.x_deps[pos]) % 2
        s_z = sum(outcomes[q] for q in self.z_deps[pos]) % 2
        return s_x, s_z

    def measurement_angle(self, outcomes: dict[Position, int], pos: Position) -> Angle8:
        return adapted_angle(self.phi[pos], *self.corrections(outcomes, pos))

    def resource_state(self, angles=None) -> PureState:
        """Entangled resource; qubit ``k`` of the register is ``order[k]``.

        ``angles`` optionally pre-rotates each qubit to ``|+_theta>``.
        """
        if self.size > MAX_QUBITS:
            raise SimulatorCapError(f"pattern of size {self.size} exceeds the simulator cap {MAX_QUBITS}")
        if angles is None:
            angles = [0] * self.size
        state = PureState.plus_product([angles[p] if isinstance(angles, dict) else angles[k]
                                        for k, p in enumerate(self.order)])
        return self.entangle(state)

    def entangle(self, state: PureState) -> PureState:
        """Apply controlled-Z on every edge; qubit ``k`` of ``state`` is ``order[k]``."""
        index = {p: k for k, p in enumerate(self.order)}
        for a, b in sorted(self.edges):
            state = apply_cz(state, index[a], index[b])
        return state


@dataclass(frozen=True)
class MbqcRunResult:
    outcomes: dict[Position, int]
    corrected_outputs: tuple[int, ...]
    final_state: PureState


def run_plain_mbqc(pattern: BrickworkPattern, randomness) -> MbqcRunResult:
    """Execute the pattern on ``|+>`` qubits with flow-adapted angles.

    Measurement at the adapted angle already absorbs the pending X and Z
    byproducts, so the final-column outcomes are returned as the outputs.
    """
    stream = branch_stream(randomness)
    state = pattern.resource_state()
    outcomes: dict[Position, int] = {}
    for pos in pattern.order:
        res = measure_rotated(state, 0, pattern.measurement_angle(outcomes, pos), next(stream))
        outcomes[pos] = res.bit
        state = res.post_state
    return MbqcRunResult(outcomes, tuple(outcomes[p] for p in pattern.outputs), state)


def enumerate_branches(pattern: BrickworkPattern, min_prob: float = 1e-14):
    """Every reachable outcome history with its Born probability.

    Yields ``(outcomes, probability)`` pairs; histories with probability below
    ``min_prob`` are pruned.
    """
    def walk(state, k, outcomes, prob):
        if k == len(pattern.order):
            yield dict(outcomes), prob
            return
        pos = pattern.order[k]
        angle = pattern.measurement_angle(outcomes, pos)
        for bit in (0, 1):
            p, post = project(state, 0, angle, bit)
            if post is None or prob * p < min_prob:
                continue
            outcomes[pos] = bit
            yield from walk(post, k + 1, outcomes, prob * p)
            del outcomes[pos]

    yield from walk(pattern.resource_state(), 0, {}, 1.0)


def output_distribution(pattern: BrickworkPattern) -> dict[tuple[int, ...], float]:
    """Exact distribution of the corrected outputs."""
    dist: dict[tuple[int, ...], float] = {}
    for outcomes, p in enumerate_branches(pattern):
        key = tuple(outcomes[q] for q in pattern.outputs)
        dist[key] = dist.get(key, 0.0) + p
    return dist
