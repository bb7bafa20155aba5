"""Client and server for blind delegated MBQC on the brickwork state.

The client hides each computation angle behind a random pre-rotation
``theta`` and a random outcome flip ``r``, announcing only
``delta = phi' + theta + 4 r``. The server entangles whatever qubits it
received and measures where it is told.
"""
from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from .core import Angle8, AngleLike, as_angle, basis_projector, plus_state, projector
from .mbqc import BrickworkPattern, MbqcRunResult, Position
from .qsim import PureState, branch_stream, measure_rotated, project
from .rbsp import ChannelModel, Honest, RbspOutcome, ServerStrategy, run_rbsp


def blind_angle(phi_prime: AngleLike, theta: AngleLike, r: int) -> Angle8:
    return Angle8(as_angle(phi_prime).index + as_angle(theta).index + 4 * (r & 1))


def decode_outcome(s: int, r: int) -> int:
    return (s ^ r) & 1


@dataclass(frozen=True)
class ClientSecret:
    phi: dict[Position, Angle8]
    theta: dict[Position, Angle8]
    r: dict[Position, int]

    @classmethod
    def draw(cls, pattern: BrickworkPattern, rng: np.random.Generator, theta=None) -> ClientSecret:
        thetas = rng.integers(0, 8, pattern.size) if theta is None else None
        rs = rng.integers(0, 2, pattern.size)
        return cls(
            dict(pattern.phi),
            dict(theta) if theta is not None else {p: Angle8(int(t)) for p, t in zip(pattern.order, thetas)},
            {p: int(b) for p, b in zip(pattern.order, rs)},
        )


# ---------------------------------------------------------------------------
# transcript
# ---------------------------------------------------------------------------

CLIENT_ONLY = frozenset({"prepare"})


@dataclass(frozen=True)
class Event:
    kind: str
    position: Position | None
    payload: object

    def as_dict(self) -> dict:
        return {"kind": self.kind, "position": list(self.position) if self.position else None,
                "payload": self.payload}


@dataclass
class Transcript:
    events: list[Event] = field(default_factory=list)
    aborted: bool = False

    def add(self, kind: str, position: Position | None, payload) -> None:
        self.events.append(Event(kind, position, payload))

    def of_kind(self, kind: str) -> list[Event]:
        return [e for e in self.events if e.kind == kind]

    def deltas(self) -> tuple[int, ...]:
        return tuple(e.payload for e in self.of_kind("delta"))

    def to_jsonl(self, view: str = "client") -> str:
        """One JSON object per line; the server view omits the secret preparation angles."""
        lines = []
        for e in self.events:
            if view == "server" and e.kind in CLIENT_ONLY:
                continue
            lines.append(json.dumps(e.as_dict(), sort_keys=True))
        return "\n".join(lines) + ("\n" if lines else "")

    @classmethod
    def from_jsonl(cls, text: str) -> Transcript:
        t = cls()
        for line in text.splitlines():
            if not line.strip():
                continue
            d = json.loads(line)
            pos = tuple(d["position"]) if d["position"] is not None else None
            t.add(d["kind"], pos, d["payload"])
            if d["kind"] == "abort":
                t.aborted = True
        return t

    def check_order(self) -> None:
        """Raise if the event order breaks the protocol's message flow."""
        seen_delta = False
        pending = None
        measured = []
        for e in self.events:
            if e.kind in ("prepare", "rbsp") and seen_delta:
                raise ValueError("preparation after the interaction began")
            if e.kind == "delta":
                if pending is not None:
                    raise ValueError("two angles without an outcome in between")
                seen_delta, pending = True, e.position
                measured.append(e.position)
            elif e.kind == "outcome":
                if pending != e.position:
                    raise ValueError(f"outcome for {e.position} without its angle")
                pending = None
        if measured != sorted(measured):
            raise ValueError("measurements out of order")


# ---------------------------------------------------------------------------
# server behaviours
# ---------------------------------------------------------------------------

class HonestServer:
    """Entangles, measures as instructed, and reports the true outcome."""

    name = "honest"

    def report(self, bit: int, position: Position, rng: np.random.Generator) -> int:
        return bit


class ReportingStrategy(HonestServer):
    """Measures honestly but reports ``zeros``, ``ones`` or ``random`` bits."""

    def __init__(self, mode: str):
        if mode not in ("zeros", "ones", "random"):
            raise ValueError(f"unknown reporting mode {mode!r}")
        self.mode = mode
        self.name = f"report-{mode}"

    def report(self, bit, position, rng):
        if self.mode == "zeros":
            return 0
        if self.mode == "ones":
            return 1
        return int(rng.integers(0, 2))


@dataclass(frozen=True)
class RbspPreparation:
    """Prepare every qubit remotely with ``N`` weak coherent pulses."""

    N: int
    channel: ChannelModel
    strategy: ServerStrategy = field(default_factory=Honest)


@dataclass(frozen=True)
class UbqcRun:
    transcript: Transcript
    result: MbqcRunResult | None
    secret: ClientSecret | None
    rbsp: tuple[RbspOutcome, ...] = ()

    @property
    def aborted(self) -> bool:
        return self.transcript.aborted


class _Client:
    def __init__(self, pattern: BrickworkPattern, secret: ClientSecret):
        self.pattern = pattern
        self.secret = secret
        self.decoded: dict[Position, int] = {}

    def delta(self, pos: Position) -> Angle8:
        phi_prime = self.pattern.measurement_angle(self.decoded, pos)
        return blind_angle(phi_prime, self.secret.theta[pos], self.secret.r[pos])

    def receive(self, pos: Position, s: int) -> int:
        self.decoded[pos] = decode_outcome(s, self.secret.r[pos])
        return self.decoded[pos]


def run_ubqc(pattern: BrickworkPattern, server: HonestServer | None = None, preparation="ideal",
             seed=None, secret: ClientSecret | None = None, randomness=None) -> UbqcRun:
    """Run the blind protocol once.

    ``seed`` drives every random choice; ``secret`` and ``randomness`` (a
    branch-selector source) override the corresponding draws for replay and
    exhaustive tests.
    """
    server = server or HonestServer()
    rng = np.random.default_rng(seed)
    transcript = Transcript()
    rbsp_runs: list[RbspOutcome] = []

    if preparation == "ideal":
        secret = secret or ClientSecret.draw(pattern, rng)
        qubits = PureState.plus_product([secret.theta[p] for p in pattern.order])
        for p in pattern.order:
            transcript.add("prepare", p, secret.theta[p].index)
    elif isinstance(preparation, RbspPreparation):
        thetas = {}
        held = []
        for p in pattern.order:
            out = run_rbsp(preparation.N, preparation.channel, preparation.strategy, rng)
            rbsp_runs.append(out)
            transcript.add("rbsp", p, {"declared_zero": out.declared[0], "declared_one": out.declared[1],
                                       "declared_multi": out.declared[2], "t": list(out.t_bits),
                                       "aborted": out.aborted})
            if out.aborted:
                transcript.add("abort", p, True)
                transcript.aborted = True
                return UbqcRun(transcript, None, None, tuple(rbsp_runs))
            thetas[p] = out.theta_client
            transcript.add("prepare", p, out.theta_client.index)
            held.append(out.final_qubit)
        secret = ClientSecret.draw(pattern, rng, theta=thetas)
        qubits = held[0]
        for q in held[1:]:
            qubits = qubits.tensor(q)
    else:
        raise ValueError(f"unknown preparation {preparation!r}")

    stream = branch_stream(rng if randomness is None else randomness)
    client = _Client(pattern, secret)
    state = pattern.entangle(qubits)
    raw: dict[Position, int] = {}
    for pos in pattern.order:
        delta = client.delta(pos)
        transcript.add("delta", pos, delta.index)
        res = measure_rotated(state, 0, delta, next(stream))
        state = res.post_state
        s = server.report(res.bit, pos, rng)
        transcript.add("outcome", pos, s)
        raw[pos] = s
        client.receive(pos, s)
    outputs = tuple(client.decoded[p] for p in pattern.outputs)
    transcript.add("output", None, list(outputs))
    return UbqcRun(transcript, MbqcRunResult(dict(client.decoded), outputs, state), secret, tuple(rbsp_runs))


def blind_output_distribution(pattern: BrickworkPattern, secret: ClientSecret) -> dict[tuple[int, ...], float]:
    """Exact decoded-output distribution of an honest run with a fixed secret."""
    dist: dict[tuple[int, ...], float] = {}

    def walk(state, k, client, prob):
        if k == len(pattern.order):
            key = tuple(client.decoded[p] for p in pattern.outputs)
            dist[key] = dist.get(key, 0.0) + prob
            return
        pos = pattern.order[k]
        delta = client.delta(pos)
        for bit in (0, 1):
            p, post = project(state, 0, delta, bit)
            if post is None:
                continue
            nxt = _Client(pattern, secret)
            nxt.decoded = dict(client.decoded)
            nxt.receive(pos, bit)
            walk(post, k + 1, nxt, prob * p)

    qubits = PureState.plus_product([secret.theta[p] for p in pattern.order])
    walk(pattern.entangle(qubits), 0, _Client(pattern, secret), 1.0)
    return dist


def all_secrets(pattern: BrickworkPattern) -> Iterable[ClientSecret]:
    """Every ``(theta, r)`` assignment for the pattern's angles."""
    order = pattern.order
    for thetas in itertools.product(range(8), repeat=len(order)):
        for rs in itertools.product((0, 1), repeat=len(order)):
            yield ClientSecret(dict(pattern.phi), {p: Angle8(t) for p, t in zip(order, thetas)},
                               dict(zip(order, rs)))


def server_view_state(phi: AngleLike) -> np.ndarray:
    """Server's state for one position: ``(1/16) sum |+_theta><+_theta| (x) |delta><delta|``."""
    out = np.zeros((16, 16), dtype=complex)
    for theta in range(8):
        for r in (0, 1):
            delta = blind_angle(phi, theta, r)
            out += np.kron(projector(plus_state(theta)), basis_projector(delta.index, 8))
    return out / 16
