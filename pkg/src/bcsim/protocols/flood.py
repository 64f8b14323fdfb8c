"""Flood: propagate a typed message over a random directed graph.

Every party picks its out-neighbours independently with probability
``p_flood``; a party forwards the first typed message it sees to those
neighbours and never forwards again.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from typing import Callable, Iterable

import numpy as np

from bcsim.bounds import flood_probability, flood_rounds
from bcsim.core import Envelope, ExecutionConfig, ConfigInvalid, tape_rng
from bcsim.protocols.base import Context, Party, Protocol

NEIGHBOR_TAPE = 11


def default_predicate(payload: bytes) -> bool:
    return payload[:1] == b"T"


@dataclass(frozen=True)
class FloodParams:
    n: int
    epsilon: object
    kappa: int
    type_predicate: Callable[[bytes], bool] = default_predicate
    p_flood: float = field(init=False)
    rho: int = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "p_flood", flood_probability(self.n, self.epsilon, self.kappa))
        object.__setattr__(self, "rho", flood_rounds(self.n, self.kappa))


@dataclass(frozen=True)
class FloodState:
    neighbors: frozenset[int]
    relayed: bool = False
    output: bytes | None = None


def flood_sample_neighbors(params: FloodParams, party: int, rng: np.random.Generator) -> set[int]:
    """Directed out-neighbourhood: every other party independently with probability p_flood."""
    if params.p_flood >= 1:
        return {j for j in range(1, params.n + 1) if j != party}
    hits = np.flatnonzero(rng.random(params.n) < params.p_flood) + 1
    return {int(j) for j in hits if j != party}


def select_message(inbox: Iterable[tuple[int, bytes]], predicate) -> bytes | None:
    """First typed message by (source, payload)."""
    best = None
    for src, payload in inbox:
        if predicate(payload) and (best is None or (src, payload) < best):
            best = (src, payload)
    return None if best is None else best[1]


def flood_round(
    state: FloodState,
    rnd: int,
    inbox: Iterable[tuple[int, bytes]],
    predicate,
    own_input: bytes | None = None,
) -> tuple[FloodState, list[tuple[int, bytes]]]:
    """One Flood round for one party; ``inbox`` holds (src, payload) pairs."""
    if state.relayed:
        return state, []
    if rnd == 1:
        msg = own_input if own_input is not None and predicate(own_input) else None
    else:
        msg = select_message(inbox, predicate)
    if msg is None:
        return state, []
    new = dataclasses.replace(state, relayed=True, output=msg)
    return new, [(j, msg) for j in sorted(state.neighbors)]


class FloodParty(Party):
    def __init__(self, pid, setup, ctx, input_bit=None, params: FloodParams | None = None, payload=None):
        super().__init__(pid, setup, ctx, input_bit)
        self.params = params
        self.payload = payload
        nbrs = flood_sample_neighbors(params, pid, tape_rng(setup, NEIGHBOR_TAPE))
        self.state = FloodState(frozenset(nbrs))
        self.seen: bytes | None = None

    def step(self, rnd, inbox):
        pairs = [(e.src, e.payload) for e in inbox]
        self.state, out = flood_round(self.state, rnd, pairs, self.params.type_predicate, self.payload)
        return out

    def finish(self, inbox):
        # messages sent in the last round still count as received
        if self.state.output is None:
            msg = select_message(((e.src, e.payload) for e in inbox), self.params.type_predicate)
            if msg is not None:
                self.state = dataclasses.replace(self.state, output=msg)

    def output(self):
        return self.state.output


class FloodProtocol(Protocol):
    """Stand-alone Flood; ``inputs`` maps party id to its input payload."""

    name = "flood"
    party_class = FloodParty

    def __init__(self, config: ExecutionConfig):
        super().__init__(config)
        self.params = FloodParams(config.n, config.epsilon, config.kappa)
        raw = config.protocol_params.get("inputs", {1: b"T:flood"})
        self.inputs = {int(k): (bytes.fromhex(v) if isinstance(v, str) else bytes(v)) for k, v in raw.items()}

    @classmethod
    def check_config(cls, config):
        for k in config.protocol_params.get("inputs", {}):
            if not 1 <= int(k) <= config.n:
                raise ConfigInvalid(f"flood input for unknown party {k}")

    @property
    def total_rounds(self):
        return self.params.rho

    def make_party(self, pid, setup, input_bit=None):
        return FloodParty(pid, setup, self.context, input_bit, self.params, self.inputs.get(pid))

    def summarize(self, parties):
        pred = self.params.type_predicate
        holders = [p for p in parties if self.inputs.get(p) is not None and pred(self.inputs[p])]
        missing = [p for p, m in parties.items() if m.output() is None]
        failure = bool(holders) and bool(missing)
        return {
            "neighbors": {p: sorted(m.state.neighbors) for p, m in parties.items()},
            "holders": holders,
            "propagation_failure": failure,
            "flood_failures": int(failure),
        }


def flood_run(inputs: dict[int, bytes], n: int, epsilon, kappa: int, corrupted=(), seed: int = 0):
    """Run Flood inside the engine with ``corrupted`` crashed; returns honest outputs."""
    from bcsim.core import run_execution

    config = ExecutionConfig(
        n=n,
        kappa=kappa,
        epsilon=epsilon,
        protocol="flood",
        adversary="crash",
        seed=seed,
        protocol_params={"inputs": dict(inputs)},
        adversary_params={"target": sorted(corrupted)},
    )
    return run_execution(config).outputs
