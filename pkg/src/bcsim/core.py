"""Synchronous round engine with a rushing, optionally adaptive adversary.

One execution proceeds as follows:

1. the adversary names its static corruptions (before any setup exists);
2. the dealer samples one setup string per party from the seeded dealer stream;
3. for every round, honest parties emit their envelopes, the adversary sees
   them and emits envelopes for corrupted parties, and may corrupt further
   parties (which only takes effect after their round multisend completed);
4. honest parties produce outputs and the broadcast verdict is computed.

Everything random is derived from a single root seed, so identical
configurations produce byte-identical results.
"""

from __future__ import annotations

import hashlib
import json
from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Mapping

import numpy as np

SENDER = 1

# stream labels for the root seed
DEALER_STREAM = 1
ADVERSARY_STREAM = 2
MINE_STREAM = 3
REGISTRY_STREAM = 4


class SimulationError(Exception):
    """Base class for engine errors."""


class ConfigInvalid(SimulationError, ValueError):
    pass


class BudgetExceeded(SimulationError):
    pass


class RoundCapExceeded(SimulationError):
    pass


class AdversaryViolation(SimulationError):
    """The adversary tried something the model forbids (spoofing, late drops)."""


def derive_seed_sequence(seed: int, *key: int) -> np.random.SeedSequence:
    return np.random.SeedSequence(seed, spawn_key=tuple(key))


def derive_rng(seed: int, *key: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(derive_seed_sequence(seed, *key)))


def derive_bytes(seed: int, *key: int, nbytes: int = 32) -> bytes:
    words = derive_seed_sequence(seed, *key).generate_state((nbytes + 3) // 4, dtype=np.uint32)
    return words.tobytes()[:nbytes]


def tape_rng(setup: bytes, *key: int) -> np.random.Generator:
    """Randomness tape of a party, a pure function of its setup string."""
    return derive_rng(int.from_bytes(setup, "little"), *key)


@dataclass(frozen=True, slots=True)
class Envelope:
    src: int
    dst: int
    round: int
    payload: bytes
    bit_size: int

    def as_tuple(self) -> tuple:
        return (self.src, self.dst, self.round, self.payload.hex(), self.bit_size)


@dataclass
class View:
    """What a party knows: its setup string, optional input and received envelopes."""

    party: int
    setup: bytes
    input: int | None = None
    inbox: list[tuple[int, Envelope]] = field(default_factory=list)


def _as_fraction(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, float):
        return Fraction(repr(value))
    return Fraction(value)


@dataclass(frozen=True)
class ExecutionConfig:
    """Full parameterisation of one protocol run."""

    n: int
    kappa: int = 8
    epsilon: Fraction | float | str = Fraction(1, 2)
    sender_input: int = 1
    protocol: str = "floodbc"
    adversary: str = "none"
    seed: int = 0
    round_cap: int | None = None
    protocol_params: Mapping[str, Any] = field(default_factory=dict)
    adversary_params: Mapping[str, Any] = field(default_factory=dict)
    max_corruptions: int | None = None
    public_channels: bool = True
    skip_idle: bool = True

    def __post_init__(self):
        object.__setattr__(self, "epsilon", _as_fraction(self.epsilon))
        object.__setattr__(self, "protocol_params", dict(self.protocol_params))
        object.__setattr__(self, "adversary_params", dict(self.adversary_params))
        if self.n < 2:
            raise ConfigInvalid(f"need at least two parties, got n={self.n}")
        if self.kappa < 1:
            raise ConfigInvalid(f"kappa must be positive, got {self.kappa}")
        if not 0 < self.epsilon <= 1:
            raise ConfigInvalid(f"epsilon must lie in (0, 1], got {self.epsilon}")
        if self.sender_input not in (0, 1):
            raise ConfigInvalid("sender input must be a bit")
        if not 0 <= self.seed < 2**64:
            raise ConfigInvalid("seed must be a 64-bit unsigned integer")
        if self.round_cap is not None and self.round_cap < 1:
            raise ConfigInvalid("round_cap must be positive")
        from bcsim import registry

        registry.protocol_class(self.protocol).check_config(self)
        registry.adversary_class(self.adversary).check_config(self)

    @property
    def honest_count(self) -> int:
        """The number of parties the protocol is told stay honest (floor of eps*n)."""
        return int(self.epsilon * self.n)

    def replace(self, **changes) -> "ExecutionConfig":
        data = {f: getattr(self, f) for f in self.__dataclass_fields__}
        data.update(changes)
        return ExecutionConfig(**data)

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "kappa": self.kappa,
            "epsilon": str(self.epsilon),
            "sender_input": self.sender_input,
            "protocol": self.protocol,
            "adversary": self.adversary,
            "seed": self.seed,
            "round_cap": self.round_cap,
            "protocol_params": _jsonable(self.protocol_params),
            "adversary_params": _jsonable(self.adversary_params),
            "max_corruptions": self.max_corruptions,
            "public_channels": self.public_channels,
        }


@dataclass(frozen=True)
class PropertyVerdict:
    termination_ok: bool
    agreement_ok: bool
    validity_ok: bool | None


@dataclass
class ExecutionResult:
    config: ExecutionConfig
    outputs: dict[int, int | None]
    corruption_timeline: list[tuple[int, int, str]]
    transcript: list[Envelope]
    metrics: Any
    verdict: PropertyVerdict
    termination_round: int
    info: dict = field(default_factory=dict)
    event_log: list[tuple[int, str]] = field(default_factory=list)
    emission_log: dict[int, dict[int, int]] = field(default_factory=dict)

    def corrupted_at(self) -> dict[int, int]:
        return {pid: rnd for rnd, pid, _ in self.corruption_timeline}

    def end_honest(self) -> list[int]:
        bad = self.corrupted_at()
        return [i for i in range(1, self.config.n + 1) if i not in bad]

    def inbox_of(self, party: int) -> list[Envelope]:
        return [e for e in self.transcript if e.dst == party]

    def canonical(self) -> dict:
        return {
            "config": self.config.to_dict(),
            "outputs": {str(k): _jsonable(v) for k, v in sorted(self.outputs.items())},
            "corruption_timeline": [list(x) for x in self.corruption_timeline],
            "transcript": [list(e.as_tuple()) for e in self.transcript],
            "metrics": _jsonable(self.metrics),
            "verdict": [self.verdict.termination_ok, self.verdict.agreement_ok, self.verdict.validity_ok],
            "termination_round": self.termination_round,
            "info": _jsonable(self.info),
        }

    def to_bytes(self) -> bytes:
        return json.dumps(self.canonical(), sort_keys=True, separators=(",", ":")).encode()

    def digest(self) -> str:
        return hashlib.sha256(self.to_bytes()).hexdigest()


def _jsonable(obj):
    if hasattr(obj, "to_dict"):
        return _jsonable(obj.to_dict())
    if isinstance(obj, Mapping):
        return {str(k): _jsonable(v) for k, v in sorted(obj.items(), key=lambda kv: str(kv[0]))}
    if isinstance(obj, (set, frozenset)):
        return sorted(_jsonable(x) for x in obj)
    if isinstance(obj, (list, tuple)):
        return [_jsonable(x) for x in obj]
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, bytes):
        return obj.hex()
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    return obj


def verify_broadcast_properties(result: ExecutionResult, config: ExecutionConfig | None = None) -> PropertyVerdict:
    """Termination, agreement and validity over the parties honest at the end."""
    config = config or result.config
    bad = result.corrupted_at()
    honest = [i for i in range(1, config.n + 1) if i not in bad]
    outs = [result.outputs.get(i) for i in honest]
    termination_ok = all(o is not None for o in outs)
    agreement_ok = len({o for o in outs}) <= 1
    validity_ok = None
    if SENDER not in bad:
        validity_ok = all(o == config.sender_input for o in outs)
    return PropertyVerdict(termination_ok, agreement_ok, validity_ok)


@dataclass
class CorruptionGrant:
    """Everything the adversary learns when it corrupts a party."""

    party: int
    round: int
    setup: bytes
    inbox: list[Envelope]
    state: Any  # snapshot of the party's state machine, None for static corruptions


class RoundView:
    """The adversary's handle on the execution during one round."""

    def __init__(self, engine: "_Engine", rnd: int, honest_envelopes: list[Envelope]):
        self._engine = engine
        self.round = rnd
        if engine.config.public_channels:
            self.honest_envelopes = honest_envelopes
        else:
            self.honest_envelopes = [e for e in honest_envelopes if e.dst in engine.corrupted]

    @property
    def corrupted(self) -> frozenset[int]:
        return frozenset(self._engine.corrupted)

    def corrupt(self, party: int, reason: str = "adaptive") -> CorruptionGrant:
        return self._engine.corrupt(party, self.round, reason)

    def remaining_budget(self) -> int:
        return self._engine.budget - len(self._engine.corrupted)


class _Engine:
    def __init__(self, config: ExecutionConfig, protocol, adversary):
        self.config = config
        self.protocol = protocol
        self.adversary = adversary
        self.n = config.n
        self.budget = adversary.budget(config)
        if config.max_corruptions is not None:
            self.budget = min(self.budget, config.max_corruptions)
        self.corrupted: dict[int, int] = {}
        self.timeline: list[tuple[int, int, str]] = []
        self.parties: dict = {}
        self.setup: dict[int, bytes] = {}
        self.history: dict[int, list[Envelope]] = defaultdict(list)
        self.events: list[tuple[int, str]] = []

    def corrupt(self, party: int, rnd: int, reason: str) -> CorruptionGrant:
        if not 1 <= party <= self.n:
            raise AdversaryViolation(f"no such party {party}")
        if party in self.corrupted:
            raise AdversaryViolation(f"party {party} already corrupted")
        if len(self.corrupted) + 1 > self.budget:
            raise BudgetExceeded(f"corrupting {party} exceeds budget t={self.budget}")
        self.corrupted[party] = rnd
        self.timeline.append((rnd, party, reason))
        machine = self.parties.pop(party, None)
        snapshot = machine.snapshot() if machine is not None else None
        self.events.append((rnd, f"corrupt:{party}"))
        return CorruptionGrant(party, rnd, self.setup.get(party, b""), list(self.history[party]), snapshot)

    def run(self) -> ExecutionResult:
        cfg = self.config
        total_rounds = self.protocol.total_rounds
        cap = cfg.round_cap if cfg.round_cap is not None else 4 * total_rounds
        if total_rounds > cap:
            raise RoundCapExceeded(f"protocol needs {total_rounds} rounds, cap is {cap}")

        adv_rng = derive_rng(cfg.seed, ADVERSARY_STREAM)
        static = set(self.adversary.choose_static(cfg, adv_rng))
        for pid in sorted(static):
            self.corrupt(pid, 0, "static")

        dealer_rng = derive_rng(cfg.seed, DEALER_STREAM)
        self.setup = self.protocol.sample_setup(dealer_rng)
        for pid in range(1, self.n + 1):
            if pid not in self.corrupted:
                self.parties[pid] = self.protocol.make_party(
                    pid, self.setup[pid], cfg.sender_input if pid == SENDER else None
                )
        grants = [
            CorruptionGrant(pid, 0, self.setup[pid], [], None) for pid in sorted(self.corrupted)
        ]
        self.adversary.on_setup(_SetupView(self, adv_rng), grants)

        emission_log: dict[int, dict[int, int]] = {}
        transcript: list[Envelope] = []
        pending: dict[int, list[Envelope]] = {}
        bits = self.protocol.payload_bits
        skip_idle = cfg.skip_idle
        for rnd in range(1, total_rounds + 1):
            inboxes = pending
            wakes = self.protocol.wakes(rnd)
            honest_out: list[Envelope] = []
            counts: dict[int, int] = {}
            for pid in sorted(self.parties):
                inbox = inboxes.get(pid, [])
                if skip_idle and not inbox and not wakes:
                    continue
                out = self.parties[pid].step(rnd, inbox)
                if out:
                    for dst, payload in out:
                        if dst == pid or not 1 <= dst <= self.n:
                            raise SimulationError(f"party {pid} addressed invalid destination {dst}")
                        honest_out.append(Envelope(pid, dst, rnd, payload, bits(payload)))
                    counts[pid] = len(out)
            emission_log[rnd] = counts
            self.events.append((rnd, "honest-emitted"))

            view = RoundView(self, rnd, honest_out)
            adv_out = []
            for src, dst, payload in self.adversary.on_round(view) or ():
                when = self.corrupted.get(src)
                if when is None or when >= rnd:
                    raise AdversaryViolation(f"adversary cannot speak for party {src} in round {rnd}")
                if dst == src or not 1 <= dst <= self.n:
                    raise AdversaryViolation(f"invalid destination {dst}")
                adv_out.append(Envelope(src, dst, rnd, payload, bits(payload)))
            self.events.append((rnd, "adversary-emitted"))

            order = {id(e): k for k, e in enumerate(honest_out + adv_out)}
            delivered = sorted(honest_out + adv_out, key=lambda e: (e.dst, e.src, order[id(e)]))
            pending = {}
            for env in delivered:
                pending.setdefault(env.dst, []).append(env)
                self.history[env.dst].append(env)
            transcript.extend(delivered)
            self.events.append((rnd, "delivered"))

        for pid in sorted(self.parties):
            self.parties[pid].finish(pending.get(pid, []))
        outputs = {pid: self.parties[pid].output() for pid in sorted(self.parties)}

        from bcsim.metrics import compute_metrics

        info = {}
        info.update(self.protocol.summarize(self.parties))
        info.update(self.adversary.report())
        info["budget"] = self.budget
        metrics = compute_metrics(transcript, self.timeline, self.n, info.get("flood_failures", 0))
        result = ExecutionResult(
            config=cfg,
            outputs=outputs,
            corruption_timeline=list(self.timeline),
            transcript=transcript,
            metrics=metrics,
            verdict=PropertyVerdict(True, True, None),
            termination_round=total_rounds,
            info=info,
            event_log=self.events,
            emission_log=emission_log,
        )
        result.verdict = verify_broadcast_properties(result, cfg)
        return result


class _SetupView:
    """Adversary handle between setup and round 1 (adaptive corruptions allowed)."""

    def __init__(self, engine: _Engine, rng: np.random.Generator):
        self._engine = engine
        self.rng = rng
        self.config = engine.config
        self.protocol = engine.protocol

    @property
    def corrupted(self) -> frozenset[int]:
        return frozenset(self._engine.corrupted)

    def corrupt(self, party: int, reason: str = "adaptive") -> CorruptionGrant:
        return self._engine.corrupt(party, 0, reason)


def run_execution(config: ExecutionConfig, protocol=None, adversary=None) -> ExecutionResult:
    """Run one execution; protocol and adversary default to the ones named in ``config``."""
    from bcsim import registry

    if protocol is None:
        protocol = registry.build_protocol(config)
    if adversary is None:
        adversary = registry.build_adversary(config)
    return _Engine(config, protocol, adversary).run()
