"""Adversary strategies pluggable into the round engine.

An adversary exposes:

* ``budget(config)``: the corruption bound t;
* ``choose_static(config, rng)``: parties corrupted before setup;
* ``on_setup(view, grants)``: sees the corrupted setups;
* ``on_round(view)``: sees this round's honest envelopes (rushing), may
  corrupt further parties and returns envelopes from corrupted parties;
* ``report()``: attack bookkeeping merged into ``ExecutionResult.info``.
"""

from __future__ import annotations

import logging
from typing import Iterable

from bcsim.core import SENDER, ConfigInvalid, Envelope

log = logging.getLogger(__name__)


class ParityInvalid(ConfigInvalid):
    pass


class Adversary:
    name = "none"

    def __init__(self, config):
        self.config = config
        self.n = config.n
        self.params = dict(config.adversary_params)
        self.protocol = None

    @classmethod
    def check_config(cls, config) -> None:
        pass

    def budget(self, config) -> int:
        return 0

    def choose_static(self, config, rng) -> Iterable[int]:
        return ()

    def on_setup(self, view, grants) -> None:
        self.protocol = view.protocol
        self.rng = view.rng

    def on_round(self, view) -> list[tuple[int, int, bytes]]:
        return []

    def report(self) -> dict:
        return {}


class PassiveAdversary(Adversary):
    """Corrupts nobody."""


class CrashAdversary(Adversary):
    """Statically corrupts ``target`` and keeps it silent."""

    name = "crash"

    def _target(self, config):
        return sorted({int(p) for p in config.adversary_params.get("target", ())})

    @classmethod
    def check_config(cls, config):
        for p in config.adversary_params.get("target", ()):
            if not 1 <= int(p) <= config.n:
                raise ConfigInvalid(f"crash target {p} out of range")

    def budget(self, config):
        return len(self._target(config))

    def choose_static(self, config, rng):
        return self._target(config)

    def report(self):
        return {"crashed": self._target(self.config)}


class RandomCrashAdversary(CrashAdversary):
    """Crashes ``count`` random parties (default n - floor(eps n)), never those in ``exclude``."""

    name = "crash-random"

    def __init__(self, config):
        super().__init__(config)
        self.chosen: list[int] = []

    @staticmethod
    def _count(config):
        return int(config.adversary_params.get("count", config.n - config.honest_count))

    @classmethod
    def check_config(cls, config):
        exclude = set(config.adversary_params.get("exclude", [SENDER]))
        if not 0 <= cls._count(config) <= config.n - len(exclude):
            raise ConfigInvalid("crash count too large")

    def budget(self, config):
        return self._count(config)

    def choose_static(self, config, rng):
        exclude = {int(p) for p in config.adversary_params.get("exclude", [SENDER])}
        pool = [p for p in range(1, config.n + 1) if p not in exclude]
        self.chosen = sorted(int(p) for p in rng.choice(pool, size=self._count(config), replace=False))
        return self.chosen

    def report(self):
        return {"crashed": self.chosen}


class VirtualWorld:
    """Honest state machines run inside the adversary.

    Members talk to each other internally; envelopes to ``audience`` are
    emitted for real and everything else is dropped. Callers feed real honest
    envelopes in through ``deliver``.
    """

    def __init__(self, protocol, label: str, audience: set[int]):
        self.protocol = protocol
        self.label = label
        self.audience = set(audience)
        self.members: dict[int, object] = {}
        self.pending: dict[int, list[Envelope]] = {}

    def add(self, pid, machine, inbox: list[Envelope] | None = None):
        self.members[pid] = machine
        if inbox:
            self.pending.setdefault(pid, []).extend(inbox)

    def step(self, rnd: int) -> list[tuple[int, int, bytes]]:
        """Run members for round ``rnd``; returns (src, dst, payload) they emit."""
        wakes = self.protocol.wakes(rnd)
        pending, self.pending = self.pending, {}
        out = []
        for pid in sorted(self.members):
            inbox = sorted(pending.get(pid, []), key=lambda e: e.src)
            if not inbox and not wakes:
                continue
            for dst, payload in self.members[pid].step(rnd, inbox) or ():
                out.append((pid, dst, payload))
        return out

    def route(self, rnd, emitted) -> list[tuple[int, int, bytes]]:
        """Deliver internal traffic; return what goes onto the network."""
        real = []
        for src, dst, payload in emitted:
            if dst in self.members:
                self.deliver(Envelope(src, dst, rnd, payload, self.protocol.payload_bits(payload)))
            elif dst in self.audience:
                real.append((src, dst, payload))
        return real

    def deliver(self, env: Envelope):
        self.pending.setdefault(env.dst, []).append(env)

    def outputs(self) -> dict[int, object]:
        return {pid: m.output() for pid, m in self.members.items()}


class StaticSplitAdversary(Adversary):
    """Two virtual executions around an honest set S in A and an honest i_star in B.

    The A-side world runs the sender on input 1 toward S with B crashed; the
    B-side world runs the sender on input 0 toward i_star with A crashed.
    """

    name = "static-split"

    def __init__(self, config):
        super().__init__(config)
        half = (config.n - 1) // 2
        self.A = list(range(2, 2 + half))
        self.B = list(range(2 + half, config.n + 1))
        self.S: list[int] = []
        self.i_star = None
        self.worlds: list[VirtualWorld] = []
        self.inputs = (int(self.params.get("input_a", 1)), int(self.params.get("input_b", 0)))

    @classmethod
    def check_config(cls, config):
        if config.n % 2 == 0:
            raise ParityInvalid(f"static split needs odd n, got {config.n}")
        if config.honest_count < 2:
            raise ConfigInvalid("static split needs floor(eps n) >= 2")
        if config.honest_count - 1 > (config.n - 1) // 2:
            raise ConfigInvalid("S does not fit in A")

    def budget(self, config):
        return config.n - config.honest_count

    def choose_static(self, config, rng):
        self.S = sorted(int(p) for p in rng.choice(self.A, size=config.honest_count - 1, replace=False))
        self.i_star = int(rng.choice(self.B))
        honest = set(self.S) | {self.i_star}
        return [p for p in range(1, config.n + 1) if p not in honest]

    def on_setup(self, view, grants):
        super().on_setup(view, grants)
        setup = {g.party: g.setup for g in grants}
        proto = view.protocol
        side_a = VirtualWorld(proto, "A", set(self.S))
        side_b = VirtualWorld(proto, "B", {self.i_star})
        side_a.add(SENDER, proto.make_party(SENDER, setup[SENDER], self.inputs[0]))
        side_b.add(SENDER, proto.make_party(SENDER, setup[SENDER], self.inputs[1]))
        for p in self.A:
            if p not in self.S:
                side_a.add(p, proto.make_party(p, setup[p]))
        for p in self.B:
            if p != self.i_star:
                side_b.add(p, proto.make_party(p, setup[p]))
        self.worlds = [side_a, side_b]

    def on_round(self, view):
        out = []
        for world in self.worlds:
            out += world.route(view.round, world.step(view.round))
        for env in view.honest_envelopes:
            for world in self.worlds:
                if env.src in world.audience and env.dst in world.members:
                    world.deliver(env)
        return out

    def report(self):
        return {"S": self.S, "i_star": self.i_star, "A": self.A, "B": self.B}


class AdaptiveLocalityAdversary(Adversary):
    """Forces i_star's locality above k or breaks the protocol.

    Parties other than the sender and i_star are split into S_0 and S_1. With
    a random side b the adversary corrupts the sender and S_{1-b}. World b runs
    the sender on input b toward the honest S_b and i_star; world 1-b runs S_{1-b}
    and the sender on input 1-b toward i_star only. Any honest party of S_b that
    hears from i_star is corrupted on the spot and carries on ignoring i_star.
    """

    name = "adaptive-locality"

    def __init__(self, config):
        super().__init__(config)
        self.k = int(self.params.get("k", 1))
        self.i_star = int(self.params.get("i_star", config.n))
        rest = [p for p in range(2, config.n + 1) if p != self.i_star]
        half = len(rest) // 2
        self.sides = (rest[:half], rest[half:])
        self.b = None
        self.taken: list[int] = []
        self.failed = False
        self.worlds: dict[int, VirtualWorld] = {}

    @classmethod
    def check_config(cls, config):
        if config.n % 2:
            raise ParityInvalid(f"adaptive attack needs even n, got {config.n}")
        k = int(config.adversary_params.get("k", 1))
        if not 0 < k < (config.n - 1) / 2:
            raise ConfigInvalid(f"need 0 < k < (n-1)/2, got k={k}")
        i_star = int(config.adversary_params.get("i_star", config.n))
        if i_star == SENDER or not 1 <= i_star <= config.n:
            raise ConfigInvalid("i_star must be a non-sender party")
        b = config.adversary_params.get("b")
        if b is not None and int(b) not in (0, 1):
            raise ConfigInvalid("b must be a bit")

    def budget(self, config):
        return config.n // 2 + self.k

    def choose_static(self, config, rng):
        coin = int(rng.integers(2))
        self.b = int(self.params["b"]) if self.params.get("b") is not None else coin
        return [SENDER] + self.sides[1 - self.b]

    def on_setup(self, view, grants):
        super().on_setup(view, grants)
        setup = {g.party: g.setup for g in grants}
        proto, b = view.protocol, self.b
        mine = VirtualWorld(proto, "b", set(self.sides[b]) | {self.i_star})
        other = VirtualWorld(proto, "1-b", {self.i_star})
        mine.add(SENDER, proto.make_party(SENDER, setup[SENDER], b))
        other.add(SENDER, proto.make_party(SENDER, setup[SENDER], 1 - b))
        for p in self.sides[1 - b]:
            other.add(p, proto.make_party(p, setup[p]))
        self.worlds = {b: mine, 1 - b: other}

    def on_round(self, view):
        rnd, b = view.round, self.b
        emitted = {beta: self.worlds[beta].step(rnd) for beta in (0, 1)}

        # corrupt-on-receive, before anything reaches the new corruptions
        side = set(self.sides[b])
        for env in view.honest_envelopes:
            if env.src != self.i_star or env.dst not in side or env.dst in view.corrupted:
                continue
            if self.failed or len(self.taken) >= self.k:
                if not self.failed:
                    log.debug("adaptive attack exhausted k=%d at round %d", self.k, rnd)
                self.failed = True
                continue
            grant = view.corrupt(env.dst, "receive-from-i_star")
            self.taken.append(env.dst)
            # its round-r inbox arrives through the ingestion loop below
            self.worlds[b].add(env.dst, grant.state)

        out = []
        for beta in (0, 1):
            out += self.worlds[beta].route(rnd, emitted[beta])
        for env in view.honest_envelopes:
            for beta in (0, 1):
                world = self.worlds[beta]
                if env.dst not in world.members or env.src not in world.audience:
                    continue
                if env.src == self.i_star and env.dst != SENDER:
                    continue
                world.deliver(env)
        return out

    def report(self):
        return {
            "b": self.b,
            "i_star": self.i_star,
            "S_0": self.sides[0],
            "S_1": self.sides[1],
            "k": self.k,
            "receive_corrupted": list(self.taken),
            "attack_failed": self.failed,
        }


class EquivocatingSender(Adversary):
    """Corrupt sender running two copies: bit 0 to odd parties, bit 1 to even ones.

    ``assignment`` (party -> bit) overrides the parity rule. Silent after round 1.
    """

    name = "equivocate"

    def __init__(self, config):
        super().__init__(config)
        raw = self.params.get("assignment")
        self.assignment = None if raw is None else {int(p): int(v) for p, v in raw.items()}

    def budget(self, config):
        return 1

    def choose_static(self, config, rng):
        return [SENDER]

    def on_setup(self, view, grants):
        super().on_setup(view, grants)
        setup = {g.party: g.setup for g in grants}
        self.copies = {beta: view.protocol.make_party(SENDER, setup[SENDER], beta) for beta in (0, 1)}

    def bit_for(self, party: int) -> int:
        if self.assignment is not None:
            return self.assignment.get(party, party % 2 == 0)
        return 0 if party % 2 else 1

    def on_round(self, view):
        if view.round != 1:
            return []
        out = []
        for beta in (0, 1):
            for dst, payload in self.copies[beta].step(1, []) or ():
                if self.bit_for(dst) == beta:
                    out.append((SENDER, dst, payload))
        return out
