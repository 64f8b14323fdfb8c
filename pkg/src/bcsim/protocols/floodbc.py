"""Flood-BC: committee-signed broadcast whose messages travel by Flood.

Round layout of one execution:

* round 1 is stage 0: parties mine for committee membership and the sender
  signs its bit and sends it to everyone;
* afterwards every mini-stage occupies one window of ``rho`` rounds, two
  mini-stages per stage, stages 1 .. R+1.

At the first round of a window a party decides which Flood instances it
launches; during the rest of the window it relays. An envelope belongs to
the instance of the window it was sent in, so payloads carry no instance tag.
"""

from __future__ import annotations

from bcsim.bounds import stage_count
from bcsim.core import tape_rng
from bcsim.protocols.base import (
    Party,
    Protocol,
    TypedMessage,
    bit_message,
    chain_level,
    decode_message,
    signed_message_bits,
)
from bcsim.protocols.flood import NEIGHBOR_TAPE, FloodParams, flood_sample_neighbors


def schedule(rnd: int, rho: int) -> tuple[int, int, int, int]:
    """Map an engine round (>= 2) to (window, offset in window, stage, mini-stage)."""
    k = rnd - 2
    w, j = divmod(k, rho)
    return w, j + 1, w // 2 + 1, w % 2 + 1


def window_level(w: int) -> int:
    """Signature count an instance message of window ``w`` must carry."""
    return w // 2 + 1 + (w % 2)


class FloodBCParty(Party):
    def __init__(self, pid, setup, ctx, input_bit=None, params: FloodParams | None = None,
                 stages: int = 1, resample: bool = False):
        super().__init__(pid, setup, ctx, input_bit)
        self.params = params
        self.stages = stages
        self.resample = resample
        self.rho = params.rho
        self.committee_member = False
        self.ext: set[int] = set()
        self.ext_at: dict[int, tuple[int, int]] = {}
        self.best: dict[int, tuple[int, bytes]] = {}
        self.relayed: set[tuple[int, int]] = set()
        self.launched: set[tuple[int, int]] = set()
        self.got: set[tuple[int, int]] = set()
        self._fixed = None if resample else frozenset(
            flood_sample_neighbors(params, pid, tape_rng(setup, NEIGHBOR_TAPE))
        )

    def neighbors(self, w: int, b: int) -> frozenset[int]:
        if self._fixed is not None:
            return self._fixed
        return frozenset(flood_sample_neighbors(self.params, self.pid, tape_rng(self.setup, NEIGHBOR_TAPE, w, b)))

    def _absorb(self, env) -> tuple[int, int]:
        """Record a received envelope; returns (bit, level) with level 0 when invalid."""
        level = chain_level(env.payload, self.ctx)
        if level == 0:
            return -1, 0
        b = decode_message(env.payload).bit
        if level > self.best.get(b, (0, b""))[0]:
            self.best[b] = (level, env.payload)
        if env.round >= 2:
            w = (env.round - 2) // self.rho
            if level >= window_level(w):
                self.got.add((w, b))
        return b, level

    def _send(self, w, b, payload):
        self.relayed.add((w, b))
        self.got.add((w, b))
        return [(j, payload) for j in sorted(self.neighbors(w, b))]

    def step(self, rnd, inbox):
        ctx = self.ctx
        if rnd == 1:
            self.committee_member = ctx.oracle.mine(self.pid, 0) == 1
            if self.pid != ctx.sender or self.input is None:
                return []
            token = ctx.registry.sign(self.pid, bit_message(self.input), self.setup)
            payload = TypedMessage(self.input, ((self.pid, token),)).encode()
            self.best[self.input] = (1, payload)
            return [(j, payload) for j in range(1, ctx.n + 1) if j != self.pid]

        w, j, stage, mini = schedule(rnd, self.rho)
        fresh: dict[int, list[tuple[int, bytes]]] = {0: [], 1: []}
        for env in inbox:
            b, level = self._absorb(env)
            if level:
                fresh[b].append((level, env.src, env.payload))

        out = []
        if j == 1:
            for b in (0, 1):
                if b in self.ext or self.best.get(b, (0,))[0] < stage:
                    continue
                payload = self.best[b][1]
                if mini == 2:
                    if not self.committee_member:
                        continue
                    msg = decode_message(payload)
                    if self.pid not in msg.signers():
                        token = ctx.registry.sign(self.pid, bit_message(b), self.setup)
                        payload = msg.extend(self.pid, token).encode()
                self.ext.add(b)
                self.ext_at[b] = (stage, mini)
                self.launched.add((w, b))
                out += self._send(w, b, payload)
        else:
            need = window_level(w)
            for b in (0, 1):
                if (w, b) in self.relayed:
                    continue
                cands = [(src, p) for level, src, p in fresh[b] if level >= need]
                if cands:
                    out += self._send(w, b, min(cands)[1])
        return out

    def finish(self, inbox):
        for env in inbox:
            self._absorb(env)

    def output(self):
        return next(iter(self.ext)) if len(self.ext) == 1 else 0


class FloodBCProtocol(Protocol):
    name = "floodbc"
    party_class = FloodBCParty

    def __init__(self, config):
        super().__init__(config)
        self.params = FloodParams(config.n, config.epsilon, config.kappa)
        self.stages = stage_count(config.epsilon, config.kappa)
        self.resample = bool(config.protocol_params.get("resample_neighbors", False))

    @property
    def rho(self) -> int:
        return self.params.rho

    @property
    def total_rounds(self):
        return 1 + 2 * (self.stages + 1) * self.rho

    def make_party(self, pid, setup, input_bit=None):
        return FloodBCParty(pid, setup, self.context, input_bit, self.params, self.stages, self.resample)

    def payload_bits(self, payload):
        return signed_message_bits(payload, self.config.kappa)

    def wakes(self, rnd):
        return rnd == 1 or (rnd - 2) % self.rho == 0

    def summarize(self, parties):
        instances = set()
        for m in parties.values():
            instances |= m.launched
        failures = sum(1 for key in instances if any(key not in m.got for m in parties.values()))
        oracle = self.context.oracle
        committee = sorted(p for (p, b), v in oracle.mined.items() if b == 0 and v == 1)
        return {
            "flood_failures": failures,
            "flood_instances": len(instances),
            "committee": committee,
            "ext_at": {p: dict(m.ext_at) for p, m in parties.items()},
            "stages": self.stages,
            "rho": self.rho,
        }


def floodbc_round(party: FloodBCParty, rnd: int, inbox) -> list[tuple[int, bytes]]:
    """Advance one party by one engine round; returns its outbox."""
    return party.step(rnd, inbox)
