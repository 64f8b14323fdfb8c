"""A deliberately sparse broadcast candidate.

The sender signs its bit and sends it to ``delta`` random parties; every
party forwards the first validly signed message it receives, once, to
``delta`` random parties. Sends happen in rounds 1..3 and a party outputs the
unique bit it holds a valid message for, else 0. It has no agreement
mechanism at all, which is what makes it a useful attack target.
"""

from __future__ import annotations

import math

from bcsim.core import ConfigInvalid, tape_rng
from bcsim.protocols.base import (
    Party,
    Protocol,
    TypedMessage,
    bit_message,
    chain_level,
    decode_message,
    signed_message_bits,
)

TARGET_TAPE = 12


def default_delta(n: int) -> int:
    return max(1, math.ceil(math.log2(n)))


class StrawmanParty(Party):
    def __init__(self, pid, setup, ctx, input_bit=None, delta: int = 2, rounds: int = 3, cap: int | None = None):
        super().__init__(pid, setup, ctx, input_bit)
        self.delta = delta
        self.rounds = rounds
        self.cap = cap
        self.forwarded = False
        self.bits: set[int] = set()

    def targets(self) -> list[int]:
        others = [j for j in range(1, self.ctx.n + 1) if j != self.pid]
        k = min(self.delta, len(others))
        if self.cap is not None:
            k = min(k, self.cap)
        rng = tape_rng(self.setup, TARGET_TAPE)
        return sorted(int(j) for j in rng.choice(others, size=k, replace=False))

    def _valid(self, inbox):
        first = None
        for env in inbox:
            if chain_level(env.payload, self.ctx, committee_only=False) == 0:
                continue
            self.bits.add(decode_message(env.payload).bit)
            if first is None or (env.src, env.payload) < first:
                first = (env.src, env.payload)
        return None if first is None else first[1]

    def step(self, rnd, inbox):
        if rnd == 1:
            if self.pid != self.ctx.sender or self.input is None:
                return []
            token = self.ctx.registry.sign(self.pid, bit_message(self.input), self.setup)
            self.bits.add(self.input)
            self.forwarded = True
            payload = TypedMessage(self.input, ((self.pid, token),)).encode()
            return [(j, payload) for j in self.targets()]
        msg = self._valid(inbox)
        if msg is None or self.forwarded or rnd > self.rounds:
            return []
        self.forwarded = True
        return [(j, msg) for j in self.targets()]

    def finish(self, inbox):
        self._valid(inbox)

    def output(self):
        return next(iter(self.bits)) if len(self.bits) == 1 else 0


class StrawmanProtocol(Protocol):
    """Params: ``delta`` (fan-out), ``rounds`` (default 3), ``cap`` (hard locality limit)."""

    name = "strawman"
    party_class = StrawmanParty

    def __init__(self, config):
        super().__init__(config)
        pp = config.protocol_params
        self.delta = int(pp.get("delta", default_delta(config.n)))
        self.rounds = int(pp.get("rounds", 3))
        self.cap = None if pp.get("cap") is None else int(pp["cap"])

    @classmethod
    def check_config(cls, config):
        pp = config.protocol_params
        if int(pp.get("delta", 1)) < 1 or int(pp.get("rounds", 3)) < 1:
            raise ConfigInvalid("strawman needs delta >= 1 and rounds >= 1")
        if pp.get("cap") is not None and int(pp["cap"]) < 1:
            raise ConfigInvalid("strawman cap must be positive")

    @property
    def total_rounds(self):
        return self.rounds

    def make_party(self, pid, setup, input_bit=None):
        return StrawmanParty(pid, setup, self.context, input_bit, self.delta, self.rounds, self.cap)

    def payload_bits(self, payload):
        return signed_message_bits(payload, self.config.kappa)


def strawman_round(party: StrawmanParty, rnd: int, inbox) -> list[tuple[int, bytes]]:
    return party.step(rnd, inbox)
