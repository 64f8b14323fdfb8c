"""Dolev-Strong authenticated broadcast, used as the all-to-all baseline.

A bit is accepted from a message sent in round ``s`` when the message carries
at least ``s`` distinct valid signatures including the sender's. On first
acceptance a party appends its own signature and relays to everyone.
"""

from __future__ import annotations

from bcsim.core import ConfigInvalid
from bcsim.protocols.base import (
    Party,
    Protocol,
    TypedMessage,
    bit_message,
    chain_level,
    decode_message,
    signed_message_bits,
)


class DolevStrongParty(Party):
    def __init__(self, pid, setup, ctx, input_bit=None, t: int = 1):
        super().__init__(pid, setup, ctx, input_bit)
        self.t = t
        self.ext: set[int] = set()

    def _accept(self, inbox) -> list[bytes]:
        """Payloads whose bit is newly accepted, in inbox order."""
        new = []
        for env in inbox:
            if chain_level(env.payload, self.ctx, committee_only=False) < env.round:
                continue
            msg = decode_message(env.payload)
            if msg.bit in self.ext:
                continue
            self.ext.add(msg.bit)
            new.append(env.payload)
        return new

    def step(self, rnd, inbox):
        ctx = self.ctx
        others = [j for j in range(1, ctx.n + 1) if j != self.pid]
        if rnd == 1:
            if self.pid != ctx.sender or self.input is None:
                return []
            self.ext.add(self.input)
            token = ctx.registry.sign(self.pid, bit_message(self.input), self.setup)
            payload = TypedMessage(self.input, ((self.pid, token),)).encode()
            return [(j, payload) for j in others]
        accepted = self._accept(inbox)
        if rnd > self.t + 1:
            return []
        out = []
        for payload in accepted:
            msg = decode_message(payload)
            if self.pid not in msg.signers():
                token = ctx.registry.sign(self.pid, bit_message(msg.bit), self.setup)
                payload = msg.extend(self.pid, token).encode()
            out += [(j, payload) for j in others]
        return out

    def finish(self, inbox):
        self._accept(inbox)

    def output(self):
        return next(iter(self.ext)) if len(self.ext) == 1 else 0


class DolevStrongProtocol(Protocol):
    """Parameter ``t`` defaults to the number of parties not assumed honest."""

    name = "dolev-strong"
    party_class = DolevStrongParty

    def __init__(self, config):
        super().__init__(config)
        self.t = int(config.protocol_params.get("t", config.n - config.honest_count))

    @classmethod
    def check_config(cls, config):
        t = int(config.protocol_params.get("t", config.n - config.honest_count))
        if not 0 <= t < config.n:
            raise ConfigInvalid(f"dolev-strong needs 0 <= t < n, got t={t}")

    @property
    def total_rounds(self):
        return self.t + 1

    def make_party(self, pid, setup, input_bit=None):
        return DolevStrongParty(pid, setup, self.context, input_bit, self.t)

    def payload_bits(self, payload):
        return signed_message_bits(payload, self.config.kappa)


def dolev_strong_round(party: DolevStrongParty, rnd: int, inbox) -> list[tuple[int, bytes]]:
    return party.step(rnd, inbox)
