"""Shared plumbing for the per-party state machines."""

from __future__ import annotations

import copy
import struct
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from bcsim.core import (
    MINE_STREAM,
    REGISTRY_STREAM,
    SENDER,
    ExecutionConfig,
    Envelope,
    derive_bytes,
)
from bcsim.crypto import KeyRegistry, MineOracle, mine_probability

SETUP_BYTES = 32
TOKEN_BYTES = 16


class Context:
    """Functionalities shared by all parties of one execution."""

    def __init__(self, config: ExecutionConfig):
        self.n = config.n
        self.kappa = config.kappa
        self.epsilon = config.epsilon
        self.sender = SENDER
        self.registry = KeyRegistry(derive_bytes(config.seed, REGISTRY_STREAM), config.kappa)
        self.oracle = MineOracle(
            mine_probability(config.n, config.epsilon, config.kappa),
            derive_bytes(config.seed, MINE_STREAM),
        )
        # only filled once every link qualifies, so entries can never go stale
        self.level_cache: dict[tuple[bytes, bool], int] = {}


class Party:
    """A party's protocol state machine.

    ``step`` must be a no-op when called with an empty inbox on a round for
    which the protocol does not declare a wake-up; the engine skips such calls.
    """

    def __init__(self, pid: int, setup: bytes, ctx: Context, input_bit: int | None = None):
        self.pid = pid
        self.setup = setup
        self.ctx = ctx
        self.input = input_bit

    def step(self, rnd: int, inbox: list[Envelope]) -> list[tuple[int, bytes]]:
        raise NotImplementedError

    def finish(self, inbox: list[Envelope]) -> None:
        pass

    def output(self):
        raise NotImplementedError

    def snapshot(self) -> "Party":
        return copy.deepcopy(self, memo={id(self.ctx): self.ctx})


class Protocol:
    name = "abstract"
    party_class: type[Party] = Party

    def __init__(self, config: ExecutionConfig):
        self.config = config
        self.n = config.n
        self.context = Context(config)

    @classmethod
    def check_config(cls, config: ExecutionConfig) -> None:
        pass

    @property
    def total_rounds(self) -> int:
        raise NotImplementedError

    def sample_setup(self, rng: np.random.Generator) -> dict[int, bytes]:
        setup = {i: rng.bytes(SETUP_BYTES) for i in range(1, self.n + 1)}
        for i, secret in setup.items():
            self.context.registry.register(i, secret)
        return setup

    def make_party(self, pid: int, setup: bytes, input_bit: int | None = None) -> Party:
        return self.party_class(pid, setup, self.context, input_bit)

    def payload_bits(self, payload: bytes) -> int:
        return 8 * len(payload)

    def wakes(self, rnd: int) -> bool:
        return rnd == 1

    def summarize(self, parties: dict[int, Party]) -> dict:
        return {}


# -- signed-bit messages -------------------------------------------------------------


@dataclass(frozen=True)
class TypedMessage:
    """A bit plus an ordered chain of (signer, token) links."""

    bit: int
    chain: tuple[tuple[int, bytes], ...]

    def encode(self) -> bytes:
        head = struct.pack("<cBH", b"B", self.bit, len(self.chain))
        return head + b"".join(struct.pack("<I", s) + t for s, t in self.chain)

    def signers(self) -> list[int]:
        return [s for s, _ in self.chain]

    def extend(self, signer: int, token: bytes) -> "TypedMessage":
        return TypedMessage(self.bit, self.chain + ((signer, token),))


@lru_cache(maxsize=1 << 16)
def decode_message(payload: bytes) -> TypedMessage | None:
    if len(payload) < 4 or payload[:1] != b"B":
        return None
    _, bit, count = struct.unpack_from("<cBH", payload)
    if bit not in (0, 1) or len(payload) != 4 + count * (4 + TOKEN_BYTES):
        return None
    links = []
    off = 4
    for _ in range(count):
        (signer,) = struct.unpack_from("<I", payload, off)
        links.append((signer, payload[off + 4 : off + 4 + TOKEN_BYTES]))
        off += 4 + TOKEN_BYTES
    return TypedMessage(bit, tuple(links))


def bit_message(bit: int) -> bytes:
    """The byte string that gets signed for a bit."""
    return b"bit:" + bytes([bit])


def signed_message_bits(payload: bytes, kappa: int) -> int:
    """One bit for the value plus kappa per signature; no header overhead."""
    msg = decode_message(payload)
    if msg is None:
        return 8 * len(payload)
    return 1 + kappa * len(msg.chain)


def chain_level(payload: bytes, ctx: Context, committee_only: bool = True) -> int:
    """Number of distinct qualifying signers on the message, or 0 without the sender.

    A link qualifies when its signature verifies and the signer is the sender
    or (with ``committee_only``) a mined committee member.
    """
    cached = ctx.level_cache.get((payload, committee_only))
    if cached is not None:
        return cached
    msg = decode_message(payload)
    if msg is None:
        return 0
    message = bit_message(msg.bit)
    seen: set[int] = set()
    has_sender = False
    all_ok = True
    for signer, token in msg.chain:
        if signer in seen or not ctx.registry.verify(signer, message, token):
            all_ok = False
            continue
        if signer == ctx.sender:
            has_sender = True
        elif committee_only and not ctx.oracle.verify(0, signer):
            all_ok = False
            continue
        seen.add(signer)
    level = len(seen) if has_sender else 0
    if all_ok and has_sender:
        ctx.level_cache[(payload, committee_only)] = level
    return level
