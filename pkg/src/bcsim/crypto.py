"""Ideal signatures and the committee-election oracle.

Both functionalities are exact: a signature verifies if and only if the signer
really signed that message, and a mined coin never changes once drawn.
"""

from __future__ import annotations

import hashlib
import struct
from dataclasses import dataclass, field
from fractions import Fraction


class ForgeryAttempt(PermissionError):
    """Raised when someone signs for a party without holding its secret key."""


def _key_id(secret: bytes) -> bytes:
    return hashlib.blake2b(secret, digest_size=16, person=b"bcsim-sk").digest()


@dataclass
class KeyRegistry:
    """Ideal signature scheme.

    Tokens are keyed MACs over (signer, message) under a registry secret, so
    they are deterministic across paired executions yet cannot be computed by
    anyone outside the registry.
    """

    secret: bytes
    sig_bit_cost: int
    keys: dict[int, bytes] = field(default_factory=dict)
    signed: set[tuple[int, bytes]] = field(default_factory=set)

    def register(self, party: int, secret_key: bytes) -> None:
        self.keys[party] = _key_id(secret_key)

    def _token(self, signer: int, message: bytes) -> bytes:
        return hashlib.blake2b(
            struct.pack("<I", signer) + message, key=self.secret, digest_size=16
        ).digest()

    def sign(self, signer: int, message: bytes, secret_key: bytes | None = None) -> bytes:
        if signer in self.keys and (secret_key is None or _key_id(secret_key) != self.keys[signer]):
            raise ForgeryAttempt(f"wrong key for party {signer}")
        self.signed.add((signer, message))
        return self._token(signer, message)

    def verify(self, signer: int, message: bytes, token: bytes | None = None) -> int:
        if (signer, message) not in self.signed:
            return 0
        if token is not None and token != self._token(signer, message):
            return 0
        return 1


def mine_probability(n: int, epsilon, kappa: int) -> Fraction:
    eps = Fraction(epsilon) if not isinstance(epsilon, float) else Fraction(repr(epsilon))
    return min(Fraction(1), Fraction(kappa + 1) / (eps * n))


@dataclass
class MineOracle:
    """Committee-election oracle: a recorded p-weighted coin per (party, bit).

    The coin for (party, bit) is read off a keyed hash of the pair, so the
    result does not depend on the order in which parties query.
    """

    p: Fraction
    key: bytes
    mined: dict[tuple[int, int], int] = field(default_factory=dict)

    def _coin(self, party: int, b: int) -> int:
        if self.p >= 1:
            return 1
        digest = hashlib.blake2b(struct.pack("<IB", party, b), key=self.key, digest_size=8).digest()
        u = int.from_bytes(digest, "little")
        # u / 2**64 < p, evaluated exactly
        return int(u * self.p.denominator < self.p.numerator * 2**64)

    def mine(self, party: int, b: int) -> int:
        k = (party, b)
        if k not in self.mined:
            self.mined[k] = self._coin(party, b)
        return self.mined[k]

    def verify(self, b: int, party: int) -> int:
        return int(self.mined.get((party, b), 0) == 1)


# Thin functional aliases matching the operation names.


def sign(registry: KeyRegistry, signer: int, message: bytes, secret_key: bytes | None = None) -> bytes:
    return registry.sign(signer, message, secret_key)


def verify(registry: KeyRegistry, signer: int, message: bytes, token: bytes | None = None) -> int:
    return registry.verify(signer, message, token)


def mine(oracle: MineOracle, party: int, b: int) -> int:
    return oracle.mine(party, b)


def verify_mine(oracle: MineOracle, b: int, party: int) -> int:
    return oracle.verify(b, party)


def elect_committee(oracle: MineOracle, n: int) -> set[int]:
    """Every party mines once on bit 0; the committee is everyone who succeeded."""
    return {i for i in range(1, n + 1) if oracle.mine(i, 0) == 1}
