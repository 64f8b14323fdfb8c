"""Per-party protocol state machines."""

from bcsim.protocols.base import Context, Party, Protocol, TypedMessage, chain_level, decode_message
from bcsim.protocols.dolev_strong import DolevStrongProtocol
from bcsim.protocols.flood import FloodParams, FloodProtocol, FloodState, flood_round, flood_run, flood_sample_neighbors
from bcsim.protocols.floodbc import FloodBCProtocol
from bcsim.protocols.strawman import StrawmanProtocol

__all__ = [
    "Context",
    "Party",
    "Protocol",
    "TypedMessage",
    "chain_level",
    "decode_message",
    "DolevStrongProtocol",
    "FloodParams",
    "FloodProtocol",
    "FloodState",
    "flood_round",
    "flood_run",
    "flood_sample_neighbors",
    "FloodBCProtocol",
    "StrawmanProtocol",
]
