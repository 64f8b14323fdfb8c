"""Name lookup for protocols and adversaries."""

from __future__ import annotations

from bcsim.core import ConfigInvalid


def _protocols():
    from bcsim.protocols import DolevStrongProtocol, FloodBCProtocol, FloodProtocol, StrawmanProtocol

    return {
        "flood": FloodProtocol,
        "floodbc": FloodBCProtocol,
        "dolev-strong": DolevStrongProtocol,
        "strawman": StrawmanProtocol,
    }


def _adversaries():
    from bcsim import adversaries as a

    return {
        "none": a.PassiveAdversary,
        "crash": a.CrashAdversary,
        "crash-random": a.RandomCrashAdversary,
        "static-split": a.StaticSplitAdversary,
        "adaptive-locality": a.AdaptiveLocalityAdversary,
        "equivocate": a.EquivocatingSender,
    }


def protocol_names() -> list[str]:
    return sorted(_protocols())


def adversary_names() -> list[str]:
    return sorted(_adversaries())


def protocol_class(name: str):
    try:
        return _protocols()[name]
    except KeyError:
        raise ConfigInvalid(f"unknown protocol {name!r}; choose from {protocol_names()}") from None


def adversary_class(name: str):
    try:
        return _adversaries()[name]
    except KeyError:
        raise ConfigInvalid(f"unknown adversary {name!r}; choose from {adversary_names()}") from None


def build_protocol(config):
    return protocol_class(config.protocol)(config)


def build_adversary(config):
    return adversary_class(config.adversary)(config)
