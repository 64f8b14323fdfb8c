from fractions import Fraction

import numpy as np
import pytest

from bcsim import (
    AdversaryViolation,
    BudgetExceeded,
    ConfigInvalid,
    ExecutionConfig,
    RoundCapExceeded,
    run_execution,
    verify_broadcast_properties,
)
from bcsim.adversaries import Adversary, CrashAdversary
from bcsim.core import PropertyVerdict, derive_bytes, derive_rng
from bcsim.metrics import audit_execution
from bcsim.registry import build_protocol


class Scripted(Adversary):
    """Test adversary driven by callbacks."""

    def __init__(self, config, static=(), budget=0, on_round=None):
        super().__init__(config)
        self._static, self._budget, self._hook = list(static), budget, on_round
        self.seen = []

    def budget(self, config):
        return self._budget

    def choose_static(self, config, rng):
        return self._static

    def on_round(self, view):
        self.seen.append((view.round, list(view.honest_envelopes)))
        return self._hook(view) if self._hook else []


def cfg(**kw):
    kw.setdefault("n", 8)
    return ExecutionConfig(**kw)


def test_all_honest_floodbc_n4():
    r = run_execution(cfg(n=4, protocol="floodbc", sender_input=1))
    assert r.outputs == {1: 1, 2: 1, 3: 1, 4: 1}
    assert r.verdict == PropertyVerdict(True, True, True)


def test_same_config_is_byte_identical():
    c = cfg(n=12, protocol="floodbc", adversary="equivocate", seed=99)
    assert run_execution(c).to_bytes() == run_execution(c).to_bytes()


def test_different_seed_changes_transcript():
    a = run_execution(cfg(n=32, protocol="strawman", seed=1))
    b = run_execution(cfg(n=32, protocol="strawman", seed=2))
    assert a.digest() != b.digest()


def test_crashed_sender_gives_default():
    r = run_execution(cfg(n=8, protocol="floodbc", adversary="crash", adversary_params={"target": [1]}))
    assert set(r.outputs.values()) == {0}
    assert r.verdict.validity_ok is None


def test_verdict_examples():
    r = run_execution(cfg(n=4, protocol="strawman"))
    r.outputs = {1: 1, 2: 1, 3: 1, 4: 1}
    assert verify_broadcast_properties(r) == PropertyVerdict(True, True, True)
    r.outputs = {1: 1, 2: 0, 3: 0, 4: 0}
    assert verify_broadcast_properties(r) == PropertyVerdict(True, False, False)
    r.outputs = {1: 0, 2: 0, 3: 0, 4: 0}
    assert verify_broadcast_properties(r) == PropertyVerdict(True, True, False)
    r.corruption_timeline = [(0, 1, "static")]
    r.outputs = {2: 0, 3: 1, 4: 1}
    assert verify_broadcast_properties(r) == PropertyVerdict(True, False, None)


@pytest.mark.parametrize(
    "kw",
    [
        dict(n=1),
        dict(kappa=0),
        dict(epsilon=0),
        dict(epsilon=1.5),
        dict(sender_input=2),
        dict(seed=-1),
        dict(protocol="nope"),
        dict(adversary="nope"),
        dict(adversary="static-split", n=8),
        dict(adversary="adaptive-locality", n=9, adversary_params={"k": 1}),
    ],
)
def test_invalid_configs(kw):
    with pytest.raises(ConfigInvalid):
        cfg(**kw)


def test_epsilon_float_kept_exact():
    assert cfg(epsilon=0.1).epsilon == Fraction(1, 10)
    assert cfg(n=1200, epsilon=0.1).honest_count == 120


def test_round_cap():
    with pytest.raises(RoundCapExceeded):
        run_execution(cfg(protocol="floodbc", round_cap=5))


def test_budget_exceeded():
    c = cfg(protocol="strawman")
    adv = Scripted(c, static=[2, 3], budget=1)
    with pytest.raises(BudgetExceeded):
        run_execution(c, adversary=adv)


def test_cannot_spoof_honest_party():
    c = cfg(protocol="strawman")
    adv = Scripted(c, static=[2], budget=1, on_round=lambda v: [(3, 4, b"x")])
    with pytest.raises(AdversaryViolation):
        run_execution(c, adversary=adv)


def test_adaptive_corruption_cannot_speak_same_round():
    c = cfg(protocol="strawman")

    def hook(view):
        if view.round == 1:
            view.corrupt(1)
            return [(1, 2, b"late")]
        return []

    with pytest.raises(AdversaryViolation):
        run_execution(c, adversary=Scripted(c, budget=1, on_round=hook))


def test_atomic_multisend_and_grant():
    c = cfg(n=16, protocol="dolev-strong")
    grants = []

    def hook(view):
        if view.round == 1:
            grants.append(view.corrupt(1))
        return []

    r = run_execution(c, adversary=Scripted(c, budget=1, on_round=hook))
    sent = [e for e in r.transcript if e.src == 1 and e.round == 1]
    assert len(sent) == 15
    assert grants[0].state is not None and grants[0].setup
    assert 1 not in r.outputs
    assert audit_execution(r).ok


def test_rushing_adversary_sees_all_honest_envelopes_first():
    c = cfg(n=16, protocol="dolev-strong")
    adv = Scripted(c, static=[5], budget=1)
    r = run_execution(c, adversary=adv)
    for rnd, envs in adv.seen:
        honest = [e for e in r.transcript if e.round == rnd and e.src != 5]
        assert sorted(e.as_tuple() for e in envs) == sorted(e.as_tuple() for e in honest)
    tags = [t for rnd, t in r.event_log if rnd == 1]
    assert tags.index("honest-emitted") < tags.index("adversary-emitted") < tags.index("delivered")


def test_private_channels_hide_honest_traffic():
    c = cfg(n=16, protocol="dolev-strong", public_channels=False)
    adv = Scripted(c, static=[5], budget=1)
    run_execution(c, adversary=adv)
    assert all(e.dst == 5 for _, envs in adv.seen for e in envs)


def test_static_choice_precedes_setup():
    c = cfg(protocol="strawman", adversary="crash", adversary_params={"target": [3]})
    seen = {}

    class Probe(CrashAdversary):
        def choose_static(self, config, rng):
            seen["setup_known"] = bool(getattr(self, "protocol", None))
            return super().choose_static(config, rng)

    run_execution(c, adversary=Probe(c))
    assert seen["setup_known"] is False


def test_setup_independent_of_corruption():
    c = cfg(n=10, protocol="strawman")
    a = build_protocol(c).sample_setup(derive_rng(c.seed, 1))
    b = build_protocol(c).sample_setup(derive_rng(c.seed, 1))
    assert a == b and len(a[1]) == 32


def test_streams_are_independent():
    assert derive_bytes(5, 1) != derive_bytes(5, 2)
    assert not np.array_equal(derive_rng(5, 1).random(4), derive_rng(5, 3).random(4))


def test_transcript_delivery_order():
    r = run_execution(cfg(n=16, protocol="floodbc", adversary="equivocate"))
    for rnd in {e.round for e in r.transcript}:
        keys = [(e.dst, e.src) for e in r.transcript if e.round == rnd]
        assert keys == sorted(keys)
    assert all(e.src != e.dst for e in r.transcript)


def test_flood_result_serialises():
    c = cfg(n=10, protocol="flood", seed=4)
    assert run_execution(c).digest() == run_execution(c).digest()
