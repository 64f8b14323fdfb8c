"""
Forcing high locality with adaptive corruption
==============================================

The adversary picks a side b, runs the sender on input b toward one half of
the parties and on input 1-b toward the target i_star, and corrupts every
party that hears from i_star. Unless i_star talks to more than k parties,
its view does not depend on b at all.
"""

from fractions import Fraction

from bcsim import ExecutionConfig, run_execution
from bcsim.metrics import party_locality

base = dict(n=64, epsilon=Fraction(1, 4), protocol="strawman", protocol_params={"delta": 8, "cap": 8},
            adversary="adaptive-locality")

broken = 0
for seed in range(100):
    r = run_execution(ExecutionConfig(**base, adversary_params={"k": 8}, seed=seed))
    broken += not r.verdict.agreement_ok
print(f"locality-capped strawman: agreement broken in {broken}/100 runs")

# the same seed with the side flipped: i_star cannot tell the difference
views = []
for b in (0, 1):
    r = run_execution(ExecutionConfig(**base, adversary_params={"k": 8, "b": b}, seed=7))
    i = r.info["i_star"]
    views.append([(e.round, e.src, e.payload) for e in r.transcript if e.dst == i])
    print(f"b={b}: i_star locality {party_locality(r, i)}, output {r.outputs[i]}")
print("identical views:", views[0] == views[1])

# Flood-BC answers by talking to many parties
r = run_execution(ExecutionConfig(n=128, epsilon=Fraction(1, 4), protocol="floodbc",
                                  protocol_params={"resample_neighbors": True},
                                  adversary="adaptive-locality", adversary_params={"k": 32}, seed=0))
print("Flood-BC: i_star locality", party_locality(r, r.info["i_star"]), "attack failed:", r.info["attack_failed"])
