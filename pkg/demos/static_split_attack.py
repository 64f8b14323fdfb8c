"""
Splitting a low-message protocol
================================

With only eps*n = 11 honest parties out of 121 and fewer than n/(12 eps)
messages, the adversary can run two virtual executions at once: one where
the sender said 1 (seen by the honest set S) and one where it said 0 (seen
by the honest party i_star). If S and i_star never exchange a message,
neither can tell it is being fooled.
"""

from fractions import Fraction

from bcsim import ExecutionConfig, compute_bounds, run_execution
from bcsim.metrics import detect_disconnect

n, eps = 121, Fraction(1, 11)
print("message budget n*psi =", float(compute_bounds(n, eps, 8).mc_threshold))

disconnects = 0
for seed in range(200):
    cfg = ExecutionConfig(n=n, epsilon=eps, protocol="strawman", protocol_params={"delta": 4},
                          adversary="static-split", seed=seed)
    r = run_execution(cfg)
    S, i_star = r.info["S"], r.info["i_star"]
    disconnects += detect_disconnect(r, S, i_star)
print(f"S and i_star never talked in {disconnects}/200 runs")

# the view of S matches an honest run with the B half crashed
cfg = ExecutionConfig(n=n, epsilon=eps, protocol="strawman", protocol_params={"delta": 4},
                      adversary="static-split", seed=3)
attack = run_execution(cfg)
crash = run_execution(cfg.replace(adversary="crash", adversary_params={"target": attack.info["B"]}, sender_input=1))
S = attack.info["S"]
same = all(
    [e for e in attack.transcript if e.dst == p] == [e for e in crash.transcript if e.dst == p] for p in S
)
print("S sees exactly what it would see with B crashed:", same)
print("outputs under attack:", {p: attack.outputs[p] for p in S + [attack.info["i_star"]]})
