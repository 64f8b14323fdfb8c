"""
Flood over a sparse random graph
================================

Half of 256 parties crash. The sender holds a typed message and every
honest party forwards the first typed message it sees to its random
out-neighbours, once. We check each run against a breadth-first search
over the honest part of the graph.
"""

from collections import deque

from bcsim import ExecutionConfig, compute_bounds, run_execution

n, eps, kappa = 256, 0.5, 12
bounds = compute_bounds(n, eps, kappa)
print(f"neighbour probability {bounds.p_flood:.4f}, {bounds.rho} rounds")

# a few executions, each with a fresh crash set and fresh neighbourhoods
for seed in range(5):
    cfg = ExecutionConfig(n=n, epsilon=eps, kappa=kappa, protocol="flood", adversary="crash-random", seed=seed)
    result = run_execution(cfg)

    honest = set(result.outputs)
    seen, queue = {1}, deque([(1, 0)])
    while queue:
        u, d = queue.popleft()
        for v in result.info["neighbors"].get(u, ()):
            if v in honest and v not in seen and d < bounds.rho:
                seen.add(v)
                queue.append((v, d + 1))

    reached = sum(o is not None for o in result.outputs.values())
    print(f"seed {seed}: {reached}/{len(honest)} honest parties got the message, "
          f"BFS predicts {len(seen)}, {result.metrics.honest_msg_count} messages")
