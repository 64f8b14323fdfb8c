"""Transcript accounting, locality, attack events and engine audits."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field

from bcsim.bounds import BoundsReport, compute_bounds, format_bounds  # noqa: F401  (re-exported)


@dataclass
class TranscriptMetrics:
    honest_msg_count: int
    total_msg_count: int
    total_bits: int
    out_edges: dict[int, set[int]] = field(default_factory=dict)
    per_round_counts: list[int] = field(default_factory=list)
    flood_failures: int = 0

    def to_dict(self) -> dict:
        return {
            "honest_msg_count": self.honest_msg_count,
            "total_msg_count": self.total_msg_count,
            "total_bits": self.total_bits,
            "out_edges": {p: sorted(d) for p, d in self.out_edges.items()},
            "per_round_counts": list(self.per_round_counts),
            "flood_failures": self.flood_failures,
        }


def honest_at_emission(env, corrupted_at: dict[int, int]) -> bool:
    """A party corrupted in round r still sent its round-r envelopes honestly."""
    when = corrupted_at.get(env.src)
    return when is None or when >= env.round


def compute_metrics(transcript, timeline, n: int, flood_failures: int = 0) -> TranscriptMetrics:
    corrupted_at = {pid: rnd for rnd, pid, _ in timeline}
    honest = 0
    bits = 0
    out_edges: dict[int, set[int]] = {}
    per_round: Counter = Counter()
    for env in transcript:
        bits += env.bit_size
        per_round[env.round] += 1
        if honest_at_emission(env, corrupted_at):
            honest += 1
            out_edges.setdefault(env.src, set()).add(env.dst)
    last = max(per_round, default=0)
    return TranscriptMetrics(
        honest_msg_count=honest,
        total_msg_count=len(transcript),
        total_bits=bits,
        out_edges=out_edges,
        per_round_counts=[per_round.get(r, 0) for r in range(1, last + 1)],
        flood_failures=flood_failures,
    )


def measure_locality(result, exclude=()) -> tuple[dict[int, int], int]:
    """Distinct destinations per honest sender; max over end-honest parties not in ``exclude``."""
    per_party = {p: len(d) for p, d in result.metrics.out_edges.items()}
    skip = set(exclude)
    end_honest = [p for p in result.end_honest() if p not in skip]
    return per_party, max((per_party.get(p, 0) for p in end_honest), default=0)


def party_locality(result, party: int) -> int:
    return len(result.metrics.out_edges.get(party, ()))


def detect_disconnect(result, S, i_star) -> bool:
    """True when no envelope crossed between S and i_star in either direction."""
    group = set(S)
    for env in result.transcript:
        if (env.src in group and env.dst == i_star) or (env.src == i_star and env.dst in group):
            return False
    return True


def check_edge_count_bound(result, A, B) -> tuple[int, bool]:
    a, b = set(A), set(B)
    corrupted_at = result.corrupted_at()
    edges = {
        (e.src, e.dst)
        for e in result.transcript
        if honest_at_emission(e, corrupted_at)
        and ((e.src in a and e.dst in b) or (e.src in b and e.dst in a))
    }
    return len(edges), len(edges) <= result.metrics.honest_msg_count


@dataclass
class AuditReport:
    delivery_violations: int = 0
    multisend_violations: int = 0
    rushing_violations: int = 0
    budget_violations: int = 0
    closure_violations: int = 0

    @property
    def ok(self) -> bool:
        return not any(vars(self).values())

    def to_dict(self):
        return dict(vars(self))


def audit_execution(result) -> AuditReport:
    """Re-check engine invariants from the recorded result."""
    rep = AuditReport()
    corrupted_at = result.corrupted_at()
    sent = Counter()
    for env in result.transcript:
        if honest_at_emission(env, corrupted_at):
            sent[(env.round, env.src)] += 1
    # every honest emission delivered exactly once, in its round
    for rnd, counts in result.emission_log.items():
        for src, k in counts.items():
            if sent.get((rnd, src), 0) != k:
                rep.delivery_violations += 1
    for (rnd, src), k in sent.items():
        if result.emission_log.get(rnd, {}).get(src) != k:
            rep.delivery_violations += 1
    for rnd, pid, reason in result.corruption_timeline:
        if rnd >= 1 and sent.get((rnd, pid), 0) != result.emission_log.get(rnd, {}).get(pid, 0):
            rep.multisend_violations += 1
    stage: dict[int, str] = {}
    order = {"honest-emitted": 0, "adversary-emitted": 1, "delivered": 2}
    for rnd, tag in result.event_log:
        if tag not in order:
            continue
        prev = stage.get(rnd)
        if prev is not None and order[tag] <= order[prev]:
            rep.rushing_violations += 1
        if prev is None and tag != "honest-emitted":
            rep.rushing_violations += 1
        stage[rnd] = tag
    budget = result.info.get("budget")
    if budget is not None and len(result.corruption_timeline) > budget:
        rep.budget_violations += 1
    corrupt = sum(1 for e in result.transcript if not honest_at_emission(e, corrupted_at))
    m = result.metrics
    if m.honest_msg_count + corrupt != m.total_msg_count or m.total_msg_count != len(result.transcript):
        rep.closure_violations += 1
    if m.total_bits != sum(e.bit_size for e in result.transcript):
        rep.closure_violations += 1
    return rep
