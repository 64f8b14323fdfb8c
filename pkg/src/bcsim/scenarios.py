"""Scenario files, trial batching and result files.

A scenario is a flat TOML table. ``n``, ``kappa``, ``epsilon``,
``sender_input`` and ``protocol`` may be lists; their cartesian product gives
the sweep points. Every (point, trial) pair gets its own seed derived from the
scenario seed.
"""

from __future__ import annotations

import csv
import io
import itertools
import json
import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources
from pathlib import Path
from typing import Any

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from bcsim.core import ConfigInvalid, ExecutionConfig, SimulationError, run_execution
from bcsim.metrics import audit_execution, detect_disconnect, measure_locality, party_locality

log = logging.getLogger(__name__)

WORKERS_ENV = "BCSIM_WORKERS"
TRIAL_STREAM = 5

CSV_COLUMNS = [
    "scenario", "n", "kappa", "epsilon", "protocol", "adversary", "trial", "seed",
    "termination_round", "agreement_ok", "validity_ok", "honest_msg_count",
    "total_msg_count", "total_bits", "max_honest_locality", "disconnect_event",
    "locality_istar", "corruptions_used", "error",
]

NUMERIC = ["termination_round", "honest_msg_count", "total_msg_count", "total_bits",
           "max_honest_locality", "locality_istar", "corruptions_used"]

SWEEP_KEYS = ("protocol", "n", "kappa", "epsilon", "sender_input")


def preset_names() -> list[str]:
    files = resources.files("bcsim") / "presets"
    return sorted(p.name[: -len(".toml")] for p in files.iterdir() if p.name.endswith(".toml"))


def _parse_epsilon(value) -> Fraction:
    if isinstance(value, str):
        return Fraction(value.strip())
    if isinstance(value, float):
        return Fraction(repr(value))
    return Fraction(value)


def _as_list(value) -> list:
    return list(value) if isinstance(value, (list, tuple)) else [value]


@dataclass
class Scenario:
    name: str
    protocol: list[str]
    adversary: str = "none"
    n: list[int] = field(default_factory=lambda: [16])
    kappa: list[int] = field(default_factory=lambda: [8])
    epsilon: list[Fraction] = field(default_factory=lambda: [Fraction(1, 2)])
    sender_input: list[int] = field(default_factory=lambda: [1])
    trials: int = 1
    seed: int = 0
    protocol_params: dict = field(default_factory=dict)
    adversary_params: dict = field(default_factory=dict)

    @classmethod
    def from_dict(cls, data: dict) -> "Scenario":
        known = {"name", "protocol", "adversary", "n", "kappa", "epsilon", "sender_input",
                 "trials", "seed", "protocol_params", "adversary_params"}
        extra = set(data) - known
        if extra:
            raise ConfigInvalid(f"unknown scenario keys: {sorted(extra)}")
        if "name" not in data or "protocol" not in data:
            raise ConfigInvalid("a scenario needs at least 'name' and 'protocol'")
        sc = cls(
            name=str(data["name"]),
            protocol=[str(p) for p in _as_list(data["protocol"])],
            adversary=str(data.get("adversary", "none")),
            n=[int(x) for x in _as_list(data.get("n", 16))],
            kappa=[int(x) for x in _as_list(data.get("kappa", 8))],
            epsilon=[_parse_epsilon(x) for x in _as_list(data.get("epsilon", 0.5))],
            sender_input=[int(x) for x in _as_list(data.get("sender_input", 1))],
            trials=int(data.get("trials", 1)),
            seed=int(data.get("seed", 0)),
            protocol_params=dict(data.get("protocol_params", {})),
            adversary_params=dict(data.get("adversary_params", {})),
        )
        if sc.trials < 1:
            raise ConfigInvalid("trials must be positive")
        return sc

    @classmethod
    def load(cls, name_or_path: str) -> "Scenario":
        path = Path(name_or_path)
        if path.suffix == ".toml" or path.exists():
            text = path.read_text()
        elif name_or_path in preset_names():
            text = (resources.files("bcsim") / "presets" / f"{name_or_path}.toml").read_text()
        else:
            raise ConfigInvalid(f"no preset or file named {name_or_path!r}; presets: {preset_names()}")
        try:
            return cls.from_dict(tomllib.loads(text))
        except tomllib.TOMLDecodeError as exc:
            raise ConfigInvalid(f"cannot parse {name_or_path}: {exc}") from exc

    def override(self, n=None, kappa=None, epsilon=None, trials=None, seed=None) -> "Scenario":
        if n:
            self.n = [int(x) for x in n]
        if kappa is not None:
            self.kappa = [int(kappa)]
        if epsilon is not None:
            self.epsilon = [_parse_epsilon(epsilon)]
        if trials is not None:
            self.trials = int(trials)
        if seed is not None:
            self.seed = int(seed)
        return self

    def points(self) -> list[dict]:
        grid = itertools.product(self.protocol, self.n, self.kappa, self.epsilon, self.sender_input)
        return [dict(zip(SWEEP_KEYS, values)) for values in grid]

    def configs(self) -> list[tuple[int, int, ExecutionConfig]]:
        """All (point index, trial, config); raises ConfigInvalid before anything runs."""
        out = []
        for idx, point in enumerate(self.points()):
            for trial in range(self.trials):
                cfg = ExecutionConfig(
                    n=point["n"],
                    kappa=point["kappa"],
                    epsilon=point["epsilon"],
                    sender_input=point["sender_input"],
                    protocol=point["protocol"],
                    adversary=self.adversary,
                    seed=trial_seed(self.seed, idx, trial),
                    protocol_params=self.protocol_params,
                    adversary_params=self.adversary_params,
                )
                out.append((idx, trial, cfg))
        return out


def trial_seed(root: int, point: int, trial: int) -> int:
    state = np.random.SeedSequence(root, spawn_key=(TRIAL_STREAM, point, trial)).generate_state(1, np.uint64)
    return int(state[0])


@dataclass
class TrialOutcome:
    point: int
    trial: int
    row: dict
    extras: dict


def _fmt_bool(v):
    return "" if v is None else ("true" if v else "false")


def trial_row(scenario_name: str, trial: int, cfg: ExecutionConfig, result=None, error: str = "") -> tuple[dict, dict]:
    row = {c: "" for c in CSV_COLUMNS}
    row.update(
        scenario=scenario_name, n=cfg.n, kappa=cfg.kappa, epsilon=float(cfg.epsilon),
        protocol=cfg.protocol, adversary=cfg.adversary, trial=trial, seed=cfg.seed, error=error,
    )
    extras: dict[str, Any] = {}
    if result is None:
        return row, extras
    info, m = result.info, result.metrics
    row.update(
        termination_round=result.termination_round,
        agreement_ok=result.verdict.agreement_ok,
        validity_ok=result.verdict.validity_ok,
        honest_msg_count=m.honest_msg_count,
        total_msg_count=m.total_msg_count,
        total_bits=m.total_bits,
        max_honest_locality=measure_locality(result, exclude=[1])[1],
        corruptions_used=len(result.corruption_timeline),
    )
    i_star = info.get("i_star")
    if i_star is not None:
        row["locality_istar"] = party_locality(result, i_star)
    if "S" in info:
        S = info["S"]
        row["disconnect_event"] = detect_disconnect(result, S, i_star)
        extras["split_disagreement"] = result.outputs.get(i_star) == 0 and result.outputs.get(min(S)) == 1
    if "propagation_failure" in info:
        extras["success"] = not info["propagation_failure"]
    if "k" in info and i_star is not None:
        loc = row["locality_istar"]
        # the sender is corrupted here, so only a defined validity failure counts
        broken = not result.verdict.agreement_ok or result.verdict.validity_ok is False
        extras["dichotomy_ok"] = loc > info["k"] or broken
        taken = set(info.get("receive_corrupted", ()))
        side = set(info["S_%d" % info["b"]])
        hit = {e.dst for e in result.transcript if e.src == i_star and e.dst in side}
        extras["recipients_corrupted"] = loc > info["k"] or hit <= taken
    extras["audit_ok"] = audit_execution(result).ok
    extras["flood_failures"] = m.flood_failures
    return row, extras


def _run_one(args) -> TrialOutcome:
    name, idx, trial, cfg = args
    try:
        result = run_execution(cfg)
    except SimulationError as exc:
        log.warning("trial %d of point %d failed: %s", trial, idx, exc)
        row, extras = trial_row(name, trial, cfg, error=f"{type(exc).__name__}: {exc}")
        return TrialOutcome(idx, trial, row, extras)
    row, extras = trial_row(name, trial, cfg, result)
    return TrialOutcome(idx, trial, row, extras)


def default_workers() -> int:
    try:
        return max(1, int(os.environ.get(WORKERS_ENV, "1")))
    except ValueError:
        return 1


def run_trials(scenario: Scenario, workers: int | None = None) -> list[TrialOutcome]:
    jobs = [(scenario.name, idx, trial, cfg) for idx, trial, cfg in scenario.configs()]
    workers = workers or default_workers()
    log.info("scenario %s: %d trials on %d worker(s)", scenario.name, len(jobs), workers)
    if workers == 1:
        outcomes = [_run_one(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(_run_one, jobs, chunksize=max(1, len(jobs) // (4 * workers))))
    outcomes.sort(key=lambda o: (o.point, o.trial))
    return outcomes


def csv_text(outcomes: list[TrialOutcome]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
    writer.writeheader()
    for o in outcomes:
        writer.writerow({k: _fmt_bool(v) if isinstance(v, bool) or v is None else v for k, v in o.row.items()})
    return buf.getvalue()


def describe(values: list[float]) -> dict:
    arr = np.asarray(values, dtype=float)
    if arr.size == 0:
        return {"mean": None, "stderr": None, "min": None, "max": None}
    stderr = float(arr.std(ddof=1) / math.sqrt(arr.size)) if arr.size > 1 else 0.0
    return {"mean": float(arr.mean()), "stderr": stderr, "min": float(arr.min()), "max": float(arr.max())}


def rate(flags: list[bool]) -> dict:
    """Frequency with a normal-approximation 95% interval."""
    k, total = sum(bool(f) for f in flags), len(flags)
    if total == 0:
        return {"rate": None, "ci_low": None, "ci_high": None, "count": 0, "trials": 0}
    p = k / total
    half = 1.96 * math.sqrt(p * (1 - p) / total)
    return {"rate": p, "ci_low": max(0.0, p - half), "ci_high": min(1.0, p + half), "count": k, "trials": total}


def _aggregate(outcomes: list[TrialOutcome]) -> dict:
    done = [o for o in outcomes if not o.row["error"]]
    stats = {}
    for col in NUMERIC:
        vals = [o.row[col] for o in done if o.row[col] != ""]
        if vals:
            stats[col] = describe(vals)
    rates = {
        "agreement_rate": rate([o.row["agreement_ok"] for o in done]),
        "audit_pass_rate": rate([o.extras.get("audit_ok", False) for o in done]),
    }
    valid = [o.row["validity_ok"] for o in done if o.row["validity_ok"] is not None]
    if valid:
        rates["validity_rate"] = rate(valid)
    rates["disagreement_rate"] = rate([not o.row["agreement_ok"] for o in done])
    if any("success" in o.extras for o in done):
        rates["success_rate"] = rate([o.extras.get("success", False) for o in done])
    disc = [o for o in done if o.row["disconnect_event"] != ""]
    if disc:
        rates["disconnect_rate"] = rate([o.row["disconnect_event"] for o in disc])
        rates["split_disagreement_rate"] = rate([o.extras["split_disagreement"] for o in disc])
        hit = [o for o in disc if o.row["disconnect_event"]]
        rates["split_disagreement_given_disconnect"] = rate([o.extras["split_disagreement"] for o in hit])
    if any("dichotomy_ok" in o.extras for o in done):
        rates["dichotomy_rate"] = rate([o.extras["dichotomy_ok"] for o in done])
    return {"trials": len(outcomes), "errors": len(outcomes) - len(done), "metrics": stats, "rates": rates}


def summarize(scenario: Scenario, outcomes: list[TrialOutcome]) -> dict:
    points = []
    for idx, point in enumerate(scenario.points()):
        entry = {k: (str(v) if isinstance(v, Fraction) else v) for k, v in point.items()}
        entry.update(_aggregate([o for o in outcomes if o.point == idx]))
        points.append(entry)
    return {
        "scenario": scenario.name,
        "adversary": scenario.adversary,
        "seed": scenario.seed,
        "trials_per_point": scenario.trials,
        "overall": _aggregate(outcomes),
        "points": points,
    }


def run_scenario(scenario: Scenario, out_dir: str | Path, workers: int | None = None) -> tuple[Path, Path, dict]:
    """Run every trial and write ``<name>.csv`` and ``<name>.json`` into ``out_dir``."""
    outcomes = run_trials(scenario, workers)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    csv_path = out / f"{scenario.name}.csv"
    json_path = out / f"{scenario.name}.json"
    csv_path.write_text(csv_text(outcomes))
    summary = summarize(scenario, outcomes)
    json_path.write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    return csv_path, json_path, summary
