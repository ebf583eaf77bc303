"""The random reveal process: hitting times of structure, engine and oracle."""

from __future__ import annotations

import csv
import io
import json
import statistics
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from typing import Iterable, Sequence

import numpy as np

from .engine import EngineParams, EngineState
from .errors import OracleCapExceeded
from .graph import DistanceGraph, RevealSchedule, random_schedule, undecidable_points
from .oracle import DEFAULT_CAP, hitting_time_exact
from .pointset import (
    PointSet,
    count_secure_pairs,
    gen_generic,
    gen_product_construction,
    gen_progression,
    is_secure,
)
from .rng import derive_seed


@dataclass(frozen=True)
class TrialRecord:
    """Hitting times of one trial, as 1-based reveal counts."""

    n: int
    seed: int
    tau_isolatedfree: int
    tau_struct: int
    tau_mindeg2: int
    tau_engine: int
    tau_oracle: int | None
    secure_pairs: int
    degree_one_at_struct: int

    def check(self) -> list[str]:
        """Violated ordering invariants, empty when consistent."""
        bad = []
        if not self.tau_isolatedfree <= self.tau_struct:
            bad.append("tau_isolatedfree > tau_struct")
        if not self.tau_struct <= self.tau_mindeg2:
            bad.append("tau_struct > tau_mindeg2")
        if self.tau_oracle is not None:
            if not self.tau_struct <= self.tau_oracle:
                bad.append("tau_struct > tau_oracle")
            if not self.tau_oracle <= self.tau_engine:
                bad.append("tau_oracle > tau_engine")
        return bad


FIELDS = [f.name for f in fields(TrialRecord)]


def run_trial(
    V: PointSet,
    seed: int,
    params: EngineParams | None = None,
    oracle: bool | None = None,
    cap: int = DEFAULT_CAP,
    schedule: RevealSchedule | None = None,
) -> TrialRecord:
    """Replay one random schedule and record every hitting time.

    ``oracle=None`` runs the oracle only when ``n <= cap``; ``True`` insists
    on it and raises :class:`OracleCapExceeded` beyond the cap.
    """
    n = V.n
    if n < 3:
        raise ValueError("trials need at least three points")
    if oracle and n > cap:
        raise OracleCapExceeded(f"oracle requested at n = {n} beyond cap {cap}")
    if schedule is None:
        schedule = random_schedule(n, seed)
    state = EngineState(n, params)
    dist = schedule.distances(V)
    iu, iv = schedule.u.tolist(), schedule.v.tolist()
    dlist = dist.tolist()

    deg = [0] * n
    first_nbr = [-1] * n
    isolated = n
    low = n  # labels with degree below two
    undecidable: set[int] = set()
    t_iso = t_struct = t_deg2 = t_engine = None
    deg_one_at_struct = 0

    for t in range(len(iu)):
        u, v, d = iu[t], iv[t], dlist[t]
        for a, b in ((u, v), (v, u)):
            deg[a] += 1
            if deg[a] == 1:
                isolated -= 1
                first_nbr[a] = b
                if not is_secure(a, b, V):
                    undecidable.add(a)
            elif deg[a] == 2:
                low -= 1
                undecidable.discard(a)
        step = t + 1
        if t_iso is None and isolated == 0:
            t_iso = step
        if t_struct is None and isolated == 0 and not undecidable:
            t_struct = step
            deg_one_at_struct = sum(1 for x in deg if x == 1)
        if t_deg2 is None and low == 0:
            t_deg2 = step
        if t_engine is None:
            state.online_update(u, v, d)
            if state.certified_full():
                t_engine = step
        if t_deg2 is not None and t_engine is not None:
            break

    t_oracle = None
    if (oracle is None and n <= cap) or oracle:
        t_oracle = hitting_time_exact(V, schedule, cap)
    return TrialRecord(
        n=n,
        seed=seed,
        tau_isolatedfree=t_iso,
        tau_struct=t_struct,
        tau_mindeg2=t_deg2,
        tau_engine=t_engine,
        tau_oracle=t_oracle,
        secure_pairs=count_secure_pairs(V),
        degree_one_at_struct=deg_one_at_struct,
    )


def degree_one_necessity_check(V: PointSet, G: DistanceGraph) -> bool:
    """True when some degree-one label is undecidable, which rules out reconstruction."""
    return bool(undecidable_points(G, V))


# -- Monte Carlo ---------------------------------------------------------------


SOURCES = ("generic", "progression", "explicit", "product")


@dataclass(frozen=True)
class TrialConfig:
    source: str = "generic"
    n: int = 10
    seed: int = 0
    trials: int = 1
    params: EngineParams = field(default_factory=EngineParams)
    oracle: bool | None = None
    cap: int = DEFAULT_CAP
    points: tuple[int, ...] | None = None
    product: tuple[int, int] | None = None
    workers: int = 1

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be at least 1")
        if self.source not in SOURCES:
            raise ValueError(f"source must be one of {SOURCES}")
        if self.source == "explicit" and not self.points:
            raise ValueError("explicit source needs points")
        if self.source == "product" and not self.product:
            raise ValueError("product source needs (k, l)")

    def point_set(self, index: int) -> PointSet:
        if self.source == "generic":
            return gen_generic(self.n, derive_seed(self.seed, "points", index))
        if self.source == "progression":
            return gen_progression(self.n)
        if self.source == "explicit":
            return PointSet(tuple(self.points))
        return gen_product_construction(*self.product)[0]

    def trial_seed(self, index: int) -> int:
        return derive_seed(self.seed, "trial", index)


def _one(cfg: TrialConfig, index: int) -> TrialRecord:
    return run_trial(cfg.point_set(index), cfg.trial_seed(index), cfg.params, cfg.oracle, cfg.cap)


def _one_packed(args):
    return _one(*args)


def summarize(records: Sequence[TrialRecord]) -> dict:
    """Means, medians and agreement rates over a record stream."""
    out: dict = {"trials": len(records)}
    for name in ("tau_isolatedfree", "tau_struct", "tau_mindeg2", "tau_engine", "tau_oracle"):
        vals = [getattr(r, name) for r in records if getattr(r, name) is not None]
        out[f"mean_{name}"] = statistics.fmean(vals) if vals else None
        out[f"median_{name}"] = statistics.median(vals) if vals else None
    out["engine_agreement"] = sum(r.tau_engine == r.tau_struct for r in records) / len(records)
    with_oracle = [r for r in records if r.tau_oracle is not None]
    out["oracle_trials"] = len(with_oracle)
    out["oracle_agreement"] = (
        sum(r.tau_oracle == r.tau_struct for r in with_oracle) / len(with_oracle) if with_oracle else None
    )
    out["soundness_violations"] = sum(bool(r.check()) for r in records)
    return out


def monte_carlo(cfg: TrialConfig) -> tuple[list[TrialRecord], dict]:
    """Run ``cfg.trials`` independent trials; records keep trial-index order."""
    jobs = [(cfg, i) for i in range(cfg.trials)]
    if cfg.workers > 1:
        with ProcessPoolExecutor(cfg.workers) as pool:
            records = list(pool.map(_one_packed, jobs))
    else:
        records = [_one(*job) for job in jobs]
    return records, summarize(records)


# -- output -----------------------------------------------------------------------


def records_to_csv(records: Iterable[TrialRecord]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(FIELDS)
    for r in records:
        writer.writerow(["" if getattr(r, f) is None else getattr(r, f) for f in FIELDS])
    return buf.getvalue()


def records_to_jsonl(records: Iterable[TrialRecord]) -> str:
    return "".join(json.dumps(asdict(r)) + "\n" for r in records)


def summary_to_json(summary: dict) -> str:
    return json.dumps(summary, indent=2, sort_keys=True)


def degree_one_count(G: DistanceGraph) -> int:
    return int(np.count_nonzero(G.degrees() == 1))
