"""Threshold sweeps over the reveal probability, the short-cycle estimator, SVG output."""

from __future__ import annotations

import csv
import io
import math
import statistics
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np
from scipy.stats import binom

from .engine import EngineParams, cycle_sign_solutions, reconstruct
from .graph import (
    DistanceGraph,
    cycle_cap,
    num_pairs,
    pair_from_index,
    random_schedule,
    structural_condition,
)
from .pointset import PointSet, point_set_from_source
from .process import run_trial
from .rng import derive_rng, derive_seed

SCHEMA_VERSION = 1
CSV_COLUMNS = [
    "n",
    "p",
    "c",
    "trials",
    "frac_full",
    "mean_frac_certified",
    "median_frac_certified",
    "frac_struct_fail",
    "mean_tau_struct",
    "mean_tau_engine",
    "agreement_rate",
    "seconds",
]
MODES = ("absolute", "linear", "sharp")


def p_from_grid(n: int, value: float, mode: str) -> float:
    """Edge probability for one grid value.

    ``absolute`` uses the value itself, ``linear`` means ``value / n`` and
    ``sharp`` means ``(ln n + ln ln n + value) / n``. Results are clipped to
    ``[0, 1]``.
    """
    if mode == "absolute":
        p = value
    elif mode == "linear":
        p = value / n
    elif mode == "sharp":
        p = (math.log(n) + math.log(math.log(n)) + value) / n
    else:
        raise ValueError(f"mode must be one of {MODES}")
    return min(1.0, max(0.0, p))


@dataclass(frozen=True)
class SweepConfig:
    ns: tuple[int, ...]
    grid: tuple[float, ...]
    mode: str = "sharp"
    trials: int = 10
    source: str = "generic"
    params: EngineParams = field(default_factory=EngineParams)
    seed: int = 0
    taus: bool = False
    timing: bool = False

    def __post_init__(self):
        if not self.ns or not self.grid:
            raise ValueError("n list and grid must be non-empty")
        if self.trials < 1:
            raise ValueError("trials must be at least 1")
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")
        if any(n < 3 for n in self.ns):
            raise ValueError("every n must be at least 3")


@dataclass(frozen=True)
class SweepRow:
    n: int
    p: float
    c: float | None
    trials: int
    frac_full: float
    mean_frac_certified: float
    median_frac_certified: float
    frac_struct_fail: float
    mean_tau_struct: float | None = None
    mean_tau_engine: float | None = None
    agreement_rate: float | None = None
    seconds: float | None = None

    def cells(self) -> list[str]:
        out = []
        for name in CSV_COLUMNS:
            x = getattr(self, name)
            if x is None:
                out.append("")
            elif isinstance(x, float):
                out.append(repr(round(x, 10)))
            else:
                out.append(str(x))
        return out


def _trial_inputs(cfg: SweepConfig, n: int, i: int, kmax: int):
    seed = derive_seed(cfg.seed, f"sweep/{n}", i)
    V = point_set_from_source(cfg.source, n, derive_seed(seed, "points"))
    if cfg.taus:
        schedule = random_schedule(n, seed)
        u, v = schedule.u, schedule.v
    else:
        schedule = None
        idx = derive_rng(seed, "coupling").choice(num_pairs(n), size=kmax, replace=False)
        u, v = pair_from_index(n, idx)
    uniform = float(derive_rng(seed, "count").random())
    return seed, V, schedule, u, v, uniform


def _edge_count(uniform: float, M: int, p: float, available: int) -> int:
    if p <= 0:
        return 0
    if p >= 1:
        return min(M, available)
    return min(available, max(0, int(binom.ppf(uniform, M, p))))


def sweep(cfg: SweepConfig) -> list[SweepRow]:
    """One row per ``(n, grid value)``, in grid order.

    For a fixed ``n`` and trial index, every grid point sees the same point
    set and the same random reveal order, and takes its first ``K`` pairs
    with ``K ~ Binomial(C(n, 2), p)`` drawn through a shared uniform, so the
    graphs grow monotonically along the grid.
    """
    rows = []
    for n in cfg.ns:
        M = num_pairs(n)
        ps = [p_from_grid(n, c, cfg.mode) for c in cfg.grid]
        # enough pairs for the largest count any trial can draw
        kmax = int(binom.ppf(1.0 - 1e-12, M, max(ps))) if max(ps) < 1 else M
        kmax = min(M, kmax)
        per_point = [[] for _ in ps]
        tau_rows = []
        elapsed = [0.0] * len(ps)
        for i in range(cfg.trials):
            seed, V, schedule, u, v, uniform = _trial_inputs(cfg, n, i, kmax)
            x = V.as_array()
            d = np.abs(x[u] - x[v])
            if cfg.taus:
                tau_rows.append(run_trial(V, seed, cfg.params, oracle=False, schedule=schedule))
            for j, p in enumerate(ps):
                start = time.perf_counter()
                k = _edge_count(uniform, M, p, len(u))
                G = DistanceGraph.from_arrays(n, u[:k], v[:k], d[:k])
                report = reconstruct(G, cfg.params)
                per_point[j].append((report.full, report.certified_fraction, not structural_condition(G, V)))
                elapsed[j] += time.perf_counter() - start
        for j, (c, p) in enumerate(zip(cfg.grid, ps)):
            stats = per_point[j]
            fracs = [s[1] for s in stats]
            row = SweepRow(
                n=n,
                p=p,
                c=None if cfg.mode == "absolute" else float(c),
                trials=cfg.trials,
                frac_full=sum(s[0] for s in stats) / len(stats),
                mean_frac_certified=statistics.fmean(fracs),
                median_frac_certified=statistics.median(fracs),
                frac_struct_fail=sum(s[2] for s in stats) / len(stats),
                mean_tau_struct=statistics.fmean(r.tau_struct for r in tau_rows) if tau_rows else None,
                mean_tau_engine=statistics.fmean(r.tau_engine for r in tau_rows) if tau_rows else None,
                agreement_rate=(
                    sum(r.tau_engine == r.tau_struct for r in tau_rows) / len(tau_rows) if tau_rows else None
                ),
                seconds=elapsed[j] if cfg.timing else None,
            )
            rows.append(row)
    return rows


def rows_to_csv(rows: Sequence[SweepRow]) -> str:
    buf = io.StringIO()
    buf.write(f"#schema={SCHEMA_VERSION}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for r in rows:
        writer.writerow(r.cells())
    return buf.getvalue()


def read_rows_csv(text: str) -> list[dict[str, str]]:
    lines = text.splitlines()
    if not lines or lines[0] != f"#schema={SCHEMA_VERSION}":
        raise ValueError("missing or unsupported schema line")
    return list(csv.DictReader(lines[1:]))


# -- short-cycle estimator -------------------------------------------------------


def _distinct_tuples(rng: np.random.Generator, n: int, k: int, count: int) -> np.ndarray:
    out = np.empty((0, k), dtype=np.int64)
    while len(out) < count:
        draw = rng.integers(0, n, size=(2 * (count - len(out)) + 8, k))
        s = np.sort(draw, axis=1)
        good = np.all(np.diff(s, axis=1) != 0, axis=1)
        out = np.vstack([out, draw[good]])
    return out[:count]


def tuple_is_cycle_reconstructible(coords: Sequence[int]) -> bool:
    """Whether a cyclic tuple's consecutive distances admit a unique sign vector."""
    k = len(coords)
    d = [abs(coords[(i + 1) % k] - coords[i]) for i in range(k)]
    return len(cycle_sign_solutions(d[:-1], d[-1], limit=2)) == 1


def estimate_noncycle_fraction(V: PointSet, k: int, samples: int, seed: int) -> float:
    """Fraction of uniform random ``k``-tuples of distinct points that are not cycle-reconstructible."""
    n = V.n
    if not 3 <= k <= cycle_cap(n) + 1 or k > n:
        raise ValueError(f"k must lie in [3, {min(n, cycle_cap(n) + 1)}]")
    if samples < 1:
        raise ValueError("samples must be at least 1")
    rng = derive_rng(seed, "noncycle", k)
    tuples = _distinct_tuples(rng, n, k, samples)
    coords = V.coords
    bad = sum(not tuple_is_cycle_reconstructible([coords[i] for i in row]) for row in tuples.tolist())
    return bad / samples


# -- SVG ---------------------------------------------------------------------------


def emit_svg_plot(rows: Sequence[SweepRow], path: str | Path) -> Path:
    """Write a standalone two-series line chart of a sweep at one ``n``."""
    if not rows:
        raise ValueError("no rows to plot")
    if len({r.n for r in rows}) != 1:
        raise ValueError("all rows must share one n")
    width, height, margin = 640, 400, 56
    xs = [r.c if r.c is not None else r.p for r in rows]
    lo, hi = min(xs), max(xs)
    span = (hi - lo) or 1.0

    def sx(x):
        return margin + (x - lo) / span * (width - 2 * margin) if hi > lo else width / 2

    def sy(y):
        return height - margin - y * (height - 2 * margin)

    xlabel = "p" if rows[0].c is None else "c"
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}">',
        '<rect width="100%" height="100%" fill="white"/>',
        f'<line x1="{margin}" y1="{height - margin}" x2="{width - margin}" y2="{height - margin}" stroke="black"/>',
        f'<line x1="{margin}" y1="{margin}" x2="{margin}" y2="{height - margin}" stroke="black"/>',
        f'<text x="{width / 2}" y="{height - 16}" text-anchor="middle" font-size="14">{xlabel}</text>',
        f'<text x="16" y="{height / 2}" font-size="14" transform="rotate(-90 16 {height / 2})" '
        'text-anchor="middle">fraction</text>',
        f'<text x="{width / 2}" y="24" text-anchor="middle" font-size="15">n = {rows[0].n}</text>',
    ]
    for y in (0.0, 0.5, 1.0):
        parts.append(f'<text x="{margin - 8}" y="{sy(y) + 4:.1f}" text-anchor="end" font-size="11">{y:g}</text>')
    for x in (lo, hi):
        parts.append(f'<text x="{sx(x):.1f}" y="{height - margin + 16}" text-anchor="middle" font-size="11">{x:g}</text>')
    series = [("frac_full", "#1f77b4", "fully reconstructed"), ("mean_frac_certified", "#d62728", "mean certified")]
    for k, (name, colour, label) in enumerate(series):
        pts = [(sx(x), sy(getattr(r, name))) for x, r in zip(xs, rows)]
        parts.append(
            f'<polyline fill="none" stroke="{colour}" stroke-width="2" points="'
            + " ".join(f"{a:.1f},{b:.1f}" for a, b in pts)
            + '"/>'
        )
        for a, b in pts:
            parts.append(f'<circle cx="{a:.1f}" cy="{b:.1f}" r="3" fill="{colour}"/>')
        parts.append(
            f'<text x="{width - margin}" y="{margin + 16 * k}" text-anchor="end" font-size="12" fill="{colour}">{label}</text>'
        )
    parts.append("</svg>")
    path = Path(path)
    try:
        path.write_text("\n".join(parts) + "\n")
    except OSError as exc:
        raise OSError(f"cannot write SVG to {path}: {exc}") from exc
    return path
