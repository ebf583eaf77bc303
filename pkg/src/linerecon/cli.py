"""Command-line interface: ``linerecon <command> [flags]``.

Relative output paths are resolved against ``$LINERECON_OUTPUT_DIR`` when
that variable is set. Validation problems exit with status 2 and name the
offending flag.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path
from typing import Sequence

from .engine import EngineParams, reconstruct
from .errors import ReconError
from .experiments import (
    MODES,
    SweepConfig,
    emit_svg_plot,
    estimate_noncycle_fraction,
    rows_to_csv,
    sweep,
)
from .graph import DistanceGraph, load_graph, load_pairs, observe_distances, sample_gnp, save_graph
from .oracle import DEFAULT_CAP, OracleResult, largest_reconstructible_set
from .pointset import gen_generic, gen_product_construction, gen_progression, load_point_set, save_point_set
from .process import TrialConfig, monte_carlo, records_to_csv, records_to_jsonl, summary_to_json

OUTPUT_ENV = "LINERECON_OUTPUT_DIR"
# flags whose values may legitimately start with '-'
_SIGNED_FLAGS = ("--c-grid", "--grid")


class UsageError(Exception):
    """Bad flag value; carries the flag name."""

    def __init__(self, flag: str, message: str):
        super().__init__(f"{flag}: {message}")


def output_path(path: str) -> Path:
    p = Path(path)
    base = os.environ.get(OUTPUT_ENV)
    if base and not p.is_absolute():
        p = Path(base) / p
    p.parent.mkdir(parents=True, exist_ok=True)
    return p


def parse_grid(text: str, flag: str) -> tuple[float, ...]:
    """``a..b`` (step 1), ``a..b:step`` or a comma list."""
    try:
        if ".." in text:
            rng, _, step_text = text.partition(":")
            lo_text, hi_text = rng.split("..")
            lo, hi = float(lo_text), float(hi_text)
            step = float(step_text) if step_text else 1.0
            if step <= 0 or hi < lo:
                raise ValueError
            count = int(round((hi - lo) / step)) + 1
            values = tuple(round(lo + i * step, 12) for i in range(count))
        else:
            values = tuple(float(x) for x in text.split(",") if x.strip())
    except ValueError:
        raise UsageError(flag, f"cannot parse grid {text!r}") from None
    if not values:
        raise UsageError(flag, "grid is empty")
    return values


def parse_int_list(text: str, flag: str) -> tuple[int, ...]:
    try:
        values = tuple(int(x) for x in text.split(",") if x.strip())
    except ValueError:
        raise UsageError(flag, f"expected comma-separated integers, got {text!r}") from None
    if not values:
        raise UsageError(flag, "list is empty")
    return values


def _params(args) -> EngineParams:
    if args.cycle_cap is not None and args.cycle_cap < 3:
        raise UsageError("--cycle-cap", "must be at least 3")
    if getattr(args, "edge_budget", None) is not None and args.edge_budget < 0:
        raise UsageError("--edge-budget", "must be non-negative")
    return EngineParams(cycle_cap=args.cycle_cap, edge_budget=getattr(args, "edge_budget", None))


def _require_positive(value: int, flag: str, minimum: int = 1) -> None:
    if value < minimum:
        raise UsageError(flag, f"must be at least {minimum}")


def _emit(text: str, path: str | None) -> None:
    if path and path != "-":
        output_path(path).write_text(text)
    else:
        sys.stdout.write(text)


def _load_graph(args) -> tuple[DistanceGraph, object]:
    if not Path(args.edges).exists():
        raise UsageError("--edges", f"no such file {args.edges}")
    if args.points:
        if not Path(args.points).exists():
            raise UsageError("--points", f"no such file {args.points}")
        V = load_point_set(args.points)
        try:
            G = observe_distances(V, load_pairs(args.edges))
        except ValueError as exc:
            raise UsageError("--edges", str(exc)) from None
        return G, V
    try:
        return load_graph(args.edges), None
    except ValueError as exc:
        raise UsageError("--edges", str(exc)) from None


# -- commands -------------------------------------------------------------------


def cmd_generate(args) -> int:
    if args.source == "product":
        if args.k is None or args.l is None:
            raise UsageError("--k", "product source needs --k and --l")
        _require_positive(args.k, "--k")
        _require_positive(args.l, "--l")
        V, pairs = gen_product_construction(args.k, args.l)
    else:
        if args.n is None:
            raise UsageError("--n", "required for this source")
        _require_positive(args.n, "--n")
        V = gen_generic(args.n, args.seed) if args.source == "generic" else gen_progression(args.n)
        pairs = None
        if args.p is not None:
            if not 0 <= args.p <= 1:
                raise UsageError("--p", "must lie in [0, 1]")
            pairs = sample_gnp(V.n, args.p, args.seed)
    save_point_set(V, output_path(args.out))
    if args.edges_out:
        if pairs is None:
            raise UsageError("--edges-out", "needs --p or the product source")
        save_graph(observe_distances(V, pairs), output_path(args.edges_out))
    print(f"wrote {V.n} points to {args.out}")
    return 0


def cmd_reconstruct(args) -> int:
    G, _ = _load_graph(args)
    report = reconstruct(G, _params(args))
    print(f"largest={report.largest} full={str(report.full).lower()} clusters={len(report.clusters)}")
    if args.json:
        _emit(report.to_json() + "\n", args.json)
    return 0


def cmd_oracle(args) -> int:
    G, _ = _load_graph(args)
    result = OracleResult.of(G, args.cap)
    print(f"largest reconstructible size {len(result.largest)}: {list(result.largest)}")
    if args.json:
        _emit(result.to_json() + "\n", args.json)
    return 0


def cmd_adversarial(args) -> int:
    _require_positive(args.k, "--k")
    _require_positive(args.l, "--l")
    V, pairs = gen_product_construction(args.k, args.l)
    G = observe_distances(V, pairs)
    if V.n > args.cap and len(G.connected_components()[0]) > args.cap:
        raise UsageError("--cap", f"construction has {V.n} points, above the oracle cap {args.cap}")
    best = largest_reconstructible_set(G, args.cap)
    print(f"largest reconstructible size {len(best)}")
    if args.engine:
        print(f"engine largest cluster {reconstruct(G).largest}")
    if args.json:
        _emit(OracleResult.of(G, args.cap).to_json() + "\n", args.json)
    return 0


def cmd_hitting(args) -> int:
    _require_positive(args.n, "--n", 3)
    _require_positive(args.trials, "--trials")
    oracle = {"auto": None, "on": True, "off": False}[args.oracle]
    if oracle and args.n > args.cap:
        raise UsageError("--oracle", f"n = {args.n} exceeds the oracle cap {args.cap}")
    points = None
    product = None
    if args.source == "explicit":
        if not args.points:
            raise UsageError("--points", "required for the explicit source")
        points = load_point_set(args.points).coords
    if args.source == "product":
        if args.k is None or args.l is None:
            raise UsageError("--k", "product source needs --k and --l")
        product = (args.k, args.l)
    cfg = TrialConfig(
        source=args.source,
        n=len(points) if points else (args.k * args.l if product else args.n),
        seed=args.seed,
        trials=args.trials,
        params=_params(args),
        oracle=oracle,
        cap=args.cap,
        points=points,
        product=product,
        workers=args.workers,
    )
    records, summary = monte_carlo(cfg)
    if args.csv:
        output_path(args.csv).write_text(records_to_csv(records))
    if args.jsonl:
        output_path(args.jsonl).write_text(records_to_jsonl(records))
    _emit(summary_to_json(summary) + "\n", args.summary)
    return 0


def cmd_sweep(args) -> int:
    ns = parse_int_list(args.n, "--n")
    if any(n < 3 for n in ns):
        raise UsageError("--n", "every n must be at least 3")
    if args.c_grid is None and args.grid is None:
        raise UsageError("--c-grid", "give --c-grid or --grid")
    grid = parse_grid(args.c_grid, "--c-grid") if args.c_grid is not None else parse_grid(args.grid, "--grid")
    mode = args.mode if args.c_grid is not None else "absolute"
    _require_positive(args.trials, "--trials")
    if args.svg and len(ns) != 1:
        raise UsageError("--svg", "plots need a single --n")
    cfg = SweepConfig(
        ns=ns,
        grid=grid,
        mode=mode,
        trials=args.trials,
        source=args.source,
        params=_params(args),
        seed=args.seed,
        taus=args.taus,
        timing=args.timing,
    )
    rows = sweep(cfg)
    _emit(rows_to_csv(rows), args.csv)
    if args.svg:
        emit_svg_plot(rows, output_path(args.svg))
    return 0


def cmd_estimate(args) -> int:
    _require_positive(args.n, "--n", 3)
    _require_positive(args.samples, "--samples")
    V = gen_generic(args.n, args.seed) if args.source == "generic" else gen_progression(args.n)
    try:
        frac = estimate_noncycle_fraction(V, args.k, args.samples, args.seed)
    except ValueError as exc:
        raise UsageError("--k", str(exc)) from None
    print(json.dumps({"n": args.n, "k": args.k, "samples": args.samples, "fraction": frac}))
    return 0


# -- parser --------------------------------------------------------------------------


def _engine_flags(p: argparse.ArgumentParser, budget: bool = False) -> None:
    p.add_argument("--cycle-cap", type=int, default=None, help="longest cycle to certify (default 0.9 ln n)")
    if budget:
        p.add_argument("--edge-budget", type=int, default=None, help="reveals before the online engine starts")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="linerecon", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="write a point set (and optionally a random pair set)")
    p.add_argument("--source", choices=("generic", "progression", "product"), default="generic")
    p.add_argument("--n", type=int)
    p.add_argument("--k", type=int)
    p.add_argument("--l", type=int)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--p", type=float, help="also sample a binomial random pair set")
    p.add_argument("--out", required=True, help="point file (.txt or .json)")
    p.add_argument("--edges-out", help="edge list with observed distances")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("reconstruct", help="certify clusters for one graph")
    p.add_argument("--points", help="point file; distances are observed from it")
    p.add_argument("--edges", required=True, help="pair list (with --points) or edge list with distances")
    p.add_argument("--json", help="write the report as JSON ('-' for stdout)")
    _engine_flags(p)
    p.set_defaults(func=cmd_reconstruct)

    p = sub.add_parser("oracle", help="exhaustive ground truth for a small graph")
    p.add_argument("--points")
    p.add_argument("--edges", required=True)
    p.add_argument("--cap", type=int, default=DEFAULT_CAP)
    p.add_argument("--json")
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("adversarial", help="largest reconstructible set of the clique-path construction")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--l", type=int, required=True)
    p.add_argument("--cap", type=int, default=DEFAULT_CAP)
    p.add_argument("--engine", action="store_true", help="also report the engine's largest cluster")
    p.add_argument("--json")
    p.set_defaults(func=cmd_adversarial)

    p = sub.add_parser("hitting", help="hitting-time campaign over random schedules")
    p.add_argument("--source", choices=("generic", "progression", "explicit", "product"), default="generic")
    p.add_argument("--n", type=int, default=10)
    p.add_argument("--points")
    p.add_argument("--k", type=int)
    p.add_argument("--l", type=int)
    p.add_argument("--trials", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--oracle", choices=("auto", "on", "off"), default="auto")
    p.add_argument("--cap", type=int, default=DEFAULT_CAP)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--csv")
    p.add_argument("--jsonl")
    p.add_argument("--summary", help="summary JSON path (default stdout)")
    _engine_flags(p, budget=True)
    p.set_defaults(func=cmd_hitting)

    p = sub.add_parser("sweep", help="threshold sweep over the reveal probability")
    p.add_argument("--n", required=True, help="comma-separated sizes")
    p.add_argument("--c-grid", help="grid of c values, e.g. -6..6 or 1,2,3")
    p.add_argument("--grid", help="grid of absolute p values")
    p.add_argument("--mode", choices=MODES, default="sharp", help="interpretation of --c-grid")
    p.add_argument("--trials", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--source", choices=("generic", "progression"), default="generic")
    p.add_argument("--taus", action="store_true", help="also replay schedules for hitting times")
    p.add_argument("--timing", action="store_true", help="fill the seconds column (not reproducible)")
    p.add_argument("--csv", help="CSV path (default stdout)")
    p.add_argument("--svg")
    _engine_flags(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("estimate", help="fraction of random k-tuples that are not cycle-reconstructible")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--samples", type=int, default=10000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--source", choices=("generic", "progression"), default="generic")
    p.set_defaults(func=cmd_estimate)
    return parser


def _join_signed(argv: Sequence[str]) -> list[str]:
    out = []
    it = iter(argv)
    for tok in it:
        if tok in _SIGNED_FLAGS:
            nxt = next(it, None)
            out.append(tok if nxt is None else f"{tok}={nxt}")
        else:
            out.append(tok)
    return out


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(_join_signed(sys.argv[1:] if argv is None else argv))
    try:
        return args.func(args)
    except UsageError as exc:
        parser.exit(2, f"{parser.prog} {args.command}: error: {exc}\n")
    except (ReconError, OSError) as exc:
        parser.exit(1, f"{parser.prog} {args.command}: {type(exc).__name__}: {exc}\n")
