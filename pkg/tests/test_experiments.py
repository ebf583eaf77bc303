import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from linerecon.engine import EngineParams
from linerecon.experiments import (
    CSV_COLUMNS,
    SweepConfig,
    SweepRow,
    emit_svg_plot,
    estimate_noncycle_fraction,
    p_from_grid,
    read_rows_csv,
    rows_to_csv,
    sweep,
    tuple_is_cycle_reconstructible,
)
from linerecon.pointset import gen_generic, gen_progression, make_point_set


def test_p_from_grid_modes():
    assert p_from_grid(100, 0.25, "absolute") == 0.25
    assert p_from_grid(100, 5, "linear") == 0.05
    n = 2000
    assert p_from_grid(n, 0, "sharp") == pytest.approx((math.log(n) + math.log(math.log(n))) / n)
    assert p_from_grid(10, 100, "linear") == 1.0
    assert p_from_grid(10, -100, "sharp") == 0.0
    with pytest.raises(ValueError):
        p_from_grid(10, 1, "cubic")


def test_sweep_config_validation():
    with pytest.raises(ValueError):
        SweepConfig(ns=(), grid=(1.0,))
    with pytest.raises(ValueError):
        SweepConfig(ns=(10,), grid=(1.0,), trials=0)
    with pytest.raises(ValueError):
        SweepConfig(ns=(2,), grid=(1.0,))


def test_sweep_rows_and_monotone_coupling():
    cfg = SweepConfig(ns=(40,), grid=(0.02, 0.1, 0.3, 1.0), mode="absolute", trials=6, seed=4)
    rows = sweep(cfg)
    assert [r.p for r in rows] == [0.02, 0.1, 0.3, 1.0]
    for r in rows:
        for x in (r.frac_full, r.mean_frac_certified, r.median_frac_certified, r.frac_struct_fail):
            assert 0.0 <= x <= 1.0
        assert r.c is None and r.seconds is None
    # graphs grow along the grid for each trial
    assert [r.mean_frac_certified for r in rows] == sorted(r.mean_frac_certified for r in rows)
    assert rows[-1].frac_full == 1.0 and rows[-1].frac_struct_fail == 0.0
    assert rows[0].frac_struct_fail == 1.0
    assert sweep(cfg) == rows


def test_sweep_with_taus():
    cfg = SweepConfig(ns=(12,), grid=(-1.0, 3.0), mode="sharp", trials=3, taus=True, params=EngineParams(edge_budget=0))
    rows = sweep(cfg)
    assert all(r.mean_tau_struct is not None and 0 <= r.agreement_rate <= 1 for r in rows)
    assert rows[0].c == -1.0


def test_csv_schema_and_round_trip():
    rows = sweep(SweepConfig(ns=(20,), grid=(1.0, 2.0), mode="linear", trials=2))
    text = rows_to_csv(rows)
    assert text.splitlines()[0] == "#schema=1"
    assert text.splitlines()[1] == ",".join(CSV_COLUMNS)
    back = read_rows_csv(text)
    assert len(back) == 2 and back[1]["c"] == "2.0" and back[0]["seconds"] == ""
    with pytest.raises(ValueError):
        read_rows_csv("n,p\n")


def test_timing_column():
    rows = sweep(SweepConfig(ns=(15,), grid=(0.5,), mode="absolute", trials=1, timing=True))
    assert rows[0].seconds >= 0


def test_cycle_reconstructible_tuple():
    assert tuple_is_cycle_reconstructible((0, 1, 3))
    assert not tuple_is_cycle_reconstructible((0, 1, 3, 2))


@given(st.lists(st.integers(-1000, 1000), min_size=3, max_size=3, unique=True))
def test_triangles_are_cycle_reconstructible(coords):
    assert tuple_is_cycle_reconstructible(coords)


def test_estimator_examples():
    V = gen_generic(100000, 0)
    assert estimate_noncycle_fraction(V, 8, 10000, 1) <= 0.01
    P = gen_progression(1000)
    assert estimate_noncycle_fraction(P, 3, 10000, 1) == 0.0
    assert estimate_noncycle_fraction(P, 4, 10000, 1) > 0.0


def test_estimator_deterministic_and_validated():
    V = gen_generic(500, 2)
    assert estimate_noncycle_fraction(V, 5, 300, 7) == estimate_noncycle_fraction(V, 5, 300, 7)
    with pytest.raises(ValueError):
        estimate_noncycle_fraction(V, 2, 10, 0)
    with pytest.raises(ValueError):
        estimate_noncycle_fraction(V, 7, 10, 0)
    with pytest.raises(ValueError):
        estimate_noncycle_fraction(V, 4, 0, 0)
    with pytest.raises(ValueError):
        estimate_noncycle_fraction(make_point_set([0, 1, 2]), 4, 10, 0)


def test_svg(tmp_path):
    rows = sweep(SweepConfig(ns=(20,), grid=(-2.0, 0.0, 2.0), mode="sharp", trials=2))
    out = emit_svg_plot(rows, tmp_path / "plot.svg")
    text = out.read_text()
    assert text.startswith("<svg") and text.count("<polyline") == 2
    with pytest.raises(ValueError):
        emit_svg_plot([], tmp_path / "x.svg")
    mixed = rows + [SweepRow(30, 0.1, 0.0, 1, 0.0, 0.0, 0.0, 1.0)]
    with pytest.raises(ValueError):
        emit_svg_plot(mixed, tmp_path / "y.svg")
