import csv
import io
import json

import pytest
from hypothesis import given
from hypothesis import strategies as st

from linerecon.engine import EngineParams
from linerecon.errors import OracleCapExceeded
from linerecon.graph import RevealSchedule, observe_distances, random_schedule
from linerecon.oracle import is_reconstructible_set
from linerecon.pointset import gen_generic, gen_progression, make_point_set
from linerecon.process import (
    FIELDS,
    TrialConfig,
    TrialRecord,
    degree_one_necessity_check,
    monte_carlo,
    records_to_csv,
    records_to_jsonl,
    run_trial,
    summarize,
    summary_to_json,
)

Eager = EngineParams(edge_budget=0)


def test_forced_schedule_example():
    V = make_point_set([0, 1, 2])
    s = RevealSchedule.from_pairs(3, [(0, 1), (1, 2), (0, 2)])
    r = run_trial(V, 0, Eager, schedule=s)
    assert (r.tau_struct, r.tau_oracle, r.tau_engine) == (2, 2, 2)
    assert r.tau_isolatedfree == 2 and r.tau_mindeg2 == 3
    assert r.degree_one_at_struct == 2 and r.secure_pairs == 2


def test_default_budget_activates_by_last_reveal():
    V = make_point_set([0, 1, 2])
    s = RevealSchedule.from_pairs(3, [(0, 1), (1, 2), (0, 2)])
    r = run_trial(V, 0, schedule=s)
    assert r.tau_engine == 3 and not r.check()


def test_insecure_set_example():
    V = make_point_set([0, 1, 5])
    for seed in range(10):
        r = run_trial(V, seed)
        assert r.tau_struct == 3 and r.tau_oracle == 3 and not r.check()


def test_run_trial_validation():
    with pytest.raises(ValueError):
        run_trial(make_point_set([0, 1]), 0)
    with pytest.raises(OracleCapExceeded):
        run_trial(gen_generic(15, 0), 0, oracle=True)
    assert run_trial(gen_generic(15, 0), 0).tau_oracle is None


@given(st.integers(3, 11), st.integers(0, 2**32), st.booleans(), st.sampled_from([0, 5, None]))
def test_trial_invariants(n, seed, prog, budget):
    V = gen_progression(n) if prog else gen_generic(n, seed)
    r = run_trial(V, seed, EngineParams(edge_budget=budget))
    assert r.check() == []
    assert r == run_trial(V, seed, EngineParams(edge_budget=budget))


def test_check_reports_violations():
    r = TrialRecord(5, 0, 4, 3, 2, 6, 7, 0, 0)
    assert set(r.check()) == {
        "tau_isolatedfree > tau_struct",
        "tau_struct > tau_mindeg2",
        "tau_oracle > tau_engine",
    }


def test_progression_of_eight_across_seeds():
    V = gen_progression(8)
    for seed in range(100):
        r = run_trial(V, seed, Eager)
        assert r.tau_struct <= r.tau_oracle <= r.tau_engine


def test_necessity_check_examples():
    W = make_point_set([0, 1, 5])
    assert degree_one_necessity_check(W, observe_distances(W, [(0, 1), (1, 2)]))
    V = make_point_set([0, 1, 2])
    assert not degree_one_necessity_check(V, observe_distances(V, [(0, 1), (1, 2)]))
    assert not degree_one_necessity_check(V, observe_distances(V, [(0, 1), (1, 2), (0, 2)]))


@given(st.integers(3, 12), st.integers(0, 2**32), st.integers(1, 40), st.booleans())
def test_necessity_implies_oracle_failure(n, seed, t, prog):
    V = gen_progression(n) if prog else gen_generic(n, seed)
    s = random_schedule(n, seed)
    G = s.prefix_graph(V, min(t, len(s)))
    if degree_one_necessity_check(V, G):
        assert not is_reconstructible_set(range(n), G)


def test_monte_carlo_single_trial_and_determinism():
    cfg = TrialConfig(n=9, seed=3, trials=1, params=Eager)
    records, summary = monte_carlo(cfg)
    (r,) = records
    assert summary["mean_tau_struct"] == r.tau_struct
    assert summary["median_tau_engine"] == r.tau_engine
    assert summary["engine_agreement"] == (1.0 if r.tau_engine == r.tau_struct else 0.0)
    cfg2 = TrialConfig(n=9, seed=3, trials=6, params=Eager)
    assert monte_carlo(cfg2) == monte_carlo(cfg2)


def test_monte_carlo_workers_preserve_order():
    cfg = TrialConfig(n=8, seed=1, trials=6, params=Eager)
    serial, _ = monte_carlo(cfg)
    parallel, _ = monte_carlo(TrialConfig(n=8, seed=1, trials=6, params=Eager, workers=2))
    assert serial == parallel


def test_monte_carlo_sources():
    assert monte_carlo(TrialConfig(source="explicit", points=(0, 1, 5, 9), trials=2))[0][0].n == 4
    assert monte_carlo(TrialConfig(source="product", product=(2, 3), trials=1))[0][0].n == 6
    assert monte_carlo(TrialConfig(source="progression", n=5, trials=1))[0][0].n == 5
    with pytest.raises(ValueError):
        TrialConfig(trials=0)
    with pytest.raises(ValueError):
        TrialConfig(source="explicit")


def test_oracle_soundness_campaign():
    records, summary = monte_carlo(TrialConfig(n=10, seed=11, trials=500, params=Eager))
    assert summary["oracle_trials"] == 500
    assert summary["soundness_violations"] == 0
    assert 0.0 <= summary["oracle_agreement"] <= 1.0
    assert all(r.tau_struct <= r.tau_oracle <= r.tau_engine for r in records)


def test_output_formats():
    records, summary = monte_carlo(TrialConfig(n=12, seed=2, trials=3, params=Eager, oracle=False))
    rows = list(csv.DictReader(io.StringIO(records_to_csv(records))))
    assert list(rows[0]) == FIELDS and len(rows) == 3
    assert rows[0]["tau_oracle"] == ""
    lines = records_to_jsonl(records).splitlines()
    assert [json.loads(x) for x in lines][1]["tau_struct"] == records[1].tau_struct
    assert json.loads(summary_to_json(summary))["trials"] == 3
    assert summarize(records) == summary
