"""End-to-end experiments at full scale. Deselected by default; run with `pytest -m slow`."""
import numpy as np
import pytest

from src.characterize.cache_model import (
    build_cache_model, evaluate_cache_model, measure_inference_latency, train_cache_model,
)
from src.characterize.characterizer import train_characterizer
from src.device.latency import DeviceModel
from src.engine.simulate import ModelRegistry, simulate
from src.nn.optim import TrainConfig
from src.oracle.benefit import aggregate_page_stats
from src.oracle.replay import oracle_replay
from src.traces.generator import category_profile, concatenate, generate_synthetic
from src.traces.trace import WorkloadCategory, capacity_for_working_set
from tests.helpers import trace_of

pytestmark = pytest.mark.slow


def _labeled(trace, capacity):
    return oracle_replay(trace, capacity, aggregate_page_stats(trace, DeviceModel()))


def test_belady_dominates_every_policy():
    rcrnn = ModelRegistry(cache=build_cache_model(seed=0, hidden=16, layers=1))
    rng = np.random.default_rng(0)
    for k in range(200):
        t = generate_synthetic(category_profile(WorkloadCategory(k % 4), seed=k), int(rng.integers(1000, 5000)))
        cap = capacity_for_working_set(t, 0.2)
        best = simulate(t, "belady", cap)
        assert best.conservation_violations() == []
        for policy in ("lru", "access", "larc", "rcrnn"):
            m = simulate(t, policy, cap, models=rcrnn)
            assert m.conservation_violations() == []
            assert m.hit_ratio <= best.hit_ratio, (k, policy)


def test_characterizer_separates_four_categories():
    traces = [generate_synthetic(category_profile(c, seed=c.value), 20_000) for c in WorkloadCategory]
    res = train_characterizer(traces, TrainConfig(learning_rate=0.01, epochs=20))
    assert res.held_accuracy[0] >= 0.90


def test_cache_model_mimics_oracle():
    t = generate_synthetic(category_profile(WorkloadCategory.WebServer, seed=0, hot_set_pages=2000), 20_000)
    labeled = _labeled(t, capacity_for_working_set(t, 0.2))
    res = train_cache_model(labeled, TrainConfig(learning_rate=0.005, epochs=15), hidden=64, layers=2)
    admit_acc, dur_acc = res.held_accuracy
    assert admit_acc >= 0.85
    assert dur_acc >= 0.70
    score = evaluate_cache_model(res.model, labeled)
    assert 0.0 <= score.closed_loop[0] <= 1.0


def test_learned_admission_resists_cyclic_thrash():
    cap, distinct, cycles = 100, 150, 40
    t = trace_of([i % distinct for i in range(distinct * cycles)])
    lru = simulate(t, "lru", cap)
    assert lru.hit_ratio == 0.0
    oracle = simulate(t, "oracle-benefit", cap)
    assert oracle.hit_ratio >= 0.3
    res = train_cache_model(_labeled(t, cap), TrainConfig(learning_rate=0.01, epochs=30),
                            hidden=16, layers=1, holdout=False)
    rc = simulate(t, "rcrnn", cap, models=ModelRegistry(cache=res.model))
    assert rc.hit_ratio > lru.hit_ratio
    for m in (lru, oracle, rc):
        assert m.conservation_violations() == []


def test_reconfiguration_recovers_after_workload_change():
    first, second = WorkloadCategory.FileServer, WorkloadCategory.WebServer
    n = 25_000
    cfg = TrainConfig(learning_rate=0.005, epochs=10)

    train_traces = {c: generate_synthetic(category_profile(c, seed=10 + c.value, hot_set_pages=2000), n)
                    for c in (first, second)}
    cap = max(capacity_for_working_set(t, 0.2) for t in train_traces.values())
    models = {c: train_cache_model(_labeled(t, cap), cfg, hidden=32, layers=1).model
              for c, t in train_traces.items()}
    characterizer = train_characterizer(list(train_traces.values()), TrainConfig(learning_rate=0.01, epochs=10)).model

    a = generate_synthetic(category_profile(first, seed=1, hot_set_pages=2000), n)
    b = generate_synthetic(category_profile(second, seed=2, hot_set_pages=2000), n)
    changed = concatenate([a, b])

    adaptive = simulate(changed, "rcrnn", cap, models=ModelRegistry(characterizer, per_category=models))
    fixed = simulate(changed, "rcrnn", cap, models=ModelRegistry(cache=models[first]))
    steady = simulate(b, "rcrnn", cap, models=ModelRegistry(cache=models[second]))

    switch = n // 1000
    steady_value = float(np.mean(steady.window_hit_ratios[5:]))
    recovery = adaptive.window_hit_ratios[switch:switch + 20]
    assert max(recovery) >= 0.9 * steady_value
    post = slice(switch, None)
    assert np.mean(adaptive.window_hit_ratios[post]) > np.mean(fixed.window_hit_ratios[post])
    assert adaptive.conservation_violations() == []


def test_closed_loop_decision_is_fast():
    t = generate_synthetic(category_profile(WorkloadCategory.MailServer, seed=0), 10_000)
    assert measure_inference_latency(build_cache_model(), t, n=10_000) < 1.0
