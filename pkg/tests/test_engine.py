import json

import numpy as np
import pandas as pd
import pytest

from src.characterize.cache_model import build_cache_model
from src.characterize.characterizer import build_characterizer
from src.characterize.features import extract_cache_features
from src.device.latency import Device, DeviceModel, response_time
from src.engine.monitor import MonitorState, monitor_and_reconfigure, reevaluate_residents, vote
from src.engine.report import SimulationReport, compare_report, improvement_metric
from src.engine.simulate import ModelRegistry, SimulationError, simulate
from src.engine.metrics import Metrics
from src.oracle.labels import DurationLabel
from src.policies.rcrnn import RcRnnPolicy
from src.traces.generator import category_profile, generate_synthetic
from src.traces.trace import WorkloadCategory
from tests.helpers import req, trace_of

Mail, Web, Db, File = (WorkloadCategory.MailServer, WorkloadCategory.WebServer,
                       WorkloadCategory.Database, WorkloadCategory.FileServer)
Soon, Mean, Late = DurationLabel.Soon, DurationLabel.Mean, DurationLabel.Late


def constant_cache_model(admit: bool, label: DurationLabel = Soon):
    m = build_cache_model(hidden=4, layers=1)
    for head in m.heads:
        head.W[...] = 0.0
        head.b[...] = -10.0
    m.heads[0].b[int(admit)] = 10.0
    m.heads[1].b[label.value] = 10.0
    return m


def constant_characterizer(category: WorkloadCategory):
    m = build_characterizer(hidden=4)
    m.heads[0].W[...] = 0.0
    m.heads[0].b[...] = -10.0
    m.heads[0].b[category.value] = 10.0
    return m


# ---------- simulate ----------

def test_lru_counts():
    m = simulate(trace_of([1, 2, 1]), "lru", 2)
    assert (m.hits, m.misses, m.admissions, m.replacements) == (1, 2, 2, 0)


def test_larc_scan():
    m = simulate(trace_of(list(range(100))), "larc", 10)
    assert m.ssd_writes == 0 and m.hit_ratio == 0.0


def test_belady_beats_lru_on_cycle():
    t = trace_of([1, 2, 3, 1, 2, 3])
    assert simulate(t, "belady", 2).hit_ratio == pytest.approx(2 / 6)
    assert simulate(t, "lru", 2).hit_ratio == 0.0


def test_latency_accounting():
    dev = DeviceModel()
    t = trace_of([1, 2, 1])
    m = simulate(t, "lru", 2, device=dev)
    admit_random = response_time(dev, t[0], Device.HDD) + response_time(dev, req(1, op="W"), Device.SSD)
    admit_seq = response_time(dev, t[1], Device.HDD, sequential=True) + response_time(dev, req(2, op="W"), Device.SSD)
    hit = response_time(dev, t[2], Device.SSD)
    assert m.latency_ms_total == pytest.approx(admit_random + admit_seq + hit)


def test_bypass_costs_hdd_time_only():
    dev = DeviceModel()
    t = trace_of([5])
    m = simulate(t, "larc", 4, device=dev)
    assert m.latency_ms_total == pytest.approx(response_time(dev, t[0], Device.HDD))


def test_write_hit_counts_an_ssd_write():
    m = simulate(trace_of([1, 1], ops="RW"), "lru", 2)
    assert (m.write_hits, m.ssd_writes) == (1, 2)


def test_simulate_argument_errors():
    t = trace_of([1, 2])
    with pytest.raises(SimulationError) as err:
        simulate(t, "rcrnn", 2)
    assert err.value.field == "models.cache"
    with pytest.raises(SimulationError):
        simulate(t, "lru", 0)
    with pytest.raises(SimulationError, match="unknown policy"):
        simulate(t, "fifo", 2)


def test_rcrnn_admitting_everything_soon_matches_lru():
    rng = np.random.default_rng(1)
    t = trace_of(rng.integers(0, 40, size=1500).tolist())
    rc = simulate(t, "rcrnn", 12, models=ModelRegistry(cache=constant_cache_model(True)))
    lru = simulate(t, "lru", 12)
    assert rc.as_row() == {**lru.as_row(), "policy": "rcrnn"}


def test_rcrnn_bypassing_everything_never_writes():
    t = trace_of([i % 7 for i in range(300)])
    m = simulate(t, "rcrnn", 4, models=ModelRegistry(cache=constant_cache_model(False)))
    assert m.bypasses == 300 and m.ssd_writes == 0


def test_inference_overhead_is_added_per_request():
    t = trace_of([i % 7 for i in range(300)])
    models = ModelRegistry(cache=constant_cache_model(True))
    base = simulate(t, "rcrnn", 4, models=models)
    slow = simulate(t, "rcrnn", 4, models=models, inference_overhead_ms=0.3)
    assert slow.latency_ms_total - base.latency_ms_total == pytest.approx(90.0)


def test_adaptive_run_switches_model_after_first_round():
    models = ModelRegistry(
        characterizer=constant_characterizer(Web),
        per_category={Mail: constant_cache_model(False), Web: constant_cache_model(True)},
    )
    assert models.initial()[0] is Mail
    t = trace_of([i % 50 for i in range(3000)])
    m = simulate(t, "rcrnn", 100, models=models)
    assert m.window_hit_ratios == [0.0, pytest.approx(0.95), 1.0]
    assert m.conservation_violations() == []


@pytest.mark.parametrize("policy", ["lru", "larc", "access", "belady", "oracle-benefit"])
def test_conservation_and_dominance_on_generated_traces(policy):
    for seed in range(3):
        t = generate_synthetic(category_profile(WorkloadCategory.WebServer, seed=seed, hot_set_pages=400), 3000)
        m = simulate(t, policy, 80)
        assert m.conservation_violations() == []
        assert m.hit_ratio <= simulate(t, "belady", 80).hit_ratio + 1e-12


def test_simulate_is_deterministic():
    t = generate_synthetic(category_profile(WorkloadCategory.Database, seed=3), 2000)
    assert simulate(t, "access", 50).as_row() == simulate(t, "access", 50).as_row()


# ---------- monitoring ----------

def test_vote():
    assert vote([Web] * 7 + [Mail] * 3) is Web
    assert vote([Web] * 5 + [Mail] * 5) is None
    assert vote([Db] * 4 + [Mail] * 3 + [Web] * 3) is Db
    assert vote([]) is None


def test_monitor_fires_every_thousand_requests():
    mon = MonitorState({Mail: object(), Web: object()}, current=Mail)
    clf = constant_characterizer(Web)
    events = [monitor_and_reconfigure(mon, clf, req(i)) for i in range(1000)]
    assert all(e is None for e in events[:-1])
    assert events[-1].new is Web and events[-1].old is Mail and events[-1].index == 999
    assert events[-1].votes == {Web: 10}
    assert mon.current is Web and mon.buffer == [] and mon.rounds == 1


def test_monitor_keeps_category_without_change_or_model():
    mon = MonitorState({Mail: object()}, current=Mail)
    for i in range(1000):
        assert monitor_and_reconfigure(mon, constant_characterizer(Mail), req(i)) is None
    for i in range(1000):
        assert monitor_and_reconfigure(mon, constant_characterizer(File), req(i)) is None
    assert mon.current is Mail and mon.rounds == 2


def test_monitor_period_must_cover_whole_windows():
    with pytest.raises(ValueError):
        MonitorState({}, every=150)


def test_reevaluate_relabels_every_resident():
    p = RcRnnPolicy(8)
    for i, lbl in enumerate([Late, Mean, Late, Soon, Mean]):
        p.on_access(req(i), i, (True, lbl), extract_cache_features(req(i), None, 10))
    reevaluate_residents(p, constant_cache_model(True, Soon))
    assert len(p) == 5
    assert sorted(p.queues[Soon]) == [0, 1, 2, 3, 4]
    reevaluate_residents(p, constant_cache_model(True, Late))
    assert list(p.queues[Late]) == [4, 3, 2, 1, 0]


def test_reevaluate_empty_cache_is_noop():
    p = RcRnnPolicy(4)
    reevaluate_residents(p, constant_cache_model(True, Late))
    assert len(p) == 0


# ---------- reporting ----------

TABLE4 = [
    ((0.9123, 0.9365, 0.6269, 0.4774), 185),
    ((0.9793, 0.9517, 0.7263, 0.6034), 112),
    ((0.9234, 1.0000, 0.7342, 0.5476), 129),
    ((0.9759, 0.9490, 0.7823, 0.6552), 80),
    ((0.9835, 0.9243, 0.7161, 0.5813), 118),
    ((0.8931, 0.9142, 0.5840, 0.4292), 225),
    ((0.9545, 0.7254, 0.6662, 0.4349), 138),
    ((0.8831, 1.0000, 0.8331, 0.7418), 43),
    ((0.9432, 0.9953, 0.7698, 0.9071), 34),
    ((0.9759, 0.9990, 0.7760, 0.7283), 73),
    ((0.9374, 1.0000, 0.8275, 0.9863), 15),
    ((0.9717, 0.9155, 0.7814, 0.6154), 85),
    ((0.9499, 0.9707, 0.7540, 0.6899), 77),
    ((0.9674, 0.9844, 0.6347, 0.5517), 172),
    ((0.9351, 0.9967, 0.7120, 0.5287), 147),
    ((0.9523, 0.9850, 0.7836, 0.6855), 75),
]


@pytest.mark.parametrize("accs,published", TABLE4)
def test_improvement_matches_published_column(accs, published):
    assert abs(improvement_metric(*accs) - published) <= 1


def test_improvement_examples():
    assert improvement_metric(0.9123, 0.9365, 0.6269, 0.4774) == 185
    assert improvement_metric(0.9793, 0.9517, 0.7263, 0.6034) == 112
    assert improvement_metric(0.8, 0.5, 0.5, 0.8) == 0
    with pytest.raises(ZeroDivisionError):
        improvement_metric(0.9, 0.9, 0.0, 0.5)
    with pytest.raises(ValueError):
        improvement_metric(1.2, 0.9, 0.5, 0.5)


def test_per_100_normalization():
    m = Metrics(requests=10_000, replacements=50)
    assert m.per_100(m.replacements) == 0.5
    assert m.as_row()["replacements_per_100"] == 0.5


def _report():
    t = generate_synthetic(category_profile(WorkloadCategory.FileServer, seed=0, hot_set_pages=300), 2500)
    return compare_report(t, 60, ["lru", "larc", "access", "belady"], config={"seed": 0})


def test_compare_report_normalizes_by_belady():
    rep = _report()
    table = rep.table()
    assert list(table["policy"]) == ["lru", "larc", "access", "belady"]
    belady = table.set_index("policy").loc["belady"]
    assert belady["normalized_hit_ratio"] == pytest.approx(1.0)
    assert (table["normalized_hit_ratio"] <= 1.0 + 1e-12).all()
    assert rep.config["capacity_pages"] == 60 and rep.config["seed"] == 0


def test_compare_report_without_belady_row_still_normalizes():
    t = trace_of([1, 2, 3, 1, 2, 3])
    rep = compare_report(t, 2, ["lru"])
    assert rep.belady_hit_ratio == pytest.approx(2 / 6)
    assert rep.normalized_hit_ratio("lru") == 0.0


def test_compare_report_is_deterministic():
    pd.testing.assert_frame_equal(_report().table(), _report().table())


def test_report_files(tmp_path):
    rep = _report()
    written = rep.write(tmp_path / "out")
    assert [p.name for p in written] == ["summary.csv", "metrics_long.csv", "report.json", "window_series.csv"]
    summary = pd.read_csv(written[0])
    assert len(summary) == 4
    long = pd.read_csv(written[1])
    assert set(long.columns) == {"policy", "metric", "value"}
    assert len(long) == 4 * (summary.shape[1] - 1)
    payload = json.loads(written[2].read_text())
    assert payload["config"]["capacity_pages"] == 60
    series = pd.read_csv(written[3])
    assert set(series["policy"]) == {"lru", "larc", "access", "belady"}
    assert (series.groupby("policy").size() == 3).all()


def test_empty_report_normalization_is_nan():
    rep = SimulationReport({"lru": Metrics(policy="lru")})
    assert np.isnan(rep.normalized_hit_ratio("lru"))
