import numpy as np
import pytest

from src.traces.generator import (
    SCENARIOS, TRACE_STATS, GeneratorProfile, category_profile, concatenate,
    generate_scenario, generate_synthetic, interleave, profile_for_trace,
)
from src.traces.trace import WorkloadCategory


def test_same_seed_same_trace():
    p = category_profile(WorkloadCategory.MailServer, seed=1)
    assert generate_synthetic(p, 500).requests == generate_synthetic(p, 500).requests
    other = category_profile(WorkloadCategory.MailServer, seed=2)
    assert generate_synthetic(other, 500).requests != generate_synthetic(p, 500).requests


def test_timestamps_start_at_zero_and_never_decrease():
    t = generate_synthetic(category_profile(WorkloadCategory.Database, seed=3), 2000)
    ts = [r.timestamp_us for r in t]
    assert ts[0] == 0
    assert all(b >= a for a, b in zip(ts, ts[1:]))
    assert t.category is WorkloadCategory.Database


def test_read_fraction_and_size_follow_profile():
    p = GeneratorProfile(read_ratio=0.7, mean_size_kb=40.0, seed=5)
    t = generate_synthetic(p, 20000)
    reads = np.mean([r.is_read for r in t])
    sizes = np.mean([r.size_pages for r in t])
    assert reads == pytest.approx(0.7, abs=0.02)
    assert sizes == pytest.approx(10.0, rel=0.1)
    assert min(r.size_pages for r in t) >= 1


@pytest.mark.parametrize("category,low,high,mean_kb", [
    (WorkloadCategory.MailServer, 0.669, 0.769, 42.0),
    (WorkloadCategory.WebServer, 0.877, 0.977, 4.0),
])
def test_default_profiles_match_reference_rows(category, low, high, mean_kb):
    t = generate_synthetic(category_profile(category, seed=0), 20_000)
    reads = np.mean([r.is_read for r in t])
    assert low <= reads <= high
    assert np.mean([r.size_bytes for r in t]) / 1024 == pytest.approx(mean_kb, rel=0.1)


def test_four_kb_profiles_issue_single_page_requests():
    t = generate_synthetic(category_profile(WorkloadCategory.WebServer, seed=0), 3000)
    assert {r.size_pages for r in t} == {1}


def test_sequential_runs_continue_previous_request():
    p = GeneratorProfile(read_ratio=1.0, mean_size_kb=8.0, seq_run_prob=1.0, seed=0)
    t = generate_synthetic(p, 100)
    assert all(b.page_id == a.end_page for a, b in zip(t.requests, t.requests[1:]))


def test_random_accesses_stay_in_hot_set():
    p = GeneratorProfile(read_ratio=0.5, mean_size_kb=4.0, seq_run_prob=0.0,
                         hot_set_pages=64, base_page=1000, seed=0)
    t = generate_synthetic(p, 5000)
    assert all(1000 <= r.page_id < 1064 for r in t)
    # rank 0 is the most popular page under Zipf
    counts = np.bincount([r.page_id - 1000 for r in t], minlength=64)
    assert counts.argmax() == 0


def test_profile_validation():
    with pytest.raises(ValueError):
        GeneratorProfile(read_ratio=1.5, mean_size_kb=4.0)
    with pytest.raises(ValueError):
        GeneratorProfile(read_ratio=0.5, mean_size_kb=0.0)
    with pytest.raises(ValueError, match="mean_size_kb"):
        GeneratorProfile(read_ratio=0.5, mean_size_kb=2.0)
    with pytest.raises(ValueError):
        generate_synthetic(GeneratorProfile(read_ratio=0.5, mean_size_kb=4.0), 0)


def test_reference_rows():
    assert len(TRACE_STATS) == 13
    assert TRACE_STATS["MS_live_maps"].read_fraction == 1.0
    assert TRACE_STATS["web_server"].read_fraction == pytest.approx(12.7 / 13.7)
    p = profile_for_trace("Radius_Auth")
    assert p.category is WorkloadCategory.WebServer
    assert p.mean_size_kb == pytest.approx(12.44)
    with pytest.raises(ValueError):
        profile_for_trace("nope")


def test_interleave_round_robin_chunks():
    a = generate_synthetic(category_profile(WorkloadCategory.MailServer, seed=0), 2500)
    b = generate_synthetic(category_profile(WorkloadCategory.WebServer, seed=1), 1000)
    t = interleave([a, b], chunk=1000)
    assert len(t) == 3500
    assert [(s.start, s.category) for s in t.segments] == [
        (0, WorkloadCategory.MailServer), (1000, WorkloadCategory.WebServer),
        (2000, WorkloadCategory.MailServer),
    ]
    assert t.category_at(2999) is WorkloadCategory.MailServer
    ts = [r.timestamp_us for r in t]
    assert all(y >= x for x, y in zip(ts, ts[1:]))


def test_concatenate_marks_the_switch():
    a = generate_synthetic(category_profile(WorkloadCategory.FileServer, seed=0), 300)
    b = generate_synthetic(category_profile(WorkloadCategory.Database, seed=1), 200)
    t = concatenate([a, b])
    assert len(t) == 500
    assert t.category_at(299) is WorkloadCategory.FileServer
    assert t.category_at(300) is WorkloadCategory.Database


def test_single_category_merge_keeps_plain_label():
    a = generate_synthetic(category_profile(WorkloadCategory.FileServer, seed=0), 300)
    t = concatenate([a, a])
    assert t.category is WorkloadCategory.FileServer
    assert t.segments == ()


@pytest.mark.parametrize("name,expected", [
    ("single", [WorkloadCategory.WebServer, WorkloadCategory.MailServer]),
    ("storage", [WorkloadCategory.Database, WorkloadCategory.FileServer,
                 WorkloadCategory.WebServer, WorkloadCategory.MailServer]),
])
def test_scenarios_interleave_their_workloads(name, expected):
    t = generate_scenario(name, 1000, seed=0)
    assert len(t) == 1000 * len(SCENARIOS[name])
    assert [s.category for s in t.segments] == expected
    # each stream lives in its own address region
    starts = {s.category: t[s.start].page_id >> 20 for s in t.segments}
    assert len(set(starts.values())) == len(expected)


def test_unknown_scenario():
    with pytest.raises(ValueError):
        generate_scenario("cloud", 10)
