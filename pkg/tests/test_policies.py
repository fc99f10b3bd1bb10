import numpy as np
import pytest

from src.engine.metrics import Metrics
from src.oracle.labels import DurationLabel
from src.policies.access import AccessFrequencyPolicy
from src.policies.base import Decision, LruList
from src.policies.larc import LarcPolicy
from src.policies.lru import LruPolicy
from src.policies.rcrnn import RcRnnPolicy
from src.traces.generator import category_profile, generate_synthetic
from src.traces.trace import WorkloadCategory
from tests.helpers import req, trace_of

H, A, B = Decision.HIT, Decision.MISS_ADMIT, Decision.MISS_BYPASS
Soon, Mean, Late = DurationLabel.Soon, DurationLabel.Mean, DurationLabel.Late


def _run(policy, pages, sizes=None):
    return [policy.on_access(r, i).decision for i, r in enumerate(trace_of(pages, sizes))]


def _replay(policy, trace):
    m = Metrics(policy=policy.name)
    for i, r in enumerate(trace):
        m.record(r, policy.on_access(r, i))
        assert len(policy) <= policy.capacity
    return m.finish()


def test_lru_list_order():
    q = LruList()
    for p in (1, 2, 3):
        q.push_head(p)
    q.push_tail(4)
    q.touch(1)
    assert list(q) == [1, 3, 2, 4]
    assert q.tail() == 4
    assert q.head_items(2) == [1, 3]
    assert q.pop_tail() == 4


# ---------- LRU ----------

@pytest.mark.parametrize("pages,cap,expected", [
    ([1, 2, 1], 2, [A, A, H]),
    ([1, 2, 3, 1, 2, 3], 2, [A] * 6),
    ([1, 2, 3, 1], 3, [A, A, A, H]),
])
def test_lru(pages, cap, expected):
    assert _run(LruPolicy(cap), pages) == expected


def test_lru_partial_hit_is_a_miss_and_oversize_bypasses():
    p = LruPolicy(3)
    assert _run(p, [0, 0, 10], sizes=[1, 2, 4]) == [A, A, B]
    assert sorted(p.resident_pages()) == [0, 1]


def test_capacity_must_be_positive():
    with pytest.raises(ValueError):
        LruPolicy(0)


# ---------- access frequency ----------

def test_access_keeps_hotter_page():
    assert _run(AccessFrequencyPolicy(1), [1, 1, 2, 1]) == [A, H, B, H]


def test_access_ties_evict_least_recent():
    p = AccessFrequencyPolicy(2)
    decisions = [p.on_access(r, i) for i, r in enumerate(trace_of([1, 2, 3, 3]))]
    assert [d.decision for d in decisions] == [A, A, B, A]
    assert decisions[3].evicted == (1,)


# ---------- LARC ----------

def test_larc_promotes_on_second_miss():
    assert _run(LarcPolicy(1), [1, 1, 1]) == [B, A, H]


def test_larc_scan_never_writes():
    m = _replay(LarcPolicy(10), trace_of(list(range(100))))
    assert m.admissions == 0 and m.ssd_writes == 0 and m.hits == 0


def test_larc_ghost_is_bounded():
    p = LarcPolicy(4, ghost_capacity=2)
    assert _run(p, [1, 2, 3, 1]) == [B, B, B, B]
    assert len(p.ghost) == 2
    assert set(p.ghost).isdisjoint(p.main)


def test_larc_writes_no_more_than_lru():
    for t in (trace_of(list(range(500))),
              generate_synthetic(category_profile(WorkloadCategory.WebServer, seed=2), 5000)):
        assert _replay(LarcPolicy(200), t).ssd_writes <= _replay(LruPolicy(200), t).ssd_writes


# ---------- RC-RNN manager ----------

def test_rcrnn_bypass_leaves_cache_unchanged():
    p = RcRnnPolicy(4)
    assert p.on_access(req(1), 0, (False, Late)).decision is B
    assert len(p) == 0


def test_rcrnn_admits_into_label_queue_and_hits_stay_put():
    p = RcRnnPolicy(4)
    p.on_access(req(1), 0, (True, Mean))
    p.on_access(req(2), 1, (True, Mean))
    p.on_access(req(3), 2, (True, Late))
    assert p.queue_of(3) is Late
    assert list(p.queues[Mean]) == [2, 1]
    # the model's label is ignored on a hit
    assert p.on_access(req(1), 3, (True, Soon)).decision is H
    assert p.queue_of(1) is Mean
    assert list(p.queues[Mean]) == [1, 2]


def test_rcrnn_eviction_order():
    p = RcRnnPolicy(4)
    p.on_access(req(2), 0, (True, Soon))
    p.on_access(req(1), 1, (True, Soon))
    p.on_access(req(3), 2, (True, Mean))
    p.on_access(req(4), 3, (True, Late))
    assert p.evict() == 2
    assert p.evict() == 1
    assert p.evict() == 3
    assert p.evict() == 4
    with pytest.raises(RuntimeError):
        p.evict()


def test_rcrnn_full_cache_evicts_from_soon_first():
    p = RcRnnPolicy(2)
    p.on_access(req(1), 0, (True, Late))
    p.on_access(req(2), 1, (True, Soon))
    out = p.on_access(req(3), 2, (True, Late))
    assert out.evicted == (2,)
    assert sorted(p.resident_pages()) == [1, 3]


def _late_cache(one_shot=False):
    p = RcRnnPolicy(10, one_shot_demotion=one_shot)
    for i in range(10):
        p.on_access(req(i), i, (True, Late))
    return p


def test_rcrnn_demotion_spares_top_of_queue():
    p = _late_cache()
    p.demote(49)
    assert p.demotions == 0          # page 0 is due at 50
    p.demote(59)
    assert set(p.queues[Late]) == {8, 9}
    assert set(p.queues[Mean]) == set(range(8))
    assert p.queues[Mean].tail() == 7
    assert p.demotions == 8


def test_rcrnn_demotion_rearms_unless_one_shot():
    p = _late_cache()
    p.demote(59)
    p.demote(109)
    assert p.queue_of(5) is Soon
    assert p.queue_of(0) is Mean     # top of Mean at the time
    q = _late_cache(one_shot=True)
    q.demote(59)
    q.demote(109)
    assert q.queue_of(5) is Mean


def test_rcrnn_exempt_page_is_demoted_once_pushed_out_of_the_top():
    p = _late_cache()
    p.demote(59)
    p.demote(60)                     # Late shrank to {8, 9}: only 9 stays exempt
    assert p.queue_of(8) is Mean and p.queue_of(9) is Late
    for i in range(60, 70):
        p.demote(i)
    assert p.queue_of(9) is Late and p.demotions == 9
    out = p.on_access(req(20), 70, (True, Late))
    assert out.evicted == (8,)       # tail of Mean
    assert list(p.queues[Late]) == [20, 9]
    p.demote(71)
    assert p.queue_of(9) is Mean and p.demotions == 10


def test_rcrnn_soon_pages_never_demoted():
    p = RcRnnPolicy(2)
    p.on_access(req(1), 0, (True, Soon))
    p.demote(10_000)
    assert p.queue_of(1) is Soon and p.demotions == 0


def test_rcrnn_relabel_keeps_residents_and_recency():
    p = RcRnnPolicy(5)
    for i, lbl in enumerate([Late, Mean, Late, Soon]):
        p.on_access(req(i), i, (True, lbl))
    p.relabel({i: Soon for i in range(4)})
    assert sorted(p.resident_pages()) == [0, 1, 2, 3]
    assert list(p.queues[Soon]) == [3, 2, 1, 0]
    assert len(p.queues[Late]) == 0 and len(p.queues[Mean]) == 0


def test_rcrnn_with_admit_all_soon_is_lru():
    rng = np.random.default_rng(0)
    pages = rng.integers(0, 60, size=2000).tolist()
    sizes = rng.integers(1, 4, size=2000).tolist()
    t = trace_of(pages, sizes)
    lru, rc = LruPolicy(20), RcRnnPolicy(20)
    for i, r in enumerate(t):
        assert lru.on_access(r, i) == rc.on_access(r, i, (True, Soon))


# ---------- shared properties ----------

@pytest.mark.parametrize("make", [
    lambda: LruPolicy(16), lambda: LarcPolicy(16), lambda: AccessFrequencyPolicy(16),
])
def test_residency_and_conservation_on_random_trace(make):
    rng = np.random.default_rng(5)
    t = trace_of(rng.integers(0, 80, size=3000).tolist(), sizes=rng.integers(1, 5, size=3000).tolist(),
                 ops="".join(rng.choice(["R", "W"], size=3000)))
    m = _replay(make(), t)
    assert m.conservation_violations() == []
    assert m.hits + m.admissions + m.bypasses == len(t)
