import pytest

from src.traces.trace import (
    HEADER, IoRequest, Op, Segment, Trace, TraceFormatError, WorkloadCategory,
    capacity_for_working_set, parse_trace, split_windows, working_set_pages, write_trace,
)
from tests.helpers import trace_of


def _write(tmp_path, text):
    p = tmp_path / "t.csv"
    p.write_text(text)
    return p


def test_request_geometry():
    r = IoRequest(0, 10, 3, Op.WRITE)
    assert list(r.pages()) == [10, 11, 12]
    assert r.end_page == 13
    assert r.size_bytes == 3 * 4096
    assert not r.is_read


def test_parse_minimal(tmp_path):
    p = _write(tmp_path, f"{HEADER}\n0,5,1,R\n10,6,2,W\n")
    t = parse_trace(p)
    assert len(t) == 2
    assert t[1] == IoRequest(10, 6, 2, Op.WRITE)
    assert t.category is None


def test_written_file_reads_back_with_segments(tmp_path):
    t = Trace(trace_of([1, 2, 3, 4]).requests,
              segments=(Segment(0, WorkloadCategory.MailServer), Segment(2, WorkloadCategory.WebServer)))
    p = tmp_path / "out" / "t.csv"
    write_trace(t, p)
    back = parse_trace(p)
    assert back.requests == t.requests
    assert back.segments == t.segments
    assert "# segment=2:WebServer" in p.read_text()


@pytest.mark.parametrize("body,fragment,line", [
    ("", "empty trace", 0),
    ("0,1,0,R\n", "size_pages must be", 2),
    ("0,1,1,X\n", "unknown op code", 2),
    ("5,1,1,R\n4,1,1,R\n", "non-monotonic timestamp", 3),
    ("0,1,1\n", "expected 4 fields", 2),
])
def test_parse_errors(tmp_path, body, fragment, line):
    p = _write(tmp_path, HEADER + "\n" + body)
    with pytest.raises(TraceFormatError) as ei:
        parse_trace(p)
    assert fragment in str(ei.value)
    assert ei.value.line_no == line


def test_bad_header(tmp_path):
    with pytest.raises(TraceFormatError):
        parse_trace(_write(tmp_path, "a,b,c,d\n0,1,1,R\n"))


def test_category_comment(tmp_path):
    t = parse_trace(_write(tmp_path, f"# category=Database\n{HEADER}\n0,1,1,R\n"))
    assert t.category is WorkloadCategory.Database
    assert t.category_at(0) is WorkloadCategory.Database


def test_category_at_follows_segments():
    t = Trace(trace_of(range(10)).requests,
              segments=(Segment(0, WorkloadCategory.FileServer), Segment(5, WorkloadCategory.MailServer)))
    assert t.category_at(4) is WorkloadCategory.FileServer
    assert t.category_at(5) is WorkloadCategory.MailServer
    assert t.category_at(9) is WorkloadCategory.MailServer


def test_trace_rejects_empty_and_unordered():
    with pytest.raises(TraceFormatError):
        Trace([])
    with pytest.raises(TraceFormatError):
        Trace([IoRequest(5, 0, 1, Op.READ), IoRequest(1, 0, 1, Op.READ)])


def test_split_windows_drops_partial_tail():
    t = trace_of(range(250))
    wins = split_windows(t, 100)
    assert [len(w) for w in wins] == [100, 100]
    assert wins[1][0].page_id == 100
    with pytest.raises(ValueError):
        split_windows(t, 0)


def test_working_set_counts_every_covered_page():
    t = trace_of([0, 2, 10], sizes=[3, 1, 2])
    assert working_set_pages(t) == 5   # 0,1,2 + 10,11
    assert capacity_for_working_set(t, 0.2) == 1
    assert capacity_for_working_set(trace_of(range(1000)), 0.2) == 200
    with pytest.raises(ValueError):
        capacity_for_working_set(t, 0.0)
