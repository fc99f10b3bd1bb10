from __future__ import annotations
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Iterable, List, Optional, Sequence, Tuple

PAGE_SIZE = 4096
HEADER = "timestamp_us,page_id,size_pages,op"


class Op(Enum):
    READ = "R"
    WRITE = "W"


class WorkloadCategory(Enum):
    MailServer = 0
    WebServer = 1
    Database = 2
    FileServer = 3


class TraceFormatError(ValueError):
    """Malformed trace file; `line_no` is 1-based (0 when not tied to a line)."""
    def __init__(self, message: str, line_no: int = 0):
        self.line_no = line_no
        super().__init__(f"line {line_no}: {message}" if line_no else message)


@dataclass(frozen=True)
class IoRequest:
    timestamp_us: int
    page_id: int
    size_pages: int
    op: Op

    @property
    def is_read(self) -> bool:
        return self.op is Op.READ

    @property
    def size_bytes(self) -> int:
        return self.size_pages * PAGE_SIZE

    @property
    def end_page(self) -> int:
        """One past the last page touched."""
        return self.page_id + self.size_pages

    def pages(self) -> range:
        return range(self.page_id, self.page_id + self.size_pages)


@dataclass(frozen=True)
class Segment:
    start: int
    category: WorkloadCategory


@dataclass
class Trace:
    requests: List[IoRequest]
    category: Optional[WorkloadCategory] = None
    segments: Tuple[Segment, ...] = field(default_factory=tuple)

    def __post_init__(self):
        validate(self.requests)

    def __len__(self) -> int:
        return len(self.requests)

    def __iter__(self):
        return iter(self.requests)

    def __getitem__(self, i):
        return self.requests[i]

    def category_at(self, index: int) -> Optional[WorkloadCategory]:
        """Ground-truth category of request `index` (segments win over the trace label)."""
        cat = self.category
        for seg in self.segments:
            if seg.start > index:
                break
            cat = seg.category
        return cat


def validate(requests: Sequence[IoRequest]) -> None:
    if not requests:
        raise TraceFormatError("empty trace")
    prev_ts = None
    for i, r in enumerate(requests):
        if r.size_pages < 1:
            raise TraceFormatError(f"request {i}: size_pages must be ≥ 1")
        if r.page_id < 0:
            raise TraceFormatError(f"request {i}: page_id must be ≥ 0")
        if prev_ts is not None and r.timestamp_us < prev_ts:
            raise TraceFormatError(f"request {i}: non-monotonic timestamp {r.timestamp_us} < {prev_ts}")
        prev_ts = r.timestamp_us


def _parse_category(name: str, line_no: int) -> WorkloadCategory:
    try:
        return WorkloadCategory[name.strip()]
    except KeyError:
        raise TraceFormatError(f"unknown category {name.strip()!r}", line_no) from None


def parse_trace(path: Path | str) -> Trace:
    """Read a trace CSV (header `timestamp_us,page_id,size_pages,op`, op in {R,W})."""
    category: Optional[WorkloadCategory] = None
    segments: List[Segment] = []
    requests: List[IoRequest] = []
    seen_header = False
    prev_ts: Optional[int] = None

    with open(path, "r", encoding="utf-8", newline="") as f:
        for line_no, raw in enumerate(f, start=1):
            line = raw.rstrip("\r\n")
            if not line:
                continue
            if line.startswith("#"):
                key, _, value = line[1:].strip().partition("=")
                key = key.strip()
                if key == "category":
                    category = _parse_category(value, line_no)
                elif key == "segment":
                    start, _, name = value.partition(":")
                    try:
                        segments.append(Segment(int(start), _parse_category(name, line_no)))
                    except ValueError as e:
                        if isinstance(e, TraceFormatError):
                            raise
                        raise TraceFormatError(f"bad segment {value!r}", line_no) from None
                continue
            if not seen_header:
                if line.replace(" ", "") != HEADER:
                    raise TraceFormatError(f"expected header {HEADER!r}", line_no)
                seen_header = True
                continue

            parts = line.split(",")
            if len(parts) != 4:
                raise TraceFormatError(f"expected 4 fields, got {len(parts)}", line_no)
            try:
                ts, pid, size = int(parts[0]), int(parts[1]), int(parts[2])
            except ValueError:
                raise TraceFormatError(f"non-integer field in {line!r}", line_no) from None
            code = parts[3].strip()
            if code not in ("R", "W"):
                raise TraceFormatError(f"unknown op code {code!r}", line_no)
            if size < 1:
                raise TraceFormatError("size_pages must be ≥ 1", line_no)
            if pid < 0:
                raise TraceFormatError("page_id must be ≥ 0", line_no)
            if prev_ts is not None and ts < prev_ts:
                raise TraceFormatError(f"non-monotonic timestamp {ts} < {prev_ts}", line_no)
            prev_ts = ts
            requests.append(IoRequest(ts, pid, size, Op(code)))

    if not requests:
        raise TraceFormatError("empty trace")
    return Trace(requests, category=category, segments=tuple(segments))


def format_rows(trace: Trace) -> Iterable[str]:
    if trace.category is not None:
        yield f"# category={trace.category.name}"
    for seg in trace.segments:
        yield f"# segment={seg.start}:{seg.category.name}"
    yield HEADER
    for r in trace.requests:
        yield f"{r.timestamp_us},{r.page_id},{r.size_pages},{r.op.value}"


def write_trace(trace: Trace, path: Path | str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="\n") as f:
        for line in format_rows(trace):
            f.write(line + "\n")


def split_windows(trace: Trace | Sequence[IoRequest], window_len: int) -> List[List[IoRequest]]:
    """Non-overlapping consecutive windows; a trailing partial window is dropped."""
    if window_len < 1:
        raise ValueError("window_len must be ≥ 1")
    reqs = trace.requests if isinstance(trace, Trace) else list(trace)
    n = len(reqs) // window_len
    return [list(reqs[k * window_len:(k + 1) * window_len]) for k in range(n)]


def working_set_pages(trace: Trace) -> int:
    pages = set()
    for r in trace.requests:
        pages.update(r.pages())
    return len(pages)


def capacity_for_working_set(trace: Trace, fraction: float = 0.2) -> int:
    """Cache size in pages as a fraction of the distinct pages the trace touches."""
    if not 0 < fraction <= 1:
        raise ValueError("fraction must be in (0, 1]")
    return max(1, int(working_set_pages(trace) * fraction))
