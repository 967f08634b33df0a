"""Reading, writing, censoring, and indexing of cascade files.

File format: one event per line, `time_seconds,followers`, where the first
line is the origin post at time 0 with the author's follower count. An
optional header line `time,magnitude` is skipped. A corpus is a directory of
`<id>.csv` files, optionally listed by an `index.csv` manifest with columns
`id,path,n_events`.
"""

from __future__ import annotations

import io
import os
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .model import Cascade, MarkDistribution

__all__ = [
    "ParseError",
    "CascadeFile",
    "CorpusIndex",
    "parse_cascade",
    "load_cascade",
    "serialize_cascade",
    "censor",
    "empirical_marks",
    "build_corpus_index",
]

WEEK_SECONDS = 7 * 86400.0


class ParseError(ValueError):
    """Malformed cascade file; carries the offending line number."""

    def __init__(self, line_no, message):
        self.line_no = line_no
        super().__init__(f"line {line_no}: {message}")


@dataclass(frozen=True)
class CascadeFile:
    """A cascade together with its on-disk identity."""

    id: str
    path: Path
    cascade: Cascade


def _parse_number(field, line_no, what):
    try:
        value = float(field)
    except ValueError:
        raise ParseError(line_no, f"{what} is not a number: {field!r}") from None
    if not np.isfinite(value):
        raise ParseError(line_no, f"{what} is not finite: {field!r}")
    return value


def _parse_mark(field, line_no):
    value = _parse_number(field, line_no, "mark")
    if value < 0:
        raise ParseError(line_no, f"mark is negative: {field!r}")
    if value != int(value):
        raise ParseError(line_no, f"mark is not an integer: {field!r}")
    return int(value)


def parse_cascade(source) -> Cascade:
    """Parse a cascade from a text stream, string, or iterable of lines.

    The first data row must be the origin at time 0; later rows are events.
    Times must be nonnegative; rows out of order are sorted (stably) with a
    warning. Errors report 1-based line numbers.
    """
    if isinstance(source, str):
        source = io.StringIO(source)
    rows = []
    origin_mark = None
    header_skipped = False
    for line_no, raw in enumerate(source, start=1):
        line = raw.strip()
        if not line:
            continue
        parts = [p.strip() for p in line.split(",")]
        if len(parts) != 2:
            raise ParseError(line_no, f"expected 'time,mark', got {line!r}")
        if origin_mark is None and not header_skipped:
            # allow a single header row like "time,magnitude"
            try:
                float(parts[0])
            except ValueError:
                header_skipped = True
                continue
        t = _parse_number(parts[0], line_no, "time")
        m = _parse_mark(parts[1], line_no)
        if t < 0:
            raise ParseError(line_no, f"time is negative: {parts[0]!r}")
        if origin_mark is None:
            if t != 0.0:
                raise ParseError(line_no, f"origin row must have time 0, got {parts[0]!r}")
            origin_mark = m
        else:
            rows.append((t, m))
    if origin_mark is None:
        raise ParseError(0, "no origin row found")
    times = np.array([r[0] for r in rows], dtype=np.float64)
    marks = np.array([r[1] for r in rows], dtype=np.int64)
    if times.size and np.any(np.diff(times) < 0):
        warnings.warn("event times out of order; sorting stably", stacklevel=2)
        order = np.argsort(times, kind="stable")
        times, marks = times[order], marks[order]
    return Cascade(origin_mark=origin_mark, times=times, marks=marks)


def load_cascade(path) -> CascadeFile:
    path = Path(path)
    with open(path, "r", encoding="utf-8") as fh:
        cascade = parse_cascade(fh)
    return CascadeFile(id=path.stem, path=path, cascade=cascade)


def serialize_cascade(cascade: Cascade, stream) -> None:
    """Write a cascade in the file format (no header row).

    Times are written with repr so a parse -> serialize -> parse round trip
    is the identity.
    """
    stream.write(f"0,{cascade.origin_mark}\n")
    for t, m in zip(cascade.times.tolist(), cascade.marks.tolist()):
        stream.write(f"{t!r},{m}\n")


def save_cascade(cascade: Cascade, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        serialize_cascade(cascade, fh)


def censor(cascade: Cascade, T: float) -> Cascade:
    """Restrict a cascade to events in the closed window [0, T].

    Idempotent: censoring twice at the same T gives the same cascade.
    """
    if T < 0 or not np.isfinite(T):
        raise ValueError("censor time must be finite and nonnegative")
    keep = cascade.times <= T
    return Cascade(origin_mark=cascade.origin_mark,
                   times=cascade.times[keep], marks=cascade.marks[keep])


def empirical_marks(cascade: Cascade, T: float | None = None) -> MarkDistribution:
    """Multiset of event marks within [0, T]; the origin mark is excluded."""
    if T is None:
        marks = cascade.marks
    else:
        marks = censor(cascade, T).marks
    return MarkDistribution(marks=marks)


@dataclass(frozen=True)
class CorpusIndex:
    """Listing of a cascade corpus directory."""

    directory: Path
    ids: tuple
    paths: tuple
    n_events: tuple

    def __len__(self):
        return len(self.ids)

    def load(self, i) -> CascadeFile:
        return load_cascade(self.paths[i])


def build_corpus_index(directory, min_final_count: int = 1,
                       horizon: float = WEEK_SECONDS) -> CorpusIndex:
    """Index a corpus directory, preferring its index.csv manifest.

    Without a manifest, every *.csv file (sorted by id) is included. Entries
    whose event count within the horizon falls below min_final_count are
    dropped, which keeps downstream relative errors well defined.
    """
    directory = Path(directory)
    if not directory.is_dir():
        raise ValueError(f"not a directory: {directory}")
    manifest = directory / "index.csv"
    entries = []
    if manifest.exists():
        with open(manifest, "r", encoding="utf-8") as fh:
            for line_no, raw in enumerate(fh, start=1):
                line = raw.strip()
                if not line or (line_no == 1 and line.lower().startswith("id,")):
                    continue
                parts = [p.strip() for p in line.split(",")]
                if len(parts) != 3:
                    raise ParseError(line_no, f"manifest row needs id,path,n_events: {line!r}")
                entries.append((parts[0], directory / parts[1]))
    else:
        for path in sorted(directory.glob("*.csv")):
            if path.name == "index.csv":
                continue
            entries.append((path.stem, path))
    ids, paths, counts = [], [], []
    seen = set()
    for cid, path in entries:
        if cid in seen:
            raise ValueError(f"duplicate cascade id {cid!r} in corpus")
        seen.add(cid)
        cascade = load_cascade(path).cascade
        n = int(np.sum(cascade.times <= horizon))
        if n < min_final_count:
            continue
        ids.append(cid)
        paths.append(path)
        counts.append(n)
    return CorpusIndex(directory=directory, ids=tuple(ids),
                       paths=tuple(paths), n_events=tuple(counts))
