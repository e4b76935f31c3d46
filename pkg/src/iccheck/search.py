"""Sliding-window clone search over snapshot files.

Every window of query-length consecutive lines in every eligible file is
scored with the weighted bigram-Dice similarity; windows at or above the
threshold are candidates, and overlapping or adjacent candidates merge
into one region keeping the union span and the maximum score. Scoring
runs on the vectorized kernels (numba by default, numpy fallback), which
are exact: candidate sets are bit-identical to naive per-window
recomputation with :func:`iccheck.similarity.fragment_similarity`.

Files are independent units of work and fan out to a thread pool; results
reassemble in path order, so worker count and scheduling never change the
output.
"""

from __future__ import annotations

import hashlib
import os
import threading
import time
import weakref
from concurrent.futures import Executor, ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Protocol

import numpy as np

from .changes import QueryFragment
from .gitio import DEFAULT_FILE_SIZE_CAP, FileContent, Snapshot
from .kernels import CorpusIndex, encode_line, get_backend
from .similarity import line_weight

DEFAULT_THRESHOLD = 0.7  # fragment pairs at or above this count as clones


@dataclass(frozen=True)
class SearchParams:
    threshold: float = DEFAULT_THRESHOLD
    window_step: int = 1
    file_size_cap: int = DEFAULT_FILE_SIZE_CAP
    time_budget: float | None = None  # seconds; None = unbounded
    workers: int | None = None  # None = available CPU parallelism

    def __post_init__(self) -> None:
        if not 0.0 < self.threshold <= 1.0:
            raise ValueError(f"threshold must be in (0, 1], got {self.threshold}")
        if self.window_step < 1:
            raise ValueError(f"window_step must be positive, got {self.window_step}")


@dataclass(frozen=True)
class CloneRegion:
    path: str
    start_line: int  # 1-based inclusive
    end_line: int
    similarity: float

    def sort_key(self) -> tuple[str, int, int]:
        return (self.path, self.start_line, self.end_line)


class SearchTimeout(Exception):
    """Time budget exhausted; carries whatever regions completed."""

    def __init__(self, partial: list[CloneRegion]):
        super().__init__("clone search exceeded its time budget")
        self.partial = partial


class RegionCache(Protocol):
    """Optional per-(query, file-content) memo consulted by the search."""

    def get(self, query_key: str, path: str, content_key: str) -> list[CloneRegion] | None: ...

    def put(
        self, query_key: str, path: str, content_key: str, regions: list[CloneRegion]
    ) -> None: ...


def query_key(lines: tuple[str, ...]) -> str:
    """Content hash identifying a query fragment for caching."""
    return hashlib.sha1("\n".join(lines).encode("utf-8")).hexdigest()


def _merge_windows(candidates: list[tuple[int, int, float]]) -> list[tuple[int, int, float]]:
    """Collapse overlapping/adjacent above-threshold windows into regions."""
    merged: list[list] = []
    for start, end, sim in candidates:
        if merged and start <= merged[-1][1] + 1:
            merged[-1][1] = max(merged[-1][1], end)
            merged[-1][2] = max(merged[-1][2], sim)
        else:
            merged.append([start, end, sim])
    return [(s, e, v) for s, e, v in merged]


def _query_arrays(query_lines: tuple[str, ...]):
    qdatas = [encode_line(line) for line in query_lines]
    weights = np.array([float(line_weight(line)) for line in query_lines])
    return qdatas, weights, float(weights.sum())


def candidate_windows(
    query_lines: tuple[str, ...],
    file_lines: tuple[str, ...],
    params: SearchParams,
) -> list[tuple[int, int, float]]:
    """Pre-merge candidate windows of one file: (start, end, similarity).

    This is the raw sliding-window result the merge step consumes; exposed
    so it can be checked against naive full enumeration.
    """
    corpus = CorpusIndex()
    corpus.add_file("f", list(file_lines))
    corpus.freeze()
    qdatas, weights, wsum = _query_arrays(query_lines)
    backend = get_backend()
    dice_mat = np.stack(
        [backend.dice_row(q, corpus.data, corpus.offsets, corpus.lengths) for q in qdatas]
    ) if corpus.n_lines else np.zeros((len(qdatas), 0))
    scores = backend.window_scores(
        dice_mat, corpus.file_uids("f"), weights, wsum, params.window_step
    )
    m = len(query_lines)
    out = []
    for k in np.nonzero(scores >= params.threshold)[0]:
        s = int(k) * params.window_step
        out.append((s + 1, s + m, float(scores[k])))
    return out


def search_file(
    query: QueryFragment, file: FileContent, params: SearchParams
) -> list[CloneRegion]:
    """All merged clone regions of one file, sorted by start line."""
    if file.is_binary:
        raise ValueError(f"cannot search binary file {file.path}")
    candidates = candidate_windows(query.lines, file.lines, params)
    return [
        CloneRegion(file.path, s, e, v) for s, e, v in _merge_windows(candidates)
    ]


# corpus indexes are heavy; memoize them per live snapshot object
_corpus_memo: "weakref.WeakKeyDictionary[Snapshot, dict[int, CorpusIndex]]" = (
    weakref.WeakKeyDictionary()
)
_corpus_memo_lock = threading.Lock()


def _corpus_for(snapshot: Snapshot, size_cap: int) -> CorpusIndex:
    with _corpus_memo_lock:
        per_cap = _corpus_memo.setdefault(snapshot, {})
        corpus = per_cap.get(size_cap)
    if corpus is not None:
        return corpus
    corpus = CorpusIndex()
    for path in sorted(snapshot.files):
        content = snapshot.read_file(path, size_cap)
        if not content.is_binary:
            corpus.add_file(path, list(content.lines))
    corpus.freeze()
    with _corpus_memo_lock:
        _corpus_memo[snapshot][size_cap] = corpus
    return corpus


def _scan_file(
    backend,
    corpus: CorpusIndex,
    path: str,
    dice_mat: np.ndarray,
    weights: np.ndarray,
    wsum: float,
    m: int,
    params: SearchParams,
) -> list[CloneRegion]:
    scores = backend.window_scores(
        dice_mat, corpus.file_uids(path), weights, wsum, params.window_step
    )
    hits = np.nonzero(scores >= params.threshold)[0]
    if hits.size == 0:
        return []
    candidates = [
        (int(k) * params.window_step + 1, int(k) * params.window_step + m, float(scores[k]))
        for k in hits
    ]
    return [CloneRegion(path, s, e, v) for s, e, v in _merge_windows(candidates)]


def search_snapshot(
    query: QueryFragment,
    snapshot: Snapshot,
    params: SearchParams,
    executor: Executor | None = None,
    cache: RegionCache | None = None,
    cancel: Callable[[], bool] | None = None,
) -> list[CloneRegion]:
    """Search every eligible file of a snapshot for one query fragment.

    Results are ordered (path, start line). The region exactly covering
    the query's own post-change location is dropped: the query itself is
    reported on the changed side by the detector, so an exact self-hit is
    noise here. Raises :class:`SearchTimeout` (with partial results) when
    the time budget runs out.
    """
    deadline = None
    if params.time_budget is not None:
        deadline = time.monotonic() + params.time_budget
    corpus = _corpus_for(snapshot, params.file_size_cap)
    paths = corpus.paths()

    qkey = query_key(query.lines) if cache is not None else ""
    m = len(query.lines)
    qdatas, weights, wsum = _query_arrays(query.lines)
    backend = get_backend()
    if corpus.n_lines:
        dice_mat = np.stack(
            [backend.dice_row(q, corpus.data, corpus.offsets, corpus.lengths) for q in qdatas]
        )
    else:
        dice_mat = np.zeros((m, 0))

    expired = threading.Event()

    def scan(path: str) -> list[CloneRegion] | None:
        if expired.is_set() or (cancel is not None and cancel()):
            return None
        if deadline is not None and time.monotonic() > deadline:
            expired.set()
            return None
        if cache is not None:
            content_key = snapshot.read_file(path, params.file_size_cap).content_key
            hit = cache.get(qkey, path, content_key)
            if hit is not None:
                return hit
            regions = _scan_file(backend, corpus, path, dice_mat, weights, wsum, m, params)
            cache.put(qkey, path, content_key, regions)
            return regions
        return _scan_file(backend, corpus, path, dice_mat, weights, wsum, m, params)

    if deadline is not None and time.monotonic() > deadline:
        raise SearchTimeout([])

    if executor is not None:
        results = list(executor.map(scan, paths))
    else:
        workers = params.workers or os.cpu_count() or 1
        if workers > 1 and len(paths) > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                results = list(pool.map(scan, paths))
        else:
            results = [scan(p) for p in paths]

    regions: list[CloneRegion] = []
    for per_file in results:
        if per_file:
            regions.extend(per_file)

    origin = query.origin
    after = origin.after_range
    if after is not None:
        regions = [
            r
            for r in regions
            if not (
                r.path == origin.path
                and r.start_line == after.start
                and r.end_line == after.end
            )
        ]

    if expired.is_set():
        raise SearchTimeout(regions)
    return regions
