"""End-to-end detection: changes → queries → clone search → classification.

Each query fragment produces its own clone set (sets are never merged, so
every suggestion traces back to the change that triggered it). A found
region counts as *changed* when it shares at least one line with the
post-change span of any chunk in its file; everything else is a *missing*
consistent change. Ignore rules then filter the missing side only.
"""

from __future__ import annotations

import os
import re
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Callable, Sequence

from .changes import ChangeChunk, LineRange, compute_changes, queries_of
from .gitio import Snapshot, snapshot_label
from .search import (
    CloneRegion,
    RegionCache,
    SearchParams,
    SearchTimeout,
    search_snapshot,
)


class ConfigError(Exception):
    """An ignore rule or config file is malformed."""


def _glob_to_regex(pattern: str) -> str:
    """Translate a path glob to a regex over the full relative path.

    ``*`` and ``?`` never cross ``/``; ``**`` spans directories, and a
    leading ``**/`` also matches zero directories.
    """
    out = []
    i = 0
    n = len(pattern)
    while i < n:
        ch = pattern[i]
        if ch == "*":
            if pattern[i : i + 3] == "**/":
                out.append("(?:.*/)?")
                i += 3
                continue
            if pattern[i : i + 2] == "**":
                out.append(".*")
                i += 2
                continue
            out.append("[^/]*")
        elif ch == "?":
            out.append("[^/]")
        else:
            out.append(re.escape(ch))
        i += 1
    return "".join(out)


@dataclass(frozen=True)
class IgnoreRule:
    """Suppression filter: a path glob plus an optional per-line regex.

    A rule with a line pattern suppresses a region only when *every* line
    of the region matches: a region mixing one import line with logic
    lines is still a real suggestion.
    """

    path_pattern: str
    line_pattern: str | None = None

    def compile(self) -> tuple[re.Pattern, re.Pattern | None]:
        try:
            path_re = re.compile(_glob_to_regex(self.path_pattern) + r"\Z")
        except re.error as exc:
            raise ConfigError(f"invalid path glob {self.path_pattern!r}: {exc}") from exc
        line_re = None
        if self.line_pattern is not None:
            try:
                line_re = re.compile(self.line_pattern)
            except re.error as exc:
                raise ConfigError(
                    f"invalid line pattern {self.line_pattern!r}: {exc}"
                ) from exc
        return path_re, line_re


def parse_ignore_option(text: str) -> IgnoreRule:
    """Parse a CLI ``glob[:regex]`` ignore option (split on the first colon)."""
    if not text:
        raise ConfigError("empty --ignore rule")
    glob, sep, pattern = text.partition(":")
    if not glob:
        raise ConfigError(f"--ignore rule {text!r} has an empty glob")
    rule = IgnoreRule(glob, pattern if sep else None)
    rule.compile()  # validate eagerly so errors name the offending rule
    return rule


@dataclass(frozen=True)
class CloneSet:
    """One query chunk and all its found clones, changed vs missing."""

    set_id: int
    query_path: str
    query_range: LineRange
    changed: tuple[CloneRegion, ...]
    missing: tuple[CloneRegion, ...]

    @property
    def total(self) -> int:
        return len(self.changed) + len(self.missing)


@dataclass(frozen=True)
class AnalysisReport:
    from_id: str
    to_id: str
    chunk_count: int
    file_count: int
    clone_sets: tuple[CloneSet, ...]
    timed_out: bool = False

    @property
    def missing_total(self) -> int:
        return sum(len(s.missing) for s in self.clone_sets)


def classify(
    regions: Sequence[CloneRegion], chunks: Sequence[ChangeChunk]
) -> tuple[list[CloneRegion], list[CloneRegion]]:
    """Partition found regions into (changed, missing).

    Changed means the region overlaps the post-change span of some chunk
    in the same file by at least one line.
    """
    after_by_path: dict[str, list[LineRange]] = {}
    for chunk in chunks:
        rng = chunk.after_range
        if rng is not None:
            after_by_path.setdefault(chunk.path, []).append(rng)
    changed, missing = [], []
    for region in regions:
        span = LineRange(region.start_line, region.end_line)
        if any(span.overlaps(r) for r in after_by_path.get(region.path, ())):
            changed.append(region)
        else:
            missing.append(region)
    return changed, missing


LineSource = Callable[[str, int, int], Sequence[str]]


def apply_ignores(
    report: AnalysisReport,
    rules: Sequence[IgnoreRule],
    line_source: LineSource | None = None,
) -> AnalysisReport:
    """Drop missing regions matched by any rule; changed regions stay.

    Set ids are stable (no renumbering). ``line_source(path, start, end)``
    supplies region lines for rules with a line pattern; without it such
    rules cannot match.
    """
    if not rules:
        return report
    compiled = []
    for index, rule in enumerate(rules):
        try:
            compiled.append(rule.compile())
        except ConfigError as exc:
            raise ConfigError(f"ignore rule #{index}: {exc}") from exc

    def suppressed(region: CloneRegion) -> bool:
        for path_re, line_re in compiled:
            if not path_re.match(region.path):
                continue
            if line_re is None:
                return True
            if line_source is None:
                continue
            lines = line_source(region.path, region.start_line, region.end_line)
            if lines and all(line_re.search(line) for line in lines):
                return True
        return False

    sets = tuple(
        replace(s, missing=tuple(r for r in s.missing if not suppressed(r)))
        for s in report.clone_sets
    )
    return replace(report, clone_sets=sets)


def detect(
    from_snapshot: Snapshot,
    to_snapshot: Snapshot,
    params: SearchParams = SearchParams(),
    rules: Sequence[IgnoreRule] = (),
    all_sets: bool = False,
    cache: RegionCache | None = None,
    cancel: Callable[[], bool] | None = None,
) -> AnalysisReport:
    """Run the full pipeline between two snapshots.

    Clone sets are numbered in query order starting at 0; sets whose
    missing list is empty after filtering are dropped unless ``all_sets``
    is requested. On search timeout the report carries ``timed_out`` and
    whatever sets completed; on ``cancel`` the partial report is returned
    the same way (callers discard it).
    """
    chunks = compute_changes(from_snapshot, to_snapshot, size_cap=params.file_size_cap)
    queries = queries_of(chunks)

    deadline = None
    if params.time_budget is not None:
        deadline = time.monotonic() + params.time_budget

    sets: list[CloneSet] = []
    timed_out = False
    workers = params.workers or os.cpu_count() or 1
    pool = ThreadPoolExecutor(max_workers=workers) if queries else None
    try:
        for index, query in enumerate(queries):
            if cancel is not None and cancel():
                break
            search_params = params
            if deadline is not None:
                remaining = deadline - time.monotonic()
                if remaining <= 0:
                    timed_out = True
                    break
                search_params = replace(params, time_budget=remaining)
            try:
                regions = search_snapshot(
                    query, to_snapshot, search_params,
                    executor=pool, cache=cache, cancel=cancel,
                )
            except SearchTimeout:
                timed_out = True
                break
            changed, missing = classify(regions, chunks)
            origin = query.origin
            after = origin.after_range
            if after is not None:
                covered = any(
                    r.path == origin.path
                    and r.start_line <= after.start
                    and r.end_line >= after.end
                    for r in changed
                )
                if not covered:
                    changed.append(CloneRegion(origin.path, after.start, after.end, 1.0))
            changed.sort(key=CloneRegion.sort_key)
            missing.sort(key=CloneRegion.sort_key)
            query_range = after if after is not None else origin.before_range
            assert query_range is not None
            sets.append(
                CloneSet(index, origin.path, query_range, tuple(changed), tuple(missing))
            )
    finally:
        if pool is not None:
            pool.shutdown(wait=False, cancel_futures=True)

    report = AnalysisReport(
        from_id=snapshot_label(from_snapshot),
        to_id=snapshot_label(to_snapshot),
        chunk_count=len(chunks),
        file_count=len({c.path for c in chunks}),
        clone_sets=tuple(sets),
        timed_out=timed_out,
    )

    def line_source(path: str, start: int, end: int) -> Sequence[str]:
        content = to_snapshot.read_file(path, params.file_size_cap)
        return content.lines[start - 1 : end]

    report = apply_ignores(report, rules, line_source)
    if not all_sets:
        report = replace(
            report,
            clone_sets=tuple(s for s in report.clone_sets if s.missing),
        )
    return report
