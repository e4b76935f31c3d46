"""Line-level change chunks between two snapshots, and their search queries.

Each file pair is diffed with a standard longest-common-subsequence line
diff; every contiguous run of changed lines becomes one chunk. Applying
all of a file's chunks to its before-image must reproduce the after-image
exactly; that round-trip is the contract, not a particular diff algorithm.
Renames are recognized by exact blob identity only, which is enough to
avoid spurious whole-file add+delete chunk pairs.
"""

from __future__ import annotations

from dataclasses import dataclass
from difflib import SequenceMatcher

from .gitio import DEFAULT_FILE_SIZE_CAP, FileContent, Snapshot

# a chunk is searched only if one of its lines has this much substance
MIN_SIGNIFICANT_CHARS = 4


@dataclass(frozen=True)
class LineRange:
    """1-based inclusive line range."""

    start: int
    end: int

    def __post_init__(self) -> None:
        if self.start < 1 or self.end < self.start:
            raise ValueError(f"invalid line range [{self.start}, {self.end}]")

    def __len__(self) -> int:
        return self.end - self.start + 1

    def overlaps(self, other: "LineRange") -> bool:
        return self.start <= other.end and other.start <= self.end

    def contains_line(self, line: int) -> bool:
        return self.start <= line <= self.end


@dataclass(frozen=True)
class ChangeChunk:
    """One contiguous modified region of one file between two snapshots.

    ``before_lo:before_hi`` / ``after_lo:after_hi`` are 0-based half-open
    line index spans in the from/to file; an empty before span marks an
    addition, an empty after span a deletion. ``path`` is the post-change
    path when the file was renamed.
    """

    path: str
    before_lo: int
    before_hi: int
    after_lo: int
    after_hi: int
    before_lines: tuple[str, ...]
    after_lines: tuple[str, ...]

    @property
    def kind(self) -> str:
        if self.before_lo == self.before_hi:
            return "addition"
        if self.after_lo == self.after_hi:
            return "deletion"
        return "modification"

    @property
    def before_range(self) -> LineRange | None:
        if self.before_lo == self.before_hi:
            return None
        return LineRange(self.before_lo + 1, self.before_hi)

    @property
    def after_range(self) -> LineRange | None:
        if self.after_lo == self.after_hi:
            return None
        return LineRange(self.after_lo + 1, self.after_hi)


@dataclass(frozen=True)
class QueryFragment:
    """Normalized lines used as a clone-search query, plus their origin."""

    lines: tuple[str, ...]
    origin: ChangeChunk


def _diff_file(path: str, before: tuple[str, ...], after: tuple[str, ...]) -> list[ChangeChunk]:
    matcher = SequenceMatcher(a=before, b=after, autojunk=False)
    chunks = []
    for tag, i1, i2, j1, j2 in matcher.get_opcodes():
        if tag == "equal":
            continue
        chunks.append(
            ChangeChunk(path, i1, i2, j1, j2, tuple(before[i1:i2]), tuple(after[j1:j2]))
        )
    return chunks


def _whole_file_chunk(path: str, lines: tuple[str, ...], added: bool) -> ChangeChunk:
    n = len(lines)
    if added:
        return ChangeChunk(path, 0, 0, 0, n, (), lines)
    return ChangeChunk(path, 0, n, 0, 0, lines, ())


def compute_changes(
    from_snapshot: Snapshot,
    to_snapshot: Snapshot,
    size_cap: int = DEFAULT_FILE_SIZE_CAP,
) -> list[ChangeChunk]:
    """Diff all readable text files present in either snapshot.

    Files that are binary or over the size cap on either side are skipped.
    Output is ordered by path, then by position within the file, and is
    deterministic for a given snapshot pair.
    """
    from_paths = set(from_snapshot.files)
    to_paths = set(to_snapshot.files)

    def content(snapshot: Snapshot, path: str) -> FileContent:
        return snapshot.read_file(path, size_cap)

    chunks: list[ChangeChunk] = []
    deleted: dict[str, list[str]] = {}  # content key -> deleted paths
    added: dict[str, list[str]] = {}

    for path in sorted(from_paths & to_paths):
        before_entry = from_snapshot.files[path]
        after_entry = to_snapshot.files[path]
        if before_entry.blob is not None and before_entry.blob == after_entry.blob:
            continue
        after = content(to_snapshot, path)
        if before_entry.blob is not None and before_entry.blob == after.content_key:
            continue
        before = content(from_snapshot, path)
        if before.content_key == after.content_key:
            continue
        if before.is_binary or after.is_binary:
            continue
        chunks.extend(_diff_file(path, before.lines, after.lines))

    for path in sorted(from_paths - to_paths):
        before = content(from_snapshot, path)
        deleted.setdefault(before.content_key, []).append(path)
    for path in sorted(to_paths - from_paths):
        after = content(to_snapshot, path)
        added.setdefault(after.content_key, []).append(path)

    # pair identical-content deletes and adds as renames: no chunks emitted
    for key in list(deleted):
        if key in added:
            n = min(len(deleted[key]), len(added[key]))
            del deleted[key][:n]
            del added[key][:n]

    for key, paths in deleted.items():
        for path in paths:
            before = content(from_snapshot, path)
            if not before.is_binary and before.lines:
                chunks.append(_whole_file_chunk(path, before.lines, added=False))
    for key, paths in added.items():
        for path in paths:
            after = content(to_snapshot, path)
            if not after.is_binary and after.lines:
                chunks.append(_whole_file_chunk(path, after.lines, added=True))

    chunks.sort(key=lambda c: (c.path, c.after_lo, c.before_lo))
    return chunks


def _significant(line: str) -> bool:
    return sum(1 for ch in line if not ch.isspace()) >= MIN_SIGNIFICANT_CHARS


def queries_of(chunks: list[ChangeChunk]) -> list[QueryFragment]:
    """Turn chunks into search queries against the post-change snapshot.

    Modifications and additions query with their new lines. Deletions
    query with the removed lines, so lingering copies of deleted code are
    still found. Chunks whose every line has fewer than
    ``MIN_SIGNIFICANT_CHARS`` non-whitespace characters are dropped: bare
    braces and blank lines match everywhere and drown real findings.
    """
    fragments = []
    for chunk in chunks:
        lines = chunk.after_lines if chunk.after_lines else chunk.before_lines
        if not lines:
            continue
        if not any(_significant(line) for line in lines):
            continue
        fragments.append(QueryFragment(lines, chunk))
    return fragments
