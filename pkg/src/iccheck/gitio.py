"""Read-only access to Git snapshots: commits, branches, and the working tree.

Revision specifiers resolve through the repository's normal rules (via the
git executable, the tool's only external dependency). Every snapshot kind
exposes the same surface: a file listing with sizes, and line-oriented
reads with binary and oversize screening. Commit-backed snapshots stream
blob contents through a single ``git cat-file --batch`` process instead of
one subprocess per file.
"""

from __future__ import annotations

import hashlib
import os
import re
import subprocess
import threading
import weakref
from dataclasses import dataclass
from pathlib import Path

WORKTREE_ID = "WORKTREE"
DEFAULT_FILE_SIZE_CAP = 1 << 20  # 1 MiB; bounds worst-case window counts
_BINARY_SNIFF_BYTES = 8000

_HEX40 = re.compile(r"^[0-9a-f]{40}$")


class GitError(Exception):
    """Base for all repository-access failures."""


class NotARepositoryError(GitError):
    pass


class UnresolvableRevisionError(GitError):
    pass


class EmptyRepositoryError(GitError):
    pass


class NoComparisonError(GitError):
    """Clean repository whose HEAD has no parent: nothing to compare."""


class PathNotInSnapshotError(GitError):
    pass


@dataclass(frozen=True)
class SnapshotRef:
    """A user-supplied point in history: revision text or the working tree."""

    kind: str  # "commit-id" | "branch-name" | "symbolic" | "worktree"
    spec: str  # empty for worktree refs

    @classmethod
    def worktree(cls) -> "SnapshotRef":
        return cls("worktree", "")

    @classmethod
    def revision(cls, spec: str) -> "SnapshotRef":
        if _HEX40.match(spec):
            kind = "commit-id"
        elif any(ch in spec for ch in "~^@{"):
            kind = "symbolic"
        elif spec == "HEAD" or spec.startswith("refs/"):
            kind = "symbolic"
        else:
            kind = "branch-name"
        return cls(kind, spec)


def parse_ref(text: str) -> SnapshotRef:
    """Turn CLI revision text into a ref; the literal WORKTREE is special."""
    if text.upper() == WORKTREE_ID:
        return SnapshotRef.worktree()
    return SnapshotRef.revision(text)


@dataclass(frozen=True)
class FileEntry:
    size: int
    blob: str | None  # blob sha when known without reading


@dataclass(frozen=True)
class FileContent:
    """Decoded, line-split view of one snapshot file.

    ``content_key`` is the Git blob id of the raw bytes, usable as a cache
    key. Binary (or oversized, or undecodable) files expose no lines.
    """

    path: str
    lines: tuple[str, ...]
    is_binary: bool
    content_key: str


def _blob_sha(raw: bytes) -> str:
    h = hashlib.sha1(b"blob %d\x00" % len(raw))
    h.update(raw)
    return h.hexdigest()


def _decode(path: str, raw: bytes, blob: str | None) -> FileContent:
    key = blob if blob is not None else _blob_sha(raw)
    if b"\x00" in raw[:_BINARY_SNIFF_BYTES]:
        return FileContent(path, (), True, key)
    try:
        text = raw.decode("utf-8")
    except UnicodeDecodeError:
        return FileContent(path, (), True, key)
    if not text:
        return FileContent(path, (), False, key)
    parts = text.split("\n")
    if parts and parts[-1] == "":
        parts.pop()
    return FileContent(path, tuple(s.rstrip() for s in parts), False, key)


def _git(cwd: Path | str, *args: str, ok_codes: tuple[int, ...] = (0,)) -> bytes:
    proc = subprocess.run(
        ["git", "-C", str(cwd), *args],
        capture_output=True,
    )
    if proc.returncode not in ok_codes:
        raise GitError(
            f"git {' '.join(args)} failed: {proc.stderr.decode(errors='replace').strip()}"
        )
    return proc.stdout


def discover_repo_root(start: Path | str) -> Path:
    """Ascend from ``start`` to the enclosing repository's top level."""
    proc = subprocess.run(
        ["git", "-C", str(start), "rev-parse", "--show-toplevel"],
        capture_output=True,
    )
    if proc.returncode != 0:
        raise NotARepositoryError(f"not a Git repository: {start}")
    return Path(proc.stdout.decode().strip())


class _BlobBatch:
    """One long-lived ``git cat-file --batch`` pipe, shared per snapshot."""

    def __init__(self, root: Path):
        self._proc = subprocess.Popen(
            ["git", "-C", str(root), "cat-file", "--batch"],
            stdin=subprocess.PIPE,
            stdout=subprocess.PIPE,
            stderr=subprocess.DEVNULL,
        )
        self._lock = threading.Lock()

    def read(self, sha: str) -> bytes:
        with self._lock:
            assert self._proc.stdin and self._proc.stdout
            self._proc.stdin.write(sha.encode() + b"\n")
            self._proc.stdin.flush()
            header = self._proc.stdout.readline().split()
            if len(header) != 3 or header[1] != b"blob":
                raise GitError(f"cannot read blob {sha}")
            size = int(header[2])
            data = self._proc.stdout.read(size)
            self._proc.stdout.read(1)  # trailing newline
            return data

    def close(self) -> None:
        if self._proc.poll() is None:
            if self._proc.stdin:
                self._proc.stdin.close()
            self._proc.terminate()
            self._proc.wait()


class Snapshot:
    """Immutable readable file tree resolved from a :class:`SnapshotRef`."""

    def __init__(self, origin: SnapshotRef, display_id: str, files: dict[str, FileEntry]):
        self.origin = origin
        self.display_id = display_id
        self.files = files
        self._contents: dict[str, tuple[int, FileContent]] = {}
        self._lock = threading.Lock()

    def read_file(self, path: str, size_cap: int = DEFAULT_FILE_SIZE_CAP) -> FileContent:
        entry = self.files.get(path)
        if entry is None:
            raise PathNotInSnapshotError(f"{path} is not in snapshot {self.display_id}")
        with self._lock:
            hit = self._contents.get(path)
            if hit is not None and hit[0] == size_cap:
                return hit[1]
        if entry.size > size_cap:
            content = FileContent(path, (), True, entry.blob or f"oversized:{path}:{entry.size}")
        else:
            content = _decode(path, self._load_bytes(path, entry), entry.blob)
        with self._lock:
            self._contents[path] = (size_cap, content)
        return content

    def _load_bytes(self, path: str, entry: FileEntry) -> bytes:
        raise NotImplementedError


class CommitSnapshot(Snapshot):
    def __init__(self, origin: SnapshotRef, sha: str, files: dict[str, FileEntry], root: Path):
        super().__init__(origin, sha, files)
        self.root = root
        self._batch: _BlobBatch | None = None
        self._batch_lock = threading.Lock()

    def _load_bytes(self, path: str, entry: FileEntry) -> bytes:
        with self._batch_lock:
            if self._batch is None:
                self._batch = _BlobBatch(self.root)
                weakref.finalize(self, self._batch.close)
            batch = self._batch
        assert entry.blob is not None
        return batch.read(entry.blob)


class WorktreeSnapshot(Snapshot):
    """The on-disk working tree, optionally overlaid with in-memory buffers.

    Overlay text (an editor's unsaved document) wins over disk content.
    The listing honors the repository's ignore rules; untracked but
    non-ignored files are included, since a freshly pasted copy of an
    existing file is exactly a missing-change candidate.
    """

    def __init__(self, root: Path, files: dict[str, FileEntry], overlays: dict[str, str]):
        super().__init__(SnapshotRef.worktree(), WORKTREE_ID, files)
        self.root = root
        self._overlays = overlays

    def _load_bytes(self, path: str, entry: FileEntry) -> bytes:
        overlay = self._overlays.get(path)
        if overlay is not None:
            return overlay.encode("utf-8")
        return (self.root / path).read_bytes()


class MemorySnapshot(Snapshot):
    """In-memory snapshot for tests and synthetic corpora."""

    def __init__(self, files: dict[str, str], display_id: str = "MEMORY"):
        entries = {
            p: FileEntry(len(t.encode("utf-8")), None) for p, t in files.items()
        }
        super().__init__(SnapshotRef.revision(display_id), display_id, entries)
        self._texts = files

    def _load_bytes(self, path: str, entry: FileEntry) -> bytes:
        return self._texts[path].encode("utf-8")


def _commit_snapshot(root: Path, ref: SnapshotRef) -> CommitSnapshot:
    proc = subprocess.run(
        ["git", "-C", str(root), "rev-parse", "--verify", "--quiet", ref.spec + "^{commit}"],
        capture_output=True,
    )
    if proc.returncode != 0:
        raise UnresolvableRevisionError(f"cannot resolve revision {ref.spec!r}")
    sha = proc.stdout.decode().strip()
    files: dict[str, FileEntry] = {}
    raw = _git(root, "ls-tree", "-r", "-l", "-z", sha)
    for record in raw.split(b"\x00"):
        if not record:
            continue
        meta, rel = record.split(b"\t", 1)
        mode, typ, blob, size = meta.split()
        if typ != b"blob" or mode == b"120000":
            continue  # submodules and symlinks are skipped
        files[rel.decode("utf-8", "surrogateescape")] = FileEntry(int(size), blob.decode())
    return CommitSnapshot(ref, sha, files, root)


def _worktree_listing(root: Path, overlays: dict[str, str]) -> dict[str, FileEntry]:
    raw = _git(root, "ls-files", "-z", "--cached", "--others", "--exclude-standard")
    files: dict[str, FileEntry] = {}
    for rel in raw.split(b"\x00"):
        if not rel:
            continue
        path = rel.decode("utf-8", "surrogateescape")
        if path in overlays:
            continue  # added below from the overlay
        full = root / path
        if full.is_file() and not full.is_symlink():
            files[path] = FileEntry(full.stat().st_size, None)
    extra = [p for p in overlays if p not in files]
    ignored = _ignored_paths(root, extra)
    for path in extra:
        if path not in ignored:
            files[path] = FileEntry(len(overlays[path].encode("utf-8")), None)
    return files


def _ignored_paths(root: Path, paths: list[str]) -> set[str]:
    if not paths:
        return set()
    proc = subprocess.run(
        ["git", "-C", str(root), "check-ignore", "--stdin", "-z"],
        input=b"\x00".join(p.encode("utf-8", "surrogateescape") for p in paths),
        capture_output=True,
    )
    if proc.returncode not in (0, 1):  # 1 just means nothing matched
        raise GitError(f"git check-ignore failed: {proc.stderr.decode(errors='replace')}")
    return {
        p.decode("utf-8", "surrogateescape")
        for p in proc.stdout.split(b"\x00")
        if p
    }


def resolve_snapshot(
    repo_path: Path | str,
    ref: SnapshotRef,
    overlays: dict[str, str] | None = None,
) -> Snapshot:
    """Resolve a ref against the repository enclosing ``repo_path``.

    ``overlays`` only applies to worktree refs: in-memory document text
    keyed by repo-relative path, taking precedence over on-disk state.
    """
    root = discover_repo_root(repo_path)
    if ref.kind == "worktree":
        overlays = dict(overlays or {})
        return WorktreeSnapshot(root, _worktree_listing(root, overlays), overlays)
    return _commit_snapshot(root, ref)


def default_comparison(repo_path: Path | str) -> tuple[SnapshotRef, SnapshotRef]:
    """Pick the snapshot pair to review from the repository's state.

    A dirty index or working tree compares HEAD against the working tree;
    a clean tree reviews the most recent commit (its first parent vs HEAD).
    """
    root = discover_repo_root(repo_path)
    head = subprocess.run(
        ["git", "-C", str(root), "rev-parse", "--verify", "--quiet", "HEAD"],
        capture_output=True,
    )
    if head.returncode != 0:
        raise EmptyRepositoryError(f"repository at {root} has no commits")
    status = _git(root, "status", "--porcelain")
    if status.strip():
        return SnapshotRef.revision("HEAD"), SnapshotRef.worktree()
    parent = subprocess.run(
        ["git", "-C", str(root), "rev-parse", "--verify", "--quiet", "HEAD~1"],
        capture_output=True,
    )
    if parent.returncode != 0:
        raise NoComparisonError(
            f"repository at {root} is clean and HEAD has no parent; nothing to compare"
        )
    return SnapshotRef.revision("HEAD~1"), SnapshotRef.revision("HEAD")


def read_file(
    snapshot: Snapshot, path: str, size_cap: int = DEFAULT_FILE_SIZE_CAP
) -> FileContent:
    """Free-function alias for :meth:`Snapshot.read_file`."""
    return snapshot.read_file(path, size_cap)


def snapshot_label(snapshot: Snapshot) -> str:
    """Human-readable id: WORKTREE, a bare hash, or ``spec (hash)``."""
    if snapshot.display_id == WORKTREE_ID:
        return WORKTREE_ID
    spec = snapshot.origin.spec
    if not spec or spec == snapshot.display_id:
        return snapshot.display_id
    return f"{spec} ({snapshot.display_id})"
