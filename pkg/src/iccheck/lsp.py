"""Language Server: interactive missing-change detection while editing.

Speaks the Language Server Protocol over standard input/output. Edited
documents overlay the on-disk working tree (the analysis sees what the
user sees); after a quiet period since the last keystroke, HEAD is
compared against the overlaid worktree and each missing clone region is
published as a warning diagnostic. Find References answers with every
region of the clone set under the cursor.

Scheduling contract:
  * one analysis runs at a time; edits arriving mid-run invalidate it,
    and an invalidated run never publishes;
  * an analysis that overruns its wall-time budget puts the server into
    back-off: further runs wait for a longer keystroke pause;
  * per-(query, file-content) search results are memoized, so an edit to
    one file re-scans only that file for queries whose chunks did not
    change.
"""

from __future__ import annotations

import json
import logging
import threading
import time
import urllib.parse
from pathlib import Path
from typing import BinaryIO, Callable, Sequence

from . import __version__
from .config import load_config
from .detector import AnalysisReport, IgnoreRule, detect
from .gitio import GitError, SnapshotRef, discover_repo_root, resolve_snapshot
from .search import CloneRegion, SearchParams

log = logging.getLogger("iccheck.lsp")

DEFAULT_DEBOUNCE_S = 0.5
DEFAULT_BUDGET_S = 1.0
DEFAULT_BACKOFF_QUIET_S = 3.0


def path_to_uri(path: Path) -> str:
    return "file://" + urllib.parse.quote(str(path))


def uri_to_path(uri: str) -> Path:
    parsed = urllib.parse.urlparse(uri)
    return Path(urllib.parse.unquote(parsed.path))


def position_offset(text: str, line: int, character: int) -> int:
    """Byte-agnostic offset of an LSP position (UTF-16 column units)."""
    pos = 0
    for _ in range(line):
        nl = text.find("\n", pos)
        if nl < 0:
            return len(text)
        pos = nl + 1
    line_end = text.find("\n", pos)
    if line_end < 0:
        line_end = len(text)
    units = 0
    i = pos
    while i < line_end and units < character:
        units += 2 if ord(text[i]) > 0xFFFF else 1
        i += 1
    return i


def apply_content_changes(text: str, changes: Sequence[dict]) -> str:
    """Apply incremental (or full) textDocument/didChange edits."""
    for change in changes:
        rng = change.get("range")
        if rng is None:
            text = change["text"]
            continue
        start = position_offset(text, rng["start"]["line"], rng["start"]["character"])
        end = position_offset(text, rng["end"]["line"], rng["end"]["character"])
        text = text[:start] + change["text"] + text[end:]
    return text


class SearchCache:
    """Memo of per-file clone-search results keyed by query and content.

    Both keys are content hashes, so a hit is always sound: identical
    query lines scanned over identical file lines yield identical regions
    no matter when they were computed.
    """

    def __init__(self, max_entries: int = 200_000):
        self._store: dict[tuple[str, str, str], list[CloneRegion]] = {}
        self._lock = threading.Lock()
        self._max = max_entries
        self.hits = 0
        self.misses = 0

    def get(self, query_key: str, path: str, content_key: str) -> list[CloneRegion] | None:
        with self._lock:
            found = self._store.get((query_key, path, content_key))
            if found is None:
                self.misses += 1
                return None
            self.hits += 1
            return found

    def put(
        self, query_key: str, path: str, content_key: str, regions: list[CloneRegion]
    ) -> None:
        with self._lock:
            if len(self._store) >= self._max:
                self._store.clear()
            self._store[(query_key, path, content_key)] = regions


class AnalysisEngine:
    """Debounced, cancellable detection over HEAD vs the overlaid worktree."""

    def __init__(
        self,
        root: Path,
        params: SearchParams = SearchParams(),
        rules: Sequence[IgnoreRule] = (),
        debounce_s: float = DEFAULT_DEBOUNCE_S,
        budget_s: float = DEFAULT_BUDGET_S,
        backoff_quiet_s: float = DEFAULT_BACKOFF_QUIET_S,
        on_report: Callable[[AnalysisReport], None] | None = None,
        on_log: Callable[[str], None] | None = None,
    ):
        self.root = root
        self.params = params
        self.rules = tuple(rules)
        self.debounce_s = debounce_s
        self.budget_s = budget_s
        self.backoff_quiet_s = backoff_quiet_s
        self.on_report = on_report
        self.on_log = on_log or (lambda message: log.warning("%s", message))
        self.cache = SearchCache()
        self.last_report: AnalysisReport | None = None
        self.analyses_started = 0
        self.analyses_published = 0
        self.state = "idle"  # idle | running | backing_off

        self._overlays: dict[str, str] = {}
        self._lock = threading.Lock()
        self._timer: threading.Timer | None = None
        self._generation = 0
        self._running = False
        self._pending = False
        self._closed = False

    # -- document overlay ---------------------------------------------------

    def set_document(self, path: str, text: str) -> None:
        with self._lock:
            self._overlays[path] = text
        self._schedule()

    def close_document(self, path: str) -> None:
        with self._lock:
            self._overlays.pop(path, None)
        self._schedule()

    # -- scheduling ----------------------------------------------------------

    def _schedule(self) -> None:
        with self._lock:
            if self._closed:
                return
            self._generation += 1
            if self._timer is not None:
                self._timer.cancel()
            quiet = self.backoff_quiet_s if self.state == "backing_off" else self.debounce_s
            self._timer = threading.Timer(quiet, self._fire)
            self._timer.daemon = True
            self._timer.start()

    def _fire(self) -> None:
        with self._lock:
            self._timer = None
            if self._closed:
                return
            if self._running:
                self._pending = True
                return
            self._running = True
            generation = self._generation
            overlays = dict(self._overlays)
            self.state = "running"
        self.analyses_started += 1
        worker = threading.Thread(
            target=self._analyze, args=(generation, overlays), daemon=True
        )
        worker.start()

    def _analyze(self, generation: int, overlays: dict[str, str]) -> None:
        started = time.monotonic()
        report: AnalysisReport | None = None
        try:
            from_snapshot = resolve_snapshot(self.root, SnapshotRef.revision("HEAD"))
            to_snapshot = resolve_snapshot(
                self.root, SnapshotRef.worktree(), overlays=overlays
            )
            report = detect(
                from_snapshot,
                to_snapshot,
                self.params,
                self.rules,
                cache=self.cache,
                cancel=lambda: self._generation != generation,
            )
        except GitError as exc:
            self.on_log(f"analysis failed: {exc}")
        duration = time.monotonic() - started

        with self._lock:
            self._running = False
            stale = generation != self._generation
            self.state = "backing_off" if duration > self.budget_s else "idle"
            rerun = self._pending
            self._pending = False

        if report is not None and not stale:
            self.last_report = report
            self.analyses_published += 1
            if self.on_report is not None:
                self.on_report(report)
        if rerun:
            self._fire()

    def wait_idle(self, timeout: float = 10.0) -> bool:
        """Block until no analysis is running or scheduled (for tests/shutdown)."""
        deadline = time.monotonic() + timeout
        while time.monotonic() < deadline:
            with self._lock:
                quiet = self._timer is None and not self._running and not self._pending
            if quiet:
                return True
            time.sleep(0.01)
        return False

    def shutdown(self) -> None:
        with self._lock:
            self._closed = True
            if self._timer is not None:
                self._timer.cancel()
                self._timer = None
            self._generation += 1  # cancels any running detect

    # -- queries over the last report -----------------------------------------

    def find_references(self, path: str, line: int) -> list[CloneRegion]:
        """All regions of every clone set containing (path, 1-based line)."""
        report = self.last_report
        if report is None:
            return []
        out: list[CloneRegion] = []
        seen = set()
        for clone_set in report.clone_sets:
            members = (*clone_set.changed, *clone_set.missing)
            if not any(
                r.path == path and r.start_line <= line <= r.end_line for r in members
            ):
                continue
            for region in members:
                key = (region.path, region.start_line, region.end_line)
                if key not in seen:
                    seen.add(key)
                    out.append(region)
        out.sort(key=CloneRegion.sort_key)
        return out


class JsonRpcStream:
    """Content-Length framed JSON-RPC messages over binary streams."""

    def __init__(self, reader: BinaryIO, writer: BinaryIO):
        self._reader = reader
        self._writer = writer
        self._write_lock = threading.Lock()

    def read(self) -> dict | None:
        length = None
        while True:
            header = self._reader.readline()
            if not header:
                return None
            header = header.strip()
            if not header:
                break
            if header.lower().startswith(b"content-length:"):
                length = int(header.split(b":", 1)[1])
        if length is None:
            return None
        body = self._reader.read(length)
        if len(body) < length:
            return None
        return json.loads(body.decode("utf-8"))

    def write(self, message: dict) -> None:
        body = json.dumps(message).encode("utf-8")
        with self._write_lock:
            self._writer.write(b"Content-Length: %d\r\n\r\n" % len(body))
            self._writer.write(body)
            self._writer.flush()


class LanguageServer:
    """Protocol front-end wiring the wire format to an AnalysisEngine."""

    def __init__(self, stream: JsonRpcStream, root_override: Path | None = None):
        self._stream = stream
        self._root_override = root_override
        self._root: Path | None = None
        self._engine: AnalysisEngine | None = None
        self._docs: dict[str, str] = {}  # relative path -> overlay text
        self._published: set[str] = set()
        self._exiting = False

    # -- main loop -------------------------------------------------------------

    def serve(self) -> None:
        while not self._exiting:
            message = self._stream.read()
            if message is None:
                break
            try:
                self._dispatch(message)
            except Exception as exc:  # a broken message must not kill the server
                log.exception("error handling %s", message.get("method"))
                if "id" in message:
                    self._respond_error(message["id"], -32603, str(exc))
        if self._engine is not None:
            self._engine.shutdown()

    def _dispatch(self, message: dict) -> None:
        method = message.get("method")
        if method == "initialize":
            self._respond(message["id"], self._initialize(message.get("params") or {}))
        elif method == "initialized":
            pass
        elif method == "shutdown":
            if self._engine is not None:
                self._engine.shutdown()
            self._respond(message["id"], None)
        elif method == "exit":
            self._exiting = True
        elif method == "textDocument/didOpen":
            doc = message["params"]["textDocument"]
            self._did_change_text(doc["uri"], doc["text"])
        elif method == "textDocument/didChange":
            params = message["params"]
            rel = self._relative(params["textDocument"]["uri"])
            if rel is None:
                return
            text = apply_content_changes(
                self._docs.get(rel, ""), params["contentChanges"]
            )
            self._did_change_text(params["textDocument"]["uri"], text)
        elif method == "textDocument/didClose":
            rel = self._relative(message["params"]["textDocument"]["uri"])
            if rel is not None:
                self._docs.pop(rel, None)
                if self._engine is not None:
                    self._engine.close_document(rel)
        elif method == "textDocument/didSave":
            pass  # disk now matches the overlay; nothing changes
        elif method == "textDocument/references":
            self._respond(message["id"], self._references(message["params"]))
        elif method is not None and "id" in message:
            self._respond_error(message["id"], -32601, f"method not found: {method}")

    # -- lifecycle ---------------------------------------------------------------

    def _initialize(self, params: dict) -> dict:
        root = self._root_override
        if root is None:
            if params.get("rootUri"):
                root = uri_to_path(params["rootUri"])
            elif params.get("rootPath"):
                root = Path(params["rootPath"])
            else:
                root = Path.cwd()
        options = params.get("initializationOptions") or {}
        try:
            repo_root = discover_repo_root(root)
        except GitError as exc:
            self._log_message(1, f"iccheck is inactive: {exc}")
            repo_root = None

        if repo_root is not None:
            self._root = repo_root
            rules = list(load_config(repo_root))
            for entry in options.get("ignore", []):
                rules.append(IgnoreRule(entry["files"], entry.get("pattern")))
            params_kwargs = {}
            if "threshold" in options:
                params_kwargs["threshold"] = float(options["threshold"])
            self._engine = AnalysisEngine(
                repo_root,
                params=SearchParams(**params_kwargs),
                rules=rules,
                debounce_s=float(options.get("debounceMs", DEFAULT_DEBOUNCE_S * 1000)) / 1000,
                budget_s=float(options.get("backoffBudgetMs", DEFAULT_BUDGET_S * 1000)) / 1000,
                backoff_quiet_s=float(
                    options.get("backoffQuietMs", DEFAULT_BACKOFF_QUIET_S * 1000)
                )
                / 1000,
                on_report=self._publish_report,
                on_log=lambda message: self._log_message(2, message),
            )

        return {
            "capabilities": {
                "textDocumentSync": {"openClose": True, "change": 2},
                "referencesProvider": True,
            },
            "serverInfo": {"name": "iccheck", "version": __version__},
        }

    # -- document sync ---------------------------------------------------------

    def _relative(self, uri: str) -> str | None:
        if self._root is None:
            return None
        try:
            return uri_to_path(uri).resolve().relative_to(self._root.resolve()).as_posix()
        except ValueError:
            return None  # outside the workspace

    def _did_change_text(self, uri: str, text: str) -> None:
        rel = self._relative(uri)
        if rel is None or self._engine is None:
            return
        self._docs[rel] = text
        self._engine.set_document(rel, text)

    # -- diagnostics -------------------------------------------------------------

    def _publish_report(self, report: AnalysisReport) -> None:
        assert self._root is not None
        by_path: dict[str, list[dict]] = {}
        for clone_set in report.clone_sets:
            members = (*clone_set.changed, *clone_set.missing)
            for region in clone_set.missing:
                related = [
                    {
                        "location": self._location(other),
                        "message": f"clone in set #{clone_set.set_id}",
                    }
                    for other in members
                    if other != region
                ]
                by_path.setdefault(region.path, []).append(
                    {
                        "range": _region_range(region),
                        "severity": 2,  # warning: suggestions are advisory
                        "source": "iccheck",
                        "message": (
                            f"Clone set #{clone_set.set_id}: {len(clone_set.missing)} of "
                            f"{clone_set.total} clones likely missing a consistent change "
                            f"(changed at {clone_set.query_path}:{clone_set.query_range.start})"
                        ),
                        "relatedInformation": related,
                    }
                )
        for path in self._published - set(by_path):
            self._notify(
                "textDocument/publishDiagnostics",
                {"uri": path_to_uri(self._root / path), "diagnostics": []},
            )
        for path, diagnostics in by_path.items():
            self._notify(
                "textDocument/publishDiagnostics",
                {"uri": path_to_uri(self._root / path), "diagnostics": diagnostics},
            )
        self._published = set(by_path)
        engine = self._engine
        self._notify(
            "$/iccheck/analysis",
            {
                "started": engine.analyses_started if engine else 0,
                "published": engine.analyses_published if engine else 0,
                "missing": report.missing_total,
                "timedOut": report.timed_out,
            },
        )

    def _location(self, region: CloneRegion) -> dict:
        assert self._root is not None
        return {
            "uri": path_to_uri(self._root / region.path),
            "range": _region_range(region),
        }

    # -- references ----------------------------------------------------------------

    def _references(self, params: dict) -> list[dict]:
        if self._engine is None:
            return []
        rel = self._relative(params["textDocument"]["uri"])
        if rel is None:
            return []
        line = params["position"]["line"] + 1
        return [self._location(r) for r in self._engine.find_references(rel, line)]

    # -- outbound ---------------------------------------------------------------

    def _respond(self, request_id, result) -> None:
        self._stream.write({"jsonrpc": "2.0", "id": request_id, "result": result})

    def _respond_error(self, request_id, code: int, message: str) -> None:
        self._stream.write(
            {"jsonrpc": "2.0", "id": request_id, "error": {"code": code, "message": message}}
        )

    def _notify(self, method: str, params: dict) -> None:
        self._stream.write({"jsonrpc": "2.0", "method": method, "params": params})

    def _log_message(self, level: int, message: str) -> None:
        self._notify("window/logMessage", {"type": level, "message": message})


def _region_range(region: CloneRegion) -> dict:
    return {
        "start": {"line": region.start_line - 1, "character": 0},
        "end": {"line": region.end_line, "character": 0},
    }


def serve_stdio(root_override: Path | None = None) -> None:
    import sys

    stream = JsonRpcStream(sys.stdin.buffer, sys.stdout.buffer)
    LanguageServer(stream, root_override).serve()
