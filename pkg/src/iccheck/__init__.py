"""iccheck: find code clones that likely missed a consistent change.

Compares two Git snapshots, uses every change chunk as a textual
clone-search query over the post-change snapshot, and reports clone
regions that did not receive the edit. Language-agnostic by construction:
scoring sees only line text, never file types.
"""

__version__ = "0.1.0"

from .changes import ChangeChunk, LineRange, QueryFragment, compute_changes, queries_of
from .detector import (
    AnalysisReport,
    CloneSet,
    ConfigError,
    IgnoreRule,
    apply_ignores,
    classify,
    detect,
)
from .gitio import (
    FileContent,
    GitError,
    Snapshot,
    SnapshotRef,
    default_comparison,
    parse_ref,
    read_file,
    resolve_snapshot,
)
from .render import render_json, render_text, report_from_json
from .search import CloneRegion, SearchParams, SearchTimeout, search_file, search_snapshot
from .similarity import bigrams, dice, fragment_similarity, normalize_line

__all__ = [
    "AnalysisReport",
    "ChangeChunk",
    "CloneRegion",
    "CloneSet",
    "ConfigError",
    "FileContent",
    "GitError",
    "IgnoreRule",
    "LineRange",
    "QueryFragment",
    "SearchParams",
    "SearchTimeout",
    "Snapshot",
    "SnapshotRef",
    "apply_ignores",
    "bigrams",
    "classify",
    "compute_changes",
    "default_comparison",
    "detect",
    "dice",
    "fragment_similarity",
    "normalize_line",
    "parse_ref",
    "queries_of",
    "read_file",
    "render_json",
    "render_text",
    "report_from_json",
    "resolve_snapshot",
    "search_file",
    "search_snapshot",
]
