"""Report rendering: the human text layout and the JSON wire format.

The text layout is a golden-file contract: byte-identical across runs and
platforms, LF line endings, no timestamps (log lines live on stderr, not
in the report). JSON serializes similarity with exactly four decimal
places so CI artifacts diff cleanly.
"""

from __future__ import annotations

import json

from .changes import LineRange
from .detector import AnalysisReport, CloneSet
from .search import CloneRegion


def _quote(label: str) -> str:
    return f'"{label}"' if " " in label else label


def render_text(report: AnalysisReport) -> str:
    out = [
        f"{report.chunk_count} change chunk(s) within {report.file_count} file(s) found."
        f" from={_quote(report.from_id)} to={_quote(report.to_id)}",
        f"{report.missing_total} clone(s) are likely missing consistent change.",
    ]
    for clone_set in report.clone_sets:
        out.append("")
        out.append(
            f"Clone set #{clone_set.set_id} - {len(clone_set.missing)} out of "
            f"{clone_set.total} clones are likely missing consistent change(s)."
        )
        out.append(f"  Missing changes ({len(clone_set.missing)}):")
        for region in clone_set.missing:
            out.append(
                f"    {region.path}:{region.start_line}"
                f" (L{region.start_line}-L{region.end_line})"
            )
        out.append(f"  Changed clones ({len(clone_set.changed)}):")
        for region in clone_set.changed:
            out.append(
                f"    {region.path}:{region.start_line}"
                f" (L{region.start_line}-L{region.end_line})"
            )
    return "\n".join(out) + "\n"


def _region_json(region: CloneRegion) -> str:
    return (
        f'{{"path":{json.dumps(region.path)},"start_line":{region.start_line},'
        f'"end_line":{region.end_line},"similarity":{region.similarity:.4f}}}'
    )


def _set_json(clone_set: CloneSet) -> str:
    changed = ",".join(_region_json(r) for r in clone_set.changed)
    missing = ",".join(_region_json(r) for r in clone_set.missing)
    query = (
        f'{{"path":{json.dumps(clone_set.query_path)},'
        f'"start":{clone_set.query_range.start},"end":{clone_set.query_range.end}}}'
    )
    return (
        f'{{"id":{clone_set.set_id},"query":{query},'
        f'"changed":[{changed}],"missing":[{missing}]}}'
    )


def render_json(report: AnalysisReport) -> str:
    sets = ",".join(_set_json(s) for s in report.clone_sets)
    return (
        f'{{"from":{json.dumps(report.from_id)},"to":{json.dumps(report.to_id)},'
        f'"chunk_count":{report.chunk_count},"file_count":{report.file_count},'
        f'"timed_out":{"true" if report.timed_out else "false"},'
        f'"clone_sets":[{sets}]}}'
    )


def report_from_json(text: str) -> AnalysisReport:
    """Inverse of :func:`render_json`, modulo the 4-decimal similarity rounding."""
    doc = json.loads(text)

    def region(obj: dict) -> CloneRegion:
        return CloneRegion(
            obj["path"], obj["start_line"], obj["end_line"], obj["similarity"]
        )

    sets = tuple(
        CloneSet(
            s["id"],
            s["query"]["path"],
            LineRange(s["query"]["start"], s["query"]["end"]),
            tuple(region(r) for r in s["changed"]),
            tuple(region(r) for r in s["missing"]),
        )
        for s in doc["clone_sets"]
    )
    return AnalysisReport(
        from_id=doc["from"],
        to_id=doc["to"],
        chunk_count=doc["chunk_count"],
        file_count=doc["file_count"],
        clone_sets=sets,
        timed_out=doc["timed_out"],
    )
