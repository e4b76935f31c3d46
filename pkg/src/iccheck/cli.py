"""Command-line entry point.

Exit codes are a CI contract: 0 = no missing changes, 1 = missing changes
found, 2 = usage or environment error, 3 = timeout with partial results.
The report goes to stdout; timestamped logs and errors go to stderr so
JSON output stays machine-readable.
"""

from __future__ import annotations

import logging
import sys
from dataclasses import dataclass, field
from pathlib import Path

import click

from . import __version__
from .config import load_config
from .detector import ConfigError, detect, parse_ignore_option
from .gitio import GitError, default_comparison, discover_repo_root, parse_ref, resolve_snapshot
from .render import render_json, render_text
from .search import SearchParams

EXIT_OK = 0
EXIT_FINDINGS = 1
EXIT_ERROR = 2
EXIT_TIMEOUT = 3

log = logging.getLogger("iccheck")


class _StderrProxy:
    """Resolve sys.stderr at write time so stream redirection keeps working."""

    def write(self, text: str) -> int:
        return sys.stderr.write(text)

    def flush(self) -> None:
        sys.stderr.flush()


def _setup_logging() -> None:
    if log.handlers:
        return
    handler = logging.StreamHandler(_StderrProxy())
    handler.setFormatter(
        logging.Formatter("%(asctime)s %(levelname)s %(message)s", "%Y/%m/%d %H:%M:%S")
    )
    log.addHandler(handler)
    log.setLevel(logging.INFO)
    log.propagate = False


@dataclass
class CliOptions:
    repo: str = "."
    from_rev: str | None = None
    to_rev: str | None = None
    ignore: tuple[str, ...] = field(default_factory=tuple)
    format: str = "text"
    timeout: float = 60.0
    fail_on_findings: bool = True


def run(options: CliOptions) -> int:
    """Resolve snapshots, detect missing changes, render, pick an exit code."""
    _setup_logging()
    if (options.from_rev is None) != (options.to_rev is None):
        log.error("error: usage: --from and --to must be given together")
        return EXIT_ERROR
    try:
        root = discover_repo_root(options.repo)
        rules = load_config(root)
        rules.extend(parse_ignore_option(text) for text in options.ignore)
        if options.from_rev is not None and options.to_rev is not None:
            from_ref = parse_ref(options.from_rev)
            to_ref = parse_ref(options.to_rev)
        else:
            from_ref, to_ref = default_comparison(root)
        from_snapshot = resolve_snapshot(root, from_ref)
        to_snapshot = resolve_snapshot(root, to_ref)
        params = SearchParams(time_budget=options.timeout)
        report = detect(from_snapshot, to_snapshot, params, rules)
    except (GitError, ConfigError) as exc:
        log.error("error: %s: %s", type(exc).__name__, exc)
        return EXIT_ERROR

    log.info(
        "%d change chunk(s) within %d file(s) found. from=%s to=%s",
        report.chunk_count,
        report.file_count,
        f'"{report.from_id}"' if " " in report.from_id else report.from_id,
        f'"{report.to_id}"' if " " in report.to_id else report.to_id,
    )
    log.info("%d clone(s) are likely missing consistent change.", report.missing_total)

    if options.format == "json":
        click.echo(render_json(report))
    else:
        click.echo(render_text(report), nl=False)

    if report.timed_out:
        log.warning("detection timed out; results are partial")
        return EXIT_TIMEOUT
    if report.missing_total and options.fail_on_findings:
        return EXIT_FINDINGS
    return EXIT_OK


@click.group(invoke_without_command=True)
@click.version_option(__version__)
@click.option("--repo", default=".", metavar="PATH", help="Git repository (or any directory inside one).")
@click.option("--from", "from_rev", default=None, metavar="REV", help="Pre-change snapshot (revision or WORKTREE).")
@click.option("--to", "to_rev", default=None, metavar="REV", help="Post-change snapshot (revision or WORKTREE).")
@click.option("--ignore", "ignore", multiple=True, metavar="GLOB[:REGEX]", help="Suppress missing regions; repeatable.")
@click.option("--format", "fmt", type=click.Choice(["text", "json"]), default="text", help="Report format.")
@click.option("--timeout", type=float, default=60.0, show_default=True, help="Detection time budget in seconds.")
@click.option("--no-fail", is_flag=True, help="Exit 0 even when missing changes are found.")
@click.pass_context
def main(
    ctx: click.Context,
    repo: str,
    from_rev: str | None,
    to_rev: str | None,
    ignore: tuple[str, ...],
    fmt: str,
    timeout: float,
    no_fail: bool,
) -> None:
    """Detect code clones that likely missed a consistent change."""
    if ctx.invoked_subcommand is not None:
        return
    options = CliOptions(
        repo=repo,
        from_rev=from_rev,
        to_rev=to_rev,
        ignore=ignore,
        format=fmt,
        timeout=timeout,
        fail_on_findings=not no_fail,
    )
    ctx.exit(run(options))


@main.command("lsp")
@click.option("--repo", default=None, metavar="PATH", help="Workspace root override (defaults to the client's rootUri).")
def lsp_command(repo: str | None) -> None:
    """Start the Language Server on standard input/output."""
    from .lsp import serve_stdio

    serve_stdio(Path(repo) if repo else None)


if __name__ == "__main__":
    main()
