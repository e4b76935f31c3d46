import json
import subprocess
from pathlib import Path

import pytest
from click.testing import CliRunner

from iccheck.changes import LineRange
from iccheck.cli import main
from iccheck.config import load_config
from iccheck.detector import AnalysisReport, CloneSet, ConfigError, IgnoreRule
from iccheck.render import render_json, render_text, report_from_json
from iccheck.search import CloneRegion

from .fixtures import build_clone_repo, build_fig4_repo

GOLDEN = Path(__file__).parent / "golden" / "fig4_report.txt"


@pytest.fixture
def runner():
    return CliRunner()


def invoke(runner, *args):
    return runner.invoke(main, list(args), catch_exceptions=False)


def test_text_output_matches_golden(git_repo, runner):
    build_fig4_repo(git_repo)
    result = invoke(runner, "--repo", str(git_repo.root))
    assert result.exit_code == 1  # findings found
    assert result.stdout == GOLDEN.read_text()


def test_golden_contains_flagship_lines():
    golden = GOLDEN.read_text()
    assert (
        "Clone set #0 - 5 out of 6 clones are likely missing consistent change(s).\n"
        in golden
    )
    assert "    pkg/lsp/handler.go:74 (L74-L74)\n" in golden
    assert "22 change chunk(s) within 3 file(s) found." in golden
    assert golden.splitlines()[1] == "5 clone(s) are likely missing consistent change."


def test_json_output_parses_and_round_trips(git_repo, runner):
    build_fig4_repo(git_repo)
    result = invoke(runner, "--repo", str(git_repo.root), "--format", "json")
    assert result.exit_code == 1
    document = json.loads(result.stdout)
    assert set(document) == {
        "from", "to", "chunk_count", "file_count", "timed_out", "clone_sets"
    }
    assert set(document["clone_sets"][0]) == {"id", "query", "changed", "missing"}
    assert set(document["clone_sets"][0]["missing"][0]) == {
        "path", "start_line", "end_line", "similarity"
    }
    assert '"similarity":1.0000' in result.stdout  # 4-decimal number field
    report = report_from_json(result.stdout)
    assert render_json(report) == result.stdout.strip()


def test_json_stdout_is_clean_logs_go_to_stderr(git_repo):
    build_clone_repo(git_repo, "yaml")
    proc = subprocess.run(
        ["iccheck", "--repo", str(git_repo.root), "--format", "json"],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 1
    json.loads(proc.stdout)  # nothing but the document on stdout
    assert "INFO" in proc.stderr
    assert "change chunk(s)" in proc.stderr


def test_exit_zero_on_clean_repo(git_repo, runner):
    git_repo.write("a.txt", "one two three\n")
    git_repo.commit()
    git_repo.write("a.txt", "one two three four unique-zzz\n")
    git_repo.commit()
    result = invoke(runner, "--repo", str(git_repo.root))
    assert result.exit_code == 0
    assert "0 clone(s) are likely missing consistent change." in result.stdout


def test_exit_one_on_findings_and_no_fail_override(git_repo, runner):
    build_clone_repo(git_repo, "yaml")
    assert invoke(runner, "--repo", str(git_repo.root)).exit_code == 1
    assert (
        invoke(runner, "--repo", str(git_repo.root), "--no-fail").exit_code == 0
    )


def test_exit_two_on_usage_and_environment_errors(runner, tmp_path, git_repo):
    assert runner.invoke(main, ["--definitely-not-a-flag"]).exit_code == 2
    plain = tmp_path / "plain"
    plain.mkdir()
    assert invoke(runner, "--repo", str(plain)).exit_code == 2
    git_repo.write("a.txt", "x\n")
    git_repo.commit()
    # --from without --to is incomplete
    assert invoke(runner, "--repo", str(git_repo.root), "--from", "HEAD").exit_code == 2
    assert (
        invoke(runner, "--repo", str(git_repo.root), "--from", "HEAD", "--to", "nope").exit_code
        == 2
    )


def test_exit_three_on_timeout(git_repo, runner):
    build_clone_repo(git_repo, "yaml")
    result = invoke(runner, "--repo", str(git_repo.root), "--timeout", "0")
    assert result.exit_code == 3
    assert '"timed_out"' not in result.stdout  # text format
    json_result = invoke(
        runner, "--repo", str(git_repo.root), "--timeout", "0", "--format", "json"
    )
    assert json_result.exit_code == 3
    assert json.loads(json_result.stdout)["timed_out"] is True


def test_explicit_from_to_revisions(git_repo, runner):
    build_clone_repo(git_repo, "yaml")
    git_repo.commit("apply edit")
    result = invoke(
        runner, "--repo", str(git_repo.root), "--from", "HEAD~1", "--to", "HEAD",
        "--format", "json",
    )
    assert result.exit_code == 1
    document = json.loads(result.stdout)
    assert document["from"].startswith("HEAD~1 (")
    assert document["to"].startswith("HEAD (")
    assert document["chunk_count"] == 1


def test_ignore_option_filters_missing(git_repo, runner):
    paths = build_clone_repo(git_repo, "yaml")
    result = invoke(
        runner, "--repo", str(git_repo.root),
        "--ignore", paths[1], "--ignore", paths[2],
        "--format", "json",
    )
    assert result.exit_code == 0
    assert json.loads(result.stdout)["clone_sets"] == []


def test_config_file_rules_are_loaded(git_repo, runner):
    paths = build_clone_repo(git_repo, "yaml")
    git_repo.write(
        ".iccheck.yaml",
        "ignore:\n"
        f"  - files: {paths[1]}\n"
        f"  - files: {paths[2]}\n",
    )
    result = invoke(runner, "--repo", str(git_repo.root), "--format", "json")
    assert result.exit_code == 0
    assert json.loads(result.stdout)["clone_sets"] == []


def test_invalid_ignore_option_is_usage_error(git_repo, runner):
    git_repo.write("a.txt", "x\n")
    git_repo.commit()
    result = invoke(runner, "--repo", str(git_repo.root), "--ignore", "**:(oops")
    assert result.exit_code == 2


def test_installed_entry_point_runs():
    proc = subprocess.run(["iccheck", "--help"], capture_output=True, text=True)
    assert proc.returncode == 0
    for flag in ("--repo", "--from", "--to", "--ignore", "--format", "--timeout", "--no-fail"):
        assert flag in proc.stdout
    assert "lsp" in proc.stdout


# -- rendering units ---------------------------------------------------------


def sample_report() -> AnalysisReport:
    clone_set = CloneSet(
        0,
        "pkg/lsp/handler.go",
        LineRange(167, 167),
        (CloneRegion("pkg/lsp/handler.go", 167, 167, 1.0),),
        (CloneRegion("pkg/lsp/handler.go", 74, 74, 2 / 3),),
    )
    return AnalysisReport("HEAD (abc)", "WORKTREE", 22, 3, (clone_set,))


def test_render_text_empty_report():
    report = AnalysisReport("A", "B", 0, 0, ())
    assert render_text(report) == (
        "0 change chunk(s) within 0 file(s) found. from=A to=B\n"
        "0 clone(s) are likely missing consistent change.\n"
    )


def test_render_text_quotes_labels_with_spaces():
    text = render_text(sample_report())
    assert 'from="HEAD (abc)" to=WORKTREE' in text


def test_render_json_empty_report():
    report = AnalysisReport("A", "B", 0, 0, ())
    assert render_json(report) == (
        '{"from":"A","to":"B","chunk_count":0,"file_count":0,'
        '"timed_out":false,"clone_sets":[]}'
    )


def test_render_json_rounds_similarity_to_four_decimals():
    text = render_json(sample_report())
    assert '"similarity":0.6667' in text
    assert '"similarity":1.0000' in text
    parsed = report_from_json(text)
    assert parsed.clone_sets[0].missing[0].similarity == 0.6667


def test_render_json_round_trip_equality():
    report = sample_report()
    parsed = report_from_json(render_json(report))
    assert parsed.from_id == report.from_id
    assert parsed.chunk_count == report.chunk_count
    assert render_json(parsed) == render_json(report)


def test_render_text_stable_bytes():
    report = sample_report()
    assert render_text(report) == render_text(report)
    assert "\r" not in render_text(report)


# -- config loading ------------------------------------------------------------


def test_load_config_absent_file(tmp_path):
    assert load_config(tmp_path) == []


def test_load_config_valid(tmp_path):
    (tmp_path / ".iccheck.yaml").write_text(
        'ignore:\n  - files: "**/generated/**"\n  - files: "**"\n    pattern: "^import "\n'
    )
    rules = load_config(tmp_path)
    assert rules == [
        IgnoreRule("**/generated/**", None),
        IgnoreRule("**", "^import "),
    ]


def test_load_config_invalid_regex_names_rule_index(tmp_path):
    (tmp_path / ".iccheck.yaml").write_text(
        'ignore:\n  - files: "**"\n    pattern: "(bad"\n'
    )
    with pytest.raises(ConfigError, match="rule #0"):
        load_config(tmp_path)


def test_load_config_malformed_yaml_reports_line(tmp_path):
    (tmp_path / ".iccheck.yaml").write_text("ignore:\n  - files: [unclosed\n")
    with pytest.raises(ConfigError, match=r".iccheck.yaml:\d+"):
        load_config(tmp_path)


def test_load_config_rejects_non_mapping_rules(tmp_path):
    (tmp_path / ".iccheck.yaml").write_text("ignore:\n  - just-a-string\n")
    with pytest.raises(ConfigError, match="rule #0"):
        load_config(tmp_path)
