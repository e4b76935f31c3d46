"""Repository-level ignore configuration (.iccheck.yaml).

Schema:

    ignore:
      - files: "**/generated/**"        # path glob (required)
        pattern: "^import "             # optional per-line regex

The default rule set is empty: filters must be opted into, never hide
findings silently.
"""

from __future__ import annotations

from pathlib import Path

import yaml

from .detector import ConfigError, IgnoreRule

CONFIG_FILENAME = ".iccheck.yaml"


def load_config(repo_root: Path | str) -> list[IgnoreRule]:
    """Read ignore rules from the repository root; absent file means none."""
    path = Path(repo_root) / CONFIG_FILENAME
    if not path.is_file():
        return []
    try:
        doc = yaml.safe_load(path.read_text(encoding="utf-8"))
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        where = f"{CONFIG_FILENAME}:{mark.line + 1}" if mark else CONFIG_FILENAME
        raise ConfigError(f"cannot parse {where}: {exc}") from exc
    if doc is None:
        return []
    if not isinstance(doc, dict):
        raise ConfigError(f"{CONFIG_FILENAME}: top level must be a mapping")
    entries = doc.get("ignore", [])
    if not isinstance(entries, list):
        raise ConfigError(f"{CONFIG_FILENAME}: 'ignore' must be a list")
    rules = []
    for index, entry in enumerate(entries):
        if not isinstance(entry, dict) or "files" not in entry:
            raise ConfigError(
                f"{CONFIG_FILENAME}: ignore rule #{index} must be a mapping with 'files'"
            )
        files = entry["files"]
        pattern = entry.get("pattern")
        if not isinstance(files, str) or (pattern is not None and not isinstance(pattern, str)):
            raise ConfigError(
                f"{CONFIG_FILENAME}: ignore rule #{index} fields must be strings"
            )
        rule = IgnoreRule(files, pattern)
        try:
            rule.compile()
        except ConfigError as exc:
            raise ConfigError(f"{CONFIG_FILENAME}: ignore rule #{index}: {exc}") from exc
        rules.append(rule)
    return rules
