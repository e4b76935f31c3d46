import os
import subprocess
from pathlib import Path

import pytest

# fixed commit timestamps keep fixture hashes (and golden files) stable
_GIT_ENV = {
    **os.environ,
    "GIT_AUTHOR_DATE": "2024-11-26T22:00:00+09:00",
    "GIT_COMMITTER_DATE": "2024-11-26T22:00:00+09:00",
}


def run_git(repo: Path, *args: str) -> str:
    proc = subprocess.run(
        ["git", "-C", str(repo), *args],
        check=True,
        capture_output=True,
        text=True,
        env=_GIT_ENV,
    )
    return proc.stdout.strip()


class RepoBuilder:
    """Small helper for building throwaway Git repositories in tests."""

    def __init__(self, root: Path):
        self.root = root
        root.mkdir(parents=True, exist_ok=True)
        run_git(root, "init", "-q")
        run_git(root, "config", "user.name", "test")
        run_git(root, "config", "user.email", "test@example.com")
        run_git(root, "config", "commit.gpgsign", "false")

    def write(self, rel: str, text: str) -> Path:
        path = self.root / rel
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="utf-8")
        return path

    def write_bytes(self, rel: str, data: bytes) -> Path:
        path = self.root / rel
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_bytes(data)
        return path

    def remove(self, rel: str) -> None:
        (self.root / rel).unlink()

    def commit(self, message: str = "change") -> str:
        run_git(self.root, "add", "-A")
        run_git(self.root, "commit", "-q", "-m", message, "--allow-empty")
        return self.head()

    def head(self) -> str:
        return run_git(self.root, "rev-parse", "HEAD")


@pytest.fixture
def git_repo(tmp_path: Path) -> RepoBuilder:
    return RepoBuilder(tmp_path / "repo")


@pytest.fixture(params=["numpy", "numba"])
def backend_name(request, monkeypatch) -> str:
    monkeypatch.setenv("ICCHECK_BACKEND", request.param)
    return request.param
