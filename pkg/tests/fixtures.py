"""Repository fixtures shared by detector, CLI, LSP, and acceptance tests."""

from __future__ import annotations

import hashlib
import random

from .conftest import RepoBuilder


def gibberish(tag: str) -> str:
    """Deterministic line with no meaningful similarity to anything else."""
    return hashlib.md5(tag.encode()).hexdigest()[:20]

# The same three-file duplicated-block scenario expressed in several
# languages. Within one language the 3-line block is identical across all
# three files and sits at the same line numbers (3-5), so clone-set
# structure must come out identical regardless of the extension.
CLONE_TEMPLATES: dict[str, dict] = {
    "yaml": {
        "block": ["  type: NodePort", "  port: 8080", "  targetPort: 8080"],
        "edited": "  port: 8081",
        "headers": [
            ["# service one", "spec:"],
            ["# service two", "spec:"],
            ["# service three", "spec:"],
        ],
        "footers": [["restart: always"], ["restart: never"], ["restart: maybe"]],
    },
    "json": {
        "block": ['  "type": "NodePort",', '  "port": 8080,', '  "targetPort": 8080'],
        "edited": '  "port": 8081,',
        "headers": [
            ["{", '  "name": "one",'],
            ["{", '  "name": "two",'],
            ["{", '  "name": "three",'],
        ],
        "footers": [["}"], ["} "], ["}  "]],
    },
    "java": {
        "block": [
            "    server.bind(Protocol.TCP);",
            "    server.setPort(8080);",
            "    registry.announce(handle);",
        ],
        "edited": "    server.setPort(8081);",
        "headers": [
            ["class One {", "  void configure() {"],
            ["class Two {", "  void configure() {"],
            ["class Three {", "  void configure() {"],
        ],
        "footers": [["}"], ["} "], ["}  "]],
    },
    "c": {
        "block": [
            "    cfg.mode = MODE_STREAM;",
            "    cfg.port = 8080;",
            "    apply_settings(&handle);",
        ],
        "edited": "    cfg.port = 8081;",
        "headers": [
            ["/* unit one */", "static void configure(void) {"],
            ["/* unit two */", "static void configure(void) {"],
            ["/* unit three */", "static void configure(void) {"],
        ],
        "footers": [["}"], ["} "], ["}  "]],
    },
    "zzz": {
        "block": ["<<type NodePort>>", "<<port 8080>>", "<<targetPort 8080>>"],
        "edited": "<<port 8081>>",
        "headers": [
            ["%% widget one", "%% begin"],
            ["%% widget two", "%% begin"],
            ["%% widget three", "%% begin"],
        ],
        "footers": [["%% end one"], ["%% end two"], ["%% end three"]],
    },
}

BLOCK_START_LINE = 3  # 2 header lines, then the block
EDITED_LINE = 4  # the block's middle line is the one that changes


def build_clone_repo(
    builder: RepoBuilder, ext: str = "yaml", edit_on_disk: bool = True
) -> list[str]:
    """Three files sharing one block; commit; edit file 0's middle block line.

    Returns the three relative paths in order (paths[0] is the edited one).
    With ``edit_on_disk=False`` the repository stays clean; use
    :func:`edited_clone_text` to apply the same edit through an overlay.
    """
    template = CLONE_TEMPLATES[ext]
    paths = [f"svc-{name}.{ext}" for name in ("a", "b", "c")]
    for index, path in enumerate(paths):
        lines = (
            template["headers"][index] + template["block"] + template["footers"][index]
        )
        builder.write(path, "".join(line + "\n" for line in lines))
    builder.commit("add services")
    if edit_on_disk:
        builder.write(paths[0], edited_clone_text(ext))
    return paths


def clone_text(ext: str, file_index: int) -> str:
    template = CLONE_TEMPLATES[ext]
    lines = (
        template["headers"][file_index]
        + template["block"]
        + template["footers"][file_index]
    )
    return "".join(line + "\n" for line in lines)


def edited_clone_text(ext: str, file_index: int = 0) -> str:
    template = CLONE_TEMPLATES[ext]
    lines = (
        template["headers"][file_index]
        + [template["block"][0], template["edited"], template["block"][2]]
        + template["footers"][file_index]
    )
    return "".join(line + "\n" for line in lines)


# A report shaped like the tool's flagship example: 22 chunks in 3 files,
# one clone set of 6 single-line clones (5 missing, 1 changed at L167).
FIG4_CLONE_LINES = (52, 74, 93, 112, 147, 167)
FIG4_CLONE_TEXT = "\tnotifyCloneSet(ctx, req.Position, cloneSet)"
FIG4_EDITED_TEXT = "\tnotifyCloneSet(ctx, req.Position, cloneSets)"


def build_fig4_repo(builder: RepoBuilder) -> None:
    clone_lines = set(FIG4_CLONE_LINES)
    lines = []
    for number in range(1, 171):
        if number in clone_lines:
            lines.append(FIG4_CLONE_TEXT)
        else:
            lines.append(f"\t// handler step {number} r{number * 7 % 13}")
    builder.write("pkg/lsp/handler.go", "".join(line + "\n" for line in lines))

    script = [f"echo deploy-step-{i} :: marker-{i * 31 % 17}" for i in range(1, 24)]
    builder.write("scripts/deploy.sh", "".join(line + "\n" for line in script))
    web = [f"export const widget{i} = {i * 13 % 19};" for i in range(1, 22)]
    builder.write("web/app.ts", "".join(line + "\n" for line in web))
    builder.commit("baseline")

    # one real edit at L167 plus 21 noise edits that match nothing
    lines[166] = FIG4_EDITED_TEXT
    builder.write("pkg/lsp/handler.go", "".join(line + "\n" for line in lines))
    for i in (1, 3, 5, 7, 9, 11, 13, 15, 17, 19, 21):
        script[i] = gibberish(f"sh{i}")
    builder.write("scripts/deploy.sh", "".join(line + "\n" for line in script))
    for i in (0, 2, 4, 6, 8, 10, 12, 14, 16, 18):
        web[i] = gibberish(f"ts{i}")
    builder.write("web/app.ts", "".join(line + "\n" for line in web))


_POOL_VERBS = ["load", "store", "merge", "scan", "emit", "bind", "route", "pack"]
_POOL_NOUNS = ["buffer", "record", "frame", "widget", "cursor", "token", "bucket", "shard"]


def _line_pool(rng: random.Random, size: int) -> list[str]:
    pool = []
    for i in range(size):
        verb = rng.choice(_POOL_VERBS)
        noun = rng.choice(_POOL_NOUNS)
        pool.append(f"    {noun}_{i % 97} = {verb}_{rng.randrange(50)}({noun}, {i % 13})")
    return pool


def build_synthetic_repo(
    builder: RepoBuilder, n_files: int = 500, n_lines: int = 200, seed: int = 0
) -> list[str]:
    """Committed repository of n_files x n_lines with realistic line reuse."""
    rng = random.Random(seed)
    pool = _line_pool(rng, 4000)
    paths = []
    for f in range(n_files):
        lines = []
        for i in range(n_lines):
            if rng.random() < 0.6:
                lines.append(rng.choice(pool))
            else:
                lines.append(f"    local_{f}_{i} = compute_{rng.randrange(999)}(arg_{f})")
        path = f"src/mod_{f // 50:02}/file_{f:03}.py"
        builder.write(path, "".join(line + "\n" for line in lines))
        paths.append(path)
    builder.commit("synthetic baseline")
    return paths


def apply_three_line_change(builder: RepoBuilder, path: str) -> None:
    """One contiguous 3-line modification in the middle of one file."""
    lines = (builder.root / path).read_text().splitlines()
    lines[100] = "    frame_7 = merge_21(frame, 999)"
    lines[101] = "    record_9 = route_33(record, 998)"
    lines[102] = "    bucket_3 = scan_14(bucket, 997)"
    builder.write(path, "".join(line + "\n" for line in lines))


def apply_many_chunk_change(builder: RepoBuilder, paths: list[str], chunks: int = 25) -> None:
    """`chunks` isolated single-line edits spread over the first few files."""
    per_file = 5
    for index in range(chunks):
        path = paths[index // per_file]
        lines = (builder.root / path).read_text().splitlines()
        position = 20 + (index % per_file) * 30
        lines[position] = f"    edited_{index} = rework_{index * 7 % 41}(input_{index})"
        builder.write(path, "".join(line + "\n" for line in lines))
