#!/usr/bin/env python3
"""Benchmark the numba kernels against the pure-numpy fallback.

Builds a synthetic corpus in memory, runs the same clone searches on both
backends, and prints wall times plus the speedup. Select a backend at
runtime with ICCHECK_BACKEND=numba|numpy; this script times both
explicitly regardless of the flag.

Usage:
    python benchmarks/bench_backends.py [n_files] [n_lines] [n_queries]
"""

import random
import statistics
import sys
import time

from iccheck.changes import ChangeChunk, QueryFragment
from iccheck.gitio import MemorySnapshot
from iccheck.kernels import BackendError, get_backend
from iccheck.search import SearchParams, search_snapshot

VERBS = ["load", "store", "merge", "scan", "emit", "bind", "route", "pack"]
NOUNS = ["buffer", "record", "frame", "widget", "cursor", "token", "bucket", "shard"]


def build_snapshot(n_files: int, n_lines: int, seed: int = 0) -> MemorySnapshot:
    rng = random.Random(seed)
    pool = [
        f"    {rng.choice(NOUNS)}_{i % 97} = {rng.choice(VERBS)}_{rng.randrange(50)}(x, {i % 13})"
        for i in range(4000)
    ]
    files = {}
    for f in range(n_files):
        lines = [
            rng.choice(pool)
            if rng.random() < 0.6
            else f"    local_{f}_{i} = compute_{rng.randrange(999)}(arg)"
            for i in range(n_lines)
        ]
        files[f"file_{f:03}.py"] = "".join(line + "\n" for line in lines)
    return MemorySnapshot(files)


def make_queries(snapshot: MemorySnapshot, count: int) -> list[QueryFragment]:
    rng = random.Random(42)
    paths = sorted(snapshot.files)
    queries = []
    for q in range(count):
        path = rng.choice(paths)
        lines = snapshot.read_file(path).lines
        start = rng.randrange(len(lines) - 3)
        fragment = tuple(lines[start : start + 3])
        chunk = ChangeChunk(path, start, start + 3, start, start + 3, fragment, fragment)
        queries.append(QueryFragment(fragment, chunk))
    return queries


def time_backend(name: str, snapshot_factory, queries_factory, repeats: int = 5) -> list[float]:
    import os

    os.environ["ICCHECK_BACKEND"] = name
    backend = get_backend()
    assert backend.NAME == name
    if hasattr(backend, "warmup"):
        backend.warmup()
    samples = []
    for _ in range(repeats):
        snapshot = snapshot_factory()  # fresh snapshot: no corpus memo reuse
        queries = queries_factory(snapshot)
        started = time.perf_counter()
        for query in queries:
            search_snapshot(query, snapshot, SearchParams())
        samples.append(time.perf_counter() - started)
    return samples


def main() -> None:
    n_files = int(sys.argv[1]) if len(sys.argv) > 1 else 300
    n_lines = int(sys.argv[2]) if len(sys.argv) > 2 else 200
    n_queries = int(sys.argv[3]) if len(sys.argv) > 3 else 10

    print(f"corpus: {n_files} files x {n_lines} lines, {n_queries} 3-line queries")
    results = {}
    for name in ("numpy", "numba"):
        try:
            samples = time_backend(
                name,
                lambda: build_snapshot(n_files, n_lines),
                lambda snapshot: make_queries(snapshot, n_queries),
            )
        except BackendError as exc:
            print(f"{name:>6}: unavailable ({exc})")
            continue
        results[name] = statistics.median(samples)
        per_query = results[name] / n_queries * 1000
        print(
            f"{name:>6}: median {results[name]:.3f}s "
            f"({per_query:.1f} ms/query, best {min(samples):.3f}s, worst {max(samples):.3f}s)"
        )
    if len(results) == 2:
        print(f"speedup: numba is {results['numpy'] / results['numba']:.2f}x vs numpy")


if __name__ == "__main__":
    main()
