"""Numeric encoding of text lines for the window-scoring kernels.

Each distinct line is interned once per corpus and its bigram set is
stored as a sorted, duplicate-free array of integer ids. The id of a
bigram packs both scalar values into one int64:

    id = ord(first) * 0x110000 + ord(second)

which is injective over Unicode scalar values and stays below 2**41.
All interned lines share one CSR-style buffer (``data`` + ``offsets``)
so a kernel can score a query line against every distinct line in a
single pass.
"""

from __future__ import annotations

import numpy as np

BIGRAM_BASE = 0x110000  # one past the largest Unicode scalar value
_LINE_SHIFT = 41  # bigram ids fit in 41 bits; line index goes above

_EMPTY_I64 = np.empty(0, dtype=np.int64)


def encode_line(line: str) -> np.ndarray:
    """Sorted unique bigram ids of one line (empty for lines shorter than 2)."""
    if len(line) < 2:
        return _EMPTY_I64
    cp = np.frombuffer(line.encode("utf-32-le"), dtype=np.uint32).astype(np.int64)
    return np.unique(cp[:-1] * BIGRAM_BASE + cp[1:])


def encode_lines(lines: list[str]) -> tuple[np.ndarray, np.ndarray]:
    """Encode many lines at once into one CSR buffer.

    Returns ``(data, offsets)`` where ``data[offsets[k]:offsets[k+1]]`` is
    the sorted unique bigram-id array of ``lines[k]``. Equivalent to
    concatenating :func:`encode_line` per line, but vectorized over the
    whole batch.
    """
    n = len(lines)
    if n == 0:
        return _EMPTY_I64, np.zeros(1, dtype=np.int64)
    if n >= 1 << (63 - _LINE_SHIFT):
        raise ValueError(f"too many distinct lines to encode: {n}")
    blob = "".join(lines)
    lens = np.fromiter((len(s) for s in lines), dtype=np.int64, count=n)
    if len(blob) < 2:
        return _EMPTY_I64, np.zeros(n + 1, dtype=np.int64)
    cp = np.frombuffer(blob.encode("utf-32-le"), dtype=np.uint32).astype(np.int64)
    line_of_char = np.repeat(np.arange(n, dtype=np.int64), lens)
    # a pair is valid only when both characters sit in the same line
    valid = line_of_char[:-1] == line_of_char[1:]
    pair_ids = cp[:-1] * BIGRAM_BASE + cp[1:]
    keys = (line_of_char[:-1][valid] << _LINE_SHIFT) | pair_ids[valid]
    keys = np.sort(keys)
    if keys.size:
        keep = np.empty(keys.size, dtype=bool)
        keep[0] = True
        np.not_equal(keys[1:], keys[:-1], out=keep[1:])
        keys = keys[keep]
    data = keys & ((1 << _LINE_SHIFT) - 1)
    owner = keys >> _LINE_SHIFT
    offsets = np.searchsorted(owner, np.arange(n + 1, dtype=np.int64), side="left")
    return data, offsets.astype(np.int64)


class CorpusIndex:
    """Interned, kernel-ready view of a set of text files.

    Files are registered with :meth:`add_file`; every distinct line across
    all files gets one slot in the shared CSR buffer. Call :meth:`freeze`
    once all files are in, then hand ``data``/``offsets``/``lengths`` and
    the per-file uid arrays to the kernels.
    """

    def __init__(self) -> None:
        self._uid_of: dict[str, int] = {}
        self._lines: list[str] = []
        self._file_uids: dict[str, np.ndarray] = {}
        self.data: np.ndarray | None = None
        self.offsets: np.ndarray | None = None
        self.lengths: np.ndarray | None = None

    def add_file(self, path: str, lines: list[str]) -> None:
        uid_of = self._uid_of
        uids = np.empty(len(lines), dtype=np.int64)
        for i, line in enumerate(lines):
            uid = uid_of.get(line)
            if uid is None:
                uid = len(self._lines)
                uid_of[line] = uid
                self._lines.append(line)
            uids[i] = uid
        self._file_uids[path] = uids

    def freeze(self) -> None:
        self.data, self.offsets = encode_lines(self._lines)
        self.lengths = np.fromiter(
            (len(s) for s in self._lines), dtype=np.int64, count=len(self._lines)
        )

    @property
    def n_lines(self) -> int:
        return len(self._lines)

    def file_uids(self, path: str) -> np.ndarray:
        return self._file_uids[path]

    def paths(self) -> list[str]:
        return sorted(self._file_uids)

    def encode_query(self, lines: list[str]) -> list[np.ndarray]:
        """Per-line bigram arrays for a query fragment (not interned)."""
        return [encode_line(line) for line in lines]
