"""Hot window-scoring kernels with selectable backends.

Two interchangeable implementations exist: a numba-jitted one (default)
and a pure-numpy fallback. The env flag ICCHECK_BACKEND picks one:

    ICCHECK_BACKEND=auto    try numba, fall back to numpy (default)
    ICCHECK_BACKEND=numba   require numba, error if unavailable
    ICCHECK_BACKEND=numpy   force the pure-numpy path

Both backends are exact: they produce bit-identical scores to the
pure-Python reference in :mod:`iccheck.similarity`, so backend choice can
never change which windows clear the clone threshold.
"""

from __future__ import annotations

import os
from types import ModuleType

from .encode import BIGRAM_BASE, CorpusIndex, encode_line, encode_lines

BACKEND_ENV = "ICCHECK_BACKEND"

_cache: dict[str, ModuleType] = {}


class BackendError(RuntimeError):
    """Requested kernel backend cannot be loaded."""


def _load(name: str) -> ModuleType:
    mod = _cache.get(name)
    if mod is not None:
        return mod
    if name == "numpy":
        from . import np_backend as mod
    elif name == "numba":
        try:
            from . import nb_backend as mod
        except ImportError as exc:
            raise BackendError(f"numba backend unavailable: {exc}") from exc
    else:
        raise BackendError(f"unknown kernel backend {name!r} (use numba or numpy)")
    _cache[name] = mod
    return mod


def get_backend(name: str | None = None) -> ModuleType:
    """Resolve the kernel backend, honoring ICCHECK_BACKEND when unset."""
    name = name or os.environ.get(BACKEND_ENV, "auto")
    if name == "auto":
        try:
            return _load("numba")
        except BackendError:
            return _load("numpy")
    return _load(name)


__all__ = [
    "BACKEND_ENV",
    "BIGRAM_BASE",
    "BackendError",
    "CorpusIndex",
    "encode_line",
    "encode_lines",
    "get_backend",
]
