"""Query-kernel backend selection.

The compiled Cython kernels are preferred when the extension built; the
pure-Python twin is the fallback.  Selection happens once at import, but
callers may pin a backend per tree (KdTree(..., backend="python")) or
globally via the NNKIT_BACKEND environment variable - useful for the
compiled-vs-pure benchmark and for cross-backend identity tests.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

from . import _pykernels

try:
    from . import _ckernels
except ImportError:  # extension not built; fall back silently
    _ckernels = None

__all__ = ["Backend", "available_backends", "get_backend", "default_backend_name"]


@dataclass(frozen=True)
class Backend:
    name: str
    module: object
    compiled: bool


_BACKENDS = {"python": Backend("python", _pykernels, False)}
if _ckernels is not None:
    _BACKENDS["compiled"] = Backend("compiled", _ckernels, True)


def available_backends() -> tuple:
    return tuple(sorted(_BACKENDS))


def default_backend_name() -> str:
    forced = os.environ.get("NNKIT_BACKEND")
    if forced:
        if forced not in _BACKENDS:
            raise ValueError(
                f"NNKIT_BACKEND={forced!r} not available; have {available_backends()}")
        return forced
    return "compiled" if "compiled" in _BACKENDS else "python"


def get_backend(name: str | None = None) -> Backend:
    if name is None:
        name = default_backend_name()
    try:
        return _BACKENDS[name]
    except KeyError:
        raise ValueError(
            f"unknown backend {name!r}; have {available_backends()}") from None
