"""Kernel backend selection.

The hot per-point kernels exist twice: compiled (:mod:`._kernels_numba`)
and pure numpy (:mod:`._kernels_numpy`).  The environment flag

    VARIFOLDS_BACKEND = auto | numba | numpy

picks one at import time; ``auto`` (the default) uses numba when it
imports and falls back to numpy otherwise.  ``set_backend`` switches at
runtime, which the parity tests and the backend benchmark rely on.

The two backends agree to floating-point roundoff (different summation
orders), not bit for bit; reproducibility guarantees hold per backend.
"""

from __future__ import annotations

import os
import warnings
from types import ModuleType

from .errors import ValidationError

ENV_FLAG = "VARIFOLDS_BACKEND"
THREADS_ENV = "VARIFOLDS_THREADS"

_active: ModuleType | None = None


def _load(name: str) -> ModuleType:
    if name == "numpy":
        from . import _kernels_numpy

        return _kernels_numpy
    if name == "numba":
        from . import _kernels_numba

        return _kernels_numba
    raise ValidationError(f"unknown backend {name!r}; expected 'auto', 'numba' or 'numpy'")


def set_backend(name: str) -> str:
    """Select the kernel backend; returns the name actually activated."""
    global _active
    name = name.lower()
    if name == "auto":
        try:
            _active = _load("numba")
        except ImportError:
            warnings.warn("numba unavailable; falling back to the numpy kernels")
            _active = _load("numpy")
    else:
        _active = _load(name)
    return _active.NAME


def kernels() -> ModuleType:
    """The active kernel module (lazy-initialized from the env flag)."""
    global _active
    if _active is None:
        set_backend(os.environ.get(ENV_FLAG, "auto"))
    assert _active is not None
    return _active


def backend_name() -> str:
    return kernels().NAME


def default_thread_count() -> int | None:
    """Thread count from the VARIFOLDS_THREADS env var, if set and valid."""
    raw = os.environ.get(THREADS_ENV)
    if raw is None:
        return None
    try:
        value = int(raw)
    except ValueError as exc:
        raise ValidationError(f"{THREADS_ENV} must be an integer, got {raw!r}") from exc
    if value < 1:
        raise ValidationError(f"{THREADS_ENV} must be >= 1, got {value}")
    return value


def set_thread_count(threads: int) -> None:
    """Bound the compiled backend's worker pool (no-op for the numpy backend)."""
    if threads < 1:
        raise ValidationError(f"thread count must be >= 1, got {threads}")
    if backend_name() == "numba":
        import numba

        numba.set_num_threads(min(threads, numba.config.NUMBA_NUM_THREADS))
