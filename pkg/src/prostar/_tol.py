"""Global tolerance scale shared by every structural check."""

from __future__ import annotations

import contextlib

import numpy as np

DEFAULT_SCALE = 1e-9
# singular/eigen values below this fraction of the largest are treated as zero
RANK_CUTOFF = 1e-10

_scale = DEFAULT_SCALE


def scale() -> float:
    return _scale


def set_scale(value: float) -> None:
    global _scale
    if not value > 0:
        raise ValueError(f"tolerance scale must be positive, got {value!r}")
    _scale = float(value)


@contextlib.contextmanager
def tolerance_scale(value: float):
    """Temporarily replace the tolerance scale factor."""
    old = _scale
    set_scale(value)
    try:
        yield
    finally:
        set_scale(old)


def max_abs(*arrays) -> float:
    m = 0.0
    for a in arrays:
        a = np.asarray(a)
        if a.size:
            m = max(m, float(np.max(np.abs(a))))
    return m


def atol(*arrays) -> float:
    """Scale-invariant absolute tolerance: ``scale * (1 + max entry magnitude)``."""
    return _scale * (1.0 + max_abs(*arrays))


def residual(a) -> float:
    """Entrywise max-abs residual; empty arrays have residual zero."""
    a = np.asarray(a)
    return float(np.max(np.abs(a))) if a.size else 0.0


def spectral_norm(a) -> float:
    a = np.asarray(a)
    if a.size == 0:
        return 0.0
    return float(np.linalg.norm(a, 2))


def verify_tol(*arrays) -> float:
    """Looser bound for identities that pass through a factorisation (ten times :func:`atol`)."""
    return 10.0 * atol(*arrays)
