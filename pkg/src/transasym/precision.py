"""Floating-point precision switch.

The whole package computes in complex IEEE double by default.  Setting the
environment variable ``TRANSASYM_PRECISION=extended`` switches new series and
germ constructions to ``numpy.clongdouble`` (x87 80-bit on x86).  This is a
configuration switch, not a type change: every coefficient-level linear solve
is a componentwise division, so no LAPACK call stands in the way.
"""

from __future__ import annotations

import os

import numpy as np

_EXTENDED_NAMES = {"extended", "longdouble", "long"}
_ENV_VAR = "TRANSASYM_PRECISION"


def precision_mode() -> str:
    """Current mode, "double" or "extended" (read from the environment)."""
    raw = os.environ.get(_ENV_VAR, "double").strip().lower()
    if raw in _EXTENDED_NAMES:
        return "extended"
    if raw in ("", "double"):
        return "double"
    raise ValueError(f"{_ENV_VAR} must be 'double' or 'extended', got {raw!r}")


def complex_dtype():
    return np.clongdouble if precision_mode() == "extended" else np.complex128


def real_dtype():
    return np.longdouble if precision_mode() == "extended" else np.float64
