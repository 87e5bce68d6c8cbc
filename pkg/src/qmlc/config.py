"""Numerical tolerance shared by every semantic check.

The value can be overridden with the ``QML_TOLERANCE`` environment variable
(read by the command-line driver).  It only affects checks, never emitted
artifacts.
"""

from __future__ import annotations

import os

DEFAULT_TOLERANCE = 1e-9

# wire caps for dense elaboration
MAX_PURE_WIRES = 12
MAX_DENSITY_WIRES = 10

_tolerance = DEFAULT_TOLERANCE


def tolerance() -> float:
    return _tolerance


def set_tolerance(value: float) -> None:
    global _tolerance
    if not value > 0:
        raise ValueError(f"tolerance must be positive, got {value!r}")
    _tolerance = float(value)


def tolerance_from_env(environ=None) -> float:
    environ = os.environ if environ is None else environ
    raw = environ.get("QML_TOLERANCE")
    if raw:
        set_tolerance(float(raw))
    return _tolerance
