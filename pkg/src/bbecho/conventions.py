"""Frozen numerical conventions and their on-disk calibration cache.

Two conventions of the free-fermion evaluation are not fixed by the model
definition alone and were calibrated once against exact diagonalization:

* ``BOUNDARY_SIGN = -1``: the Jordan-Wigner boundary bond enters with the
  opposite sign of the bulk bonds (antiperiodic fermions, even-parity
  sector). This is the sector containing the spin-chain ground state for
  even N.
* ``DET_EXPONENT = 1``: the determinant magnitude over the doubled
  (Nambu) space equals the Loschmidt echo itself, i.e. the squared
  overlap, with no further squaring.

``calibrate_and_cache`` re-derives the pair from scratch (small-N exact
diagonalization) and stores it in a state file keyed by the library
version, so a CLI run never silently trusts a stale cache after an
upgrade. A mismatch with the frozen constants is treated as a build
defect and raised.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass
from pathlib import Path

BOUNDARY_SIGN = -1
DET_EXPONENT = 1

_STATE_ENV = "BBECHO_STATE_DIR"
_STATE_FILE = "calibration.json"


@dataclass(frozen=True)
class Conventions:
    boundary_sign: int
    det_exponent: int
    max_residual: float | None = None
    source: str = "frozen"


def frozen() -> Conventions:
    """The compiled-in convention pair."""
    return Conventions(BOUNDARY_SIGN, DET_EXPONENT, None, "frozen")


def state_dir() -> Path:
    """Directory for the calibration state file.

    Resolution order: $BBECHO_STATE_DIR, $XDG_CACHE_HOME/bbecho,
    ~/.cache/bbecho.
    """
    env = os.environ.get(_STATE_ENV)
    if env:
        return Path(env)
    xdg = os.environ.get("XDG_CACHE_HOME")
    base = Path(xdg) if xdg else Path.home() / ".cache"
    return base / "bbecho"


def load_cached(version: str) -> Conventions | None:
    path = state_dir() / _STATE_FILE
    try:
        payload = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, ValueError):
        return None
    if payload.get("version") != version:
        return None
    try:
        return Conventions(
            boundary_sign=int(payload["boundary_sign"]),
            det_exponent=int(payload["det_exponent"]),
            max_residual=float(payload["max_residual"]),
            source="cache",
        )
    except (KeyError, TypeError, ValueError):
        return None


def store_cache(conv: Conventions, version: str) -> Path:
    d = state_dir()
    d.mkdir(parents=True, exist_ok=True)
    path = d / _STATE_FILE
    payload = {
        "version": version,
        "boundary_sign": conv.boundary_sign,
        "det_exponent": conv.det_exponent,
        "max_residual": conv.max_residual,
    }
    path.write_text(json.dumps(payload, sort_keys=True) + "\n", encoding="utf-8")
    return path


def calibrate_and_cache(version: str) -> Conventions:
    """Run the small-N calibration suite and persist the result.

    Raises CalibrationError if the scan is ambiguous or disagrees with the
    frozen constants.
    """
    from . import oracle  # deferred: oracle pulls in the heavy modules

    result = oracle.calibrate_conventions(oracle.default_calibration_specs())
    conv = Conventions(
        boundary_sign=result.boundary_sign,
        det_exponent=result.det_exponent,
        max_residual=result.max_residual,
        source="calibrated",
    )
    if (conv.boundary_sign, conv.det_exponent) != (BOUNDARY_SIGN, DET_EXPONENT):
        raise oracle.CalibrationError(
            "calibration result "
            f"({conv.boundary_sign}, {conv.det_exponent}) disagrees with the "
            f"frozen conventions ({BOUNDARY_SIGN}, {DET_EXPONENT})"
        )
    store_cache(conv, version)
    return conv


def ensure(version: str, recalibrate: bool = False) -> Conventions:
    """Return validated conventions, calibrating lazily on first use."""
    if not recalibrate:
        cached = load_cached(version)
        if cached is not None:
            return cached
    return calibrate_and_cache(version)
