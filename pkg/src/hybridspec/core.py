"""Shared parameter records, frequency grids, spectra and the signal map.

Unit convention: every frequency-like quantity (transition frequencies,
couplings, decay rates, detunings, drive amplitude) is stored as the scalar
x of "x * 2pi MHz".  All formulas in this package are homogeneous in that
unit, so no 2pi factors appear anywhere.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np


def _require_finite(name: str, value: float) -> None:
    if not math.isfinite(value):
        raise ValueError(f"{name} must be finite, got {value!r}")


def _require_nonneg(name: str, value: float) -> None:
    _require_finite(name, value)
    if value < 0:
        raise ValueError(f"{name} must be >= 0, got {value!r}")


@dataclass(frozen=True)
class SystemParams:
    """Effective model parameters shared by THOM, MHOM and the master equation.

    ``lam`` is the drive amplitude (called lambda in the formulas).
    """

    omega_fq: float
    omega_nv: float
    g: float
    j: float
    theta: float = 0.0
    gamma_fq: float = 0.0
    gamma_b: float = 0.0
    gamma_d: float = 0.0
    lam: float = 1.0

    def __post_init__(self):
        _require_finite("omega_fq", self.omega_fq)
        _require_finite("omega_nv", self.omega_nv)
        _require_finite("theta", self.theta)
        for name in ("g", "j", "gamma_fq", "gamma_b", "gamma_d", "lam"):
            _require_nonneg(name, getattr(self, name))

    def detuning(self) -> float:
        """omega_fq - omega_nv (derived, never stored)."""
        return self.omega_fq - self.omega_nv

    def with_(self, **kwargs) -> "SystemParams":
        return replace(self, **kwargs)


@dataclass(frozen=True)
class FrequencyGrid:
    start: float
    stop: float
    n_points: int

    def __post_init__(self):
        _require_finite("start", self.start)
        _require_finite("stop", self.stop)
        if self.n_points < 2:
            raise ValueError(f"n_points must be >= 2, got {self.n_points}")
        if not self.start < self.stop:
            raise ValueError("grid requires start < stop")

    def points(self) -> np.ndarray:
        return np.linspace(self.start, self.stop, self.n_points)

    @property
    def step(self) -> float:
        return (self.stop - self.start) / (self.n_points - 1)


def freq_linspace(grid: FrequencyGrid) -> np.ndarray:
    """Uniform frequency samples of a grid (first = start, last = stop)."""
    return grid.points()


@dataclass(frozen=True)
class Spectrum:
    """Per-frequency response values plus provenance.

    ``values`` holds the raw qubit excitation (<sigma+ sigma-> or <c^dag c>),
    not a switching probability; apply a SignalMap to convert.
    """

    grid: FrequencyGrid
    values: np.ndarray
    model_tag: str
    params_snapshot: object = None
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", values)
        if values.shape != (self.grid.n_points,):
            raise ValueError(
                f"values length {values.shape} does not match grid n_points "
                f"{self.grid.n_points}"
            )
        if not np.all(np.isfinite(values)):
            raise ValueError("spectrum values must be finite")

    def frequencies(self) -> np.ndarray:
        return self.grid.points()


@dataclass(frozen=True)
class SignalMap:
    """Affine map from excitation to switching probability: s(v) = offset - scale*v."""

    scale: float
    offset: float

    def __post_init__(self):
        _require_nonneg("scale", self.scale)
        _require_finite("offset", self.offset)

    def __call__(self, values):
        return self.offset - self.scale * np.asarray(values, dtype=float)


def apply_signal_map(spec: Spectrum, sigmap: SignalMap) -> Spectrum:
    """Convert an excitation spectrum to switching-probability units."""
    mapped = sigmap(spec.values)
    meta = dict(spec.metadata)
    meta["signal_map"] = {"scale": sigmap.scale, "offset": sigmap.offset}
    return Spectrum(
        grid=spec.grid,
        values=mapped,
        model_tag=spec.model_tag,
        params_snapshot=spec.params_snapshot,
        metadata=meta,
    )


def lambda_from_dbm(p_dbm: float, lambda_ref: float, p_ref_dbm: float) -> float:
    """Documented hook for mapping source power to drive amplitude.

    The attenuation between source and qubit is not known a priori, so the
    reference pair (lambda_ref, p_ref_dbm) must be supplied by the user.
    """
    _require_nonneg("lambda_ref", lambda_ref)
    return lambda_ref * 10.0 ** ((p_dbm - p_ref_dbm) / 20.0)
