"""Lorentzian peak fitting, peak finding and FWHM-vs-power sweeps."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import FrequencyGrid, Spectrum, SystemParams
from .errors import NoInteriorPeak, NotConverged
from .numerics import damped_least_squares


@dataclass(frozen=True)
class LorentzianFitResult:
    a: float
    gamma: float          # HWHM
    omega_center: float
    c: float
    residual_norm: float
    converged: bool
    n_iterations: int

    @property
    def fwhm(self) -> float:
        return 2.0 * self.gamma


@dataclass(frozen=True)
class Peak:
    omega: float
    height: float
    classification: str = None  # "LEFT" | "MIDDLE" | "RIGHT" | None


def lorentzian_model(a: float, gamma: float, omega_center: float, c: float,
                     omega) -> np.ndarray:
    """a*gamma^2 / ((omega - omega_center)^2 + gamma^2) + c."""
    if gamma <= 0:
        raise ValueError(f"gamma must be > 0, got {gamma}")
    omega = np.asarray(omega, dtype=float)
    return a * gamma ** 2 / ((omega - omega_center) ** 2 + gamma ** 2) + c


def _lorentzian_residual_jacobian(x, omegas, data):
    a, gamma, w0, c = x
    dw = omegas - w0
    denom = dw ** 2 + gamma ** 2
    model = a * gamma ** 2 / denom + c
    jac = np.empty((len(omegas), 4))
    jac[:, 0] = gamma ** 2 / denom
    jac[:, 1] = 2.0 * a * gamma * dw ** 2 / denom ** 2
    jac[:, 2] = 2.0 * a * gamma ** 2 * dw / denom ** 2
    jac[:, 3] = 1.0
    return model - data, jac


def fit_lorentzian(spec: Spectrum, window: tuple) -> LorentzianFitResult:
    """Fit a single Lorentzian to the spectrum restricted to a window.

    Initial guess: center at the argmax, amplitude max-min, offset min,
    HWHM from the half-maximum crossing.
    """
    omegas = spec.frequencies()
    mask = (omegas >= window[0]) & (omegas <= window[1])
    omegas = omegas[mask]
    data = spec.values[mask]
    if len(omegas) < 8:
        raise NoInteriorPeak(f"window contains {len(omegas)} points, need >= 8")
    i = int(np.argmax(data))
    if i == 0 or i == len(data) - 1:
        raise NoInteriorPeak("maximum sits on the window boundary")

    a0 = data[i] - data.min()
    c0 = float(data.min())
    half = c0 + 0.5 * a0
    above = data >= half
    gamma0 = 0.5 * (omegas[above][-1] - omegas[above][0])
    gamma0 = max(gamma0, 0.5 * (omegas[1] - omegas[0]))
    x0 = np.array([a0, gamma0, omegas[i], c0])

    residual = lambda x: _lorentzian_residual_jacobian(x, omegas, data)[0]
    jacobian = lambda x: _lorentzian_residual_jacobian(x, omegas, data)[1]
    try:
        x, cost, n_iter, converged = damped_least_squares(
            residual, x0, jacobian=jacobian
        )
    except NotConverged as exc:
        x, cost, n_iter = exc.best
        converged = False
    a, gamma, w0, c = x
    return LorentzianFitResult(
        a=float(a), gamma=float(abs(gamma)), omega_center=float(w0),
        c=float(c), residual_norm=float(np.sqrt(2.0 * cost)),
        converged=converged, n_iterations=n_iter,
    )


def find_peaks(spec: Spectrum, min_prominence: float = None) -> list:
    """Local maxima (3-point test) filtered by prominence.

    Prominence is the height above the higher of the two flanking minima
    (the lowest points between the peak and its taller neighbors or the
    window edges).  Default threshold: 2% of the global maximum.  With
    exactly three surviving peaks they are classified LEFT/MIDDLE/RIGHT
    in frequency order.
    """
    v = spec.values
    if min_prominence is None:
        min_prominence = 0.02 * float(v.max())
    omegas = spec.frequencies()
    idx = [i for i in range(1, len(v) - 1) if v[i] > v[i - 1] and v[i] > v[i + 1]]
    peaks = []
    for i in idx:
        left_min = v[:i].min()
        right_min = v[i + 1:].min()
        # walk only to the nearest higher point on each side, if any
        higher_left = [j for j in range(i) if v[j] > v[i]]
        if higher_left:
            left_min = v[higher_left[-1]: i].min()
        higher_right = [j for j in range(i + 1, len(v)) if v[j] > v[i]]
        if higher_right:
            right_min = v[i + 1: higher_right[0] + 1].min()
        prominence = v[i] - max(left_min, right_min)
        if prominence >= min_prominence:
            peaks.append(Peak(omega=float(omegas[i]), height=float(v[i])))
    if len(peaks) == 3:
        labels = ("LEFT", "MIDDLE", "RIGHT")
        peaks = [
            Peak(p.omega, p.height, lab) for p, lab in zip(peaks, labels)
        ]
    return peaks


def middle_peak_fwhm(spectrum_fn, omega_nv: float, gamma_guess: float,
                     n_points: int = 241) -> LorentzianFitResult:
    """Fit the middle peak with a self-consistent window.

    Starts from omega_nv +- 3*gamma_guess, fits, re-windows at 3 times the
    fitted HWHM and fits once more.
    """
    gamma = gamma_guess
    result = None
    for _ in range(2):
        half = 3.0 * gamma
        grid = FrequencyGrid(omega_nv - half, omega_nv + half, n_points)
        spec = Spectrum(grid=grid, values=spectrum_fn(grid.points()),
                        model_tag="WINDOW")
        result = fit_lorentzian(spec, (grid.start, grid.stop))
        gamma = result.gamma
    return result


def fwhm_vs_power(params: SystemParams, lambdas, grid: FrequencyGrid,
                  model: str, **model_kwargs) -> list:
    """Middle-peak FWHM for each drive amplitude under the chosen model.

    Returns (lambda, fwhm, converged) triples; per-lambda fit errors are
    recorded as (lambda, None, False) without aborting the sweep.
    """
    from . import master_eq, thom  # local import to avoid cycles

    results = []
    for lam in lambdas:
        if lam <= 0:
            raise ValueError("drive amplitudes must be > 0")
        p = params.with_(lam=lam)
        if model.upper() == "THOM":
            fn = lambda ws: thom.thom_excitation(p, ws)
        elif model.upper() == "ME":
            layout = model_kwargs.get("layout") or master_eq.HilbertLayout(4, 4)
            ops = master_eq.build_operators(layout)
            fn = lambda ws: np.array(
                [master_eq.me_excitation(p, w, layout, ops) for w in ws]
            )
        elif model.upper() == "MHOM":
            packets = model_kwargs["packets"]
            mparams = model_kwargs["mhom_params"].with_(lam=lam)
            from . import mhom
            fn = lambda ws: np.array(
                [mhom.mhom_response(packets, mparams, w) for w in ws]
            )
        else:
            raise ValueError(f"unknown model {model!r}")
        try:
            fit = middle_peak_fwhm(fn, params.omega_nv,
                                   max(params.gamma_d, grid.step))
            results.append((lam, fit.fwhm, fit.converged))
        except (NoInteriorPeak, NotConverged):
            results.append((lam, None, False))
    return results
