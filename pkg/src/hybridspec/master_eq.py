"""Lindblad model: two-level qubit + two truncated bosonic modes.

The Hamiltonian is assembled in the frame rotating at the drive frequency;
the dissipators use the convention in which a rate Gamma produces amplitude
decay at Gamma and population decay at 2*Gamma, matching the linewidths of
the oscillator models.  Column-stacking convention throughout:
vec(A rho B) = (B^T kron A) vec(rho).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import FrequencyGrid, Spectrum, SystemParams
from .errors import NonUniqueSteadyState, SolverFailure


@dataclass(frozen=True)
class HilbertLayout:
    """Truncated product space: qubit (slowest index) x bright x dark."""

    n_max_bright: int
    n_max_dark: int

    def __post_init__(self):
        if self.n_max_bright < 1 or self.n_max_dark < 1:
            raise ValueError("Fock truncations must be >= 1")

    @property
    def dim(self) -> int:
        return 2 * self.n_max_bright * self.n_max_dark

    def index(self, q: int, nb: int, nd: int) -> int:
        """Flat index of |q, nb, nd> (q=0 ground, q=1 excited)."""
        return (q * self.n_max_bright + nb) * self.n_max_dark + nd


@dataclass(frozen=True)
class ModeOperators:
    sigma_z: np.ndarray
    sigma_plus: np.ndarray
    sigma_minus: np.ndarray
    sigma_x: np.ndarray
    b: np.ndarray
    d: np.ndarray


def _annihilator(n: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1, n, dtype=float)), 1).astype(complex)


def build_operators(layout: HilbertLayout) -> ModeOperators:
    """Dense mode operators on the full product space."""
    i2 = np.eye(2, dtype=complex)
    ib = np.eye(layout.n_max_bright, dtype=complex)
    idk = np.eye(layout.n_max_dark, dtype=complex)
    sz = np.diag([-1.0, 1.0]).astype(complex)       # ground first
    sm = np.array([[0.0, 1.0], [0.0, 0.0]], dtype=complex)  # |g><e|
    sx = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
    kron3 = lambda a, b_, c: np.kron(np.kron(a, b_), c)
    return ModeOperators(
        sigma_z=kron3(sz, ib, idk),
        sigma_plus=kron3(sm.conj().T, ib, idk),
        sigma_minus=kron3(sm, ib, idk),
        sigma_x=kron3(sx, ib, idk),
        b=kron3(i2, _annihilator(layout.n_max_bright), idk),
        d=kron3(i2, ib, _annihilator(layout.n_max_dark)),
    )


def build_rotating_hamiltonian(params: SystemParams, omega: float,
                               layout: HilbertLayout,
                               ops: ModeOperators = None) -> np.ndarray:
    """Rotating-frame Hamiltonian at drive frequency omega."""
    o = ops if ops is not None else build_operators(layout)
    number = o.b.conj().T @ o.b + o.d.conj().T @ o.d
    jphase = params.j * np.exp(1j * params.theta)
    h = (
        0.5 * (params.omega_fq - omega) * o.sigma_z
        + (params.omega_nv - omega) * number
        + params.g * (o.sigma_plus @ o.b + o.sigma_minus @ o.b.conj().T)
        + jphase * (o.b.conj().T @ o.d)
        + np.conj(jphase) * (o.b @ o.d.conj().T)
        + 0.5 * params.lam * o.sigma_x
    )
    return h


def _dissipator(rate: float, c: np.ndarray) -> np.ndarray:
    """Superoperator for -rate*(C'C rho + rho C'C - 2 C rho C')."""
    n = c.shape[0]
    eye = np.eye(n, dtype=complex)
    cdc = c.conj().T @ c
    return rate * (
        2.0 * np.kron(c.conj(), c)
        - np.kron(eye, cdc)
        - np.kron(cdc.T, eye)
    )


def build_liouvillian(h: np.ndarray, params: SystemParams,
                      layout: HilbertLayout,
                      ops: ModeOperators = None) -> np.ndarray:
    """Generator of d(rho)/dt = -i[H, rho] + dissipators, vectorized."""
    o = ops if ops is not None else build_operators(layout)
    n = h.shape[0]
    eye = np.eye(n, dtype=complex)
    liou = -1j * (np.kron(eye, h) - np.kron(h.T, eye))
    liou += _dissipator(params.gamma_fq, o.sigma_minus)
    liou += _dissipator(params.gamma_b, o.b)
    liou += _dissipator(params.gamma_d, o.d)
    return liou


def steady_state(liou: np.ndarray, check_unique: bool = True,
                 residual_tol: float = 1e-10) -> np.ndarray:
    """Solve L vec(rho) = 0 with the trace-one constraint.

    One row is replaced by the trace functional; the result is symmetrized
    and validated (trace, Hermiticity, positivity, residual).
    """
    d2 = liou.shape[0]
    d = int(round(np.sqrt(d2)))
    trace_row = np.zeros(d2, dtype=complex)
    trace_row[:: d + 1] = 1.0

    def solve_with_row(row: int) -> np.ndarray:
        a = liou.copy()
        a[row, :] = trace_row
        rhs = np.zeros(d2, dtype=complex)
        rhs[row] = 1.0
        try:
            return np.linalg.solve(a, rhs)
        except np.linalg.LinAlgError as exc:
            raise SolverFailure(f"steady-state solve failed: {exc}") from exc

    vec = solve_with_row(0)
    rho = vec.reshape((d, d), order="F")
    rho = 0.5 * (rho + rho.conj().T)

    norm_l = np.linalg.norm(liou)
    residual = np.linalg.norm(liou @ rho.reshape(-1, order="F")) / norm_l
    if residual > residual_tol:
        raise SolverFailure(f"steady-state residual {residual:.3e} too large")

    if check_unique:
        vec2 = solve_with_row(d2 - 1)
        rho2 = vec2.reshape((d, d), order="F")
        rho2 = 0.5 * (rho2 + rho2.conj().T)
        if np.max(np.abs(rho2 - rho)) > 1e-7:
            raise NonUniqueSteadyState("second kernel candidate found")

    _validate_density_matrix(rho)
    return rho


def _validate_density_matrix(rho: np.ndarray) -> None:
    if abs(np.trace(rho).real - 1.0) > 1e-8:
        raise SolverFailure(f"trace {np.trace(rho)} violates unit-trace bound")
    if np.max(np.abs(rho - rho.conj().T)) > 1e-10:
        raise SolverFailure("steady state not Hermitian within tolerance")
    w = np.linalg.eigvalsh(rho)
    if w.min() < -1e-8:
        raise SolverFailure(f"negative eigenvalue {w.min():.3e} in steady state")


def qubit_excitation(rho: np.ndarray, layout: HilbertLayout,
                     ops: ModeOperators = None) -> float:
    """<sigma+ sigma-> in the given state."""
    o = ops if ops is not None else build_operators(layout)
    val = np.trace(o.sigma_plus @ o.sigma_minus @ rho)
    if abs(val.imag) > 1e-10:
        raise SolverFailure(f"excitation has imaginary part {val.imag:.3e}")
    return float(val.real)


def me_excitation(params: SystemParams, omega: float, layout: HilbertLayout,
                  ops: ModeOperators = None, check_unique: bool = False) -> float:
    o = ops if ops is not None else build_operators(layout)
    h = build_rotating_hamiltonian(params, omega, layout, o)
    liou = build_liouvillian(h, params, layout, o)
    rho = steady_state(liou, check_unique=check_unique)
    return qubit_excitation(rho, layout, o)


def me_spectrum(params: SystemParams, grid: FrequencyGrid,
                layout: HilbertLayout, check_unique: bool = False) -> Spectrum:
    """Steady-state excitation at every grid frequency."""
    ops = build_operators(layout)
    values = np.empty(grid.n_points)
    for i, w in enumerate(grid.points()):
        try:
            values[i] = me_excitation(params, w, layout, ops,
                                      check_unique=check_unique)
        except (SolverFailure, NonUniqueSteadyState) as exc:
            raise type(exc)(f"at omega={w}: {exc}") from exc
    return Spectrum(grid=grid, values=values, model_tag="ME",
                    params_snapshot=params,
                    metadata={"n_max_bright": layout.n_max_bright,
                              "n_max_dark": layout.n_max_dark})


def truncation_convergence(params: SystemParams, grid: FrequencyGrid,
                           layout: HilbertLayout, rel_tol: float = 1e-3) -> dict:
    """Compare the spectrum against one extra Fock level on each mode."""
    coarse = me_spectrum(params, grid, layout).values
    finer_layout = HilbertLayout(layout.n_max_bright + 1, layout.n_max_dark + 1)
    fine = me_spectrum(params, grid, finer_layout).values
    scale = np.maximum(np.maximum(np.abs(coarse), np.abs(fine)), 1e-300)
    devs = np.abs(fine - coarse) / scale
    max_dev = float(np.max(devs))
    return {
        "n_b": layout.n_max_bright,
        "n_d": layout.n_max_dark,
        "max_rel_dev": max_dev,
        "pass": max_dev < rel_tol,
    }
