"""Eigenstructure of the single-excitation block (qubit + bright + dark).

Basis order is (|0,up>, |B,down>, |D,down>): qubit excited, bright mode
excited, dark mode excited.  The per-level weight of the first component is
the spectroscopic visibility of that transition.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import SystemParams
from .errors import PerturbationOutOfRange


@dataclass(frozen=True)
class EigenResult:
    values: np.ndarray       # ascending, shape (3,)
    vectors: np.ndarray      # columns are unit eigenvectors, shape (3, 3)
    qubit_weights: np.ndarray  # |<0,up | v_k>|^2, shape (3,)


def build_h1(params: SystemParams, delta: float) -> np.ndarray:
    """3x3 single-excitation Hamiltonian with qubit detuned by delta."""
    w = params.omega_nv
    g = params.g
    jc = params.j * np.exp(1j * params.theta)
    h = np.array(
        [
            [w + delta, g, 0.0],
            [g, w, jc],
            [0.0, np.conj(jc), w],
        ],
        dtype=complex,
    )
    return h


def _fix_phase(vectors: np.ndarray) -> np.ndarray:
    """Make the largest-magnitude component of each column real positive."""
    out = vectors.copy()
    for k in range(out.shape[1]):
        i = int(np.argmax(np.abs(out[:, k])))
        phase = out[i, k] / abs(out[i, k])
        out[:, k] = out[:, k] / phase
    return out


def eigen_exact_resonant(params: SystemParams) -> EigenResult:
    """Closed-form eigenstructure at zero detuning."""
    w = params.omega_nv
    g, j, th = params.g, params.j, params.theta
    s2 = g * g + j * j
    s = np.sqrt(s2)
    values = np.array([w - s, w, w + s])

    if s == 0.0:
        vectors = np.eye(3, dtype=complex)
        weights = np.array([1.0, 0.0, 0.0])
        return EigenResult(values, vectors, weights)

    ejm = np.exp(-1j * th)
    left = np.array([g / (np.sqrt(2) * s), -1 / np.sqrt(2), j * ejm / (np.sqrt(2) * s)])
    middle = np.array([-j * np.exp(1j * th) / s, 0.0, g / s])
    right = np.array([g / (np.sqrt(2) * s), 1 / np.sqrt(2), j * ejm / (np.sqrt(2) * s)])
    vectors = _fix_phase(np.column_stack([left, middle, right]).astype(complex))
    weights = np.abs(vectors[0, :]) ** 2
    return EigenResult(values, vectors, weights)


def perturbation_guard(params: SystemParams) -> float:
    """Largest |delta| accepted by the first-order expansion."""
    return 0.5 * np.hypot(params.g, params.j)


def eigen_perturbative(params: SystemParams, delta: float) -> EigenResult:
    """First-order eigenstructure in the detuning.

    Valid for |delta| <= 0.5*sqrt(g^2+J^2); larger detunings should use
    eigen_numeric.
    """
    g, j = params.g, params.j
    w = params.omega_nv
    s2 = g * g + j * j
    s = np.sqrt(s2)
    if abs(delta) > perturbation_guard(params):
        raise PerturbationOutOfRange(
            f"|delta|={abs(delta)} exceeds guard 0.5*sqrt(g^2+J^2)={0.5 * s}"
        )
    if s == 0.0:
        values = np.array([w, w, w + delta])
        return EigenResult(values, np.eye(3, dtype=complex)[:, [1, 2, 0]],
                           np.array([0.0, 0.0, 1.0]))

    side_shift = 0.5 * delta * g * g / s2
    values = np.array(
        [w - s + side_shift, w + delta * j * j / s2, w + s + side_shift]
    )

    a = g * g * delta / (4.0 * s2 ** 1.5)
    bshift = j * j * delta / (s2 ** 1.5)
    left = np.array(
        [
            (g / (np.sqrt(2) * s)) * (1 - a - bshift),
            -(1 / np.sqrt(2)) * (1 + a),
            (j / (np.sqrt(2) * s)) * (1 - a + bshift),
        ]
    )
    middle = np.array([-j / s, delta * g * j / (s2 ** 1.5), g / s])
    right = np.array(
        [
            (g / (np.sqrt(2) * s)) * (1 + a + bshift),
            (1 / np.sqrt(2)) * (1 - a),
            (j / (np.sqrt(2) * s)) * (1 + a - bshift),
        ]
    )
    vectors = np.column_stack(
        [v / np.linalg.norm(v) for v in (left, middle, right)]
    ).astype(complex)
    vectors = _fix_phase(vectors)
    weights = np.abs(vectors[0, :]) ** 2
    return EigenResult(values, vectors, weights)


def eigen_numeric(params: SystemParams, delta: float) -> EigenResult:
    """Dense Hermitian diagonalization of build_h1, ascending order."""
    h = build_h1(params, delta)
    values, vectors = np.linalg.eigh(h)
    vectors = _fix_phase(vectors)
    weights = np.abs(vectors[0, :]) ** 2
    return EigenResult(values, vectors, weights)
