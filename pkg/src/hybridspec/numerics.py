"""Small numerical utilities: scalar maximization and damped least squares."""

from __future__ import annotations

import numpy as np

from .errors import NotConverged

_GR = (np.sqrt(5.0) - 1.0) / 2.0


def golden_section_max(f, a: float, b: float, tol: float = 1e-9) -> float:
    """Locate the maximum of a unimodal scalar function on [a, b]."""
    c = b - _GR * (b - a)
    d = a + _GR * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - _GR * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _GR * (b - a)
            fd = f(d)
    return 0.5 * (a + b)


def _numeric_jacobian(residual, x, r0):
    m, n = len(r0), len(x)
    jac = np.empty((m, n))
    for k in range(n):
        h = 1e-7 * max(abs(x[k]), 1e-3)
        xp = x.copy()
        xp[k] += h
        jac[:, k] = (residual(xp) - r0) / h
    return jac


def damped_least_squares(
    residual,
    x0,
    jacobian=None,
    max_iter: int = 200,
    step_tol: float = 1e-13,
    cost_tol: float = 1e-15,
    raise_on_failure: bool = True,
):
    """Levenberg-Marquardt minimization of 0.5*||residual(x)||^2.

    Multiplicative damping on the normal equations; damping adapted by the
    gain ratio (actual vs predicted cost reduction).  Converges when the
    relative step drops below step_tol or an accepted step reduces the cost
    by less than cost_tol relative, else raises NotConverged carrying the
    best iterate (or returns it if raise_on_failure is False).
    """
    x = np.asarray(x0, dtype=float).copy()
    r = np.asarray(residual(x), dtype=float)
    cost = 0.5 * float(r @ r)
    jac = jacobian(x) if jacobian else _numeric_jacobian(residual, x, r)
    mu = 1e-3 * max(np.max(np.diag(jac.T @ jac)), 1e-30)
    nu = 2.0
    n_iter = 0
    for n_iter in range(1, max_iter + 1):
        a = jac.T @ jac
        grad = jac.T @ r
        try:
            step = np.linalg.solve(a + mu * np.eye(len(x)), -grad)
        except np.linalg.LinAlgError:
            mu *= nu
            nu *= 2.0
            continue
        if np.linalg.norm(step) <= step_tol * (np.linalg.norm(x) + step_tol):
            return x, cost, n_iter, True
        x_new = x + step
        r_new = np.asarray(residual(x_new), dtype=float)
        cost_new = 0.5 * float(r_new @ r_new)
        predicted = 0.5 * float(step @ (mu * step - grad))
        gain = (cost - cost_new) / predicted if predicted > 0 else -1.0
        if gain > 0:
            stagnant = cost - cost_new <= cost_tol * max(cost, 1e-300)
            x, r, cost = x_new, r_new, cost_new
            if stagnant:
                return x, cost, n_iter, True
            jac = jacobian(x) if jacobian else _numeric_jacobian(residual, x, r)
            mu *= max(1.0 / 3.0, 1.0 - (2.0 * gain - 1.0) ** 3)
            nu = 2.0
        else:
            mu *= nu
            nu *= 2.0
    if raise_on_failure:
        raise NotConverged(
            f"no convergence in {max_iter} iterations", best=(x, cost, n_iter)
        )
    return x, cost, n_iter, False
