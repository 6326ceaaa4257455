"""
Levenberg-Marquardt solver for weighted nonlinear least squares.

Minimizes ``sum_i w_i (y_i - f(p, x_i))^2``. Damping is Marquardt-style
(``lambda * diag(J^T W J)``), divided by 10 after an accepted step and
multiplied by 10 after a rejected one.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np


class DegenerateDesignError(ValueError):
    """The weighted normal matrix is singular: the data cannot constrain every parameter."""


class ConvergenceError(RuntimeError):
    """Iteration limit reached; ``best`` holds the lowest-cost parameters seen."""

    def __init__(self, message: str, best: np.ndarray, chi2: float):
        super().__init__(message)
        self.best = best
        self.chi2 = chi2


@dataclass
class LSQResult:
    params: np.ndarray
    covariance: np.ndarray
    chi2: float
    n_iter: int
    n_accepted: int


def numerical_jacobian(model: Callable, params: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Central-difference Jacobian of ``model(params, x)`` with respect to ``params``."""
    params = np.asarray(params, dtype=float)
    cols = []
    for j, p in enumerate(params):
        h = 1e-6 * abs(p) if p != 0 else 1e-8
        up, dn = params.copy(), params.copy()
        up[j] += h
        dn[j] -= h
        cols.append((np.asarray(model(up, x)) - np.asarray(model(dn, x))) / (up[j] - dn[j]))
    return np.column_stack(cols)


def _normal_matrix(J: np.ndarray, w: np.ndarray) -> np.ndarray:
    A = J.T @ (w[:, None] * J)
    d = np.sqrt(np.diag(A))
    if not np.all(d > 0) or not np.all(np.isfinite(A)):
        raise DegenerateDesignError("a parameter has no influence on the weighted residuals")
    if np.linalg.cond(A / np.outer(d, d)) > 1e13:
        raise DegenerateDesignError("weighted normal matrix is singular to working precision")
    return A


def iterative_damped_least_squares(
    model: Callable[[np.ndarray, np.ndarray], np.ndarray],
    x,
    y,
    weights,
    init,
    jacobian: Callable[[np.ndarray, np.ndarray], np.ndarray] | None = None,
    *,
    max_iter: int = 200,
    ftol: float = 1e-12,
    damping: float = 1e-10,
) -> LSQResult:
    """Fit ``model`` to weighted observations starting from ``init``.

    Parameters
    ----------
    model : callable
        ``model(params, x) -> predictions``.
    x, y, weights : array_like
        Abscissae, observations and (non-negative) weights, usually ``1/se**2``.
    init : array_like
        Starting parameter vector; must be finite.
    jacobian : callable, optional
        ``jacobian(params, x) -> (n, m)`` array; central differences if omitted.
    max_iter : int
        Total iteration budget, accepted and rejected steps alike.
    ftol : float
        Stop once an accepted step lowers the cost by less than this fraction.
    damping : float
        Initial Marquardt parameter.

    Returns
    -------
    LSQResult
        Parameters, covariance ``(J^T W J)^-1`` at the solution, final cost
        and iteration counts.

    Raises
    ------
    DegenerateDesignError
        If the normal matrix is singular.
    ConvergenceError
        If ``max_iter`` is exhausted.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    w = np.asarray(weights, dtype=float)
    p = np.array(init, dtype=float).reshape(-1)
    if not np.all(np.isfinite(p)):
        raise ValueError(f"init must be finite, got {p}")
    if np.any(w < 0) or not np.all(np.isfinite(w)):
        raise ValueError("weights must be finite and non-negative")
    if y.size < p.size:
        raise DegenerateDesignError(f"{y.size} observations cannot determine {p.size} parameters")
    jac = jacobian or (lambda q, xx: numerical_jacobian(model, q, xx))

    def cost(q):
        resid = y - np.asarray(model(q, x), dtype=float)
        return float(np.sum(w * resid * resid)), resid

    S, resid = cost(p)
    J = np.asarray(jac(p, x), dtype=float).reshape(y.size, p.size)
    A = _normal_matrix(J, w)
    lam = damping
    n_accepted = 0

    for it in range(1, max_iter + 1):
        g = J.T @ (w * resid)
        step = np.linalg.solve(A + lam * np.diag(np.diag(A)), g)
        p_new = p + step
        S_new, resid_new = cost(p_new)
        if np.isfinite(S_new) and S_new <= S:
            n_accepted += 1
            decrease = (S - S_new) / S if S > 0 else 0.0
            p, S, resid = p_new, S_new, resid_new
            J = np.asarray(jac(p, x), dtype=float).reshape(y.size, p.size)
            A = _normal_matrix(J, w)
            lam /= 10.0
            if decrease < ftol or S == 0.0 or np.all(np.abs(step) <= 1e-15 * np.abs(p)):
                return LSQResult(p, np.linalg.inv(A), S, it, n_accepted)
        else:
            # at the minimum, rounding makes every step look like a tiny increase
            if np.isfinite(S_new) and S_new - S <= ftol * S:
                return LSQResult(p, np.linalg.inv(A), S, it, n_accepted)
            lam *= 10.0

    raise ConvergenceError(f"no convergence after {max_iter} iterations (cost {S:.6g})", p, S)
