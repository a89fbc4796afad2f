"""Dense Levenberg-Marquardt for small curve-fit problems.

Jacobians are numeric forward differences with per-parameter relative step
1e-6 (callers pass O(1)-scaled parameters, so the relative step is
meaningful). Damping follows the gain-ratio update of Madsen, Nielsen and
Tingleff. Iteration stops when the relative cost decrease of an accepted
step falls below ``cost_tol`` or the gradient infinity-norm falls below
``grad_tol``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

REL_STEP = 1e-6


@dataclass
class LMResult:
    x: np.ndarray
    cost: float            # sum of squared residuals at x
    jac: np.ndarray
    converged: bool
    n_iter: int
    message: str

    @property
    def covariance(self) -> np.ndarray:
        """Parameter covariance (J^T J)^-1 scaled by the residual variance."""
        m, p = self.jac.shape
        dof = max(m - p, 1)
        s2 = self.cost / dof
        jtj = self.jac.T @ self.jac
        try:
            return s2 * np.linalg.inv(jtj)
        except np.linalg.LinAlgError:
            return s2 * np.linalg.pinv(jtj)


def _safe_residual(fn, x) -> np.ndarray | None:
    try:
        r = np.asarray(fn(x), dtype=float)
    except (FloatingPointError, OverflowError, ValueError):
        return None
    if not np.all(np.isfinite(r)):
        return None
    return r


def numeric_jacobian(
    fn: Callable[[np.ndarray], np.ndarray],
    x: np.ndarray,
    r0: np.ndarray,
    x_scale: np.ndarray,
) -> np.ndarray:
    """Forward-difference Jacobian, step = REL_STEP * max(|x_i|, scale_i)."""
    jac = np.empty((r0.size, x.size))
    for i in range(x.size):
        h = REL_STEP * max(abs(x[i]), x_scale[i])
        xp = x.copy()
        xp[i] += h
        rp = _safe_residual(fn, xp)
        if rp is None:
            # retreat: try a backward step before giving up on this column
            xp = x.copy()
            xp[i] -= h
            rm = _safe_residual(fn, xp)
            if rm is None:
                jac[:, i] = 0.0
                continue
            jac[:, i] = (r0 - rm) / h
        else:
            jac[:, i] = (rp - r0) / h
    return jac


def levenberg_marquardt(
    fn: Callable[[np.ndarray], np.ndarray],
    x0: Sequence[float],
    max_iter: int = 200,
    cost_tol: float = 1e-12,
    grad_tol: float = 1e-10,
    x_scale: Sequence[float] | None = None,
) -> LMResult:
    """Minimize ||fn(x)||^2 from ``x0``; returns the best point found.

    Never raises on non-convergence; callers inspect ``converged``.
    """
    x = np.asarray(x0, dtype=float).copy()
    scale = np.ones_like(x) if x_scale is None else np.asarray(x_scale, dtype=float)
    r = _safe_residual(fn, x)
    if r is None:
        return LMResult(x, np.inf, np.zeros((1, x.size)), False, 0, "residual not finite at x0")

    jac = numeric_jacobian(fn, x, r, scale)
    cost = float(r @ r)
    g = jac.T @ r
    a_diag = np.einsum("ij,ij->j", jac, jac)
    mu = 1e-3 * max(float(a_diag.max()), 1e-30)
    nu = 2.0
    message = "max iterations reached"
    converged = False
    n_iter = 0

    if float(np.max(np.abs(g))) < grad_tol:
        return LMResult(x, cost, jac, True, 0, "gradient below tolerance at x0")

    for n_iter in range(1, max_iter + 1):
        jtj = jac.T @ jac
        try:
            h = np.linalg.solve(jtj + mu * np.eye(x.size), -g)
        except np.linalg.LinAlgError:
            h, *_ = np.linalg.lstsq(jtj + mu * np.eye(x.size), -g, rcond=None)

        x_new = x + h
        r_new = _safe_residual(fn, x_new)
        if r_new is None:
            cost_new = np.inf
        else:
            cost_new = float(r_new @ r_new)

        predicted = float(h @ (mu * h - g))  # > 0 for a descent step
        rho = (cost - cost_new) / predicted if predicted > 0 else -1.0

        if rho > 0 and cost_new < cost:
            rel_decrease = (cost - cost_new) / cost if cost > 0 else 0.0
            x, r, cost = x_new, r_new, cost_new
            jac = numeric_jacobian(fn, x, r, scale)
            g = jac.T @ r
            mu *= max(1.0 / 3.0, 1.0 - (2.0 * rho - 1.0) ** 3)
            nu = 2.0
            if rel_decrease < cost_tol:
                converged, message = True, "relative cost decrease below tolerance"
                break
            if float(np.max(np.abs(g))) < grad_tol:
                converged, message = True, "gradient below tolerance"
                break
            if cost == 0.0:
                converged, message = True, "exact fit"
                break
        else:
            mu *= nu
            nu *= 2.0
            if not np.isfinite(mu) or mu > 1e300:
                message = "damping saturated without an accepted step"
                break

    return LMResult(x, cost, jac, converged, n_iter, message)
