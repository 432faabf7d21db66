"""Damped Newton iteration shared by the Riemann, junction and transmission solvers."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, NoConvergence

MAX_ITER = 60
MAX_HALVINGS = 30


@dataclass
class NewtonResult:
    x: np.ndarray
    residual: float
    iterations: int


def fd_jacobian(fun, x, f0=None, steps=None):
    """Central-difference Jacobian of ``fun`` at ``x``."""
    x = np.asarray(x, dtype=float)
    n = x.size
    if steps is None:
        steps = 1e-6 * np.maximum(1.0, np.abs(x))
    cols = []
    for i in range(n):
        dx = np.zeros(n)
        dx[i] = steps[i]
        cols.append((fun(x + dx) - fun(x - dx)) / (2.0 * steps[i]))
    return np.column_stack(cols)


def damped_newton(fun, x0, jac=None, tol=1e-11, max_iter=MAX_ITER, max_halvings=MAX_HALVINGS, polish=3):
    """Solve ``fun(x) = 0`` by Newton's method with step halving.

    ``fun`` may raise :class:`DomainError` for infeasible iterates; such trial
    points are treated like residual increases and the step is halved. Once
    ``|fun| <= tol`` up to ``polish`` extra steps are taken while they keep
    reducing the residual, so converged roots sit at round-off level.
    """
    x = np.array(x0, dtype=float)
    f = fun(x)
    norm = float(np.max(np.abs(f)))
    last_error = None
    converged_at = None
    for it in range(1, max_iter + 1):
        if norm <= tol:
            if converged_at is None:
                converged_at = it
            if it - converged_at >= polish or norm == 0.0:
                return NewtonResult(x, norm, it - 1)
        J = jac(x, f) if jac is not None else fd_jacobian(fun, x, f)
        try:
            step = np.linalg.solve(J, -f)
        except np.linalg.LinAlgError as exc:
            raise NoConvergence(f"singular Jacobian at iteration {it}", norm, it) from exc
        lam = 1.0
        accepted = False
        for _ in range(max_halvings + 1):
            trial = x + lam * step
            try:
                ft = fun(trial)
            except DomainError as exc:
                last_error = exc
                lam *= 0.5
                continue
            nt = float(np.max(np.abs(ft)))
            if np.isfinite(nt) and (nt < norm or (nt <= tol and nt <= norm)):
                accepted = True
                break
            lam *= 0.5
        if not accepted:
            if norm <= tol:
                return NewtonResult(x, norm, it - 1)
            raise NoConvergence(f"line search failed at iteration {it} (residual {norm:.3e})", norm, it) from last_error
        x, f, norm = trial, ft, nt
    if norm <= tol:
        return NewtonResult(x, norm, max_iter)
    raise NoConvergence(f"no convergence after {max_iter} iterations (residual {norm:.3e})", norm, max_iter)
