"""Coordinate descent for the lasso subproblem in inner-product form.

The subproblem for one column is

    minimize  g(beta) = beta' V beta - beta' s12 + rho * ||beta||_1

where ``V`` is the current (p-1)x(p-1) block of W (or of S for the
neighbourhood-selection approximation).  Only ``V`` and ``s12`` are used;
no matrix square root is formed.  Coordinates are visited cyclically in
natural order and each update is

    beta_j <- soft(s12_j - 2 * sum_{k != j} V_kj beta_k, rho) / (2 V_jj).
"""

from dataclasses import dataclass, field

import numba
import numpy as np

from .errors import InvalidDiagonal, NonConvergence
from .matrix import _soft_threshold


@dataclass
class LassoSubproblem:
    V: np.ndarray
    s12: np.ndarray
    rho: float
    beta0: np.ndarray = None

    def __post_init__(self):
        self.V = np.asarray(self.V, dtype=np.float64)
        self.s12 = np.asarray(self.s12, dtype=np.float64)
        d = self.s12.shape[0]
        if self.V.shape != (d, d):
            raise ValueError(f"V has shape {self.V.shape}, expected {(d, d)}")
        if not np.allclose(self.V, self.V.T, rtol=0, atol=1e-12):
            raise ValueError("V must be symmetric")
        if self.beta0 is None:
            self.beta0 = np.zeros(d)
        else:
            self.beta0 = np.asarray(self.beta0, dtype=np.float64)
            if self.beta0.shape != (d,):
                raise ValueError("beta0 length does not match s12")
        if self.rho < 0:
            raise ValueError("rho must be non-negative")


@dataclass
class LassoResult:
    beta: np.ndarray
    sweeps: int
    max_delta: float
    trace: np.ndarray = field(default=None, repr=False)


@numba.njit(cache=True, nogil=True)
def _lasso_cd(V, s12, rho, beta, tol, max_sweeps, trace):
    """Run cyclic coordinate descent in place on ``beta``.

    ``trace`` rows receive a copy of beta after each single-coordinate
    update until the buffer is full (pass a 0-row array to disable).
    Returns (sweeps, max_delta, trace rows written).
    """
    d = beta.shape[0]
    Vb = np.zeros(d)
    for k in range(d):
        bk = beta[k]
        if bk != 0.0:
            for i in range(d):
                Vb[i] += V[k, i] * bk
    sweeps = 0
    max_delta = np.inf
    nt = 0
    while sweeps < max_sweeps:
        sweeps += 1
        max_delta = 0.0
        for j in range(d):
            old = beta[j]
            vjj = V[j, j]
            r = s12[j] - 2.0 * (Vb[j] - vjj * old)
            new = _soft_threshold(r, rho) / (2.0 * vjj)
            delta = new - old
            if delta != 0.0:
                beta[j] = new
                for i in range(d):
                    Vb[i] += V[j, i] * delta
                if abs(delta) > max_delta:
                    max_delta = abs(delta)
            if nt < trace.shape[0]:
                for i in range(d):
                    trace[nt, i] = beta[i]
                nt += 1
        if max_delta <= tol:
            break
    return sweeps, max_delta, nt


_NO_TRACE = np.zeros((0, 0))


def lasso_cd_solve(prob, tol=1e-5, max_sweeps=1000, trace_updates=0):
    """Solve one lasso subproblem by cyclic coordinate descent.

    Parameters
    ----------
    prob : LassoSubproblem
        Inner products ``V``, ``s12``, penalty ``rho`` and warm start ``beta0``.
    tol : float
        Stop once the largest coordinate change in a sweep is <= tol.
    max_sweeps : int
        Cap on full passes over the coordinates.
    trace_updates : int
        If positive, record beta after each of the first ``trace_updates``
        single-coordinate updates in ``LassoResult.trace``.

    Raises
    ------
    InvalidDiagonal
        If some V[j, j] <= 0.
    NonConvergence
        If ``max_sweeps`` is exhausted; ``exc.result`` holds the last iterate.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    if max_sweeps < 1:
        raise ValueError("max_sweeps must be >= 1")
    diag = np.diag(prob.V)
    if np.any(~(diag > 0)):
        raise InvalidDiagonal("V must have a strictly positive diagonal")
    d = prob.s12.shape[0]
    beta = prob.beta0.copy()
    trace = np.zeros((trace_updates, d)) if trace_updates > 0 else _NO_TRACE.reshape(0, d)
    sweeps, max_delta, nt = _lasso_cd(
        np.ascontiguousarray(prob.V), prob.s12, float(prob.rho), beta, float(tol), int(max_sweeps), trace
    )
    res = LassoResult(beta=beta, sweeps=int(sweeps), max_delta=float(max_delta),
                      trace=trace[:nt] if trace_updates > 0 else None)
    if max_delta > tol:
        raise NonConvergence(
            f"lasso did not converge in {max_sweeps} sweeps (max change {max_delta:.3g})", res
        )
    return res


def lasso_objective(V, s12, rho, beta):
    """g(beta) = beta' V beta - beta' s12 + rho * ||beta||_1."""
    beta = np.asarray(beta, dtype=np.float64)
    return float(beta @ V @ beta - beta @ s12 + rho * np.abs(beta).sum())


def kkt_residual_inner(prob, beta):
    """Largest violation of the subgradient condition 2 V beta - s12 + rho * nu = 0."""
    beta = np.asarray(beta, dtype=np.float64)
    if beta.shape != prob.s12.shape:
        raise ValueError("beta length does not match the subproblem")
    grad = 2.0 * (prob.V @ beta) - prob.s12
    active = beta != 0
    res = np.where(
        active,
        np.abs(grad + prob.rho * np.sign(beta)),
        np.maximum(0.0, np.abs(grad) - prob.rho),
    )
    return float(res.max()) if res.size else 0.0
