"""Block coordinate descent for the L1-penalized Gaussian likelihood.

The estimate W of the covariance is updated one row/column at a time.
For column j the lasso subproblem with ``V = W11`` (the block of W without
row/column j) and ``s12`` (column j of S) is solved, and the column is
refilled with ``w12 = 2 V beta``.  The diagonal stays at ``S_ii + rho``.

Factor-of-two convention
------------------------
The stored coefficients ``B[:, j]`` are *half* the usual regression
coefficients of variable j on the others: the regression coefficient is
``-Theta[k, j] / Theta[j, j] = 2 * B[k, j]``.  Keep this in mind when
comparing B with other software.
"""

from dataclasses import dataclass, field
import enum

import numba
import numpy as np

from .errors import NonConvergence, NonPositivePivot, NotPositiveDefinite
from .lasso import _lasso_cd
from .matrix import _fill_block11, _fill_vec12, _write_column, as_symmetric, cholesky


class Mode(str, enum.Enum):
    EXACT = "exact"
    MB_OR = "mb-or"
    MB_AND = "mb-and"
    INVERT_ONLY = "invert"


@dataclass
class GlassoConfig:
    rho: float
    outer_tol: float = 1e-4
    max_outer_sweeps: int = 100
    mode: Mode = Mode.EXACT
    # None -> outer_tol / 10 (1e-13 in invert mode)
    inner_tol: float = None
    max_inner_sweeps: int = 1000

    def __post_init__(self):
        self.mode = Mode(self.mode)
        if not self.rho >= 0:
            raise ValueError("rho must be non-negative")
        if not self.outer_tol > 0:
            raise ValueError("outer_tol must be positive")
        if self.max_outer_sweeps < 1:
            raise ValueError("max_outer_sweeps must be >= 1")
        if self.mode is Mode.INVERT_ONLY and self.rho != 0:
            raise ValueError("invert mode requires rho = 0")
        if self.inner_tol is None:
            self.inner_tol = 1e-13 if self.mode is Mode.INVERT_ONLY else self.outer_tol / 10.0
        if not self.inner_tol > 0:
            raise ValueError("inner_tol must be positive")


@dataclass
class GlassoSolution:
    W: np.ndarray
    Theta: np.ndarray
    B: np.ndarray
    rho: float
    outer_sweeps: int
    converged: bool
    final_change: float
    mode: Mode = Mode.EXACT
    approximate: bool = False
    inner_sweeps: int = 0
    change_history: list = field(default_factory=list, repr=False)

    @property
    def p(self):
        return self.W.shape[0]

    def support(self):
        """Boolean off-diagonal support of the precision estimate.

        Exact mode reads it from Theta (exact zeros come from the
        soft-threshold).  The approximation modes combine the two
        coefficient directions with the OR / AND rule.
        """
        nz = self.B != 0
        if self.mode is Mode.MB_AND:
            sup = nz & nz.T
        elif self.mode is Mode.MB_OR or self.Theta is None:
            sup = nz | nz.T
        else:
            sup = self.Theta != 0
        sup = sup.copy()
        np.fill_diagonal(sup, False)
        return sup

    def edges(self):
        sup = self.support()
        i, j = np.nonzero(np.triu(sup, 1))
        return set(zip(i.tolist(), j.tolist()))

    def nonzeros(self):
        """Off-diagonal nonzero count over ordered pairs (at most p(p-1))."""
        return int(self.support().sum())


@dataclass
class KKTReport:
    gamma: np.ndarray
    max_offdiag_violation: float
    max_sign_violation: float
    max_diag_violation: float
    passed: bool
    violations: list = field(default_factory=list)


@numba.njit(cache=True, nogil=True)
def _mat_beta(V, beta, out):
    d = beta.shape[0]
    for i in range(d):
        out[i] = 0.0
    for k in range(d):
        bk = beta[k]
        if bk != 0.0:
            for i in range(d):
                out[i] += V[k, i] * bk


def _validate_input(S):
    S = as_symmetric(S, "S")
    if np.any(~(np.diag(S) > 0)):
        raise ValueError("S must have a strictly positive diagonal")
    return S


def _offdiag_scale(S):
    p = S.shape[0]
    if p < 2:
        return 0.0
    return float((np.abs(S).sum() - np.abs(np.diag(S)).sum()) / (p * (p - 1)))


def theta_recover(W, B):
    """Precision matrix from W and the stored half-coefficients B.

    Column j: ``Theta_jj = 1 / (W_jj - 2 sum_k B_kj W_kj)`` and
    ``Theta_kj = -2 Theta_jj B_kj``; the result is symmetrised as
    ``(Theta + Theta') / 2``.
    """
    W = np.asarray(W, dtype=np.float64)
    B = np.array(B, dtype=np.float64)
    if W.shape != B.shape or W.ndim != 2 or W.shape[0] != W.shape[1]:
        raise ValueError("W and B must be square matrices of the same shape")
    np.fill_diagonal(B, 0.0)
    denom = np.diag(W) - 2.0 * np.einsum("kj,kj->j", B, W)
    bad = np.flatnonzero(~(denom > 0))
    if bad.size:
        raise NonPositivePivot(f"non-positive pivot {denom[bad[0]]:.3g} in column {bad[0]}")
    tdiag = 1.0 / denom
    Theta = -2.0 * B * tdiag[None, :]
    Theta[np.diag_indices_from(Theta)] = tdiag
    return 0.5 * (Theta + Theta.T)


def _betas_to_matrix(betas):
    p = betas.shape[0]
    B = np.zeros((p, p))
    for j in range(p):
        idx = np.delete(np.arange(p), j)
        B[idx, j] = betas[j]
    return B


def _matrix_to_betas(B):
    p = B.shape[0]
    return np.array([np.delete(B[:, j], j) for j in range(p)]).reshape(p, p - 1)


def _trivial_fit(S, cfg):
    W = S + cfg.rho
    return GlassoSolution(W=W, Theta=1.0 / W, B=np.zeros((1, 1)), rho=cfg.rho, outer_sweeps=0,
                          converged=True, final_change=0.0, mode=cfg.mode,
                          approximate=cfg.mode in (Mode.MB_OR, Mode.MB_AND))


def glasso_fit(S, cfg, *, W_init=None, B_init=None, check_pd=False):
    """Maximize log det Theta - tr(S Theta) - rho ||Theta||_1 over Theta.

    Columns are visited in order 0..p-1 each sweep.  Convergence is declared
    when the mean absolute change of the entries of W over a full sweep is
    at most ``outer_tol`` times the mean absolute off-diagonal entry of S.

    Parameters
    ----------
    S : (p, p) array
        Symmetric empirical covariance with positive diagonal.
    cfg : GlassoConfig
        Penalty, tolerances and mode.  The approximation modes are
        delegated to :func:`mb_fit`.
    W_init, B_init : arrays, optional
        Warm start.  ``W_init`` is clipped into the box ``|W - S| <= rho``
        and its diagonal reset to ``S_ii + rho``; if the result is not
        positive definite the cold start ``S + rho I`` is used instead,
        keeping ``B_init``.
    check_pd : bool
        Verify by Cholesky that W stays positive definite after every sweep.

    Raises
    ------
    NotPositiveDefinite
        ``S + rho I`` is not positive definite, or the iterate left the cone.
    NonConvergence
        ``max_outer_sweeps`` reached; ``exc.result`` holds the last iterate.
    """
    if cfg.mode in (Mode.MB_OR, Mode.MB_AND):
        return mb_fit(S, cfg)
    S = _validate_input(S)
    p = S.shape[0]
    rho = float(cfg.rho)
    invert = cfg.mode is Mode.INVERT_ONLY
    if p == 1:
        return _trivial_fit(S, cfg)

    W0 = S.copy()
    W0[np.diag_indices(p)] += rho
    cholesky(W0)  # S + rho I must be PD (rejects singular S at rho = 0)
    if W_init is not None and not invert:
        # positive definiteness is only preserved from a start inside the box |W - S| <= rho
        Wi = np.clip(as_symmetric(W_init, "W_init"), S - rho, S + rho)
        Wi[np.diag_indices(p)] = np.diag(W0)
        try:
            cholesky(Wi)
            W0 = Wi
        except NotPositiveDefinite:
            pass
    W = W0
    betas = np.zeros((p, p - 1)) if B_init is None else _matrix_to_betas(np.asarray(B_init, dtype=np.float64))

    V = np.empty((p - 1, p - 1))
    s12 = np.empty(p - 1)
    w12 = np.empty(p - 1)
    no_trace = np.zeros((0, p - 1))
    threshold = cfg.outer_tol * _offdiag_scale(S)
    max_sweeps = 1 if invert else cfg.max_outer_sweeps
    inner_limit = max(cfg.max_inner_sweeps, 10000) if invert else cfg.max_inner_sweeps

    history = []
    inner_total = 0
    converged = False
    change = np.inf
    sweep = 0
    while sweep < max_sweeps:
        sweep += 1
        W_start = W.copy()
        for j in range(p):
            _fill_block11(W, j, V)
            _fill_vec12(S, j, s12)
            beta = betas[j]
            n_inner, _, _ = _lasso_cd(V, s12, rho, beta, cfg.inner_tol, inner_limit, no_trace)
            inner_total += n_inner
            if not invert:
                _mat_beta(V, beta, w12)
                w12 *= 2.0
                _write_column(W, j, w12, W[j, j])
        change = float(np.mean(np.abs(W - W_start)))
        if not np.isfinite(change):
            raise NotPositiveDefinite(f"iterate diverged during sweep {sweep}")
        history.append(change)
        if check_pd:
            cholesky(W)
        if invert or change <= threshold:
            converged = True
            break

    B = _betas_to_matrix(betas)
    Theta = theta_recover(W, B)
    sol = GlassoSolution(W=W, Theta=Theta, B=B, rho=rho, outer_sweeps=sweep, converged=converged,
                         final_change=change, mode=cfg.mode, inner_sweeps=inner_total,
                         change_history=history)
    if not converged:
        raise NonConvergence(
            f"no convergence after {sweep} sweeps (change {change:.3g} > {threshold:.3g})", sol
        )
    return sol


def mb_fit(S, cfg):
    """Neighbourhood-selection approximation: the same lasso with ``V = S11``.

    Each column's subproblem is solved once against the fixed ``S11``; W is
    filled with ``w12 = 2 S11 beta`` in column order and Theta recovered
    once.  The support follows the OR or AND rule of ``cfg.mode``.  If the
    recovery hits a non-positive pivot, ``Theta`` is left as ``None``
    (the support is still available from B).
    """
    mode = Mode(cfg.mode)
    if mode not in (Mode.MB_OR, Mode.MB_AND):
        mode = Mode.MB_OR
    S = _validate_input(S)
    p = S.shape[0]
    rho = float(cfg.rho)
    if p == 1:
        sol = _trivial_fit(S, cfg)
        sol.mode = mode
        return sol
    cholesky(S + rho * np.eye(p))

    W = S.copy()
    W[np.diag_indices(p)] += rho
    betas = np.zeros((p, p - 1))
    V = np.empty((p - 1, p - 1))
    s12 = np.empty(p - 1)
    w12 = np.empty(p - 1)
    no_trace = np.zeros((0, p - 1))
    inner_total = 0
    for j in range(p):
        _fill_block11(S, j, V)
        _fill_vec12(S, j, s12)
        n_inner, _, _ = _lasso_cd(V, s12, rho, betas[j], cfg.inner_tol, cfg.max_inner_sweeps, no_trace)
        inner_total += n_inner
        _mat_beta(V, betas[j], w12)
        w12 *= 2.0
        _write_column(W, j, w12, W[j, j])

    B = _betas_to_matrix(betas)
    try:
        Theta = theta_recover(W, B)
    except NonPositivePivot:
        Theta = None
    if Theta is not None and mode is Mode.MB_AND:
        nz = B != 0
        keep = nz & nz.T
        np.fill_diagonal(keep, True)
        Theta = np.where(keep, Theta, 0.0)
    return GlassoSolution(W=W, Theta=Theta, B=B, rho=rho, outer_sweeps=1, converged=True,
                          final_change=0.0, mode=mode, approximate=True, inner_sweeps=inner_total)


def kkt_check(S, sol, eps, theta_zero_tol=0.0):
    """Check the subgradient conditions W - S - rho * Gamma = 0.

    Off-diagonal entries with Theta_ij != 0 need
    ``|w_ij - s_ij - rho sign(Theta_ij)| <= eps``; entries with
    Theta_ij == 0 need ``|w_ij - s_ij| <= rho + eps``; the diagonal needs
    ``|w_ii - s_ii - rho| <= eps``.
    """
    S = np.asarray(S, dtype=np.float64)
    W, Theta, rho = sol.W, sol.Theta, float(sol.rho)
    if Theta is None:
        raise ValueError("solution has no precision estimate to check")
    p = S.shape[0]
    D = W - S
    off = ~np.eye(p, dtype=bool)
    nonzero = (np.abs(Theta) > theta_zero_tol) & off
    zero = ~nonzero & off
    sgn = np.sign(Theta)

    gamma = np.empty((p, p))
    if rho > 0:
        gamma[zero] = D[zero] / rho
    else:
        gamma[zero] = 0.0
    gamma[nonzero] = sgn[nonzero]
    np.fill_diagonal(gamma, 1.0)

    sign_err = np.where(nonzero, np.abs(D - rho * sgn), 0.0)
    box_err = np.where(zero, np.maximum(np.abs(D) - rho, 0.0), 0.0)
    diag_err = np.abs(np.diag(D) - rho)

    violations = []
    for i, j in zip(*np.nonzero((sign_err > eps) | (box_err > eps))):
        violations.append((int(i), int(j)))
    for i in np.flatnonzero(diag_err > eps):
        violations.append((int(i), int(i)))

    max_sign = float(sign_err.max()) if p > 1 else 0.0
    max_box = float(box_err.max()) if p > 1 else 0.0
    max_diag = float(diag_err.max())
    return KKTReport(gamma=gamma, max_offdiag_violation=max_box, max_sign_violation=max_sign,
                     max_diag_violation=max_diag, passed=not violations, violations=violations)


def edge_set(Theta, zero_tol=None):
    """Pairs (i, j), i < j, with max(|Theta_ij|, |Theta_ji|) > zero_tol.

    ``zero_tol`` defaults to 1e-8 times the largest diagonal entry.
    """
    Theta = np.asarray(Theta, dtype=np.float64)
    if zero_tol is None:
        zero_tol = 1e-8 * float(np.max(np.diag(Theta)))
    mag = np.maximum(np.abs(Theta), np.abs(Theta.T))
    i, j = np.nonzero(np.triu(mag > zero_tol, 1))
    return set(zip(i.tolist(), j.tolist()))
