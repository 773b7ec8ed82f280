"""Objective evaluation, regularization paths, penalty calibration and CV."""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
import enum
import logging

import numpy as np

from .errors import BoundsDoNotBracket, CovLassoError, DegenerateData, NonConvergence
from .glasso import GlassoConfig, Mode, glasso_fit, kkt_check
from .matrix import chol_logdet

log = logging.getLogger(__name__)


class Scheme(str, enum.Enum):
    REGRESSION = "regression"
    LIKELIHOOD = "likelihood"


@dataclass
class Dataset:
    rows: np.ndarray
    names: list = None

    def __post_init__(self):
        self.rows = np.asarray(self.rows, dtype=np.float64)
        if self.rows.ndim != 2:
            raise ValueError("rows must be a 2-d array")
        if self.rows.shape[0] < 2:
            raise DegenerateData("need at least two observations")
        if self.names is None:
            self.names = [f"col{i}" for i in range(self.p)]
        elif len(self.names) != self.p:
            raise ValueError("one name per column required")

    @property
    def n(self):
        return self.rows.shape[0]

    @property
    def p(self):
        return self.rows.shape[1]

    @property
    def column_means(self):
        return self.rows.mean(axis=0)

    def subset(self, idx):
        return Dataset(self.rows[idx], list(self.names))


def empirical_covariance(data):
    """Maximum-likelihood covariance (1/n) of the rows centered at their means."""
    X = data.rows - data.column_means
    S = X.T @ X / data.n
    S = 0.5 * (S + S.T)
    zero = np.flatnonzero(~(np.diag(S) > 0))
    if zero.size:
        raise DegenerateData(f"column {data.names[zero[0]]} has zero variance")
    return S


def penalized_loglik(Theta, S, rho):
    """log det Theta - tr(S Theta) - rho * sum |Theta_ij| (diagonal included)."""
    Theta = np.asarray(Theta, dtype=np.float64)
    return chol_logdet(Theta) - float(np.sum(S * Theta)) - rho * float(np.abs(Theta).sum())


def validation_loglik(Theta, S_valid):
    """Unpenalized log det Theta - tr(S_valid Theta)."""
    return penalized_loglik(Theta, S_valid, 0.0)


def default_rho_grid(S, num=12, ratio=100.0):
    """``num`` log-spaced values from max |S_ij| (i != j) down to that / ratio."""
    rho_max = max_offdiag(S)
    if rho_max == 0:
        rho_max = 1.0
    return list(np.geomspace(rho_max, rho_max / ratio, num))


def max_offdiag(S):
    S = np.asarray(S)
    off = np.abs(S - np.diag(np.diag(S)))
    return float(off.max()) if S.shape[0] > 1 else 0.0


# -- regularization path ---------------------------------------------------


@dataclass
class PathPoint:
    rho: float
    edges: list
    coefficients: dict
    l1_norm: float
    converged: bool
    kkt_passed: bool
    outer_sweeps: int
    solution: object = field(default=None, repr=False)
    error: str = None


@dataclass
class PathResult:
    rho_grid: list
    solutions: list


def path_run(S, rho_grid, outer_tol=1e-4, max_outer_sweeps=100, warm_start=True, kkt_eps=None):
    """Fit from the largest to the smallest penalty, warm-starting each fit.

    Each point records the edge set, the off-diagonal Theta entries keyed by
    pair, their total absolute value and the KKT verdict at
    ``kkt_eps`` (default ``10 * outer_tol``).  A failed fit is recorded on
    its point and the next fit starts cold.
    """
    grid = sorted((float(r) for r in rho_grid), reverse=True)
    if not grid:
        raise ValueError("rho grid is empty")
    if grid[-1] < 0:
        raise ValueError("penalties must be non-negative")
    kkt_eps = 10 * outer_tol if kkt_eps is None else kkt_eps
    points = []
    prev = None
    for rho in grid:
        cfg = GlassoConfig(rho=rho, outer_tol=outer_tol, max_outer_sweeps=max_outer_sweeps)
        kw = {}
        if warm_start and prev is not None:
            kw = dict(W_init=prev.W, B_init=prev.B)
        try:
            sol = glasso_fit(S, cfg, **kw)
            err = None
        except NonConvergence as exc:
            sol, err = exc.result, f"NonConvergence: {exc}"
        except CovLassoError as exc:
            log.warning("path fit failed at rho=%g: %s", rho, exc)
            points.append(PathPoint(rho, [], {}, float("nan"), False, False, 0, None,
                                    f"{type(exc).__name__}: {exc}"))
            prev = None
            continue
        prev = sol
        p = S.shape[0]
        iu, ju = np.triu_indices(p, 1)
        vals = sol.Theta[iu, ju]
        coefs = {(int(i), int(j)): float(v) for i, j, v in zip(iu, ju, vals)}
        edges = sorted(sol.edges())
        points.append(PathPoint(
            rho=rho, edges=edges, coefficients=coefs, l1_norm=float(np.abs(vals).sum()),
            converged=sol.converged, kkt_passed=kkt_check(S, sol, kkt_eps).passed,
            outer_sweeps=sol.outer_sweeps, solution=sol, error=err,
        ))
    return PathResult(rho_grid=grid, solutions=points)


# -- penalty calibration ---------------------------------------------------


def _fit_warm(S, rho, cfg_kw, fitted):
    """Fit at ``rho`` warm-started from the nearest already fitted penalty."""
    kw = {}
    if fitted:
        near = min(fitted, key=lambda r: abs(r - rho))
        kw = dict(W_init=fitted[near].W, B_init=fitted[near].B)
    try:
        sol = glasso_fit(S, GlassoConfig(rho=rho, **cfg_kw), **kw)
    except NonConvergence as exc:
        sol = exc.result
    fitted[rho] = sol
    return sol.nonzeros()


def calibrate_rho(S, target_nonzeros, bounds, max_bisections=30, **cfg_kw):
    """Bisect on rho until the off-diagonal nonzero count of Theta hits the target.

    Counts are over ordered pairs (0 .. p(p-1)).  The count is a step
    function of rho, so the penalty whose count is closest to the target
    among all evaluated points is returned (ties go to the larger penalty).
    Midpoints are geometric when ``lo > 0``.
    """
    S = np.asarray(S, dtype=np.float64)
    p = S.shape[0]
    if not 0 <= target_nonzeros <= p * (p - 1):
        raise ValueError("target_nonzeros out of range")
    lo, hi = map(float, bounds)
    if not 0 <= lo < hi:
        raise ValueError("need 0 <= lo < hi")
    fitted = {}
    c_hi = _fit_warm(S, hi, cfg_kw, fitted)
    c_lo = _fit_warm(S, lo, cfg_kw, fitted)
    if c_lo < target_nonzeros or c_hi > target_nonzeros:
        raise BoundsDoNotBracket(
            f"counts {c_lo} at rho={lo:g} and {c_hi} at rho={hi:g} do not bracket {target_nonzeros}"
        )
    evaluated = [(lo, c_lo), (hi, c_hi)]
    for _ in range(max_bisections):
        if c_lo == target_nonzeros or c_hi == target_nonzeros:
            break
        mid = np.sqrt(lo * hi) if lo > 0 else 0.5 * (lo + hi)
        c_mid = _fit_warm(S, mid, cfg_kw, fitted)
        evaluated.append((mid, c_mid))
        if c_mid >= target_nonzeros:
            lo, c_lo = mid, c_mid
        else:
            hi, c_hi = mid, c_mid
    ordered = sorted(evaluated)
    if any(c2 > c1 for (_, c1), (_, c2) in zip(ordered, ordered[1:])):
        log.info("nonzero count is not monotone in rho on the evaluated points: %s", ordered)
    best = min(evaluated, key=lambda rc: (abs(rc[1] - target_nonzeros), -rc[0]))
    return best[0]


# -- cross-validation ------------------------------------------------------


@dataclass
class CVResult:
    rho_grid: list
    scores: np.ndarray
    scheme: Scheme
    folds: int
    failed: list = field(default_factory=list)

    @property
    def mean_scores(self):
        return np.nanmean(self.scores, axis=0)

    @property
    def std_errors(self):
        ok = np.sum(~np.isnan(self.scores), axis=0)
        sd = np.nanstd(self.scores, axis=0, ddof=1)
        return sd / np.sqrt(ok)

    @property
    def best_index(self):
        m = self.mean_scores
        return int(np.nanargmax(m) if self.scheme is Scheme.LIKELIHOOD else np.nanargmin(m))

    @property
    def best_rho(self):
        return self.rho_grid[self.best_index]


def fold_assignment(n, folds, seed):
    """Fold label for every row; a seeded PCG64 permutation split evenly."""
    perm = np.random.default_rng(seed).permutation(n)
    labels = np.empty(n, dtype=np.int64)
    for k, chunk in enumerate(np.array_split(perm, folds)):
        labels[chunk] = k
    return labels


def regression_score(Theta, train_means, X_valid):
    """Mean squared error of predicting each variable from the others.

    The coefficient of variable k for predicting j is -Theta_kj / Theta_jj,
    applied to the validation rows centered at the training means.
    """
    Xc = X_valid - train_means
    G = -Theta / np.diag(Theta)[None, :]
    np.fill_diagonal(G, 0.0)
    resid = Xc - Xc @ G
    return float(np.mean(resid ** 2))


def likelihood_score(Theta, train_means, X_valid):
    Xc = X_valid - train_means
    S_valid = Xc.T @ Xc / Xc.shape[0]
    return validation_loglik(Theta, S_valid)


def _cv_cell(train, X_valid, rho, scheme, fit_kw):
    S = empirical_covariance(train)
    cfg = GlassoConfig(rho=rho, **fit_kw)
    try:
        sol = glasso_fit(S, cfg)
    except NonConvergence as exc:
        sol = exc.result
    if sol.Theta is None:
        raise CovLassoError("no precision estimate")
    means = train.column_means
    if scheme is Scheme.REGRESSION:
        return regression_score(sol.Theta, means, X_valid)
    return likelihood_score(sol.Theta, means, X_valid)


def cv_run(data, rho_grid, folds=10, scheme=Scheme.LIKELIHOOD, seed=0, threads=1, **fit_kw):
    """K-fold cross-validation of the penalty.

    Rows are assigned to folds by a seeded permutation.  For every
    (fold, rho) cell the model is fit on the other folds and scored on the
    held-out rows: ``regression`` gives the mean squared prediction error
    over variables (lower is better), ``likelihood`` the validation
    log-likelihood (higher is better).  Failed cells are NaN and listed in
    ``CVResult.failed``.  ``fit_kw`` goes to :class:`GlassoConfig`; use
    ``mode="mb-or"`` to cross-validate the approximation.
    """
    scheme = Scheme(scheme)
    if folds < 2:
        raise ValueError("folds must be >= 2")
    if data.n < folds:
        raise ValueError("fewer observations than folds")
    grid = [float(r) for r in rho_grid]
    labels = fold_assignment(data.n, folds, seed)
    tasks = []
    for f in range(folds):
        train = data.subset(labels != f)
        X_valid = data.rows[labels == f]
        for r, rho in enumerate(grid):
            tasks.append((f, r, train, X_valid, rho))

    def run(task):
        f, r, train, X_valid, rho = task
        try:
            return f, r, _cv_cell(train, X_valid, rho, scheme, fit_kw), None
        except CovLassoError as exc:
            return f, r, float("nan"), f"{type(exc).__name__}: {exc}"

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(run, tasks))
    else:
        results = [run(t) for t in tasks]

    scores = np.full((folds, len(grid)), np.nan)
    failed = []
    for f, r, val, err in sorted(results, key=lambda t: (t[0], t[1])):
        scores[f, r] = val
        if err is not None:
            failed.append((f, grid[r], err))
    return CVResult(rho_grid=grid, scores=scores, scheme=scheme, folds=folds, failed=failed)
