"""Synthetic benchmark scenarios and the timing harness.

Random numbers come from numpy's PCG64 bit generator
(``numpy.random.default_rng(seed)``), which is portable across platforms.
"""

from dataclasses import dataclass
import enum
import statistics
import time

import numpy as np
from scipy.linalg import solve_triangular

from .errors import CovLassoError, NonConvergence
from .glasso import GlassoConfig, Mode, glasso_fit
from .matrix import cholesky
from .selection import Dataset, calibrate_rho, empirical_covariance, max_offdiag


class Kind(str, enum.Enum):
    SPARSE = "sparse"
    DENSE = "dense"


@dataclass(frozen=True)
class Scenario:
    kind: Kind
    p: int
    n: int = None
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "kind", Kind(self.kind))
        if self.n is None:
            # the sample size behind the timing table is not published; 2p keeps S nonsingular
            object.__setattr__(self, "n", 2 * self.p)
        if self.p < 2 or self.n < 2:
            raise ValueError("scenario needs p >= 2 and n >= 2")


def true_precision(scn):
    """AR(1) chain (1 on the diagonal, 0.5 next to it) or dense (2 / 1)."""
    p = scn.p
    if Kind(scn.kind) is Kind.SPARSE:
        P = np.eye(p)
        i = np.arange(p - 1)
        P[i, i + 1] = P[i + 1, i] = 0.5
    else:
        P = np.ones((p, p)) + np.eye(p)
    return P


def true_nonzeros(P):
    off = P != 0
    np.fill_diagonal(off, False)
    return int(off.sum())


def sample_gaussian(precision, n, seed):
    """n draws from N(0, precision^-1).

    With ``precision = L L'`` and z standard normal, ``x = L'^-1 z`` has
    covariance ``precision^-1``; no explicit inverse is formed.
    """
    L = cholesky(precision)
    rng = np.random.default_rng(seed)
    Z = rng.standard_normal((L.shape[0], n))
    X = solve_triangular(L.T, Z, lower=False)
    return Dataset(np.ascontiguousarray(X.T))


def calibration_target(scn):
    """Ordered-pair nonzero target: the truth for sparse, half of p(p-1) for dense."""
    if Kind(scn.kind) is Kind.SPARSE:
        return true_nonzeros(true_precision(scn))
    return scn.p * (scn.p - 1) // 2


def calibrate_for(S, target, max_bisections=20, **cfg_kw):
    hi = max_offdiag(S)
    lo = hi / 10.0
    for _ in range(8):
        try:
            return calibrate_rho(S, target, (lo, hi), max_bisections=max_bisections, **cfg_kw)
        except CovLassoError:
            lo /= 10.0
    return calibrate_rho(S, target, (0.0, hi), max_bisections=max_bisections, **cfg_kw)


@dataclass
class BenchRecord:
    scenario: Scenario
    method: Mode
    rho: float
    wall_seconds: float
    outer_sweeps: int
    nonzeros_found: int
    nonzeros_true: int
    error: str = None


def _time_fit(S, cfg):
    t0 = time.perf_counter()
    try:
        sol = glasso_fit(S, cfg)
        err = None
    except NonConvergence as exc:
        sol, err = exc.result, f"NonConvergence: {exc}"
    return time.perf_counter() - t0, sol, err


def run_benchmark(scenarios, methods=(Mode.EXACT, Mode.MB_OR), repetitions=3, tol=1e-4,
                  max_bisections=20, rho=None):
    """Time each method on each scenario with a calibrated penalty.

    Data generation and calibration happen outside the timed region.  The
    reported time is the median over ``repetitions``.  ``rho`` skips the
    calibration and uses a fixed penalty for every scenario.
    """
    if not scenarios or not methods:
        raise ValueError("need at least one scenario and one method")
    records = []
    for scn in scenarios:
        P = true_precision(scn)
        data = sample_gaussian(P, scn.n, scn.seed)
        S = empirical_covariance(data)
        nz_true = true_nonzeros(P)
        try:
            r = rho if rho is not None else calibrate_for(
                S, calibration_target(scn), max_bisections=max_bisections, outer_tol=tol)
        except CovLassoError as exc:
            for m in methods:
                records.append(BenchRecord(scn, Mode(m), float("nan"), float("nan"), 0, 0, nz_true,
                                           f"{type(exc).__name__}: {exc}"))
            continue
        for m in methods:
            cfg = GlassoConfig(rho=r, outer_tol=tol, mode=Mode(m))
            times, sol, err = [], None, None
            try:
                for _ in range(repetitions):
                    dt, sol, err = _time_fit(S, cfg)
                    times.append(dt)
            except CovLassoError as exc:
                records.append(BenchRecord(scn, Mode(m), r, float("nan"), 0, 0, nz_true,
                                           f"{type(exc).__name__}: {exc}"))
                continue
            records.append(BenchRecord(scn, Mode(m), r, statistics.median(times), sol.outer_sweeps,
                                       sol.nonzeros(), nz_true, err))
    return records


def timing_table(records):
    """One row per scenario: seconds per method and exact/method time ratios."""
    rows = {}
    for rec in records:
        key = (rec.scenario.p, rec.scenario.kind.value, rec.scenario.n, rec.scenario.seed)
        rows.setdefault(key, {})[rec.method] = rec
    table = []
    for (p, kind, n, seed), by_method in rows.items():
        row = {"p": p, "kind": kind, "n": n, "seed": seed}
        exact = by_method.get(Mode.EXACT)
        for m, rec in by_method.items():
            row[f"seconds_{m.value}"] = rec.wall_seconds
            if exact is not None and m is not Mode.EXACT:
                row[f"ratio_exact_to_{m.value}"] = exact.wall_seconds / rec.wall_seconds
        table.append(row)
    return table
