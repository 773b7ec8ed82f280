"""Dense symmetric matrix helpers.

Matrices are plain ``float64`` numpy arrays stored full-square (both
triangles).  The "target column last" view used by the block updates is
realised by index mapping only; W is never physically permuted.
"""

from dataclasses import dataclass

import numba
import numpy as np

from .errors import NotPositiveDefinite


@dataclass
class Partition:
    """Blocks of a symmetric matrix with row/column ``target`` moved last.

    ``block11`` is a contiguous copy of the matrix with row and column
    ``target`` removed, ``vec12`` is column ``target`` without its diagonal
    entry and ``scalar22`` is the diagonal entry itself.
    """

    target: int
    block11: np.ndarray
    vec12: np.ndarray
    scalar22: float


def as_symmetric(M, name="matrix"):
    """Return ``M`` as a float64 square array, checking exact symmetry."""
    M = np.array(M, dtype=np.float64, copy=True)
    if M.ndim != 2 or M.shape[0] != M.shape[1] or M.shape[0] < 1:
        raise ValueError(f"{name} must be a non-empty square matrix, got shape {M.shape}")
    if not np.array_equal(M, M.T):
        raise ValueError(f"{name} is not exactly symmetric")
    return M


def soft_threshold(x, t):
    """sign(x) * max(|x| - t, 0)."""
    if t < 0:
        raise ValueError("threshold must be non-negative")
    return _soft_threshold(float(x), float(t))


@numba.njit(cache=True, nogil=True)
def _soft_threshold(x, t):
    if x > t:
        return x - t
    if x < -t:
        return x + t
    return 0.0


@numba.njit(cache=True, nogil=True)
def _fill_block11(M, j, out):
    p = M.shape[0]
    a = 0
    for r in range(p):
        if r == j:
            continue
        b = 0
        for c in range(p):
            if c == j:
                continue
            out[a, b] = M[r, c]
            b += 1
        a += 1


@numba.njit(cache=True, nogil=True)
def _fill_vec12(M, j, out):
    a = 0
    for r in range(M.shape[0]):
        if r != j:
            out[a] = M[r, j]
            a += 1


@numba.njit(cache=True, nogil=True)
def _write_column(M, j, vec12, scalar22):
    a = 0
    for r in range(M.shape[0]):
        if r == j:
            continue
        M[r, j] = vec12[a]
        M[j, r] = vec12[a]
        a += 1
    M[j, j] = scalar22


def _check_index(p, j):
    if p < 2:
        raise ValueError("partitioning needs p >= 2")
    if not 0 <= j < p:
        raise IndexError(f"column index {j} out of range for p={p}")


def extract_partition(M, j, out=None):
    """Split ``M`` around column ``j``.

    ``out`` may be a preallocated ``(p-1, p-1)`` buffer that receives the
    block copy; the solver reuses one buffer across column visits.
    """
    M = np.asarray(M, dtype=np.float64)
    p = M.shape[0]
    _check_index(p, j)
    if out is None:
        out = np.empty((p - 1, p - 1))
    elif out.shape != (p - 1, p - 1):
        raise ValueError("block buffer has the wrong shape")
    _fill_block11(M, j, out)
    vec = np.empty(p - 1)
    _fill_vec12(M, j, vec)
    return Partition(target=j, block11=out, vec12=vec, scalar22=float(M[j, j]))


def insert_partition(part, j, M, inplace=False):
    """Write ``part.vec12`` and ``part.scalar22`` back as row/column ``j`` of ``M``.

    Both triangles are written, so symmetry is kept.  ``block11`` is not
    written back: it is a copy of the untouched remainder of ``M``.
    """
    M = np.asarray(M, dtype=np.float64)
    p = M.shape[0]
    _check_index(p, j)
    vec = np.asarray(part.vec12, dtype=np.float64)
    if vec.shape != (p - 1,) or part.block11.shape != (p - 1, p - 1):
        raise ValueError("partition dimensions do not match the target matrix")
    if not inplace:
        M = M.copy()
    _write_column(M, j, vec, float(part.scalar22))
    return M


def assemble_partition(part):
    """Rebuild the full matrix from its blocks."""
    q = part.block11.shape[0]
    j = part.target
    idx = np.delete(np.arange(q + 1), j)
    M = np.empty((q + 1, q + 1))
    M[np.ix_(idx, idx)] = part.block11
    _write_column(M, j, np.asarray(part.vec12, dtype=np.float64), float(part.scalar22))
    return M


def cholesky(M):
    """Lower Cholesky factor, raising NotPositiveDefinite on failure."""
    M = np.asarray(M, dtype=np.float64)
    if not np.all(np.isfinite(M)):
        raise NotPositiveDefinite("matrix has non-finite entries")
    try:
        return np.linalg.cholesky(M)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefinite("matrix is not positive definite") from exc


def is_positive_definite(M):
    try:
        cholesky(M)
    except NotPositiveDefinite:
        return False
    return True


def chol_logdet(M):
    """log det of a symmetric positive definite matrix via its Cholesky factor."""
    L = cholesky(M)
    return 2.0 * float(np.sum(np.log(np.diag(L))))
