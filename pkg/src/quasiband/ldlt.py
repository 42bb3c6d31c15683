"""Inertia kernels: count eigenvalues below a shift without solving for them.

By Sylvester's law of inertia, the number of negative eigenvalues of a
Hermitian matrix equals the number of negative pivots in any congruent
diagonalization.  Three kernels cover the shapes that occur here:

* tridiagonal: the classical negative-pivot recurrence
  d_k = a_k - |b_{k-1}|^2 / d_{k-1} (half-line chains, 1d boxes);
* banded: unpivoted LDL^T working in LAPACK-style lower band storage,
  O(n b^2) flops and O(n b) memory (mode-ladder and 3d box matrices after
  bandwidth reduction);
* dense: LAPACK Bunch-Kaufman factorization, reading the inertia off the
  1x1 and 2x2 diagonal blocks (small or unstructured matrices, and the
  fallback for everything else).

The banded kernel is unpivoted, so it can break down or grow on matrices a
pivoted method would handle; breakdown and pivot growth are detected and
reported via PivotBreakdown, and the caller retries with a perturbed shift
or falls back to the dense kernel.  Counts are exact integers, never
tolerance-fuzzed: a tie between the shift and an eigenvalue surfaces as a
breakdown, not as a rounded count.

The hot kernels are numba-jitted when numba is importable and fall back to
vectorized numpy otherwise (same arithmetic, slower constants).
"""

from __future__ import annotations

import numpy as np

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        def wrap(fn):
            return fn

        if args and callable(args[0]):
            return args[0]
        return wrap

GROWTH_LIMIT_FACTOR = 1e10


class PivotBreakdown(Exception):
    """A pivot fell below tolerance (or grew absurdly) during factorization."""

    def __init__(self, column: int):
        super().__init__(f"factorization breakdown at column {column}")
        self.column = column


# ---------------------------------------------------------------------------
# tridiagonal

@njit(cache=True)
def _sturm_negcount(diag, offsq, shift, tol):
    # offsq holds |b_k|^2; returns negative count, or -(j+1) on breakdown at j
    n = diag.shape[0]
    neg = 0
    d = diag[0] - shift
    if abs(d) <= tol:
        return -1
    if d < 0.0:
        neg += 1
    for j in range(1, n):
        d = diag[j] - shift - offsq[j - 1] / d
        if abs(d) <= tol:
            return -(j + 1)
        if d < 0.0:
            neg += 1
    return neg


def tridiagonal_negative_count(
    diag: np.ndarray, off: np.ndarray, shift: float, tol: float
) -> int:
    """Eigenvalues of tridiag(off, diag, off*) strictly below `shift`."""
    d = np.ascontiguousarray(diag, dtype=np.float64)
    offsq = np.ascontiguousarray(np.abs(off) ** 2, dtype=np.float64)
    if d.shape[0] == 0:
        return 0
    if offsq.shape[0] != d.shape[0] - 1:
        raise ValueError("off-diagonal length must be n - 1")
    res = _sturm_negcount(d, offsq, float(shift), float(tol))
    if res < 0:
        raise PivotBreakdown(-res - 1)
    return int(res)


# ---------------------------------------------------------------------------
# banded, lower storage: band[j, t] = A[j + t, j], 0 <= t <= b

@njit(cache=True)
def _banded_negcount_real(band, tol, growth_limit):
    n, bp1 = band.shape
    b = bp1 - 1
    neg = 0
    w = np.empty(b, np.float64)
    for j in range(n):
        d = band[j, 0]
        ad = abs(d)
        if ad <= tol or ad > growth_limit:
            return -(j + 1)
        if d < 0.0:
            neg += 1
        m = min(b, n - 1 - j)
        for t in range(1, m + 1):
            w[t - 1] = band[j, t]
        for t in range(1, m + 1):
            f = w[t - 1] / d
            jt = j + t
            for s in range(m - t + 1):
                band[jt, s] -= f * w[t - 1 + s]
    return neg


@njit(cache=True)
def _banded_negcount_herm(band, tol, growth_limit):
    n, bp1 = band.shape
    b = bp1 - 1
    neg = 0
    w = np.empty(b, np.complex128)
    for j in range(n):
        d = band[j, 0].real
        ad = abs(d)
        if ad <= tol or ad > growth_limit:
            return -(j + 1)
        if d < 0.0:
            neg += 1
        m = min(b, n - 1 - j)
        for t in range(1, m + 1):
            w[t - 1] = band[j, t]
        for t in range(1, m + 1):
            f = np.conj(w[t - 1]) / d
            jt = j + t
            for s in range(m - t + 1):
                band[jt, s] -= f * w[t - 1 + s]
    return neg


def _banded_negcount_numpy(band, tol, growth_limit):
    # Same elimination as the jitted kernels, with the inner loop vectorized.
    n, bp1 = band.shape
    b = bp1 - 1
    hermitian = np.iscomplexobj(band)
    neg = 0
    for j in range(n):
        d = band[j, 0].real if hermitian else band[j, 0]
        ad = abs(d)
        if ad <= tol or ad > growth_limit:
            return -(j + 1)
        if d < 0.0:
            neg += 1
        m = min(b, n - 1 - j)
        if m == 0:
            continue
        w = band[j, 1 : m + 1].copy()
        for t in range(1, m + 1):
            f = (np.conj(w[t - 1]) if hermitian else w[t - 1]) / d
            band[j + t, 0 : m - t + 1] -= f * w[t - 1 : m]
    return neg


def lower_band_array(matrix, bandwidth: int) -> np.ndarray:
    """Pack the lower triangle of a sparse matrix into (n, b+1) band storage."""
    coo = matrix.tocoo()
    n = matrix.shape[0]
    dtype = np.complex128 if np.iscomplexobj(coo.data) else np.float64
    band = np.zeros((n, bandwidth + 1), dtype=dtype)
    mask = coo.row >= coo.col
    band[coo.col[mask], coo.row[mask] - coo.col[mask]] = coo.data[mask]
    return band


def banded_negative_count(band: np.ndarray, tol: float) -> int:
    """Negative eigenvalue count from band storage; destroys `band`.

    The growth guard aborts when any pivot exceeds GROWTH_LIMIT_FACTOR times
    the largest initial entry, since an unpivoted factorization past that
    point can no longer be trusted to carry the right signs.
    """
    if band.shape[0] == 0:
        return 0
    amax = float(np.abs(band).max())
    growth_limit = GROWTH_LIMIT_FACTOR * max(amax, 1.0)
    if np.iscomplexobj(band):
        kernel = _banded_negcount_herm if HAVE_NUMBA else _banded_negcount_numpy
        res = kernel(band, float(tol), growth_limit)
    else:
        kernel = _banded_negcount_real if HAVE_NUMBA else _banded_negcount_numpy
        res = kernel(band, float(tol), growth_limit)
    if res < 0:
        raise PivotBreakdown(-res - 1)
    return int(res)


# ---------------------------------------------------------------------------
# dense Bunch-Kaufman

def dense_negative_count(matrix: np.ndarray, tol: float) -> int:
    """Negative eigenvalue count of a dense symmetric/Hermitian matrix.

    Uses the pivoted LAPACK factorization (sytrf / hetrf) and classifies the
    resulting 1x1 and 2x2 diagonal blocks.  A 2x2 block with negative
    determinant contributes exactly one negative eigenvalue; with positive
    determinant it contributes two or none according to its trace.
    """
    from scipy.linalg import get_lapack_funcs

    a = np.asarray(matrix)
    n = a.shape[0]
    if n == 0:
        return 0
    hermitian = np.iscomplexobj(a)
    name = "hetrf" if hermitian else "sytrf"
    (trf,) = get_lapack_funcs((name,), (a,))
    ldu, ipiv, info = trf(a, lower=1)
    if info > 0:
        raise PivotBreakdown(int(info) - 1)
    if info < 0:
        raise ValueError(f"illegal argument {-info} to {name}")
    neg = 0
    k = 0
    while k < n:
        if ipiv[k] > 0:
            d = ldu[k, k].real
            if abs(d) <= tol:
                raise PivotBreakdown(k)
            if d < 0.0:
                neg += 1
            k += 1
        else:
            aa = ldu[k, k].real
            cc = ldu[k + 1, k + 1].real
            bb = ldu[k + 1, k]
            det = aa * cc - abs(bb) ** 2
            scale = max(abs(aa), abs(cc), abs(bb), 1.0)
            if abs(det) <= tol * scale:
                raise PivotBreakdown(k)
            if det < 0.0:
                neg += 1
            elif aa + cc < 0.0:
                neg += 2
            k += 2
    return neg
