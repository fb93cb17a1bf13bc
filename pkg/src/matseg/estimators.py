"""Sample autocovariance estimators for matrix-valued series and their thresholded forms."""

from __future__ import annotations

import numpy as np

from .errors import InvalidInput, ResourceLimit
from .series import MatrixSeries

PAIR_TENSOR_ENTRY_LIMIT = 10**8


def _check_lag(lag: int, n: int, name: str = "lag") -> int:
    # lag = n - 1 leaves a single overlapping term, which is still well defined
    lag = int(lag)
    if not 0 <= lag <= n - 1:
        raise InvalidInput(f"{name} must satisfy 0 <= {name} <= n - 1, got {lag} with n = {n}")
    return lag


def row_autocov(series: MatrixSeries, k: int) -> np.ndarray:
    """Row-averaged sample autocovariance of the series columns at lag k.

    Returns (1 / (n p)) * sum_t (Y_{t+k} - Ybar)' (Y_t - Ybar) where Ybar
    is the full-sample mean matrix and the sum runs over t = 1..n-k.

    Parameters
    ----------
    series : MatrixSeries
        Observed series of p x q matrices.
    k : int
        Lag, 0 <= k <= n - 1.

    Returns
    -------
    ndarray, shape (q, q)
    """
    n, p, q = series.n, series.p, series.q
    k = _check_lag(k, n, "k")
    centered = series.data - series.data.mean(axis=0)
    lead = centered[k:].reshape((n - k) * p, q)
    base = centered[: n - k].reshape((n - k) * p, q)
    return (lead.T @ base) / (n * p)


def pair_autocov(series: MatrixSeries, i: int, j: int, h: int) -> np.ndarray:
    """Sample cross-covariance between matrix rows i and j at lag h.

    Returns (1 / n) * sum_t (y_i^{t+h} - ybar_i)' (y_j^t - ybar_j) with
    rows treated as 1 x q vectors, full-sample row means, and the sum over
    t = 1..n-h.  Row indices are 1-based.

    Parameters
    ----------
    series : MatrixSeries
        Observed series of p x q matrices.
    i, j : int
        Row indices in 1..p.
    h : int
        Lag, 0 <= h <= n - 1.

    Returns
    -------
    ndarray, shape (q, q)
    """
    n, p, _ = series.n, series.p, series.q
    if not (1 <= i <= p and 1 <= j <= p):
        raise InvalidInput(f"row indices must lie in 1..{p}, got ({i}, {j})")
    h = _check_lag(h, n, "h")
    centered = series.data - series.data.mean(axis=0)
    lead = centered[h:, i - 1, :]
    base = centered[: n - h, j - 1, :]
    return (lead.T @ base) / n


def pair_autocov_all(series: MatrixSeries, h: int) -> np.ndarray:
    """All row-pair cross-covariances at lag h in one array.

    Entry [i-1, j-1] is pair_autocov(series, i, j, h).

    Returns
    -------
    ndarray, shape (p, p, q, q)
    """
    n, p, q = series.n, series.p, series.q
    h = _check_lag(h, n, "h")
    if p * p * q * q > PAIR_TENSOR_ENTRY_LIMIT:
        raise ResourceLimit(
            f"row-pair covariance tensor would hold {p * p * q * q} entries"
        )
    centered = series.data - series.data.mean(axis=0)
    lead = centered[h:].reshape(n - h, p * q)
    base = centered[: n - h].reshape(n - h, p * q)
    flat = (lead.T @ base) / n
    return flat.reshape(p, q, p, q).transpose(0, 2, 1, 3)


def hard_threshold(matrix, u: float, keep_diagonal: bool = False) -> np.ndarray:
    """Zero all entries with magnitude strictly below u.

    Parameters
    ----------
    matrix : array_like
        Input array; thresholding acts entrywise on the last two axes.
    u : float
        Threshold, u >= 0.
    keep_diagonal : bool
        When True, diagonal entries of the trailing two axes are kept
        regardless of magnitude.

    Returns
    -------
    ndarray
        Thresholded copy of the input.
    """
    arr = np.asarray(matrix, dtype=float)
    if not np.isfinite(u) or u < 0:
        raise InvalidInput(f"threshold must be finite and nonnegative, got {u}")
    out = np.where(np.abs(arr) < u, 0.0, arr)
    if keep_diagonal:
        if arr.ndim < 2:
            raise InvalidInput("keep_diagonal requires at least a 2-dimensional input")
        rows, cols = np.diag_indices(min(arr.shape[-2], arr.shape[-1]))
        out[..., rows, cols] = arr[..., rows, cols]
    return out


def w_stat(series: MatrixSeries, k0: int, u_per_lag=None) -> np.ndarray:
    """Accumulated lag-covariance statistic whose eigenvectors drive segmentation.

    Returns I_q + sum_{k=1..k0} T_k @ T_k' with T_k the (optionally
    thresholded) row_autocov at lag k.  The series is expected to be
    standardized so its lag-0 row covariance is the identity.

    Parameters
    ----------
    series : MatrixSeries
        Standardized series.
    k0 : int
        Number of lags, 1 <= k0 <= n - 2.
    u_per_lag : sequence of float or None
        Per-lag thresholds (entry k-1 applies to lag k); None disables
        thresholding.

    Returns
    -------
    ndarray, shape (q, q)
        Symmetric matrix with every eigenvalue >= 1.
    """
    n, q = series.n, series.q
    if not 1 <= k0 <= n - 2:
        raise InvalidInput(f"k0 must satisfy 1 <= k0 <= n - 2, got {k0} with n = {n}")
    if u_per_lag is not None and len(u_per_lag) != k0:
        raise InvalidInput(f"u_per_lag must have length {k0}, got {len(u_per_lag)}")
    acc = np.eye(q)
    for k in range(1, k0 + 1):
        cov = row_autocov(series, k)
        if u_per_lag is not None:
            cov = hard_threshold(cov, u_per_lag[k - 1])
        acc += cov @ cov.T
    return 0.5 * (acc + acc.T)


def w_stat_rowpair(series: MatrixSeries, k0: int, v_per_lag=None) -> np.ndarray:
    """Row-pair variant of the accumulated lag-covariance statistic.

    Returns (1 / p^2) * sum_{k=0..k0} sum_{i,j} T_v(S_ij(k)) @ T_v(S_ij(k))'
    where S_ij(k) is the row-pair cross-covariance at lag k.

    Parameters
    ----------
    series : MatrixSeries
        Observed or standardized series.
    k0 : int
        Largest lag, 1 <= k0 <= n - 2.
    v_per_lag : sequence of float or None
        Per-lag thresholds (entry k applies to lag k, including lag 0);
        None disables thresholding.

    Returns
    -------
    ndarray, shape (q, q)
        Symmetric positive semi-definite matrix.
    """
    n, p, q = series.n, series.p, series.q
    if not 1 <= k0 <= n - 2:
        raise InvalidInput(f"k0 must satisfy 1 <= k0 <= n - 2, got {k0} with n = {n}")
    if v_per_lag is not None and len(v_per_lag) != k0 + 1:
        raise InvalidInput(f"v_per_lag must have length {k0 + 1}, got {len(v_per_lag)}")
    acc = np.zeros((q, q))
    for k in range(0, k0 + 1):
        tensor = pair_autocov_all(series, k)
        if v_per_lag is not None:
            tensor = hard_threshold(tensor, v_per_lag[k])
        flat = tensor.reshape(p * p, q, q)
        acc += np.einsum("mab,mcb->ac", flat, flat)
    acc /= p * p
    return 0.5 * (acc + acc.T)
