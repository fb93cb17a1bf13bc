"""Segmentation of matrix-series columns into groups uncorrelated at all lags.

The pipeline standardizes the series so its row-averaged lag-0 covariance
is the identity, extracts an orthogonal transformation from the
eigenvectors of an accumulated lag-covariance statistic, scores every pair
of transformed columns by its maximal absolute cross-correlation over a lag
window, keeps the strongest pairs chosen by a ratio rule, and reads the
groups off the resulting graph as connected components.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DegenerateColumn,
    DegenerateVariance,
    InvalidInput,
)
from .estimators import hard_threshold, pair_autocov_all, row_autocov, w_stat
from .linalg import inv_sqrt_psd, sym_eig
from .series import MatrixSeries
from .threshold_cv import CvPlan, cv_threshold_autocov, cv_threshold_pair


@dataclass(frozen=True)
class NoThreshold:
    """Raw sample estimators, no thresholding."""


@dataclass(frozen=True)
class FixedThreshold:
    """One fixed level u for all row-autocovariances and v for all row-pair covariances."""

    u: float
    v: float

    def __post_init__(self):
        if not (np.isfinite(self.u) and self.u >= 0):
            raise InvalidInput(f"u must be finite and nonnegative, got {self.u}")
        if not (np.isfinite(self.v) and self.v >= 0):
            raise InvalidInput(f"v must be finite and nonnegative, got {self.v}")


@dataclass(frozen=True)
class CvThreshold:
    """Per-lag thresholds chosen by subsample cross-validation."""

    n_splits: int = 20
    grid_size: int = 32
    seed: int = 0


ThresholdMode = NoThreshold | FixedThreshold | CvThreshold


@dataclass(frozen=True)
class SegmentationConfig:
    """Tuning constants for the segmentation pipeline.

    k0 is the number of lags accumulated in the eigen-analysis statistic, m
    the largest lag used when scoring pairs of transformed columns, c0 the
    fraction of the score list searched by the ratio rule, and ratio_shift
    an optional additive stabilizer that widens the search to the whole
    list.  eps is the relative eigenvalue floor of the standardizer.
    """

    k0: int = 2
    m: int = 10
    c0: float = 0.75
    ratio_shift: float | None = None
    threshold: ThresholdMode = field(default_factory=NoThreshold)
    eps: float = 1e-10

    def __post_init__(self):
        if self.k0 < 1:
            raise InvalidInput(f"k0 must be at least 1, got {self.k0}")
        if self.m < 0:
            raise InvalidInput(f"m must be nonnegative, got {self.m}")
        if not 0 < self.c0 < 1:
            raise InvalidInput(f"c0 must lie in (0, 1), got {self.c0}")
        if self.ratio_shift is not None and not self.ratio_shift > 0:
            raise InvalidInput(f"ratio_shift must be positive, got {self.ratio_shift}")
        if not 0 < self.eps < 1:
            raise InvalidInput(f"eps must lie in (0, 1), got {self.eps}")


@dataclass
class SegmentationResult:
    """Everything produced by one segmentation run.

    gamma holds the orthogonal transformation as columns, standardizer the
    inverse square root applied to the raw series, and transformed the
    standardized series rotated by gamma.  scores lists every column pair
    (1-based, i < j) with its maximal absolute cross-correlation, sorted
    descending; the first selected_edges entries are the retained pairs and
    groups is the resulting partition sorted by smallest member.  a_hat
    contains the gamma columns of each group, in group order.
    """

    gamma: np.ndarray
    standardizer: np.ndarray
    transformed: MatrixSeries
    scores: list[tuple[int, int, float]]
    selected_edges: int
    groups: list[list[int]]
    a_hat: list[np.ndarray]
    u_lag0: float | None = None
    u_per_lag: list[float] | None = None
    v_per_lag: list[float] | None = None


def _cv_plan(mode: CvThreshold, kind: int, lag: int) -> CvPlan:
    """Per-lag split plan with a seed derived from (seed, kind, lag)."""
    derived = int(np.random.SeedSequence((int(mode.seed), kind, lag)).generate_state(1)[0])
    return CvPlan(n_splits=mode.n_splits, grid_size=mode.grid_size, seed=derived)


def standardize(
    series: MatrixSeries,
    threshold: ThresholdMode = NoThreshold(),
    eps: float = 1e-10,
) -> tuple[MatrixSeries, np.ndarray]:
    """Rescale the series so its row-averaged lag-0 covariance is the identity.

    Under a threshold mode the lag-0 covariance is hard-thresholded with
    its diagonal kept before the inverse square root is taken.

    Parameters
    ----------
    series : MatrixSeries
        Raw observed series.
    threshold : NoThreshold, FixedThreshold or CvThreshold
        Thresholding applied to the lag-0 covariance.
    eps : float
        Relative eigenvalue floor for the inverse square root.

    Returns
    -------
    standardized : MatrixSeries
    standardizer : ndarray, shape (q, q)
        Symmetric matrix right-multiplied into every observation.
    """
    if series.n <= series.q:
        warnings.warn(
            f"series length {series.n} does not exceed column count {series.q}; "
            "the lag-0 covariance estimate is unreliable",
            stacklevel=2,
        )
    cov0 = row_autocov(series, 0)
    variances = np.diag(cov0)
    for idx in range(series.q):
        if variances[idx] <= 0:
            raise DegenerateColumn(idx + 1)
    if isinstance(threshold, FixedThreshold):
        cov0 = hard_threshold(cov0, threshold.u, keep_diagonal=True)
    elif isinstance(threshold, CvThreshold):
        u0 = cv_threshold_autocov(series, 0, _cv_plan(threshold, 0, 0))
        cov0 = hard_threshold(cov0, u0, keep_diagonal=True)
    standardizer = inv_sqrt_psd(cov0, eps)
    return MatrixSeries(series.data @ standardizer), standardizer


def _resolve_u_lag0(series: MatrixSeries, threshold: ThresholdMode) -> float | None:
    if isinstance(threshold, FixedThreshold):
        return threshold.u
    if isinstance(threshold, CvThreshold):
        return cv_threshold_autocov(series, 0, _cv_plan(threshold, 0, 0))
    return None


def _resolve_u_per_lag(
    standardized: MatrixSeries, threshold: ThresholdMode, k0: int
) -> list[float] | None:
    if isinstance(threshold, FixedThreshold):
        return [threshold.u] * k0
    if isinstance(threshold, CvThreshold):
        return [
            cv_threshold_autocov(standardized, k, _cv_plan(threshold, 0, k))
            for k in range(1, k0 + 1)
        ]
    return None


def _resolve_v_per_lag(
    standardized: MatrixSeries, threshold: ThresholdMode, m: int
) -> list[float] | None:
    if isinstance(threshold, FixedThreshold):
        return [threshold.v] * (m + 1)
    if isinstance(threshold, CvThreshold):
        return [
            cv_threshold_pair(standardized, h, _cv_plan(threshold, 1, h))
            for h in range(0, m + 1)
        ]
    return None


def estimate_gamma(standardized: MatrixSeries, cfg: SegmentationConfig) -> np.ndarray:
    """Orthogonal transformation from the eigenvectors of the lag-covariance statistic.

    Parameters
    ----------
    standardized : MatrixSeries
        Output of :func:`standardize`.
    cfg : SegmentationConfig
        Supplies k0 and the threshold mode; under cross-validation the
        per-lag levels are chosen on this series.

    Returns
    -------
    ndarray, shape (q, q)
        Orthonormal eigenvector columns, eigenvalues descending.
    """
    u_per_lag = _resolve_u_per_lag(standardized, cfg.threshold, cfg.k0)
    _, vectors = sym_eig(w_stat(standardized, cfg.k0, u_per_lag))
    return vectors


def _thresholded_pair_tensor(tensor: np.ndarray, v: float | None, lag: int) -> np.ndarray:
    """Entrywise threshold of an (p, p, q, q) row-pair tensor.

    At lag 0 the diagonal entries of the diagonal (k, k) blocks are kept:
    they are the component variances used as correlation denominators.
    """
    if v is None:
        return tensor
    out = hard_threshold(tensor, v)
    if lag == 0:
        p, q = tensor.shape[0], tensor.shape[2]
        rows = np.arange(p)[:, None]
        cols = np.arange(q)[None, :]
        out[rows, rows, cols, cols] = tensor[rows, rows, cols, cols]
    return out


def _component_scales(tensor0: np.ndarray, gamma: np.ndarray) -> np.ndarray:
    """Standard deviations of the transformed components.

    Entry [k, i] is the square root of gamma_i' S_kk(0) gamma_i where
    S_kk(0) is the (already thresholded) lag-0 covariance of row k.
    """
    p = tensor0.shape[0]
    diag_blocks = tensor0[np.arange(p), np.arange(p)]
    var = np.einsum("kab,ai,bi->ki", diag_blocks, gamma, gamma)
    bad = np.argwhere(var <= 0)
    if bad.size:
        k, i = bad[0]
        raise DegenerateVariance(int(i) + 1, int(k) + 1)
    return np.sqrt(var)


def cross_corr(
    standardized: MatrixSeries,
    gamma: np.ndarray,
    i: int,
    j: int,
    h: int,
    v: float | None = None,
) -> np.ndarray:
    """Cross-correlations between components of transformed columns i and j at lag h.

    Entry (k, l) is the sample correlation between component k of column i
    at time t + h and component l of column j at time t.  When a threshold
    v is given it is applied both to the lag-h covariances in the numerator
    and to the lag-0 covariances behind the denominators (diagonals kept).

    Parameters
    ----------
    standardized : MatrixSeries
        Output of :func:`standardize`.
    gamma : ndarray, shape (q, q)
        Orthogonal transformation.
    i, j : int
        Transformed column indices, 1-based.
    h : int
        Lag, 0 <= h <= n - 2.
    v : float or None
        Hard-threshold level for the row-pair covariances.

    Returns
    -------
    ndarray, shape (p, p)
    """
    q = standardized.q
    if not (1 <= i <= q and 1 <= j <= q):
        raise InvalidInput(f"column indices must lie in 1..{q}, got ({i}, {j})")
    gam = np.asarray(gamma, dtype=float)
    if gam.shape != (q, q):
        raise InvalidInput(f"gamma must have shape ({q}, {q}), got {gam.shape}")
    tensor0 = _thresholded_pair_tensor(pair_autocov_all(standardized, 0), v, 0)
    scales = _component_scales(tensor0, gam)
    if h == 0:
        tensor = tensor0
    else:
        tensor = _thresholded_pair_tensor(pair_autocov_all(standardized, h), v, h)
    vi = gam[:, i - 1]
    vj = gam[:, j - 1]
    numer = np.einsum("klab,a,b->kl", tensor, vi, vj)
    return numer / np.outer(scales[:, i - 1], scales[:, j - 1])


def pair_score_matrix(
    standardized: MatrixSeries,
    gamma: np.ndarray,
    m: int,
    v_per_lag: list[float] | None = None,
) -> np.ndarray:
    """Maximal absolute cross-correlation for every pair of transformed columns.

    Entry (i, j) is the largest absolute correlation between any component
    of column i and any component of column j over lags -m..m; lags of both
    signs are covered through the transpose identity relating the lag -h
    and lag h sample cross-covariances.

    Returns
    -------
    ndarray, shape (q, q)
        Symmetric matrix; the diagonal holds each column's own score and is
        not used by the segmentation.
    """
    n = standardized.n
    if not 0 <= m <= n - 2:
        raise InvalidInput(f"m must satisfy 0 <= m <= n - 2, got {m} with n = {n}")
    if v_per_lag is not None and len(v_per_lag) != m + 1:
        raise InvalidInput(f"v_per_lag must have length {m + 1}, got {len(v_per_lag)}")
    gam = np.asarray(gamma, dtype=float)
    tensor0 = _thresholded_pair_tensor(
        pair_autocov_all(standardized, 0), None if v_per_lag is None else v_per_lag[0], 0
    )
    scales = _component_scales(tensor0, gam)
    denom = np.einsum("ki,lj->klij", scales, scales)
    best = np.zeros((standardized.q, standardized.q))
    for h in range(0, m + 1):
        if h == 0:
            tensor = tensor0
        else:
            tensor = _thresholded_pair_tensor(
                pair_autocov_all(standardized, h),
                None if v_per_lag is None else v_per_lag[h],
                h,
            )
        sandwich = np.tensordot(tensor, gam, axes=([2], [0]))
        sandwich = np.tensordot(sandwich, gam, axes=([2], [0]))
        corr = np.abs(sandwich / denom).max(axis=(0, 1))
        best = np.maximum(best, np.maximum(corr, corr.T))
    return best


def max_cross_corr(
    standardized: MatrixSeries,
    gamma: np.ndarray,
    i: int,
    j: int,
    cfg: SegmentationConfig,
) -> float:
    """Score of the transformed column pair (i, j), i < j.

    The maximum runs over lags -m..m of the largest absolute entry of the
    component cross-correlation matrices; thresholds follow cfg.
    """
    q = standardized.q
    if not (1 <= i < j <= q):
        raise InvalidInput(f"need 1 <= i < j <= {q}, got ({i}, {j})")
    v_per_lag = _resolve_v_per_lag(standardized, cfg.threshold, cfg.m)
    matrix = pair_score_matrix(standardized, gamma, cfg.m, v_per_lag)
    return float(matrix[i - 1, j - 1])


def ratio_select(scores, c0: float = 0.75, shift: float | None = None) -> int:
    """Number of column pairs to retain, chosen by the score-ratio rule.

    Without a shift the rule maximizes scores[j-1] / scores[j] over
    1 <= j < c0 * len(scores); a zero denominator counts as an infinite
    ratio at the first index where it occurs.  With a positive shift s the
    rule maximizes (scores[j-1] + s) / (scores[j] + s) over the whole list.
    Ties resolve to the smallest index.

    Parameters
    ----------
    scores : sequence of float
        Pair scores sorted descending.
    c0 : float
        Search fraction in (0, 1); ignored when shift is given.
    shift : float or None
        Additive stabilizer, > 0.

    Returns
    -------
    int
        Retained pair count, >= 1.
    """
    arr = np.asarray(scores, dtype=float)
    if arr.ndim != 1 or arr.size < 2:
        raise InvalidInput(f"scores must be a sequence of at least 2 values, got {arr.size}")
    if np.any(np.diff(arr) > 0):
        raise InvalidInput("scores must be sorted in descending order")
    if np.any(arr < 0) or not np.all(np.isfinite(arr)):
        raise InvalidInput("scores must be finite and nonnegative")
    q0 = arr.size
    if shift is None:
        if not 0 < c0 < 1:
            raise InvalidInput(f"c0 must lie in (0, 1), got {c0}")
        # j runs over 1..j_count with j < c0 * q0 strict
        j_count = int(np.ceil(c0 * q0)) - 1
        if j_count < 1:
            raise InvalidInput(f"no admissible index: c0 * q0 = {c0 * q0} leaves an empty range")
        lead = arr[:j_count]
        lag = arr[1 : j_count + 1]
        with np.errstate(divide="ignore", invalid="ignore"):
            ratios = np.where(lag == 0.0, np.inf, lead / lag)
        return int(np.argmax(ratios)) + 1
    if not shift > 0:
        raise InvalidInput(f"shift must be positive, got {shift}")
    lead = arr[:-1] + shift
    lag = arr[1:] + shift
    return int(np.argmax(lead / lag)) + 1


class _UnionFind:
    """Union-find over 1..q with path compression and union by rank."""

    def __init__(self, q: int):
        self.parent = list(range(q + 1))
        self.rank = [0] * (q + 1)

    def find(self, x: int) -> int:
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, a: int, b: int):
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return
        if self.rank[ra] < self.rank[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        if self.rank[ra] == self.rank[rb]:
            self.rank[ra] += 1


def group_columns(edges, q: int) -> list[list[int]]:
    """Connected components of the pair graph over columns 1..q.

    Parameters
    ----------
    edges : iterable of (int, int)
        Retained pairs, 1-based, distinct endpoints.
    q : int
        Column count.

    Returns
    -------
    list of list of int
        Groups sorted by smallest member, members ascending; isolated
        columns appear as singletons.
    """
    if q < 1:
        raise InvalidInput(f"q must be positive, got {q}")
    uf = _UnionFind(q)
    for edge in edges:
        i, j = int(edge[0]), int(edge[1])
        if not (1 <= i <= q and 1 <= j <= q):
            raise InvalidInput(f"edge ({i}, {j}) falls outside 1..{q}")
        if i == j:
            raise InvalidInput(f"edge ({i}, {j}) must join two distinct columns")
        uf.union(i, j)
    members: dict[int, list[int]] = {}
    for col in range(1, q + 1):
        members.setdefault(uf.find(col), []).append(col)
    return sorted((sorted(g) for g in members.values()), key=lambda g: g[0])


def _trivial_result(series: MatrixSeries, cfg: SegmentationConfig) -> SegmentationResult:
    standardized, standardizer = standardize(series, cfg.threshold, cfg.eps)
    gamma = np.eye(1)
    return SegmentationResult(
        gamma=gamma,
        standardizer=standardizer,
        transformed=standardized,
        scores=[],
        selected_edges=0,
        groups=[[1]],
        a_hat=[gamma.copy()],
    )


def segment(series: MatrixSeries, cfg: SegmentationConfig | None = None) -> SegmentationResult:
    """Segment the columns of a matrix series into uncorrelated groups.

    Parameters
    ----------
    series : MatrixSeries
        Raw observed series.
    cfg : SegmentationConfig, optional
        Tuning constants; defaults apply when omitted.

    Returns
    -------
    SegmentationResult
        A single-column series yields the trivial result with one group.
    """
    if cfg is None:
        cfg = SegmentationConfig()
    q = series.q
    if q == 1:
        return _trivial_result(series, cfg)
    u_lag0 = _resolve_u_lag0(series, cfg.threshold)
    if u_lag0 is None:
        standardized, standardizer = standardize(series, NoThreshold(), cfg.eps)
    else:
        # the level is already resolved, so apply it directly instead of
        # re-running any cross-validation inside standardize
        standardized, standardizer = standardize(
            series, FixedThreshold(u=u_lag0, v=0.0), cfg.eps
        )
    u_per_lag = _resolve_u_per_lag(standardized, cfg.threshold, cfg.k0)
    _, gamma = sym_eig(w_stat(standardized, cfg.k0, u_per_lag))
    v_per_lag = _resolve_v_per_lag(standardized, cfg.threshold, cfg.m)
    matrix = pair_score_matrix(standardized, gamma, cfg.m, v_per_lag)
    pairs = [
        (i + 1, j + 1, float(matrix[i, j]))
        for i in range(q)
        for j in range(i + 1, q)
    ]
    pairs.sort(key=lambda t: (-t[2], t[0], t[1]))
    if len(pairs) < 2:
        d_hat = 0
    else:
        d_hat = ratio_select([s for _, _, s in pairs], cfg.c0, cfg.ratio_shift)
    edges = [(i, j) for i, j, _ in pairs[:d_hat]]
    groups = group_columns(edges, q)
    a_hat = [gamma[:, [c - 1 for c in g]] for g in groups]
    return SegmentationResult(
        gamma=gamma,
        standardizer=standardizer,
        transformed=MatrixSeries(standardized.data @ gamma),
        scores=pairs,
        selected_edges=d_hat,
        groups=groups,
        a_hat=a_hat,
        u_lag0=u_lag0,
        u_per_lag=u_per_lag,
        v_per_lag=v_per_lag,
    )
