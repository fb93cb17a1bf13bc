"""Deterministic symmetric eigen-decompositions and subspace comparison."""

from __future__ import annotations

import numpy as np

from .errors import DegenerateCovariance, InvalidInput, NumericalFailure

RANK_RTOL = 1e-10


def _validate_square(S, name: str = "matrix") -> np.ndarray:
    arr = np.asarray(S, dtype=float)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise InvalidInput(f"{name} must be square, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InvalidInput(f"{name} contains non-finite entries")
    return arr


def _fix_signs(vectors: np.ndarray) -> np.ndarray:
    """Flip each column so its largest-magnitude entry is positive.

    Magnitude ties resolve to the lowest row index.
    """
    out = vectors.copy()
    for k in range(out.shape[1]):
        idx = int(np.argmax(np.abs(out[:, k])))
        if out[idx, k] < 0:
            out[:, k] = -out[:, k]
    return out


def sym_eig(S) -> tuple[np.ndarray, np.ndarray]:
    """Eigen-decomposition of a symmetric matrix with a fixed output convention.

    The input is symmetrized as (S + S.T) / 2 before factorization.
    Eigenvalues are returned in descending order.  Each eigenvector is
    flipped so that its largest-magnitude entry is positive, and runs of
    exactly equal eigenvalues are ordered by descending lexicographic
    comparison of the sign-fixed eigenvectors, so the output is
    deterministic for identical input bytes.

    Parameters
    ----------
    S : array_like, shape (q, q)
        Symmetric matrix.

    Returns
    -------
    values : ndarray, shape (q,)
        Eigenvalues, descending.
    vectors : ndarray, shape (q, q)
        Orthonormal eigenvectors as columns, aligned with ``values``.
    """
    arr = _validate_square(S)
    sym = 0.5 * (arr + arr.T)
    try:
        vals, vecs = np.linalg.eigh(sym)
    except np.linalg.LinAlgError as exc:
        raise NumericalFailure(f"eigen-decomposition failed: {exc}") from exc
    order = np.argsort(-vals, kind="stable")
    vals = vals[order]
    vecs = _fix_signs(vecs[:, order])

    # Reorder within runs of exactly equal eigenvalues for a canonical output.
    start = 0
    q = vals.shape[0]
    while start < q:
        stop = start + 1
        while stop < q and vals[stop] == vals[start]:
            stop += 1
        if stop - start > 1:
            cols = sorted(range(start, stop), key=lambda c: tuple(-vecs[:, c]))
            vecs[:, start:stop] = vecs[:, cols]
        start = stop
    return vals, vecs


def inv_sqrt_psd(S, eps: float = 1e-10) -> np.ndarray:
    """Inverse square root of a positive semi-definite symmetric matrix.

    Eigenvalues below ``eps`` times the largest eigenvalue are clamped to
    that floor before inversion, so near-null directions are damped rather
    than amplified without bound.

    Parameters
    ----------
    S : array_like, shape (q, q)
        Symmetric positive semi-definite matrix.
    eps : float
        Relative eigenvalue floor.

    Returns
    -------
    ndarray, shape (q, q)
        Symmetric matrix M with M @ S @ M close to the identity on the
        unclamped eigenspace.
    """
    if not 0 < eps < 1:
        raise InvalidInput(f"eps must be in (0, 1), got {eps}")
    vals, vecs = sym_eig(S)
    lam_max = vals[0]
    if lam_max <= 0:
        raise DegenerateCovariance("matrix has no positive eigenvalue")
    clamped = np.maximum(vals, eps * lam_max)
    out = (vecs * (1.0 / np.sqrt(clamped))) @ vecs.T
    return 0.5 * (out + out.T)


def orthonormal_basis(H, name: str = "basis") -> np.ndarray:
    """Orthonormal basis of the column span of a full-column-rank matrix."""
    arr = np.asarray(H, dtype=float)
    if arr.ndim != 2:
        raise InvalidInput(f"{name} must be 2-dimensional, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InvalidInput(f"{name} contains non-finite entries")
    d, r = arr.shape
    if r < 1 or d < r:
        raise InvalidInput(f"{name} must have shape (d, r) with 1 <= r <= d, got {arr.shape}")
    u, s, _ = np.linalg.svd(arr, full_matrices=False)
    if s[-1] <= RANK_RTOL * s[0] or s[0] == 0.0:
        raise InvalidInput(f"{name} is rank deficient")
    return u


def subspace_distance(H1, H2) -> float:
    """Distance between the column spans of two full-column-rank matrices.

    Computed as sqrt(1 - tr(P1 @ P2) / min(r1, r2)) where P_i is the
    orthogonal projector onto the span of H_i.  The value is 0 exactly when
    one span contains the other and 1 exactly when the spans are orthogonal.

    Parameters
    ----------
    H1, H2 : array_like, shape (d, r1) and (d, r2)
        Matrices with full column rank sharing the ambient dimension d.

    Returns
    -------
    float
        Distance in [0, 1].
    """
    q1 = orthonormal_basis(H1, "H1")
    q2 = orthonormal_basis(H2, "H2")
    if q1.shape[0] != q2.shape[0]:
        raise InvalidInput(
            f"bases live in different ambient dimensions: {q1.shape[0]} vs {q2.shape[0]}"
        )
    overlap = float(np.sum((q1.T @ q2) ** 2))
    rmin = min(q1.shape[1], q2.shape[1])
    radicand = 1.0 - overlap / rmin
    if radicand < 0.0:
        # Round-off can push tr(P1 P2) marginally past its bound.
        radicand = 0.0
    return float(np.sqrt(radicand))
