"""Mode unfoldings and sequential segmentation for tensor-valued series."""

from __future__ import annotations

import numpy as np

from .errors import InvalidInput
from .segmentation import SegmentationConfig, SegmentationResult, segment
from .series import MatrixSeries, TensorSeries


def _check_mode(mode: int, order: int) -> int:
    mode = int(mode)
    if not 1 <= mode <= order:
        raise InvalidInput(f"mode must lie in 1..{order}, got {mode}")
    return mode


def matricize(tensor, mode: int) -> np.ndarray:
    """Mode-m unfolding of a tensor.

    Mode-m fibers become columns; the remaining indices run over the
    columns with the lowest-numbered mode varying fastest.

    Parameters
    ----------
    tensor : array_like, shape (p1, ..., pr)
        Input tensor, r >= 2.
    mode : int
        Mode to unfold, 1-based.

    Returns
    -------
    ndarray, shape (p_mode, prod of the other dims)
    """
    arr = np.asarray(tensor, dtype=float)
    if arr.ndim < 2:
        raise InvalidInput(f"tensor must have order >= 2, got shape {arr.shape}")
    mode = _check_mode(mode, arr.ndim)
    return np.moveaxis(arr, mode - 1, 0).reshape(arr.shape[mode - 1], -1, order="F")


def tensorize(matrix, mode: int, dims) -> np.ndarray:
    """Inverse of :func:`matricize` for the given mode and tensor dimensions."""
    arr = np.asarray(matrix, dtype=float)
    dims = tuple(int(d) for d in dims)
    if len(dims) < 2 or any(d < 1 for d in dims):
        raise InvalidInput(f"dims must list at least two positive sizes, got {dims}")
    mode = _check_mode(mode, len(dims))
    rest = dims[: mode - 1] + dims[mode:]
    expected = (dims[mode - 1], int(np.prod(rest)))
    if arr.ndim != 2 or arr.shape != expected:
        raise InvalidInput(
            f"matrix shape {arr.shape} does not match mode-{mode} unfolding {expected}"
        )
    folded = arr.reshape((dims[mode - 1],) + rest, order="F")
    return np.moveaxis(folded, 0, mode - 1)


def _unfold_series(data: np.ndarray, mode: int) -> np.ndarray:
    """Unfold every tensor in an (n, p1, ..., pr) array at the given mode."""
    n = data.shape[0]
    order = data.ndim - 1
    moved = np.moveaxis(data, mode, 1)
    # reversing the trailing axes before a C-order reshape flattens them in
    # Fortran order, i.e. lowest-numbered remaining mode fastest
    rest = list(range(2, order + 1))
    arranged = moved.transpose(0, 1, *rest[::-1])
    return arranged.reshape(n, data.shape[mode], -1)


def _fold_series(mat: np.ndarray, mode: int, dims: tuple[int, ...]) -> np.ndarray:
    """Inverse of :func:`_unfold_series`."""
    n = mat.shape[0]
    order = len(dims)
    rest = dims[: mode - 1] + dims[mode:]
    arranged = mat.reshape((n, dims[mode - 1]) + rest[::-1])
    moved = arranged.transpose(0, 1, *range(order, 1, -1))
    return np.moveaxis(moved, 1, mode)


def sequential_segment(
    series: TensorSeries, cfg: SegmentationConfig | None = None
) -> tuple[list[SegmentationResult], TensorSeries]:
    """Segment every mode of a tensor series, one mode at a time.

    Each sweep unfolds the current series at mode m, transposes so the
    mode-m indices are the columns, runs the matrix segmentation, and folds
    the transformed series back before moving to the next mode.  A mode of
    dimension 1 yields the trivial single-column result.

    Parameters
    ----------
    series : TensorSeries
        Raw observed series of order r >= 2 tensors.
    cfg : SegmentationConfig, optional

    Returns
    -------
    results : list of SegmentationResult
        One result per mode, in mode order.
    transformed : TensorSeries
        The series after all r mode transformations.
    """
    if cfg is None:
        cfg = SegmentationConfig()
    data = series.data
    dims = series.dims
    results: list[SegmentationResult] = []
    for mode in range(1, series.order + 1):
        unfolded = _unfold_series(data, mode)
        mseries = MatrixSeries(np.swapaxes(unfolded, 1, 2))
        result = segment(mseries, cfg)
        results.append(result)
        back = np.swapaxes(result.transformed.data, 1, 2)
        data = _fold_series(back, mode, dims)
    return results, TensorSeries(data)
