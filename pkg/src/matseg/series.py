"""Container types for observed matrix- and tensor-valued series."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidInput


def _as_float_array(data, name: str) -> np.ndarray:
    arr = np.asarray(data, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise InvalidInput(f"{name} contains non-finite entries")
    return arr


@dataclass(frozen=True)
class MatrixSeries:
    """A length-n series of p x q matrices, stored as an (n, p, q) array.

    Rows index the p observation rows of each matrix, columns the q
    variables that segmentation may group.
    """

    data: np.ndarray = field(repr=False)

    def __post_init__(self):
        arr = _as_float_array(self.data, "series data")
        if arr.ndim != 3:
            raise InvalidInput(f"series data must be 3-dimensional, got shape {arr.shape}")
        n, p, q = arr.shape
        if n < 2:
            raise InvalidInput(f"series length must be at least 2, got {n}")
        if p < 1 or q < 1:
            raise InvalidInput(f"matrix dimensions must be positive, got {p} x {q}")
        object.__setattr__(self, "data", arr)

    @property
    def n(self) -> int:
        return self.data.shape[0]

    @property
    def p(self) -> int:
        return self.data.shape[1]

    @property
    def q(self) -> int:
        return self.data.shape[2]


@dataclass(frozen=True)
class TensorSeries:
    """A length-n series of order-r tensors, stored as an (n, p1, ..., pr) array."""

    data: np.ndarray = field(repr=False)

    def __post_init__(self):
        arr = _as_float_array(self.data, "series data")
        if arr.ndim < 3:
            raise InvalidInput(
                f"tensor series data must have at least 3 axes, got shape {arr.shape}"
            )
        if arr.shape[0] < 2:
            raise InvalidInput(f"series length must be at least 2, got {arr.shape[0]}")
        if any(d < 1 for d in arr.shape[1:]):
            raise InvalidInput(f"tensor dimensions must be positive, got {arr.shape[1:]}")
        object.__setattr__(self, "data", arr)

    @property
    def n(self) -> int:
        return self.data.shape[0]

    @property
    def order(self) -> int:
        return self.data.ndim - 1

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(self.data.shape[1:])
