"""Dense float64 arrays used as the carrier for every kernel."""

import numpy as np

from crowdsafe.errors import DomainError, ShapeError

Tensor = np.ndarray


def as_tensor(x, name="input", ndim=None):
    """Convert ``x`` to a float64 array, rejecting NaN/Inf and empty extents."""
    arr = np.asarray(x, dtype=np.float64)
    if ndim is not None and arr.ndim != ndim:
        raise ShapeError(f"{name} must be {ndim}-d, got shape {arr.shape}")
    if any(s == 0 for s in arr.shape):
        raise ShapeError(f"{name} has an empty extent: {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise DomainError(f"{name} contains non-finite values")
    return arr


def as_matrix(x, name="input"):
    """Like :func:`as_tensor` but promotes vectors to a single row."""
    arr = as_tensor(x, name)
    if arr.ndim == 1:
        arr = arr[None, :]
    if arr.ndim != 2:
        raise ShapeError(f"{name} must be a matrix, got shape {arr.shape}")
    return arr
