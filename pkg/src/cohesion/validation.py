"""Input validation helpers shared by the functional API and the estimators."""

import numpy as np
import scipy.sparse


def check_rgb_image(image, min_size=3):
    """Validate and coerce an RGB image to a float64 (H, W, 3) array in [0, 1].

    Accepts float arrays in [0, 1] or 8-bit integer arrays (rescaled by 255).
    Raises ValueError when the shape or value range is unusable.
    """
    arr = np.asarray(image)
    if arr.ndim != 3 or arr.shape[2] != 3:
        raise ValueError(f"expected an (H, W, 3) array, got shape {arr.shape}")
    if arr.shape[0] < min_size or arr.shape[1] < min_size:
        raise ValueError(
            f"image must be at least {min_size}x{min_size}, got "
            f"{arr.shape[0]}x{arr.shape[1]}"
        )
    if np.issubdtype(arr.dtype, np.integer):
        arr = arr.astype(np.float64) / 255.0
    else:
        arr = arr.astype(np.float64, copy=False)
    if not np.isfinite(arr).all():
        raise ValueError("image contains non-finite values")
    if arr.min() < 0.0 or arr.max() > 1.0:
        raise ValueError("channel values must lie in [0, 1]")
    return arr


def check_gray_map(values, min_size=1):
    """Validate a 2-D real-valued map, returning a float64 array."""
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim != 2:
        raise ValueError(f"expected a 2-D map, got shape {arr.shape}")
    if arr.shape[0] < min_size or arr.shape[1] < min_size:
        raise ValueError(f"map smaller than {min_size}x{min_size}")
    if not np.isfinite(arr).all():
        raise ValueError("map contains non-finite values")
    return arr


def check_square_symmetric(matrix, tol=1e-12):
    """Validate a sparse or dense symmetric matrix, returning it as CSR."""
    if scipy.sparse.issparse(matrix):
        mat = matrix.tocsr()
    else:
        arr = np.asarray(matrix, dtype=np.float64)
        if arr.ndim != 2:
            raise ValueError("matrix must be 2-D")
        mat = scipy.sparse.csr_array(arr)
    if mat.shape[0] != mat.shape[1]:
        raise ValueError(f"matrix must be square, got shape {mat.shape}")
    gap = abs(mat - mat.T)
    if gap.nnz and gap.max() > tol:
        raise ValueError(f"matrix is not symmetric within {tol}")
    return mat


def linear_index(row, col, width):
    """Linear pixel index for row-major storage."""
    return row * width + col


def unravel_index(index, width):
    """Inverse of linear_index: returns (row, col)."""
    return index // width, index % width
