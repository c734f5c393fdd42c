"""Eigenvectors rendered as grayscale object maps, with reversal correction.

An eigenvector assigns one soft label per pixel; min-max normalizing it
onto the image grid gives an object map in [0, C]. Because eigenvector
sign is arbitrary, an object can come out dark on a bright surround; the
reversal correction re-expresses the map as distance from the border
intensity so objects are always bright.
"""

import numpy as np

DEFAULT_SCALE = 255.0


def eigenvector_to_map(vector, width, height, scale=DEFAULT_SCALE):
    """Min-max normalize an eigenvector onto the (height, width) pixel grid.

    Pixel (row, col) takes the vector entry at row * width + col, affinely
    mapped so the minimum is 0 and the maximum is `scale`. A constant
    vector carries no region information and maps to all zeros.
    """
    v = np.asarray(vector, dtype=np.float64)
    if v.ndim != 1 or v.size != width * height:
        raise ValueError(f"vector length {v.size} != {width}x{height} pixels")
    if scale <= 0:
        raise ValueError("scale must be positive")
    lo, hi = v.min(), v.max()
    if hi == lo:
        return np.zeros((height, width), dtype=np.float64)
    return ((v - lo) / (hi - lo) * scale).reshape(height, width)


def hull_mean(values):
    """Mean of the single-pixel-wide outermost ring of a map."""
    v = np.asarray(values, dtype=np.float64)
    if v.shape[0] < 2 or v.shape[1] < 2:
        return float(v.mean())
    ring = np.concatenate([v[0, :], v[-1, :], v[1:-1, 0], v[1:-1, -1]])
    return float(ring.mean())


def reverse_correct(values):
    """Replace a map V by |V - eta|, eta being the border-ring mean.

    When the object is dark on a bright surround the border mean sits near
    the top of the range and the correction flips the object bright; an
    already-bright object on a dark border is left essentially unchanged.
    """
    v = np.asarray(values, dtype=np.float64)
    return np.abs(v - hull_mean(v))


def combine_maps(maps):
    """Pointwise mean of several (already reverse-corrected) object maps."""
    if len(maps) == 0:
        raise ValueError("combine_maps requires at least one map")
    first = np.asarray(maps[0], dtype=np.float64)
    total = np.zeros_like(first)
    for m in maps:
        arr = np.asarray(m, dtype=np.float64)
        if arr.shape != first.shape:
            raise ValueError(f"map shape {arr.shape} != {first.shape}")
        total += arr
    return total / len(maps)


def maps_from_eigenpairs(pairs, width, height, scale=DEFAULT_SCALE):
    """Object maps for a sequence of eigenpairs, in given order."""
    return [eigenvector_to_map(p.vector, width, height, scale) for p in pairs]
