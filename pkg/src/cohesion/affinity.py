"""Window statistics and sparse affinity matrices robust to color distortion.

Pixels of one real-world color spread along elongated ellipses in RGB space
when lighting or shadows vary. Measuring similarity with the inverse of the
local 3x3-window covariance (regularized by tau) down-weights exactly the
directions of that spread, so two pixels that differ only along the local
color line still count as similar. Accumulating ``1 + similarity`` over all
windows containing a pixel pair, then normalizing symmetrically by row sums,
yields a sparse symmetric affinity matrix whose leading eigenvectors carve
out cohesive object regions.

All matrices are scipy CSR arrays of shape (N, N) with N = number of
pixels. Nonzeros only connect pixel pairs within Chebyshev distance
window_size - 1 of each other, so each row holds at most (2 * window_size
- 1)**2 entries (25 for the default 3x3 windows).
"""

import dataclasses
import logging

import numpy as np
import scipy.sparse

from .validation import check_rgb_image

logger = logging.getLogger(__name__)

DEFAULT_TAU = 1e-5


@dataclasses.dataclass
class WindowStats:
    """Statistics of a single fully interior square window.

    `regularized_inverse` is (covariance + tau * I)^-1.
    """

    window_index: int
    mean: np.ndarray
    covariance: np.ndarray
    regularized_inverse: np.ndarray
    tau: float


class WindowStatsCollection:
    """Per-window means, covariances, and regularized inverses, as arrays.

    Window k is centered at pixel with linear index `indices[k]`; only
    windows fully inside the image are kept, so every window has exactly
    window_size**2 member pixels.
    """

    def __init__(self, indices, member_indices, means, covariances, tau, window_size):
        self.indices = indices
        self.member_indices = member_indices
        self.means = means
        self.covariances = covariances
        self.tau = float(tau)
        self.window_size = int(window_size)
        self.inverses = regularized_inverses(covariances, tau)

    def __len__(self):
        return len(self.indices)

    def __getitem__(self, i):
        return WindowStats(
            window_index=int(self.indices[i]),
            mean=self.means[i],
            covariance=self.covariances[i],
            regularized_inverse=self.inverses[i],
            tau=self.tau,
        )

    def stat_at(self, center_index):
        """WindowStats of the window centered at the given linear index."""
        pos = np.nonzero(self.indices == center_index)[0]
        if len(pos) == 0:
            raise KeyError(f"no interior window centered at {center_index}")
        return self[int(pos[0])]


def regularized_inverses(covariances, tau):
    """Batched (Sigma + tau * I)^-1 for stacked 3x3 covariance matrices."""
    if tau <= 0:
        raise ValueError("tau must be positive")
    eye = np.eye(3)
    return np.linalg.inv(covariances + tau * eye)


def compute_window_stats(image, tau=DEFAULT_TAU, window_size=3):
    """Mean, covariance, and regularized inverse for every interior window.

    The covariance is the biased estimator (division by the window pixel
    count). Windows touching the border are skipped so that every window
    has the full window_size**2 members.
    """
    img = check_rgb_image(image, min_size=window_size)
    if window_size % 2 != 1 or window_size < 3:
        raise ValueError("window_size must be an odd integer >= 3")
    h, w = img.shape[:2]
    r = window_size // 2
    m = window_size * window_size

    # (H-2r, W-2r, ws, ws, 3) view of all interior windows.
    windows = np.lib.stride_tricks.sliding_window_view(img, (window_size, window_size), axis=(0, 1))
    windows = windows.transpose(0, 1, 3, 4, 2)
    n_rows, n_cols = windows.shape[:2]
    pix = windows.reshape(n_rows * n_cols, m, 3)

    means = pix.mean(axis=1)
    centered = pix - means[:, None, :]
    covs = np.einsum("wic,wid->wcd", centered, centered) / m
    covs = 0.5 * (covs + covs.transpose(0, 2, 1))

    center_rows = np.arange(r, h - r)
    center_cols = np.arange(r, w - r)
    centers = (center_rows[:, None] * w + center_cols[None, :]).ravel()

    lin = np.arange(h * w).reshape(h, w)
    member_view = np.lib.stride_tricks.sliding_window_view(lin, (window_size, window_size))
    members = member_view.reshape(n_rows * n_cols, m)

    return WindowStatsCollection(centers, members, means, covs, tau, window_size)


def affinity_term(stats, p_i, p_j):
    """Covariance-weighted inner product of two pixels against one window.

    Returns (p_i - mu)^T (Sigma + tau I)^-1 (p_j - mu); symmetric in its
    pixel arguments, positive when both pixels deviate from the window mean
    on the same side of the local color line.
    """
    di = np.asarray(p_i, dtype=np.float64) - stats.mean
    dj = np.asarray(p_j, dtype=np.float64) - stats.mean
    return float(di @ stats.regularized_inverse @ dj)


def affinity_term_eigenbasis(stats, p_i, p_j):
    """Same value as affinity_term, via the covariance eigendecomposition.

    Projects both deviations onto the covariance eigenvectors and takes the
    inner product weighted by 1 / (eigenvalue + tau). Used as an independent
    formulation check; the weights are strictly positive.
    """
    phis, basis = np.linalg.eigh(stats.covariance)
    qi = basis.T @ (np.asarray(p_i, dtype=np.float64) - stats.mean)
    qj = basis.T @ (np.asarray(p_j, dtype=np.float64) - stats.mean)
    weights = 1.0 / (phis + stats.tau)
    return float(np.sum(weights * qi * qj))


def _window_deviation_blocks(image, stats, inverses):
    """Per-window (m, m) blocks of deviation inner products d_i^T M d_j."""
    img = np.asarray(image, dtype=np.float64)
    flat = img.reshape(-1, 3)
    pix = flat[stats.member_indices]  # (n_win, m, 3)
    centered = pix - stats.means[:, None, :]
    blocks = np.einsum("wic,wcd,wjd->wij", centered, inverses, centered, optimize=True)
    # Exact symmetry, independent of einsum summation order.
    return 0.5 * (blocks + blocks.transpose(0, 2, 1))


def _accumulate(stats, values, n):
    m = stats.member_indices.shape[1]
    rows = np.repeat(stats.member_indices, m, axis=1).ravel()
    cols = np.tile(stats.member_indices, (1, m)).ravel()
    mat = scipy.sparse.coo_array((values.ravel(), (rows, cols)), shape=(n, n))
    out = mat.tocsr()
    out.sum_duplicates()
    return out


def build_raw_affinity(image, stats):
    """Accumulate 1 + deviation inner product over all shared windows.

    Entry (i, j) sums ``1 + (p_i - mu_k)^T (Sigma_k + tau I)^-1 (p_j -
    mu_k)`` over every window k containing both pixels, including i = j.
    Pairs sharing no window are structurally absent.
    """
    img = check_rgb_image(image, min_size=stats.window_size)
    n = img.shape[0] * img.shape[1]
    blocks = _window_deviation_blocks(img, stats, stats.inverses) + 1.0
    return _accumulate(stats, blocks, n)


def normalize_affinity(raw, clamp=1e-10):
    """Symmetric row-sum normalization A_ij = W_ij / sqrt(D_ii * D_jj).

    Degenerate rows with nonpositive sums are clamped at `clamp` before the
    square root; their count is logged as a diagnostic.
    """
    mat = raw.tocsr()
    d = np.asarray(mat.sum(axis=1)).ravel()
    bad = count_nonpositive_rows(mat)
    if bad:
        logger.warning("normalize_affinity: %d rows with nonpositive sums clamped", bad)
    else:
        logger.debug("normalize_affinity: 0 rows clamped")
    scale = 1.0 / np.sqrt(np.maximum(d, clamp))
    out = mat.multiply(scale[:, None]).multiply(scale[None, :]).tocsr()
    out.sum_duplicates()
    return out


def count_nonpositive_rows(matrix):
    """Number of rows whose sum is <= 0 (normalization diagnostic)."""
    d = np.asarray(matrix.sum(axis=1)).ravel()
    return int(np.count_nonzero(d <= 0.0))


def build_affinity(image, tau=DEFAULT_TAU, window_size=3):
    """Full chain: window stats, raw accumulation, symmetric normalization."""
    stats = compute_window_stats(image, tau=tau, window_size=window_size)
    return normalize_affinity(build_raw_affinity(image, stats))


def matting_laplacian(image, stats):
    """Closed-form matting Laplacian over the same window structure.

    Entry (i, j) accumulates ``delta_ij - (1 + (p_i - mu_k)^T (Sigma_k +
    (tau / m) I)^-1 (p_j - mu_k)) / m`` over shared windows, where m is the
    window pixel count. Every row sums to zero. Note the regularizer is
    tau / m, not the bare tau used by build_raw_affinity; matched-regularizer
    comparisons must account for the factor.
    """
    img = check_rgb_image(image, min_size=stats.window_size)
    n = img.shape[0] * img.shape[1]
    m = stats.window_size ** 2
    inverses = regularized_inverses(stats.covariances, stats.tau / m)
    blocks = _window_deviation_blocks(img, stats, inverses)
    vals = np.eye(m)[None, :, :] - (1.0 + blocks) / m
    return _accumulate(stats, vals, n)


def affinity_visualization(image, tau=DEFAULT_TAU):
    """Record each window's corner-to-corner affinity on a signed map.

    For the window centered at (x, y), the value of affinity_term between
    the pixels at (x-1, y-1) and (x+1, y+1) is written at (x-1, y-1).
    Cells never written stay zero. Within a region whose intensity varies
    but whose color stays on one color line the recorded values are
    positive; across a boundary between two real-world colors they are
    mostly negative.
    """
    img = check_rgb_image(image)
    h, w = img.shape[:2]
    stats = compute_window_stats(img, tau=tau, window_size=3)
    flat = img.reshape(-1, 3)
    # Corner members of each 3x3 window: positions 0 and 8 in row-major order.
    tl = flat[stats.member_indices[:, 0]] - stats.means
    br = flat[stats.member_indices[:, 8]] - stats.means
    vals = np.einsum("wc,wcd,wd->w", tl, stats.inverses, br)
    out = np.zeros((h, w), dtype=np.float64)
    out[: h - 2, : w - 2] = vals.reshape(h - 2, w - 2)
    return out
