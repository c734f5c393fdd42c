"""Saliency maps and salient-object masks from combined object maps.

Combining several eigenvector maps can leave noisy regions: dim, spatially
fragmented leftovers that belong to no object. Abstracting the combined map
into superpixel elements and scoring each element by its intensity contrast
(uniqueness) and the spatial compactness of its intensity (distribution)
suppresses exactly those regions, since noise is low-intensity and
scattered while objects are bright and compact.
"""

import dataclasses
import logging

import numpy as np
import scipy.ndimage

from . import affinity, object_maps, spectral
from .validation import check_gray_map, check_rgb_image

logger = logging.getLogger(__name__)

DEFAULT_SUPERPIXELS = 150
DEFAULT_SIGMA_SPATIAL = 0.25
DEFAULT_SIGMA_INTENSITY = 20.0 / 255.0
DEFAULT_EXPONENT = 6.0

_FOUR_CONN = np.array([[0, 1, 0], [1, 1, 1], [0, 1, 0]], dtype=bool)


@dataclasses.dataclass
class SuperpixelElement:
    """A 4-connected homogeneous element of a grayscale map.

    `centroid` is (row, col) in [0, 1]-normalized coordinates;
    `mean_intensity` is the mean map value over members, normalized to
    [0, 1] by the segmentation's value scale.
    """

    ident: int
    pixels: np.ndarray
    centroid: tuple
    mean_intensity: float


def _grid_seeds(h, w, n):
    step = np.sqrt(h * w / n)
    n_rows = max(1, int(round(h / step)))
    n_cols = max(1, int(round(w / step)))
    # Pixel-center convention avoids equidistant ties on integer grids.
    rows = (np.arange(n_rows) + 0.5) * h / n_rows - 0.5
    cols = (np.arange(n_cols) + 0.5) * w / n_cols - 0.5
    rr, cc = np.meshgrid(rows, cols, indexing="ij")
    return np.stack([rr.ravel(), cc.ravel()], axis=1), step


def _connected_elements(labels, min_size):
    """Split labels into 4-connected components and merge small fragments.

    Components below min_size are absorbed, smallest first, into the
    neighboring component they share the longest border with; final
    elements therefore stay 4-connected and partition the grid.
    """
    h, w = labels.shape
    comp = np.full((h, w), -1, dtype=np.int64)
    n_comp = 0
    for lab in np.unique(labels):
        mask = labels == lab
        sub, k = scipy.ndimage.label(mask, structure=_FOUR_CONN)
        comp[mask] = sub[mask] - 1 + n_comp
        n_comp += k

    sizes = np.bincount(comp.ravel(), minlength=n_comp).astype(np.int64)

    # Border lengths between adjacent components, from pixel pairs.
    border = {}
    for a, b in (
        (comp[:, :-1].ravel(), comp[:, 1:].ravel()),
        (comp[:-1, :].ravel(), comp[1:, :].ravel()),
    ):
        diff = a != b
        for x, y in zip(a[diff], b[diff]):
            key = (int(min(x, y)), int(max(x, y)))
            border[key] = border.get(key, 0) + 1
    neighbors = [dict() for _ in range(n_comp)]
    for (x, y), length in border.items():
        neighbors[x][y] = length
        neighbors[y][x] = length

    # Union-find: absorb small components, smallest first.
    parent = np.arange(n_comp)

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for c in sorted(range(n_comp), key=lambda i: sizes[i]):
        root = find(c)
        if sizes[root] >= min_size or not neighbors[root]:
            continue
        target = max(neighbors[root].items(), key=lambda kv: (kv[1], -kv[0]))[0]
        t_root = find(target)
        if t_root == root:
            continue
        parent[root] = t_root
        sizes[t_root] += sizes[root]
        merged = neighbors[root]
        neighbors[root] = {}
        for nb, length in merged.items():
            nb_root = find(nb)
            if nb_root == t_root:
                continue
            neighbors[t_root][nb] = neighbors[t_root].get(nb, 0) + length
            neighbors[nb].pop(c, None)
            neighbors[nb][t_root] = neighbors[nb].get(t_root, 0) + length

    roots = np.array([find(c) for c in range(n_comp)])
    remap = {r: i for i, r in enumerate(dict.fromkeys(roots[comp.ravel()]))}
    final = np.array([remap[r] for r in roots])
    return final[comp]


def segment_superpixels(values, n_elements=DEFAULT_SUPERPIXELS, value_scale=255.0,
                        compactness=0.1, n_iter=10):
    """Grid-seeded local clustering of a map into superpixel elements.

    Runs k-means-style iterations in (intensity, row, col) feature space,
    with each pixel competing only among nearby seeds, then enforces
    4-connectivity by merging small fragments into adjacent elements.
    `compactness` is the intensity difference (on the [0, 1] scale) whose
    cost matches one seed-spacing of spatial distance.
    """
    map2d = check_gray_map(values)
    h, w = map2d.shape
    if h * w < n_elements:
        raise ValueError(f"map has {h * w} pixels, fewer than {n_elements} elements")
    # Slight smoothing of the clustering feature keeps per-pixel noise from
    # shattering assignments; elements still report unsmoothed intensities.
    intensity = scipy.ndimage.gaussian_filter(map2d / value_scale, 1.0)
    raw_intensity = map2d / value_scale

    seeds, step = _grid_seeds(h, w, n_elements)
    k = len(seeds)
    cr = seeds[:, 0].copy()
    cc = seeds[:, 1].copy()
    ci = intensity[
        np.clip(cr.astype(int), 0, h - 1), np.clip(cc.astype(int), 0, w - 1)
    ].copy()

    rows = np.arange(h)[:, None] * np.ones((1, w))
    cols = np.ones((h, 1)) * np.arange(w)[None, :]
    reach = int(np.ceil(2 * step))

    labels = np.zeros((h, w), dtype=np.int64)
    for _ in range(n_iter):
        best = np.full((h, w), np.inf)
        labels.fill(0)
        for j in range(k):
            r0, r1 = max(0, int(cr[j]) - reach), min(h, int(cr[j]) + reach + 1)
            c0, c1 = max(0, int(cc[j]) - reach), min(w, int(cc[j]) + reach + 1)
            if r0 >= r1 or c0 >= c1:
                continue
            di = (intensity[r0:r1, c0:c1] - ci[j]) / compactness
            dr = (rows[r0:r1, c0:c1] - cr[j]) / step
            dc = (cols[r0:r1, c0:c1] - cc[j]) / step
            dist = di * di + dr * dr + dc * dc
            better = dist < best[r0:r1, c0:c1]
            best[r0:r1, c0:c1][better] = dist[better]
            labels[r0:r1, c0:c1][better] = j
        for j in range(k):
            mask = labels == j
            if mask.any():
                ci[j] = intensity[mask].mean()
                cr[j] = rows[mask].mean()
                cc[j] = cols[mask].mean()

    min_size = max(1, (h * w / n_elements) / 4.0)
    final = _connected_elements(labels, min_size)

    elements = []
    flat_final = final.ravel()
    order = np.arange(flat_final.size)
    for ident in range(final.max() + 1):
        members = order[flat_final == ident]
        if members.size == 0:
            continue
        mr = (members // w).mean() / max(h - 1, 1)
        mc = (members % w).mean() / max(w - 1, 1)
        elements.append(
            SuperpixelElement(
                ident=ident,
                pixels=members,
                centroid=(float(mr), float(mc)),
                mean_intensity=float(raw_intensity.ravel()[members].mean()),
            )
        )
    logger.debug("segment_superpixels: %d elements for target %d", len(elements), n_elements)
    return elements


def _gaussian_weights(distance_sq, sigma):
    if np.isinf(sigma):
        weights = np.ones_like(distance_sq)
    else:
        weights = np.exp(-distance_sq / (2.0 * sigma * sigma))
    norm = weights.sum(axis=1, keepdims=True)
    return weights / norm


def element_uniqueness(elements, sigma_spatial=DEFAULT_SIGMA_SPATIAL):
    """Intensity contrast of each element against spatially nearby elements.

    U_i = sum_j (c_i - c_j)^2 w(i, j) with w a per-row normalized Gaussian
    in centroid distance. sigma_spatial = inf degenerates to uniform
    weights over all elements.
    """
    if not elements:
        raise ValueError("element_uniqueness requires at least one element")
    c = np.array([e.mean_intensity for e in elements])
    x = np.array([e.centroid for e in elements])
    d2 = ((x[:, None, :] - x[None, :, :]) ** 2).sum(axis=2)
    w = _gaussian_weights(d2, sigma_spatial)
    return (w * (c[:, None] - c[None, :]) ** 2).sum(axis=1)


def element_distribution(elements, sigma_intensity=DEFAULT_SIGMA_INTENSITY):
    """Spatial spread of each element's intensity across the map.

    Weights w(i, j) form a per-row normalized Gaussian in intensity
    difference; D_i is the weighted variance of the centroids around their
    weighted mean. Low values mean the intensity occurs in one compact
    place.
    """
    if not elements:
        raise ValueError("element_distribution requires at least one element")
    c = np.array([e.mean_intensity for e in elements])
    x = np.array([e.centroid for e in elements])
    w = _gaussian_weights((c[:, None] - c[None, :]) ** 2, sigma_intensity)
    mu = w @ x
    spread = ((x[None, :, :] - mu[:, None, :]) ** 2).sum(axis=2)
    return (w * spread).sum(axis=1)


def rescale_unit(values, degenerate_fill):
    """Affine rescale to [0, 1]; constant input collapses to the fill value."""
    v = np.asarray(values, dtype=np.float64)
    lo, hi = v.min(), v.max()
    if hi - lo <= 1e-12:
        return np.full_like(v, degenerate_fill)
    return (v - lo) / (hi - lo)


def combine_scores(uniqueness, distribution, exponent=DEFAULT_EXPONENT):
    """S = U_hat * exp(-k * D_hat) with both measures rescaled to [0, 1].

    Degenerate rescales: all-equal uniqueness collapses to 0 when it is
    identically zero (nothing stands out) and to 1 otherwise; all-equal
    distribution collapses to 1 (no compactness information, full penalty).
    """
    u = np.asarray(uniqueness, dtype=np.float64)
    u_fill = 0.0 if u.max() <= 1e-12 else 1.0
    u_hat = rescale_unit(u, u_fill)
    d_hat = rescale_unit(distribution, 1.0)
    return u_hat * np.exp(-exponent * d_hat)


def assign_saliency(elements, uniqueness, distribution, exponent=DEFAULT_EXPONENT,
                    shape=None):
    """Per-pixel saliency map in [0, 1] from per-element scores."""
    if shape is None:
        raise ValueError("assign_saliency needs the output map shape")
    scores = combine_scores(uniqueness, distribution, exponent)
    flat = np.zeros(shape[0] * shape[1], dtype=np.float64)
    for el, s in zip(elements, scores):
        flat[el.pixels] = s
    out = flat.reshape(shape)
    lo, hi = out.min(), out.max()
    if hi - lo > 1e-12:
        out = (out - lo) / (hi - lo)
    return out


def otsu_threshold(values, bins=256):
    """Threshold maximizing between-class variance of the value histogram.

    Returns the upper edge of the chosen bin, so `values > t` excludes the
    whole lower class.
    """
    v = np.asarray(values, dtype=np.float64).ravel()
    hist, edges = np.histogram(v, bins=bins)
    centers = (edges[:-1] + edges[1:]) / 2.0
    weight = np.cumsum(hist)
    mass = np.cumsum(hist * centers)
    total, total_mass = weight[-1], mass[-1]
    best_t, best_var = edges[1], -1.0
    for i in range(bins - 1):
        w0 = weight[i]
        if w0 == 0 or w0 == total:
            continue
        m0 = mass[i] / w0
        m1 = (total_mass - mass[i]) / (total - w0)
        var = w0 * (total - w0) * (m0 - m1) ** 2
        if var > best_var:
            best_var, best_t = var, edges[i + 1]
    return float(best_t)


def threshold_map(values, threshold, morphology=False):
    """Binary mask of values strictly above the threshold.

    With `morphology` set, a 3x3 opening removes isolated specks and thin
    protrusions from the mask.
    """
    mask = np.asarray(values) > threshold
    if morphology:
        mask = scipy.ndimage.binary_opening(mask, structure=np.ones((3, 3), dtype=bool))
    return mask


@dataclasses.dataclass
class SaliencyResult:
    saliency_map: np.ndarray
    mask: np.ndarray
    eigenpairs: list
    threshold: float
    elements: list


def detect_salient(image, n_eigenvectors=2, eliminate_noise=True,
                   tau=affinity.DEFAULT_TAU, n_superpixels=DEFAULT_SUPERPIXELS,
                   sigma_spatial=DEFAULT_SIGMA_SPATIAL,
                   sigma_intensity=DEFAULT_SIGMA_INTENSITY,
                   exponent=DEFAULT_EXPONENT, threshold=None, morphology=False,
                   tol=spectral.DEFAULT_TOL, max_iter=spectral.DEFAULT_MAX_ITER, seed=42):
    """Full salient-object pipeline on one image.

    Builds the normalized affinity, extracts the leading object eigenpairs,
    renders and reversal-corrects their maps, averages them, optionally
    runs superpixel noise elimination, and thresholds (Otsu unless a fixed
    threshold is given). Returns a SaliencyResult with the [0, 1] saliency
    map and the binary mask.
    """
    img = check_rgb_image(image)
    h, w = img.shape[:2]
    mat = affinity.build_affinity(img, tau=tau)
    pairs = spectral.object_eigenpairs(
        mat, n_eigenvectors, h, w, tol=tol, max_iter=max_iter, seed=seed
    )
    corrected = [
        object_maps.reverse_correct(object_maps.eigenvector_to_map(p.vector, w, h))
        for p in pairs
    ]
    combined = object_maps.combine_maps(corrected)

    elements = []
    if eliminate_noise:
        elements = segment_superpixels(combined, n_superpixels, value_scale=object_maps.DEFAULT_SCALE)
        uniq = element_uniqueness(elements, sigma_spatial)
        dist = element_distribution(elements, sigma_intensity)
        smap = assign_saliency(elements, uniq, dist, exponent, shape=(h, w))
    else:
        smap = rescale_unit(combined, 0.0)

    t = otsu_threshold(smap) if threshold is None else float(threshold)
    mask = threshold_map(smap, t, morphology=morphology)
    return SaliencyResult(saliency_map=smap, mask=mask, eigenpairs=pairs,
                          threshold=t, elements=elements)
