"""Class-independent object proposals from object-map edge contours.

Edges of an object map trace the significant region boundaries of the
image; circumscribed rectangles of the connected, closed edge curves are
the candidate boxes. Candidates from many eigenvector maps are pooled,
scored by a truncated objectness measure (the bright/compact element
scoring with boxes playing the role of elements), stripped of zero scores,
and deduplicated.
"""

import dataclasses
import itertools
import logging

import numpy as np
import scipy.ndimage

from . import affinity, object_maps, saliency, spectral
from .boxes import BoundingBox, iou
from .validation import check_gray_map, check_rgb_image

logger = logging.getLogger(__name__)

DEFAULT_CANNY_LOW = 0.1 * 255.0
DEFAULT_CANNY_HIGH = 0.2 * 255.0
DEFAULT_DEDUP_IOU = 0.95
MIN_BOX_SIDE = 4
SCORE_TRUNCATION = 1e-6

_EIGHT_CONN = np.ones((3, 3), dtype=bool)


def _gaussian_kernel(size=5, sigma=1.4):
    half = size // 2
    ax = np.arange(-half, half + 1, dtype=np.float64)
    g = np.exp(-(ax ** 2) / (2.0 * sigma ** 2))
    kernel = np.outer(g, g)
    return kernel / kernel.sum()


def canny_edges(values, low=DEFAULT_CANNY_LOW, high=DEFAULT_CANNY_HIGH):
    """Classic Canny chain on a grayscale map; returns a boolean edge set.

    5x5 Gaussian smoothing (sigma 1.4), Sobel gradients, non-maximum
    suppression along the quantized gradient direction, then double
    thresholding with hysteresis: weak pixels survive only when 8-connected
    to a strong pixel.
    """
    map2d = check_gray_map(values)
    if not (0 <= low < high):
        raise ValueError("thresholds must satisfy 0 <= low < high")
    smooth = scipy.ndimage.convolve(map2d, _gaussian_kernel(), mode="nearest")
    kx = np.array([[-1, 0, 1], [-2, 0, 2], [-1, 0, 1]], dtype=np.float64)
    gx = scipy.ndimage.convolve(smooth, kx, mode="nearest")
    gy = scipy.ndimage.convolve(smooth, kx.T, mode="nearest")
    mag = np.hypot(gx, gy)

    angle = np.rad2deg(np.arctan2(gy, gx)) % 180.0
    sector = ((angle + 22.5) // 45).astype(int) % 4  # 0:E-W 1:NE-SW 2:N-S 3:NW-SE
    offsets = {0: (0, 1), 1: (1, 1), 2: (1, 0), 3: (1, -1)}
    keep = np.zeros_like(mag, dtype=bool)
    padded = np.pad(mag, 1, mode="constant")
    for s, (dr, dc) in offsets.items():
        sel = sector == s
        fwd = padded[1 + dr : padded.shape[0] - 1 + dr, 1 + dc : padded.shape[1] - 1 + dc]
        bwd = padded[1 - dr : padded.shape[0] - 1 - dr, 1 - dc : padded.shape[1] - 1 - dc]
        keep |= sel & (mag >= fwd) & (mag >= bwd)

    strong = keep & (mag > high)
    weak = keep & (mag > low)
    comp, n_comp = scipy.ndimage.label(weak, structure=_EIGHT_CONN)
    if n_comp == 0:
        return np.zeros_like(weak)
    has_strong = np.zeros(n_comp + 1, dtype=bool)
    has_strong[comp[strong]] = True
    return weak & has_strong[comp]


def closed_edge_boxes(edges, endpoint_tolerance=0.05):
    """Tight boxes of connected edge curves that close on themselves.

    Curves are 8-connected components of the edge set; a curve counts as
    closed when at most `endpoint_tolerance` of its pixels have fewer than
    two edge neighbors. Open fragments yield no box.
    """
    e = np.asarray(edges, dtype=bool)
    comp, n_comp = scipy.ndimage.label(e, structure=_EIGHT_CONN)
    if n_comp == 0:
        return []
    neighbor_count = scipy.ndimage.convolve(
        e.astype(np.int32), np.array([[1, 1, 1], [1, 0, 1], [1, 1, 1]]), mode="constant"
    )
    endpoints = e & (neighbor_count < 2)
    boxes = []
    slices = scipy.ndimage.find_objects(comp)
    for idx, sl in enumerate(slices, start=1):
        if sl is None:
            continue
        mask = comp[sl] == idx
        size = mask.sum()
        n_end = (endpoints[sl] & mask).sum()
        if size == 0 or n_end / size > endpoint_tolerance:
            continue
        rows = np.any(mask, axis=1).nonzero()[0]
        cols = np.any(mask, axis=0).nonzero()[0]
        boxes.append(
            BoundingBox(
                left=int(sl[1].start + cols[0]),
                top=int(sl[0].start + rows[0]),
                right=int(sl[1].start + cols[-1] + 1),
                bottom=int(sl[0].start + rows[-1] + 1),
            )
        )
    return boxes


def truncated_objectness(boxes, values, value_scale=255.0,
                         sigma_spatial=saliency.DEFAULT_SIGMA_SPATIAL,
                         sigma_intensity=saliency.DEFAULT_SIGMA_INTENSITY,
                         exponent=saliency.DEFAULT_EXPONENT):
    """Score boxes as if they were the map's homogeneous elements.

    Each box becomes one element with the mean map intensity inside it and
    its center as centroid; uniqueness and distribution are evaluated over
    the box population and combined as in the saliency scoring, weighted by
    the box's normalized mean intensity so that candidates lying on dark
    (non-object) map regions score low. Raw scores below the truncation
    threshold become exactly zero.
    """
    if not boxes:
        return []
    map2d = check_gray_map(values)
    h, w = map2d.shape
    elements = []
    means = np.empty(len(boxes))
    for i, b in enumerate(boxes):
        if b.left < 0 or b.top < 0 or b.right > w or b.bottom > h:
            raise ValueError(f"box outside map bounds: {b}")
        patch = map2d[b.top : b.bottom, b.left : b.right]
        means[i] = patch.mean() / value_scale
        elements.append(
            saliency.SuperpixelElement(
                ident=i,
                pixels=np.empty(0, dtype=np.int64),
                centroid=(
                    (b.top + b.bottom) / 2.0 / max(h - 1, 1),
                    (b.left + b.right) / 2.0 / max(w - 1, 1),
                ),
                mean_intensity=float(means[i]),
            )
        )
    uniq = saliency.element_uniqueness(elements, sigma_spatial)
    dist = saliency.element_distribution(elements, sigma_intensity)
    raw = means * saliency.combine_scores(uniq, dist, exponent)
    if raw.max() - raw.min() <= 1e-12:
        scores = np.where(raw < SCORE_TRUNCATION, 0.0, 1.0)
    else:
        scores = saliency.rescale_unit(raw, 1.0)
        scores[raw < SCORE_TRUNCATION] = 0.0
    return [
        dataclasses.replace(b, score=float(s)) for b, s in zip(boxes, scores)
    ]


def deduplicate(boxes, iou_threshold=DEFAULT_DEDUP_IOU):
    """Greedy removal of near-duplicate boxes, keeping the higher score.

    Boxes are visited in descending score order; a box survives only if its
    IoU with every survivor is at or below the threshold. Idempotent.
    """
    ordered = sorted(
        boxes, key=lambda b: (-b.score, b.left, b.top, b.right, b.bottom)
    )
    kept = []
    for b in ordered:
        if all(iou(b, k) <= iou_threshold for k in kept):
            kept.append(b)
    return kept


@dataclasses.dataclass
class ProposalSet:
    """Ranked candidate boxes for one image."""

    boxes: list
    image_id: str = ""
    provenance: tuple = ()

    def __len__(self):
        return len(self.boxes)

    def __iter__(self):
        return iter(self.boxes)

    def top(self, k):
        return self.boxes[: max(k, 0)]


def generate_proposals(image, n_single=80, n_pairwise=6,
                       canny_low=DEFAULT_CANNY_LOW, canny_high=DEFAULT_CANNY_HIGH,
                       dedup_iou=DEFAULT_DEDUP_IOU, min_box_side=MIN_BOX_SIDE,
                       max_boxes=None, score_map="e1e2", tau=affinity.DEFAULT_TAU,
                       tol=spectral.DEFAULT_TOL, max_iter=spectral.DEFAULT_MAX_ITER, seed=42,
                       image_id=""):
    """Generate, score, deduplicate, and rank object proposals for an image.

    Candidate boxes come from the closed Canny contours of the object maps
    of the first `n_single` eigenvectors plus every pairwise combination of
    the first `n_pairwise`. `score_map` selects the reference map for the
    truncated objectness: the first eigenvector map ("e1"), the combined
    first-two map ("e1e2", default), or each box's own source map
    ("per-source").
    """
    img = check_rgb_image(image)
    h, w = img.shape[:2]
    if n_pairwise > n_single:
        raise ValueError("n_pairwise cannot exceed n_single")
    if img.max() == img.min():
        # A constant image has no edges; its eigenvectors are pure grid
        # harmonics whose stretched maps would otherwise yield artifacts.
        logger.info("proposals: constant input, returning empty set")
        return ProposalSet(boxes=[], image_id=image_id, provenance=("blank",))
    n_single = min(n_single, h * w - 2)
    mat = affinity.build_affinity(img, tau=tau)
    pairs = spectral.object_eigenpairs(
        mat, n_single, h, w, tol=tol, max_iter=max_iter, seed=seed, allow_partial=True
    )
    if len(pairs) < n_single:
        logger.warning(
            "proposals: only %d/%d eigenpairs converged, proceeding", len(pairs), n_single
        )

    corrected = [
        object_maps.reverse_correct(object_maps.eigenvector_to_map(p.vector, w, h))
        for p in pairs
    ]
    sources = [(f"e{i + 1}", m) for i, m in enumerate(corrected)]
    for i, j in itertools.combinations(range(min(n_pairwise, len(corrected))), 2):
        sources.append(
            (f"e{i + 1}+e{j + 1}", object_maps.combine_maps([corrected[i], corrected[j]]))
        )

    candidates = []
    for name, m in sources:
        for box in closed_edge_boxes(canny_edges(m, canny_low, canny_high)):
            if box.width >= min_box_side and box.height >= min_box_side:
                candidates.append((name, box))

    if not candidates:
        return ProposalSet(boxes=[], image_id=image_id, provenance=("empty",))

    if score_map == "per-source":
        by_source = {}
        for name, box in candidates:
            by_source.setdefault(name, []).append(box)
        scored = []
        source_maps = dict(sources)
        for name, group in by_source.items():
            scored.extend(truncated_objectness(group, source_maps[name]))
    else:
        if score_map == "e1":
            reference = corrected[0]
        elif score_map == "e1e2":
            reference = object_maps.combine_maps(corrected[: min(2, len(corrected))])
        else:
            raise ValueError(f"unknown score_map {score_map!r}")
        scored = truncated_objectness([b for _, b in candidates], reference)

    scored = [b for b in scored if b.score > 0.0]
    kept = deduplicate(scored, dedup_iou)
    if max_boxes is not None:
        kept = kept[:max_boxes]
    return ProposalSet(
        boxes=kept,
        image_id=image_id,
        provenance=(f"single:{len(pairs)}", f"pairwise:{min(n_pairwise, len(pairs))}"),
    )
