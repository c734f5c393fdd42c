"""Metrics and dataset harness: PR curves, F-beta, IoU, and recall-at-k.

Saliency maps are compared against binary ground-truth masks by sweeping
an integer threshold over 0..255 and pooling pixel counts over the whole
dataset (per-image averaging is available as an option). Proposal sets are
compared against ground-truth boxes by IoU hits.
"""

import dataclasses
import json
import logging
from pathlib import Path

import numpy as np

from .boxes import BoundingBox, iou  # noqa: F401  (iou is part of this module's API)

logger = logging.getLogger(__name__)

DEFAULT_BETA_SQUARED = 0.3
DEFAULT_IOU_THRESHOLD = 0.5


@dataclasses.dataclass
class PRCurve:
    """Precision/recall at each integer threshold 0..255."""

    thresholds: np.ndarray
    precision: np.ndarray
    recall: np.ndarray

    def __len__(self):
        return len(self.thresholds)

    def rows(self):
        return zip(self.thresholds, self.precision, self.recall)


def _quantize(values):
    arr = np.asarray(values, dtype=np.float64)
    if arr.max() <= 1.0 + 1e-9:
        arr = arr * 255.0
    return np.clip(np.rint(arr), 0, 255).astype(np.uint8)


def pr_curve(maps, masks):
    """Pooled PR curve over a dataset for thresholds 0..255.

    Maps may be [0, 1] floats or 8-bit; predictions at threshold t are the
    pixels with value strictly greater than t. When nothing is predicted,
    precision is 1 by convention.
    """
    if len(maps) != len(masks):
        raise ValueError("maps and masks must align")
    pos_hist = np.zeros(256, dtype=np.int64)
    neg_hist = np.zeros(256, dtype=np.int64)
    for m, gt in zip(maps, masks):
        q = _quantize(m)
        gt = np.asarray(gt, dtype=bool)
        if q.shape != gt.shape:
            raise ValueError(f"map shape {q.shape} != mask shape {gt.shape}")
        pos_hist += np.bincount(q[gt].ravel(), minlength=256)
        neg_hist += np.bincount(q[~gt].ravel(), minlength=256)

    # Predictions at threshold t are values > t: suffix sums above t.
    tp = np.cumsum(pos_hist[::-1])[::-1]
    fp = np.cumsum(neg_hist[::-1])[::-1]
    tp = np.concatenate([tp[1:], [0]])  # value > t, not >= t
    fp = np.concatenate([fp[1:], [0]])
    total_pos = pos_hist.sum()

    predicted = tp + fp
    precision = np.where(predicted > 0, tp / np.maximum(predicted, 1), 1.0)
    recall = tp / max(total_pos, 1)
    return PRCurve(np.arange(256), precision, recall)


def f_beta(precision, recall, beta_squared=DEFAULT_BETA_SQUARED):
    """Weighted harmonic mean emphasizing precision for beta^2 < 1.

    F = (1 + b2) * P * R / (b2 * P + R); defined as 0 when both are 0.
    """
    if not (0.0 <= precision <= 1.0 and 0.0 <= recall <= 1.0):
        raise ValueError("precision and recall must lie in [0, 1]")
    denom = beta_squared * precision + recall
    if denom == 0.0:
        return 0.0
    return (1.0 + beta_squared) * precision * recall / denom


def mask_counts(mask, gt):
    """(tp, fp, fn) pixel counts for one predicted mask against ground truth."""
    mask = np.asarray(mask, dtype=bool)
    gt = np.asarray(gt, dtype=bool)
    tp = int(np.count_nonzero(mask & gt))
    fp = int(np.count_nonzero(mask & ~gt))
    fn = int(np.count_nonzero(~mask & gt))
    return tp, fp, fn


def recall_at_k(proposal_set, gt_boxes, iou_threshold=DEFAULT_IOU_THRESHOLD, k=100):
    """Fraction of ground-truth boxes hit by any of the top-k proposals.

    A hit is IoU >= iou_threshold; one candidate may hit several ground
    truths (no one-to-one matching).
    """
    if not gt_boxes:
        return 0.0
    top = list(proposal_set)[: max(int(k), 0)]
    hit = 0
    for g in gt_boxes:
        if any(iou(g, b) >= iou_threshold for b in top):
            hit += 1
    return hit / len(gt_boxes)


@dataclasses.dataclass
class MaskSample:
    image_path: Path
    mask_path: Path


@dataclasses.dataclass
class BoxSample:
    image_path: Path
    boxes: list


def _read_manifest(root, manifest):
    root = Path(root)
    lines = Path(manifest).read_text().splitlines()
    entries = []
    for ln, line in enumerate(lines, start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) != 2:
            logger.error("manifest line %d: expected 2 tab-separated paths", ln)
            continue
        entries.append((root / parts[0], root / parts[1]))
    return entries


def load_mask_dataset(root, manifest):
    """Samples of (image, binary mask) pairs from a tab-separated manifest.

    Invalid samples are reported and skipped; the run continues with the
    valid remainder. Returns (samples, error_count).
    """
    samples, errors = [], 0
    for img_path, mask_path in _read_manifest(root, manifest):
        if not img_path.exists():
            logger.error("missing image: %s", img_path)
            errors += 1
            continue
        if not mask_path.exists():
            logger.error("missing mask: %s", mask_path)
            errors += 1
            continue
        samples.append(MaskSample(image_path=img_path, mask_path=mask_path))
    return samples, errors


def load_box_dataset(root, manifest):
    """Samples of (image, ground-truth boxes) from a tab-separated manifest.

    Annotations are JSON arrays of {left, top, right, bottom} objects.
    Returns (samples, error_count); malformed annotations are reported and
    skipped.
    """
    samples, errors = [], 0
    for img_path, ann_path in _read_manifest(root, manifest):
        if not img_path.exists():
            logger.error("missing image: %s", img_path)
            errors += 1
            continue
        try:
            raw = json.loads(Path(ann_path).read_text())
            boxes = [
                BoundingBox(int(b["left"]), int(b["top"]), int(b["right"]), int(b["bottom"]))
                for b in raw
            ]
        except (OSError, ValueError, KeyError, TypeError) as exc:
            logger.error("bad annotation %s: %s", ann_path, exc)
            errors += 1
            continue
        samples.append(BoxSample(image_path=img_path, boxes=boxes))
    return samples, errors


def binarize_mask(gray, threshold=128):
    """Binarize an 8-bit-scale grayscale mask raster."""
    return np.asarray(gray, dtype=np.float64) >= threshold


def resize_mask_nearest(mask, target_width):
    """Nearest-neighbor mask resize matched to the image resize policy."""
    mask = np.asarray(mask, dtype=bool)
    h, w = mask.shape
    if w == target_width:
        return mask.copy()
    out_w = int(target_width)
    out_h = max(3, int(round(h * target_width / w)))
    rows = np.clip(((np.arange(out_h) + 0.5) * h / out_h - 0.5).round().astype(int), 0, h - 1)
    cols = np.clip(((np.arange(out_w) + 0.5) * w / out_w - 0.5).round().astype(int), 0, w - 1)
    return mask[rows][:, cols]


def summarize_saliency(per_image_counts, beta_squared=DEFAULT_BETA_SQUARED):
    """Pooled precision/recall/F-beta from per-image (tp, fp, fn) counts."""
    tp = sum(c[0] for c in per_image_counts)
    fp = sum(c[1] for c in per_image_counts)
    fn = sum(c[2] for c in per_image_counts)
    precision = tp / (tp + fp) if tp + fp else 1.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    return {
        "precision": precision,
        "recall": recall,
        "f_beta": f_beta(precision, recall, beta_squared),
        "beta_squared": beta_squared,
    }
