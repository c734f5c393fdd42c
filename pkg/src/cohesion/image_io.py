"""Image loading, saving, resizing, border cropping, and synthetic scenes.

Images are float64 (H, W, 3) arrays with channel values in [0, 1], stored
row-major: pixel (row, col) has linear index row * width + col. Grayscale
maps are float64 (H, W) arrays whose value range is declared by the
producer.
"""

import dataclasses
from pathlib import Path

import numpy as np
import scipy.ndimage
from PIL import Image

from .validation import check_gray_map, check_rgb_image

SUPPORTED_INPUT_FORMATS = {"PNG", "PPM"}


def load_image(path):
    """Load a PNG or binary PPM file as a float (H, W, 3) array in [0, 1].

    RGBA alpha channels are dropped. Raises FileNotFoundError for missing
    files and ValueError for unsupported or degenerate rasters.
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"image not found: {path}")
    try:
        with Image.open(path) as im:
            fmt = im.format
            if fmt not in SUPPORTED_INPUT_FORMATS:
                raise ValueError(f"unsupported image format {fmt!r}: {path}")
            rgb = im.convert("RGB")
            arr = np.asarray(rgb, dtype=np.float64) / 255.0
    except (OSError, SyntaxError) as exc:
        raise ValueError(f"unreadable image file {path}: {exc}") from exc
    if arr.size == 0 or arr.shape[0] == 0 or arr.shape[1] == 0:
        raise ValueError(f"zero-dimension image: {path}")
    return arr


def save_image(path, image):
    """Write an RGB [0, 1] array as an 8-bit PNG or binary PPM."""
    arr = np.asarray(image, dtype=np.float64)
    data = np.clip(np.rint(arr * 255.0), 0, 255).astype(np.uint8)
    Image.fromarray(data, mode="RGB").save(path)


def save_gray(path, values, scale=255.0):
    """Quantize a grayscale map to 8 bits and write it as PGM (P5) or PNG.

    `scale` is the value mapped to full white; maps are kept as reals
    internally and only quantized here.
    """
    arr = check_gray_map(values)
    data = np.clip(np.rint(arr / scale * 255.0), 0, 255).astype(np.uint8)
    Image.fromarray(data, mode="L").save(path)


def load_gray(path):
    """Load a grayscale raster as a float (H, W) array in [0, 255]."""
    with Image.open(path) as im:
        return np.asarray(im.convert("L"), dtype=np.float64)


def resize_to_width(image, target_width):
    """Bilinearly resize an image to the given width, preserving aspect ratio.

    The output height is round(height * target_width / width), clamped to at
    least 3 rows. An input already at the target width is returned unchanged.
    """
    img = check_rgb_image(image)
    if target_width < 3:
        raise ValueError("target width must be at least 3")
    h, w = img.shape[:2]
    if w == target_width:
        return img.copy()
    out_w = int(target_width)
    out_h = max(3, int(round(h * target_width / w)))
    # Pixel-center sampling keeps the mapping symmetric under up/downscaling.
    rows = (np.arange(out_h) + 0.5) * h / out_h - 0.5
    cols = (np.arange(out_w) + 0.5) * w / out_w - 0.5
    grid = np.meshgrid(rows, cols, indexing="ij")
    out = np.empty((out_h, out_w, 3), dtype=np.float64)
    for ch in range(3):
        out[:, :, ch] = scipy.ndimage.map_coordinates(
            img[:, :, ch], grid, order=1, mode="nearest"
        )
    return np.clip(out, 0.0, 1.0)


def uniform_border_box(image, variance_threshold=1e-4):
    """Bounds (top, bottom, left, right) left after stripping uniform borders.

    Outermost rows/columns whose channel variance falls below the threshold
    are removed greedily until none qualifies, never shrinking below 3x3.
    A fully uniform image degenerates to its central 3x3 block.
    """
    img = check_rgb_image(image)
    h, w = img.shape[:2]
    if img.var() < variance_threshold:
        r0 = (h - 3) // 2
        c0 = (w - 3) // 2
        return r0, r0 + 3, c0, c0 + 3

    top, bottom, left, right = 0, h, 0, w
    changed = True
    while changed:
        changed = False
        view = img[top:bottom, left:right]
        if bottom - top > 3 and view[0].var() < variance_threshold:
            top += 1
            changed = True
        view = img[top:bottom, left:right]
        if bottom - top > 3 and view[-1].var() < variance_threshold:
            bottom -= 1
            changed = True
        view = img[top:bottom, left:right]
        if right - left > 3 and view[:, 0].var() < variance_threshold:
            left += 1
            changed = True
        view = img[top:bottom, left:right]
        if right - left > 3 and view[:, -1].var() < variance_threshold:
            right -= 1
            changed = True
    return top, bottom, left, right


def crop_uniform_borders(image, variance_threshold=1e-4):
    """Crop away uniform image borders (see uniform_border_box)."""
    img = check_rgb_image(image)
    top, bottom, left, right = uniform_border_box(img, variance_threshold)
    return img[top:bottom, left:right].copy()


@dataclasses.dataclass
class RectSpec:
    """Axis-aligned rectangle for synthetic scenes.

    `gradient` scales the base color linearly from its first to its second
    value across the rectangle's rows (top to bottom). `row_modulation`
    additionally alternates the intensity of consecutive rows by the given
    amplitude, producing high-frequency variation within every 3x3 window.
    """

    top: int
    left: int
    height: int
    width: int
    color: tuple
    gradient: tuple | None = None
    row_modulation: float = 0.0

    @property
    def bottom(self):
        return self.top + self.height

    @property
    def right(self):
        return self.left + self.width

    def overlaps(self, other):
        return not (
            self.right <= other.left
            or other.right <= self.left
            or self.bottom <= other.top
            or other.bottom <= self.top
        )


def synth_rectangles(width, height, background, rects):
    """Paint rectangles onto a constant background color.

    Returns a float (H, W, 3) image. Raises ValueError when a rectangle
    falls outside the canvas or overlaps another.
    """
    for r in rects:
        if r.top < 0 or r.left < 0 or r.bottom > height or r.right > width:
            raise ValueError(f"rectangle out of canvas: {r}")
        if r.height <= 0 or r.width <= 0:
            raise ValueError(f"degenerate rectangle: {r}")
    for i, a in enumerate(rects):
        for b in rects[i + 1 :]:
            if a.overlaps(b):
                raise ValueError(f"overlapping rectangles: {a} and {b}")

    img = np.empty((height, width, 3), dtype=np.float64)
    img[:, :] = np.asarray(background, dtype=np.float64)
    for r in rects:
        color = np.asarray(r.color, dtype=np.float64)
        rows = np.arange(r.height)
        if r.gradient is not None:
            lo, hi = r.gradient
            t = rows / max(r.height - 1, 1)
            intensity = lo + (hi - lo) * t
        else:
            intensity = np.ones(r.height)
        if r.row_modulation:
            intensity = intensity + r.row_modulation * np.where(
                (r.top + rows) % 2 == 0, 1.0, -1.0
            )
        block = intensity[:, None, None] * color[None, None, :]
        img[r.top : r.bottom, r.left : r.right] = block
    return np.clip(img, 0.0, 1.0)


def rect_mask(width, height, rect):
    """Boolean mask of the rectangle's pixels on a (height, width) canvas."""
    mask = np.zeros((height, width), dtype=bool)
    mask[rect.top : rect.bottom, rect.left : rect.right] = True
    return mask
