"""Named synthetic scenes with exact ground truth, for tests and the CLI.

Each builder returns a Scene with the image, the salient-object mask (when
the scene has a single salient object), and ground-truth boxes (when the
scene is meant for proposal evaluation). The rectangle scenes reproduce
the qualitative behaviors the method is known for: a gradient rectangle
beats a muted solid one (variation-robust cohesion), the larger of two
equal-color rectangles wins, low-contrast objects are still found through
their closed contours, and a magenta-gradient/orange pair exhibits the
positive-inside / negative-across affinity sign pattern.
"""

import dataclasses

import numpy as np

from .boxes import BoundingBox
from .image_io import RectSpec, rect_mask, synth_rectangles


@dataclasses.dataclass
class Scene:
    name: str
    image: np.ndarray
    mask: np.ndarray | None = None
    boxes: list | None = None
    regions: dict | None = None


def fig3a1(width=200, height=150):
    """Large muted solid rectangle plus a small high-contrast gradient one.

    The gradient rectangle is the salient object: its strong contrast and
    internal intensity variation give it the top cohesion value, while the
    solid rectangle's weak contrast ranks it below the background modes.
    """
    background = (0.45, 0.46, 0.45)
    solid = RectSpec(top=height // 6, left=width // 13, height=int(height * 0.6),
                     width=int(width * 0.375), color=(0.48, 0.49, 0.475))
    gradient = RectSpec(top=int(height * 0.27), left=int(width * 0.575),
                        height=int(height * 0.4), width=int(width * 0.24),
                        color=(0.85, 0.3, 0.25), gradient=(0.4, 1.0))
    image = synth_rectangles(width, height, background, [solid, gradient])
    return Scene(
        name="fig3a1",
        image=image,
        mask=rect_mask(width, height, gradient),
        regions={"solid": rect_mask(width, height, solid),
                 "gradient": rect_mask(width, height, gradient)},
    )


def fig3a2(width=200, height=150):
    """Two equal-color solid rectangles of clearly different areas."""
    background = (0.12, 0.12, 0.14)
    color = (0.7, 0.7, 0.2)
    larger = RectSpec(top=height // 10, left=width // 17, height=int(height * 0.77),
                      width=int(width * 0.52), color=color)
    smaller = RectSpec(top=int(height * 0.3), left=int(width * 0.7),
                       height=int(height * 0.3), width=int(width * 0.19), color=color)
    image = synth_rectangles(width, height, background, [larger, smaller])
    return Scene(
        name="fig3a2",
        image=image,
        mask=rect_mask(width, height, larger),
        regions={"larger": rect_mask(width, height, larger),
                 "smaller": rect_mask(width, height, smaller)},
    )


def appendix_b(width=120, height=80):
    """Magenta region with varying intensity beside a constant orange one.

    The magenta intensity follows a vertical ramp with an alternating-row
    modulation. The modulation matters: under a purely linear ramp the two
    recorded window corners always deviate to opposite sides of the window
    mean, making every recorded affinity non-positive; alternating rows put
    both corners on the same side, which is what produces the all-positive
    within-region pattern.
    """
    split = int(width * 0.58)
    magenta = RectSpec(top=0, left=0, height=height, width=split,
                       color=(0.85, 0.1, 0.8), gradient=(0.45, 1.0),
                       row_modulation=0.06)
    orange = RectSpec(top=0, left=split, height=height, width=width - split,
                      color=(0.95, 0.55, 0.05))
    image = synth_rectangles(width, height, (0.0, 0.0, 0.0), [magenta, orange])
    return Scene(
        name="appendix_b",
        image=image,
        regions={"magenta": rect_mask(width, height, magenta),
                 "orange": rect_mask(width, height, orange),
                 "split_column": split},
    )


def disk(width=200, height=150, radius_frac=0.27):
    """Solid disk on a plain contrasting background."""
    yy, xx = np.mgrid[0:height, 0:width]
    r = radius_frac * min(width, height)
    mask = (yy - height / 2) ** 2 + (xx - width / 2) ** 2 <= r * r
    image = np.empty((height, width, 3))
    image[:] = (0.2, 0.3, 0.5)
    image[mask] = (0.9, 0.7, 0.2)
    return Scene(name="disk", image=image, mask=mask,
                 boxes=[_mask_box(mask)])


def low_contrast(width=200, height=150):
    """Object nearly matching the background, separated by a dark contour."""
    image = np.empty((height, width, 3))
    image[:] = (0.50, 0.52, 0.48)
    yy, xx = np.mgrid[0:height, 0:width]
    half_h, half_w = int(height * 0.23), int(width * 0.24)
    cy, cx = height // 2, width // 2
    interior = (np.abs(yy - cy) <= half_h) & (np.abs(xx - cx) <= half_w)
    outline = ((np.abs(yy - cy) <= half_h + 2) & (np.abs(xx - cx) <= half_w + 2)) & ~interior
    image[interior] = (0.54, 0.55, 0.50)
    image[outline] = (0.30, 0.30, 0.28)
    return Scene(name="low_contrast", image=image, mask=interior | outline,
                 regions={"interior": interior, "outline": outline})


def two_objects(width=200, height=140):
    """Two large solid objects filling most of the canvas, thin background."""
    background = (0.15, 0.2, 0.25)
    first = RectSpec(top=10, left=10, height=height - 25, width=int(width * 0.475),
                     color=(0.8, 0.6, 0.2))
    second = RectSpec(top=20, left=int(width * 0.6), height=int(height * 0.68),
                      width=int(width * 0.35), color=(0.3, 0.7, 0.5))
    image = synth_rectangles(width, height, background, [first, second])
    return Scene(
        name="two_objects",
        image=image,
        mask=rect_mask(width, height, first) | rect_mask(width, height, second),
        boxes=[BoundingBox(first.left, first.top, first.right, first.bottom),
               BoundingBox(second.left, second.top, second.right, second.bottom)],
        regions={"first": rect_mask(width, height, first),
                 "second": rect_mask(width, height, second)},
    )


def five_rectangles(width=200, height=150):
    """Five disjoint solid-color rectangles for proposal recall checks."""
    background = (0.1, 0.12, 0.15)
    rects = [
        RectSpec(top=15, left=20, height=40, width=50, color=(0.9, 0.3, 0.2)),
        RectSpec(top=20, left=120, height=35, width=45, color=(0.2, 0.8, 0.3)),
        RectSpec(top=75, left=15, height=50, width=40, color=(0.9, 0.8, 0.1)),
        RectSpec(top=90, left=80, height=45, width=45, color=(0.3, 0.4, 0.9)),
        RectSpec(top=70, left=150, height=55, width=35, color=(0.8, 0.2, 0.8)),
    ]
    image = synth_rectangles(width, height, background, rects)
    mask = np.zeros((height, width), dtype=bool)
    for r in rects:
        mask |= rect_mask(width, height, r)
    return Scene(
        name="five_rectangles",
        image=image,
        mask=mask,
        boxes=[BoundingBox(r.left, r.top, r.right, r.bottom) for r in rects],
    )


def three_rectangles(width=200, height=150):
    """Three disjoint solid rectangles, a smaller proposal scene."""
    background = (0.12, 0.14, 0.12)
    rects = [
        RectSpec(top=20, left=25, height=45, width=55, color=(0.85, 0.35, 0.15)),
        RectSpec(top=25, left=125, height=40, width=50, color=(0.25, 0.45, 0.85)),
        RectSpec(top=90, left=70, height=45, width=60, color=(0.9, 0.85, 0.2)),
    ]
    image = synth_rectangles(width, height, background, rects)
    mask = np.zeros((height, width), dtype=bool)
    for r in rects:
        mask |= rect_mask(width, height, r)
    return Scene(
        name="three_rectangles",
        image=image,
        mask=mask,
        boxes=[BoundingBox(r.left, r.top, r.right, r.bottom) for r in rects],
    )


def _mask_box(mask):
    rows = np.any(mask, axis=1).nonzero()[0]
    cols = np.any(mask, axis=0).nonzero()[0]
    return BoundingBox(int(cols[0]), int(rows[0]), int(cols[-1] + 1), int(rows[-1] + 1))


def shaded_ellipse(width=200, height=150, seed=7):
    """Photo-like scene: smoothly shaded ellipse on a lightly textured wall."""
    rng = np.random.default_rng(seed)
    yy, xx = np.mgrid[0:height, 0:width]
    a, b = width * 0.22, height * 0.3
    cy, cx = height * 0.52, width * 0.46
    mask = ((xx - cx) / a) ** 2 + ((yy - cy) / b) ** 2 <= 1.0
    shade = 0.55 + 0.45 * (yy / height)
    image = np.empty((height, width, 3))
    wall = 0.62 + 0.015 * rng.standard_normal((height, width))
    for ch, tint in enumerate((1.0, 0.97, 0.9)):
        image[:, :, ch] = np.clip(wall * tint, 0, 1)
    obj_color = np.array([0.75, 0.25, 0.2])
    for ch in range(3):
        image[:, :, ch][mask] = np.clip(shade[mask] * obj_color[ch], 0, 1)
    return Scene(name="shaded_ellipse", image=image, mask=mask, boxes=[_mask_box(mask)])


SCENES = {
    "fig3a1": fig3a1,
    "fig3a2": fig3a2,
    "appendix-b": appendix_b,
    "disk": disk,
    "low-contrast": low_contrast,
    "two-objects": two_objects,
    "three-rectangles": three_rectangles,
    "five-rectangles": five_rectangles,
    "shaded-ellipse": shaded_ellipse,
}


def build_scene(name, **kwargs):
    try:
        factory = SCENES[name]
    except KeyError:
        raise ValueError(f"unknown scene {name!r}; choices: {sorted(SCENES)}") from None
    return factory(**kwargs)
