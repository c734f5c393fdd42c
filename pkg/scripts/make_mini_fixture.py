#!/usr/bin/env python3
"""Generate the bundled 10-image saliency fixture (images + masks + manifest).

Deterministic; outputs land in tests/fixtures/mini10. The set mixes plain
geometric scenes with photo-like shaded and textured ones, all with exact
ground-truth masks.
"""

from pathlib import Path

import numpy as np

from cohesion import image_io
from cohesion.image_io import RectSpec, rect_mask, synth_rectangles
from cohesion.scenes import disk, fig3a1, low_contrast, shaded_ellipse, three_rectangles, two_objects

OUT = Path(__file__).resolve().parent.parent / "tests" / "fixtures" / "mini10"


def gradient_disk(width=200, height=150):
    yy, xx = np.mgrid[0:height, 0:width]
    r = 0.24 * min(width, height)
    mask = (yy - 70) ** 2 + (xx - 120) ** 2 <= r * r
    image = np.empty((height, width, 3))
    image[:] = (0.35, 0.4, 0.35)
    shade = 0.45 + 0.55 * (yy / height)
    color = np.array([0.2, 0.55, 0.85])
    for ch in range(3):
        image[:, :, ch][mask] = (shade[mask] * color[ch]).clip(0, 1)
    return image, mask


def offset_rectangle(width=200, height=150):
    rect = RectSpec(top=95, left=130, height=40, width=52, color=(0.85, 0.75, 0.15))
    image = synth_rectangles(width, height, (0.25, 0.22, 0.3), [rect])
    return image, rect_mask(width, height, rect)


def textured_background_object(width=200, height=150, seed=23):
    rng = np.random.default_rng(seed)
    image = np.empty((height, width, 3))
    base = 0.45 + 0.02 * rng.standard_normal((height, width))
    for ch, tint in enumerate((0.9, 1.0, 0.85)):
        image[:, :, ch] = np.clip(base * tint, 0, 1)
    yy, xx = np.mgrid[0:height, 0:width]
    mask = (np.abs(yy - 80) <= 32) & (np.abs(xx - 85) <= 40)
    image[mask] = (0.75, 0.3, 0.45)
    return image, mask


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    scenes = []
    for scene in (disk(), fig3a1(), two_objects(), low_contrast(),
                  three_rectangles(), shaded_ellipse(seed=7), shaded_ellipse(seed=11)):
        scenes.append((scene.name if scene.name != "shaded_ellipse" else
                       f"shaded_ellipse_{len(scenes)}", scene.image, scene.mask))
    img, mask = gradient_disk()
    scenes.append(("gradient_disk", img, mask))
    img, mask = offset_rectangle()
    scenes.append(("offset_rectangle", img, mask))
    img, mask = textured_background_object()
    scenes.append(("textured_object", img, mask))

    lines = []
    for name, image, mask in scenes:
        image_io.save_image(OUT / f"{name}.png", image)
        image_io.save_gray(OUT / f"{name}_mask.png", mask.astype(float) * 255.0,
                           scale=255.0)
        lines.append(f"{name}.png\t{name}_mask.png")
    (OUT / "manifest.tsv").write_text("\n".join(lines) + "\n")
    print(f"wrote {len(scenes)} samples to {OUT}")


if __name__ == "__main__":
    main()
