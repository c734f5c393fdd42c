"""Bounding boxes with half-open pixel coordinates, shared by proposal
generation and evaluation."""

import dataclasses


@dataclasses.dataclass
class BoundingBox:
    """Axis-aligned box; right and bottom are exclusive. Score is optional."""

    left: int
    top: int
    right: int
    bottom: int
    score: float = 0.0

    def __post_init__(self):
        if self.right <= self.left or self.bottom <= self.top:
            raise ValueError(
                f"degenerate box ({self.left},{self.top},{self.right},{self.bottom})"
            )

    @property
    def width(self):
        return self.right - self.left

    @property
    def height(self):
        return self.bottom - self.top

    @property
    def area(self):
        return self.width * self.height


def iou(a, b):
    """Intersection over union of two boxes, using half-open pixel areas."""
    iw = min(a.right, b.right) - max(a.left, b.left)
    ih = min(a.bottom, b.bottom) - max(a.top, b.top)
    if iw <= 0 or ih <= 0:
        return 0.0
    inter = iw * ih
    return inter / (a.area + b.area - inter)
