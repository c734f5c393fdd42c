import numpy as np
import pytest

from cohesion import proposals as prop
from cohesion.boxes import BoundingBox, iou
from cohesion.scenes import three_rectangles


def ring_mask(h, w, top, left, bottom, right):
    m = np.zeros((h, w), dtype=bool)
    m[top, left:right] = True
    m[bottom - 1, left:right] = True
    m[top:bottom, left] = True
    m[top:bottom, right - 1] = True
    return m


class TestCanny:
    def test_constant_map_no_edges(self):
        edges = prop.canny_edges(np.full((30, 30), 77.0))
        assert not edges.any()

    def test_vertical_step_localized(self):
        m = np.zeros((40, 40))
        m[:, 20:] = 255.0
        edges = prop.canny_edges(m)
        cols = np.nonzero(edges)[1]
        assert len(cols) > 0
        assert (np.abs(cols - 19.5) <= 1.5).all()

    def test_filled_rectangle_closed_loop(self):
        m = np.zeros((40, 50))
        m[10:30, 15:35] = 255.0
        edges = prop.canny_edges(m)
        boxes = prop.closed_edge_boxes(edges)
        assert len(boxes) == 1
        b = boxes[0]
        assert abs(b.left - 15) <= 2 and abs(b.right - 35) <= 2
        assert abs(b.top - 10) <= 2 and abs(b.bottom - 30) <= 2

    def test_bad_thresholds(self):
        with pytest.raises(ValueError):
            prop.canny_edges(np.zeros((10, 10)), low=10.0, high=5.0)


class TestClosedEdgeBoxes:
    def test_closed_ring_gives_exact_box(self):
        edges = ring_mask(30, 30, 5, 8, 20, 25)
        boxes = prop.closed_edge_boxes(edges)
        assert len(boxes) == 1
        assert (boxes[0].left, boxes[0].top, boxes[0].right, boxes[0].bottom) == (8, 5, 25, 20)

    def test_open_segment_discarded(self):
        edges = np.zeros((20, 20), dtype=bool)
        edges[10, 2:18] = True
        assert prop.closed_edge_boxes(edges) == []

    def test_nested_rings(self):
        edges = ring_mask(40, 40, 2, 2, 38, 38) | ring_mask(40, 40, 10, 10, 30, 30)
        boxes = prop.closed_edge_boxes(edges)
        assert len(boxes) == 2
        boxes.sort(key=lambda b: b.area, reverse=True)
        outer, inner = boxes
        assert outer.left <= inner.left and outer.right >= inner.right
        assert outer.top <= inner.top and outer.bottom >= inner.bottom


class TestTruncatedObjectness:
    def test_empty_list(self):
        assert prop.truncated_objectness([], np.zeros((10, 10))) == []

    def test_single_box_scores_zero(self):
        m = np.full((20, 20), 200.0)
        out = prop.truncated_objectness([BoundingBox(2, 2, 10, 10)], m)
        assert out[0].score == 0.0

    def test_bright_box_beats_dark_box(self):
        m = np.zeros((30, 40))
        m[5:15, 5:15] = 230.0
        bright = BoundingBox(5, 5, 15, 15)
        dark = BoundingBox(25, 18, 35, 28)
        out = prop.truncated_objectness([bright, dark], m)
        assert out[0].score > out[1].score

    def test_identical_content_equal_scores(self):
        m = np.tile(np.linspace(0, 255, 10), (20, 2))
        a = BoundingBox(0, 2, 10, 12)
        b = BoundingBox(10, 2, 20, 12)
        out = prop.truncated_objectness([a, b], m)
        assert out[0].score == out[1].score

    def test_out_of_bounds_rejected(self):
        with pytest.raises(ValueError):
            prop.truncated_objectness([BoundingBox(0, 0, 30, 30)], np.zeros((10, 10)))


class TestDeduplicate:
    def test_removes_near_duplicates(self):
        boxes = [
            BoundingBox(0, 0, 100, 100, score=0.9),
            BoundingBox(0, 0, 100, 99, score=0.5),
            BoundingBox(200, 200, 240, 240, score=0.8),
        ]
        kept = prop.deduplicate(boxes, iou_threshold=0.95)
        assert len(kept) == 2
        assert kept[0].score == 0.9 and kept[1].score == 0.8

    def test_idempotent(self, rng):
        boxes = []
        for _ in range(50):
            left, top = rng.integers(0, 50, size=2)
            boxes.append(BoundingBox(int(left), int(top), int(left) + 20,
                                     int(top) + 15, float(rng.random())))
        once = prop.deduplicate(boxes)
        twice = prop.deduplicate(once)
        assert once == twice

    def test_postcondition(self, rng):
        boxes = []
        for _ in range(80):
            left, top = rng.integers(0, 30, size=2)
            w, h = rng.integers(10, 25, size=2)
            boxes.append(BoundingBox(int(left), int(top), int(left + w),
                                     int(top + h), float(rng.random())))
        kept = prop.deduplicate(boxes)
        for i, a in enumerate(kept):
            for b in kept[i + 1 :]:
                assert iou(a, b) <= 0.95


class TestGenerateProposals:
    def test_blank_image_empty_set(self):
        img = np.full((40, 40, 3), 0.5)
        ps = prop.generate_proposals(img, n_single=4, n_pairwise=2)
        assert len(ps) == 0

    def test_three_rectangles_recalled(self):
        scene = three_rectangles()
        ps = prop.generate_proposals(scene.image, n_single=8, n_pairwise=4)
        top50 = ps.top(50)
        for g in scene.boxes:
            assert max((iou(g, b) for b in top50), default=0.0) >= 0.5
        scores = [b.score for b in ps]
        assert scores == sorted(scores, reverse=True)
        assert all(b.score > 0 for b in ps)
        h, w = scene.image.shape[:2]
        for b in ps:
            assert 0 <= b.left < b.right <= w
            assert 0 <= b.top < b.bottom <= h

    def test_max_boxes_cap(self):
        scene = three_rectangles()
        ps = prop.generate_proposals(scene.image, n_single=6, n_pairwise=3, max_boxes=5)
        assert len(ps) <= 5

    def test_pairwise_exceeding_single_rejected(self, rng):
        with pytest.raises(ValueError):
            prop.generate_proposals(rng.random((20, 20, 3)), n_single=2, n_pairwise=4)


def test_bounding_box_validity():
    with pytest.raises(ValueError):
        BoundingBox(5, 5, 5, 10)
    b = BoundingBox(1, 2, 4, 7)
    assert b.width == 3 and b.height == 5 and b.area == 15
