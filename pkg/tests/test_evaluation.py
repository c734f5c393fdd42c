import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cohesion import evaluation as ev
from cohesion.boxes import BoundingBox
from cohesion.proposals import ProposalSet


class TestPRCurve:
    def test_perfect_map(self):
        gt = np.zeros((20, 20), dtype=bool)
        gt[5:15, 5:15] = True
        curve = ev.pr_curve([gt.astype(float)], [gt])
        assert len(curve) == 256
        np.testing.assert_allclose(curve.precision[:255], 1.0)
        np.testing.assert_allclose(curve.recall[:255], 1.0)
        assert curve.recall[255] == 0.0
        assert curve.precision[255] == 1.0  # empty-prediction convention

    def test_inverted_map_has_no_true_positives(self):
        gt = np.zeros((20, 20), dtype=bool)
        gt[5:15, 5:15] = True
        inverted = 1.0 - gt.astype(float)
        curve = ev.pr_curve([inverted], [gt])
        np.testing.assert_allclose(curve.precision[:255], 0.0)
        np.testing.assert_allclose(curve.recall, 0.0)

    def test_uniform_map_precision_is_foreground_prior(self):
        gt = np.zeros((10, 10), dtype=bool)
        gt[:3, :] = True  # 30% foreground
        curve = ev.pr_curve([np.full((10, 10), 1.0)], [gt])
        np.testing.assert_allclose(curve.precision[:255], 0.3, rtol=1e-12)
        np.testing.assert_allclose(curve.recall[:255], 1.0)

    def test_zero_threshold_full_recall_on_positive_map(self, rng):
        gt = rng.random((15, 15)) > 0.5
        m = rng.uniform(0.2, 1.0, (15, 15))
        curve = ev.pr_curve([m], [gt])
        assert curve.recall[0] == 1.0

    def test_recall_monotone_nonincreasing(self, rng):
        maps = [rng.random((20, 20)) for _ in range(3)]
        masks = [rng.random((20, 20)) > 0.6 for _ in range(3)]
        curve = ev.pr_curve(maps, masks)
        assert (np.diff(curve.recall) <= 1e-12).all()

    def test_pooled_over_dataset(self):
        gt1 = np.zeros((4, 4), dtype=bool)
        gt1[0, 0] = True
        gt2 = np.ones((4, 4), dtype=bool)
        m1 = np.ones((4, 4))
        m2 = np.zeros((4, 4))
        curve = ev.pr_curve([m1, m2], [gt1, gt2])
        # At t=0: predictions are all of image 1 only.
        assert curve.recall[0] == pytest.approx(1 / 17)
        assert curve.precision[0] == pytest.approx(1 / 16)

    def test_shape_mismatch(self):
        with pytest.raises(ValueError):
            ev.pr_curve([np.zeros((3, 3))], [np.zeros((4, 4), dtype=bool)])


class TestFBeta:
    def test_equal_precision_recall_identity(self):
        for p in (0.1, 0.5, 0.9):
            for b2 in (0.3, 1.0, 2.0):
                assert ev.f_beta(p, p, b2) == pytest.approx(p, rel=1e-12)

    def test_zero_recall(self):
        assert ev.f_beta(1.0, 0.0) == 0.0

    def test_both_zero(self):
        assert ev.f_beta(0.0, 0.0) == 0.0

    def test_worked_arithmetic(self):
        expected = (1.3 * 0.92 * 0.46) / (0.3 * 0.92 + 0.46)
        assert ev.f_beta(0.92, 0.46, 0.3) == pytest.approx(expected, rel=1e-12)
        assert expected == pytest.approx(0.7475, abs=5e-4)

    @given(st.floats(0.001, 1.0), st.floats(0.001, 1.0))
    @settings(max_examples=200, deadline=None)
    def test_bounded_by_min_max(self, p, r):
        f = ev.f_beta(p, r, 0.3)
        assert min(p, r) - 1e-12 <= f <= max(p, r) + 1e-12

    def test_range_validation(self):
        with pytest.raises(ValueError):
            ev.f_beta(1.5, 0.5)


class TestIoU:
    def test_identical(self):
        b = BoundingBox(0, 0, 10, 10)
        assert ev.iou(b, b) == 1.0

    def test_disjoint(self):
        assert ev.iou(BoundingBox(0, 0, 5, 5), BoundingBox(10, 10, 20, 20)) == 0.0

    def test_half_overlap_arithmetic(self):
        a = BoundingBox(0, 0, 10, 10)
        b = BoundingBox(5, 0, 15, 10)
        assert ev.iou(a, b) == pytest.approx(1 / 3, rel=1e-12)

    @given(st.integers(0, 40), st.integers(0, 40), st.integers(1, 20), st.integers(1, 20),
           st.integers(0, 40), st.integers(0, 40), st.integers(1, 20), st.integers(1, 20))
    @settings(max_examples=200, deadline=None)
    def test_symmetric_and_bounded(self, l1, t1, w1, h1, l2, t2, w2, h2):
        a = BoundingBox(l1, t1, l1 + w1, t1 + h1)
        b = BoundingBox(l2, t2, l2 + w2, t2 + h2)
        v = ev.iou(a, b)
        assert v == ev.iou(b, a)
        assert 0.0 <= v <= 1.0


class TestRecallAtK:
    def _proposals(self, boxes):
        return ProposalSet(boxes=boxes)

    def test_k_zero(self):
        gt = [BoundingBox(0, 0, 10, 10)]
        ps = self._proposals([BoundingBox(0, 0, 10, 10, 1.0)])
        assert ev.recall_at_k(ps, gt, k=0) == 0.0

    def test_exact_hits(self):
        gt = [BoundingBox(0, 0, 10, 10), BoundingBox(20, 20, 30, 30)]
        ps = self._proposals([
            BoundingBox(0, 0, 10, 10, 0.9),
            BoundingBox(20, 20, 30, 30, 0.8),
        ])
        assert ev.recall_at_k(ps, gt, k=2) == 1.0

    def test_half_counting(self):
        gt = [BoundingBox(0, 0, 10, 10), BoundingBox(50, 50, 60, 60)]
        ps = self._proposals([BoundingBox(0, 0, 10, 10, 0.9)])
        assert ev.recall_at_k(ps, gt, k=10) == 0.5

    def test_monotone_in_k(self):
        gt = [BoundingBox(0, 0, 10, 10), BoundingBox(20, 0, 30, 10),
              BoundingBox(40, 0, 50, 10)]
        ps = self._proposals([
            BoundingBox(40, 0, 50, 10, 0.9),
            BoundingBox(0, 0, 10, 10, 0.8),
            BoundingBox(20, 0, 30, 10, 0.7),
        ])
        values = [ev.recall_at_k(ps, gt, k=k) for k in range(4)]
        assert values == sorted(values)

    def test_nonincreasing_in_threshold(self):
        gt = [BoundingBox(0, 0, 10, 10)]
        ps = self._proposals([BoundingBox(2, 0, 12, 10, 0.9)])
        r_loose = ev.recall_at_k(ps, gt, iou_threshold=0.3, k=1)
        r_tight = ev.recall_at_k(ps, gt, iou_threshold=0.9, k=1)
        assert r_tight <= r_loose


class TestDatasetLoading:
    def _write_sample(self, root, name, with_mask=True):
        from cohesion import image_io

        img = np.random.default_rng(1).random((10, 12, 3))
        image_io.save_image(root / f"{name}.png", img)
        if with_mask:
            mask = np.zeros((10, 12))
            mask[3:7, 3:9] = 255.0
            image_io.save_gray(root / f"{name}_mask.png", mask, scale=255.0)

    def test_two_valid_samples(self, tmp_path):
        self._write_sample(tmp_path, "a")
        self._write_sample(tmp_path, "b")
        manifest = tmp_path / "manifest.tsv"
        manifest.write_text("a.png\ta_mask.png\nb.png\tb_mask.png\n")
        samples, errors = ev.load_mask_dataset(tmp_path, manifest)
        assert len(samples) == 2 and errors == 0

    def test_missing_mask_reported(self, tmp_path):
        self._write_sample(tmp_path, "a")
        self._write_sample(tmp_path, "b", with_mask=False)
        manifest = tmp_path / "manifest.tsv"
        manifest.write_text("a.png\ta_mask.png\nb.png\tb_mask.png\n")
        samples, errors = ev.load_mask_dataset(tmp_path, manifest)
        assert len(samples) == 1 and errors == 1

    def test_box_dataset(self, tmp_path):
        self._write_sample(tmp_path, "a", with_mask=False)
        (tmp_path / "a_boxes.json").write_text(json.dumps(
            [{"left": 1, "top": 2, "right": 5, "bottom": 6}]))
        (tmp_path / "bad.json").write_text("{not json")
        self._write_sample(tmp_path, "b", with_mask=False)
        manifest = tmp_path / "manifest.tsv"
        manifest.write_text("a.png\ta_boxes.json\nb.png\tbad.json\n")
        samples, errors = ev.load_box_dataset(tmp_path, manifest)
        assert len(samples) == 1 and errors == 1
        assert samples[0].boxes[0] == BoundingBox(1, 2, 5, 6)

    def test_mini_fixture_loads_cleanly(self, mini_fixture_dir):
        samples, errors = ev.load_mask_dataset(
            mini_fixture_dir, mini_fixture_dir / "manifest.tsv"
        )
        assert len(samples) == 10
        assert errors == 0


class TestMaskHelpers:
    def test_binarize_at_128(self):
        gray = np.array([[0.0, 127.9], [128.0, 255.0]])
        out = ev.binarize_mask(gray)
        np.testing.assert_array_equal(out, [[False, False], [True, True]])

    def test_nearest_resize_preserves_binarity(self, rng):
        mask = rng.random((30, 40)) > 0.5
        out = ev.resize_mask_nearest(mask, 20)
        assert out.dtype == bool
        assert out.shape == (15, 20)

    def test_summarize_pooled(self):
        counts = [(10, 0, 0), (0, 5, 5)]
        summary = ev.summarize_saliency(counts)
        assert summary["precision"] == pytest.approx(10 / 15)
        assert summary["recall"] == pytest.approx(10 / 15)
