import numpy as np
import pytest
import scipy.sparse

from cohesion import affinity as aff
from cohesion.scenes import appendix_b
from oracles import naive_normalize, naive_raw_affinity


def chebyshev_distance(i, j, width):
    ri, ci = divmod(i, width)
    rj, cj = divmod(j, width)
    return max(abs(ri - rj), abs(ci - cj))


class TestWindowStats:
    def test_constant_image(self):
        img = np.full((6, 6, 3), 0.4)
        tau = 1e-3
        stats = aff.compute_window_stats(img, tau=tau)
        assert len(stats) == 16
        np.testing.assert_allclose(stats.covariances, 0.0, atol=1e-14)
        expected = np.broadcast_to(np.eye(3) / tau, stats.inverses.shape)
        np.testing.assert_allclose(stats.inverses, expected, rtol=1e-8, atol=1e-8)

    def test_single_window_3x3(self, rng):
        img = rng.random((3, 3, 3))
        stats = aff.compute_window_stats(img, tau=1e-4)
        assert len(stats) == 1
        assert stats[0].window_index == 1 * 3 + 1

    def test_red_ramp_has_one_nonzero_eigenvalue(self):
        img = np.full((3, 3, 3), 0.5)
        ramp = np.linspace(0.0, 1.0, 9).reshape(3, 3)
        img[:, :, 0] = ramp
        stats = aff.compute_window_stats(img, tau=1e-4)
        cov = stats[0].covariance
        x = np.linspace(0.0, 1.0, 9)
        expected_var = np.mean(x * x) - np.mean(x) ** 2
        eigs = np.sort(np.linalg.eigvalsh(cov))
        np.testing.assert_allclose(eigs[:2], 0.0, atol=1e-12)
        np.testing.assert_allclose(eigs[2], expected_var, rtol=1e-10)

    def test_matches_naive_oracle(self, rng):
        img = rng.random((5, 6, 3))
        tau = 1e-4
        stats = aff.compute_window_stats(img, tau=tau)
        from oracles import naive_window_stats

        naive = naive_window_stats(img, tau)
        for i in range(len(stats)):
            ws = stats[i]
            mu, cov, inv = naive[ws.window_index]
            np.testing.assert_allclose(ws.mean, mu, atol=1e-12)
            np.testing.assert_allclose(ws.covariance, cov, atol=1e-12)
            np.testing.assert_allclose(ws.regularized_inverse, inv, rtol=1e-9)

    def test_invariants(self, rng):
        img = rng.random((8, 8, 3))
        tau = 1e-5
        stats = aff.compute_window_stats(img, tau=tau)
        sym_gap = np.abs(stats.covariances - stats.covariances.transpose(0, 2, 1)).max()
        assert sym_gap == 0.0
        min_eig = min(np.linalg.eigvalsh(c).min() for c in stats.covariances)
        assert min_eig >= -1e-12
        prod = np.einsum("wij,wjk->wik", stats.inverses, stats.covariances + tau * np.eye(3))
        np.testing.assert_allclose(prod, np.broadcast_to(np.eye(3), prod.shape), atol=1e-8)

    def test_bad_tau(self, rng):
        with pytest.raises(ValueError):
            aff.compute_window_stats(rng.random((4, 4, 3)), tau=0.0)


class TestAffinityTerm:
    def test_zero_at_mean(self, rng):
        img = rng.random((3, 3, 3))
        stats = aff.compute_window_stats(img, tau=1e-4)
        ws = stats[0]
        assert aff.affinity_term(ws, ws.mean, ws.mean) == pytest.approx(0.0, abs=1e-15)

    def test_diagonal_inverse_arithmetic(self):
        img = np.full((3, 3, 3), 0.5)
        stats = aff.compute_window_stats(img, tau=0.1)
        ws = stats[0]
        p_i = ws.mean + np.array([0.1, 0.0, 0.0])
        p_j = ws.mean + np.array([0.2, 0.0, 0.0])
        assert aff.affinity_term(ws, p_i, p_j) == pytest.approx(0.2, rel=1e-12)

    def test_symmetric_in_pixels(self, rng):
        img = rng.random((4, 5, 3))
        stats = aff.compute_window_stats(img, tau=1e-4)
        ws = stats[2]
        p_i, p_j = rng.random(3), rng.random(3)
        assert aff.affinity_term(ws, p_i, p_j) == pytest.approx(
            aff.affinity_term(ws, p_j, p_i), rel=1e-12
        )

    def test_appendix_b_window_signs(self):
        scene = appendix_b()
        img = scene.image
        w = img.shape[1]
        stats = aff.compute_window_stats(img, tau=1e-5)
        # Window deep inside the magenta gradient region.
        ws = stats.stat_at(20 * w + 20)
        same_row = aff.affinity_term(ws, img[19, 19], img[19, 21])
        assert same_row > 0.0
        # Window straddling the magenta/orange boundary.
        split = scene.regions["split_column"]
        ws_cross = stats.stat_at(20 * w + split)
        cross = aff.affinity_term(ws_cross, img[20, split - 1], img[20, split + 1])
        assert cross < 0.0


class TestEigenbasisIdentity:
    def test_agreement_over_random_draws(self, rng):
        # The direct quadratic form and the weighted eigen-basis inner
        # product must agree; the weights must all be positive.
        worst = 0.0
        for _ in range(1000):
            b = rng.standard_normal((3, 3))
            cov = b.T @ b * rng.random()
            tau = 10.0 ** rng.uniform(-7, -1)
            ws = aff.WindowStats(
                window_index=0,
                mean=rng.random(3),
                covariance=cov,
                regularized_inverse=np.linalg.inv(cov + tau * np.eye(3)),
                tau=tau,
            )
            p_i, p_j = rng.random(3), rng.random(3)
            direct = aff.affinity_term(ws, p_i, p_j)
            eig = aff.affinity_term_eigenbasis(ws, p_i, p_j)
            rel = abs(direct - eig) / max(abs(direct), abs(eig), 1e-30)
            worst = max(worst, rel)
            phis = np.linalg.eigvalsh(cov)
            assert ((1.0 / (phis + tau)) > 0.0).all()
        assert worst <= 1e-8

    def test_weight_positivity_at_zero_eigenvalue(self):
        ws = aff.WindowStats(0, np.zeros(3), np.zeros((3, 3)),
                             np.eye(3) / 1e-5, 1e-5)
        p = np.array([0.3, 0.0, 0.0])
        assert aff.affinity_term_eigenbasis(ws, p, p) > 0.0


class TestRawAffinity:
    def test_distant_pixels_absent(self, rng):
        img = rng.random((9, 9, 3))
        stats = aff.compute_window_stats(img, tau=1e-4)
        mat = aff.build_raw_affinity(img, stats).tocoo()
        for i, j in zip(mat.coords[0], mat.coords[1]):
            assert chebyshev_distance(int(i), int(j), 9) <= 2

    def test_constant_image_counts_shared_windows(self):
        img = np.full((9, 9, 3), 0.3)
        stats = aff.compute_window_stats(img, tau=1e-4)
        mat = aff.build_raw_affinity(img, stats).toarray()
        center = 4 * 9 + 4
        right = 4 * 9 + 5
        # Deep-interior horizontal neighbors share 2 center-columns x 3
        # center-rows of windows.
        assert mat[center, right] == pytest.approx(6.0, abs=1e-12)
        assert mat[center, center] == pytest.approx(9.0, abs=1e-12)
        two_right = 4 * 9 + 6
        assert mat[center, two_right] == pytest.approx(3.0, abs=1e-12)

    def test_matches_naive_oracle(self, rng):
        img = rng.random((6, 7, 3))
        tau = 1e-4
        stats = aff.compute_window_stats(img, tau=tau)
        mat = aff.build_raw_affinity(img, stats).toarray()
        np.testing.assert_allclose(mat, naive_raw_affinity(img, tau), atol=1e-10)

    def test_matting_identity(self, rng):
        # Raw affinity with regularizer tau/9 equals 9 * (D - L) where L is
        # the matting Laplacian with regularizer tau and D its affinity's
        # row-sum diagonal.
        img = rng.random((8, 8, 3))
        tau = 1e-3
        stats9 = aff.compute_window_stats(img, tau=tau / 9)
        raw = aff.build_raw_affinity(img, stats9)
        stats = aff.compute_window_stats(img, tau=tau)
        lap = aff.matting_laplacian(img, stats)
        d = np.asarray((raw / 9.0).sum(axis=1)).ravel()
        rhs = 9.0 * (scipy.sparse.diags_array(d) - lap)
        gap = abs(raw - rhs.tocsr())
        assert (gap.max() if gap.nnz else 0.0) <= 1e-10

    def test_laplacian_rows_sum_to_zero(self, rng):
        img = rng.random((8, 8, 3))
        stats = aff.compute_window_stats(img, tau=1e-3)
        lap = aff.matting_laplacian(img, stats)
        assert np.abs(np.asarray(lap.sum(axis=1))).max() <= 1e-8

    def test_constant_image_laplacian(self):
        img = np.full((6, 6, 3), 0.7)
        stats = aff.compute_window_stats(img, tau=1e-4)
        lap = aff.matting_laplacian(img, stats)
        assert np.abs(np.asarray(lap.sum(axis=1))).max() <= 1e-10
        # Off-diagonal entries are negative shares of shared windows.
        dense = lap.toarray()
        off = dense[~np.eye(dense.shape[0], dtype=bool)]
        assert off.max() <= 1e-12


class TestNormalize:
    def test_dense_2x2_arithmetic(self):
        raw = scipy.sparse.csr_array(np.array([[4.0, 2.0], [2.0, 4.0]]))
        out = aff.normalize_affinity(raw).toarray()
        np.testing.assert_allclose(out, [[4 / 6, 2 / 6], [2 / 6, 4 / 6]], rtol=1e-12)

    def test_symmetry_and_pattern_preserved(self, rng):
        img = rng.random((8, 9, 3))
        stats = aff.compute_window_stats(img, tau=1e-5)
        raw = aff.build_raw_affinity(img, stats)
        out = aff.normalize_affinity(raw)
        gap = abs(out - out.T)
        assert (gap.max() if gap.nnz else 0.0) <= 1e-12
        assert (out.indptr == raw.indptr).all()
        assert (out.indices == raw.indices).all()

    def test_matches_naive(self, rng):
        img = rng.random((6, 6, 3))
        tau = 1e-4
        out = aff.build_affinity(img, tau=tau).toarray()
        np.testing.assert_allclose(out, naive_normalize(naive_raw_affinity(img, tau)),
                                   atol=1e-10)

    def test_no_clamped_rows_on_constant_image(self):
        img = np.full((10, 10, 3), 0.5)
        stats = aff.compute_window_stats(img, tau=1e-5)
        raw = aff.build_raw_affinity(img, stats)
        assert aff.count_nonpositive_rows(raw) == 0

    def test_sparsity_bounds(self, rng):
        img = rng.random((12, 12, 3))
        mat = aff.build_affinity(img, tau=1e-5)
        per_row = np.diff(mat.indptr)
        assert per_row.max() <= 25
        assert mat.nnz <= 25 * mat.shape[0]


class TestWindowSize5:
    def test_contract_holds(self, rng):
        img = rng.random((9, 9, 3))
        mat = aff.build_affinity(img, tau=1e-5, window_size=5)
        assert np.diff(mat.indptr).max() <= 81
        gap = abs(mat - mat.T)
        assert (gap.max() if gap.nnz else 0.0) <= 1e-12
        mat_coo = mat.tocoo()
        for i, j in zip(mat_coo.coords[0][:500], mat_coo.coords[1][:500]):
            assert chebyshev_distance(int(i), int(j), 9) <= 4


class TestVisualization:
    def test_constant_all_zero(self):
        img = np.full((8, 8, 3), 0.6)
        viz = aff.affinity_visualization(img)
        np.testing.assert_allclose(viz, 0.0, atol=1e-10)

    def test_single_window_records_at_origin(self, rng):
        img = rng.random((3, 3, 3))
        viz = aff.affinity_visualization(img)
        assert viz.shape == (3, 3)
        assert viz[0, 0] != 0.0
        assert np.count_nonzero(viz) == 1

    def test_appendix_b_sign_pattern(self):
        scene = appendix_b()
        viz = aff.affinity_visualization(scene.image, tau=1e-5)
        h, w = scene.image.shape[:2]
        split = scene.regions["split_column"]
        # Windows fully inside magenta have centers in cols [1, split-2];
        # their records land at cols [0, split-3].
        inside = viz[: h - 2, : split - 2]
        assert (inside > 0).mean() >= 0.99
        cross = viz[: h - 2, split - 2 : split]
        assert (cross < 0).mean() > 0.5
