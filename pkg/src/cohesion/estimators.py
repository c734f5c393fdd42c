"""Scikit-learn style estimators wrapping the discovery pipelines.

All three estimators take a single RGB image as X: a float (H, W, 3) array
in [0, 1] (8-bit integer arrays are accepted and rescaled). They follow
the fit/attributes convention of sklearn's spectral models: fitting
computes the decomposition for that image and exposes the results as
trailing-underscore attributes, and get_params/set_params/clone work as
usual.
"""

import numpy as np
from sklearn.base import BaseEstimator

from . import affinity, object_maps, proposals, saliency, spectral
from .validation import check_rgb_image


class CohesionEmbedding(BaseEstimator):
    """Leading object eigenpairs of an image's cohesion affinity matrix.

    Analogous to a spectral embedding: fit(X) builds the normalized
    affinity of image X, deflates the structural eigenvector, and stores
    the top `n_components` eigenpairs. Eigenvalues are the cohesion values
    of the discovered pixel clusters, in descending order.

    Attributes after fit: `eigenvalues_` (n_components,),
    `embedding_` (n_pixels, n_components), `affinity_matrix_` (CSR),
    `residuals_`, `image_shape_`.
    """

    def __init__(self, n_components=6, tau=affinity.DEFAULT_TAU, window_size=3,
                 tol=spectral.DEFAULT_TOL, max_iter=spectral.DEFAULT_MAX_ITER,
                 random_state=42):
        self.n_components = n_components
        self.tau = tau
        self.window_size = window_size
        self.tol = tol
        self.max_iter = max_iter
        self.random_state = random_state

    def fit(self, X, y=None):
        img = check_rgb_image(X)
        h, w = img.shape[:2]
        mat = affinity.build_affinity(img, tau=self.tau, window_size=self.window_size)
        pairs = spectral.object_eigenpairs(
            mat, self.n_components, h, w, window_size=self.window_size,
            tol=self.tol, max_iter=self.max_iter, seed=self.random_state,
        )
        self.affinity_matrix_ = mat
        self.eigenvalues_ = np.array([p.eigenvalue for p in pairs])
        self.embedding_ = np.column_stack([p.vector for p in pairs])
        self.residuals_ = np.array([p.residual for p in pairs])
        self.image_shape_ = (h, w)
        return self

    def fit_transform(self, X, y=None):
        return self.fit(X).embedding_

    def object_maps(self, scale=object_maps.DEFAULT_SCALE, reverse_corrected=True):
        """Per-component object maps, optionally reversal-corrected."""
        h, w = self.image_shape_
        maps = []
        for i in range(self.embedding_.shape[1]):
            m = object_maps.eigenvector_to_map(self.embedding_[:, i], w, h, scale)
            if reverse_corrected:
                m = object_maps.reverse_correct(m)
            maps.append(m)
        return maps


class SaliencyDetector(BaseEstimator):
    """Salient-object detection via combined eigenvector maps.

    fit(X) runs the full pipeline on image X; `saliency_map_` holds the
    [0, 1] map, `mask_` the binary object mask, `eigenvalues_` the
    cohesion values used. predict(X) is fit-then-mask.
    """

    def __init__(self, n_eigenvectors=2, eliminate_noise=True,
                 tau=affinity.DEFAULT_TAU, n_superpixels=saliency.DEFAULT_SUPERPIXELS,
                 sigma_spatial=saliency.DEFAULT_SIGMA_SPATIAL,
                 sigma_intensity=saliency.DEFAULT_SIGMA_INTENSITY,
                 exponent=saliency.DEFAULT_EXPONENT, threshold=None,
                 morphology=False, tol=spectral.DEFAULT_TOL,
                 max_iter=spectral.DEFAULT_MAX_ITER, random_state=42):
        self.n_eigenvectors = n_eigenvectors
        self.eliminate_noise = eliminate_noise
        self.tau = tau
        self.n_superpixels = n_superpixels
        self.sigma_spatial = sigma_spatial
        self.sigma_intensity = sigma_intensity
        self.exponent = exponent
        self.threshold = threshold
        self.morphology = morphology
        self.tol = tol
        self.max_iter = max_iter
        self.random_state = random_state

    def fit(self, X, y=None):
        result = saliency.detect_salient(
            X, n_eigenvectors=self.n_eigenvectors,
            eliminate_noise=self.eliminate_noise, tau=self.tau,
            n_superpixels=self.n_superpixels, sigma_spatial=self.sigma_spatial,
            sigma_intensity=self.sigma_intensity, exponent=self.exponent,
            threshold=self.threshold, morphology=self.morphology,
            tol=self.tol, max_iter=self.max_iter, seed=self.random_state,
        )
        self.saliency_map_ = result.saliency_map
        self.mask_ = result.mask
        self.threshold_ = result.threshold
        self.eigenvalues_ = np.array([p.eigenvalue for p in result.eigenpairs])
        self.eigenpairs_ = result.eigenpairs
        self.elements_ = result.elements
        return self

    def predict(self, X):
        return self.fit(X).mask_

    fit_predict = predict


class ProposalGenerator(BaseEstimator):
    """Class-independent object proposal boxes from object-map contours.

    fit(X) stores the ranked ProposalSet as `proposals_`; predict(X)
    returns the boxes as an (n, 5) array of [left, top, right, bottom,
    score] rows sorted by descending score.
    """

    def __init__(self, n_single=80, n_pairwise=6,
                 canny_low=proposals.DEFAULT_CANNY_LOW,
                 canny_high=proposals.DEFAULT_CANNY_HIGH,
                 dedup_iou=proposals.DEFAULT_DEDUP_IOU,
                 min_box_side=proposals.MIN_BOX_SIDE, max_boxes=None,
                 score_map="e1e2", tau=affinity.DEFAULT_TAU,
                 tol=spectral.DEFAULT_TOL, max_iter=spectral.DEFAULT_MAX_ITER,
                 random_state=42):
        self.n_single = n_single
        self.n_pairwise = n_pairwise
        self.canny_low = canny_low
        self.canny_high = canny_high
        self.dedup_iou = dedup_iou
        self.min_box_side = min_box_side
        self.max_boxes = max_boxes
        self.score_map = score_map
        self.tau = tau
        self.tol = tol
        self.max_iter = max_iter
        self.random_state = random_state

    def fit(self, X, y=None):
        self.proposals_ = proposals.generate_proposals(
            X, n_single=self.n_single, n_pairwise=self.n_pairwise,
            canny_low=self.canny_low, canny_high=self.canny_high,
            dedup_iou=self.dedup_iou, min_box_side=self.min_box_side,
            max_boxes=self.max_boxes, score_map=self.score_map, tau=self.tau,
            tol=self.tol, max_iter=self.max_iter, seed=self.random_state,
        )
        return self

    def predict(self, X):
        self.fit(X)
        return np.array(
            [[b.left, b.top, b.right, b.bottom, b.score] for b in self.proposals_],
            dtype=np.float64,
        ).reshape(-1, 5)

    fit_predict = predict
