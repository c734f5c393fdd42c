"""Object discovery from the spectra of color-distortion-robust affinities.

The package builds a sparse symmetric affinity matrix whose entries weigh
pixel similarity by the inverse of local window covariance, making them
robust to the intensity distortions that spread one real-world color along
an elongated ellipse in RGB space. The matrix's leading eigenvectors, after
deflating the structural eigenvector, mark cohesive object regions; the
eigenvalues measure each region's cohesion. On top of that sit a salient
object detector, an object proposal generator, and an evaluation harness.
"""

from .affinity import (
    affinity_term,
    affinity_term_eigenbasis,
    affinity_visualization,
    build_affinity,
    build_raw_affinity,
    compute_window_stats,
    matting_laplacian,
    normalize_affinity,
)
from .boxes import BoundingBox, iou
from .estimators import CohesionEmbedding, ProposalGenerator, SaliencyDetector
from .evaluation import PRCurve, f_beta, pr_curve, recall_at_k
from .image_io import (
    RectSpec,
    crop_uniform_borders,
    load_image,
    resize_to_width,
    save_image,
    synth_rectangles,
)
from .object_maps import combine_maps, eigenvector_to_map, reverse_correct
from .proposals import ProposalSet, canny_edges, closed_edge_boxes, generate_proposals, truncated_objectness
from .saliency import (
    SaliencyResult,
    SuperpixelElement,
    assign_saliency,
    detect_salient,
    element_distribution,
    element_uniqueness,
    otsu_threshold,
    segment_superpixels,
    threshold_map,
)
from .spectral import (
    EigenPair,
    EigensolverError,
    kernel_alignment,
    object_eigenpairs,
    rayleigh_quotient,
    structural_vector,
    threshold_labels,
    top_eigenpairs,
)

__version__ = "0.1.0"

__all__ = [
    "BoundingBox",
    "CohesionEmbedding",
    "EigenPair",
    "EigensolverError",
    "PRCurve",
    "ProposalGenerator",
    "ProposalSet",
    "RectSpec",
    "SaliencyDetector",
    "SaliencyResult",
    "SuperpixelElement",
    "affinity_term",
    "affinity_term_eigenbasis",
    "affinity_visualization",
    "assign_saliency",
    "build_affinity",
    "build_raw_affinity",
    "canny_edges",
    "closed_edge_boxes",
    "combine_maps",
    "compute_window_stats",
    "crop_uniform_borders",
    "detect_salient",
    "eigenvector_to_map",
    "element_distribution",
    "element_uniqueness",
    "f_beta",
    "generate_proposals",
    "iou",
    "kernel_alignment",
    "load_image",
    "matting_laplacian",
    "normalize_affinity",
    "object_eigenpairs",
    "otsu_threshold",
    "pr_curve",
    "rayleigh_quotient",
    "recall_at_k",
    "resize_to_width",
    "reverse_correct",
    "save_image",
    "segment_superpixels",
    "structural_vector",
    "synth_rectangles",
    "threshold_labels",
    "threshold_map",
    "top_eigenpairs",
    "truncated_objectness",
]
