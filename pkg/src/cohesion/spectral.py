"""Leading eigenpairs of the affinity matrix and alignment diagnostics.

The eigenvalue attached to an eigenvector measures the cohesion of the
pixel cluster that the eigenvector supports: relaxing the +/-1 cluster
labeling problem to real vectors turns the kernel-target alignment
objective into a Rayleigh quotient, whose maximizers are exactly the
leading eigenpairs.
"""

import dataclasses
import logging

import numpy as np
import scipy.sparse
import scipy.sparse.linalg

from .validation import check_square_symmetric

logger = logging.getLogger(__name__)

DEFAULT_TOL = 1e-6
DEFAULT_MAX_ITER = 300

# Below this size ARPACK's Krylov space cannot be built comfortably; use a
# dense LAPACK decomposition instead.
_DENSE_FALLBACK_N = 32


class EigensolverError(RuntimeError):
    """Raised when the iterative solver fails to converge.

    Carries the residuals achieved by the best available Ritz pairs.
    """

    def __init__(self, message, residuals=None):
        super().__init__(message)
        self.residuals = residuals


@dataclasses.dataclass
class EigenPair:
    """A cohesion value (eigenvalue) and its unit-norm eigenvector."""

    eigenvalue: float
    vector: np.ndarray
    residual: float


def _fix_sign(vec):
    # Eigenvector sign is arbitrary; make the largest-magnitude entry positive
    # so downstream maps are reproducible.
    peak = np.argmax(np.abs(vec))
    return vec if vec[peak] > 0 else -vec


def top_eigenpairs(matrix, count, tol=DEFAULT_TOL, max_iter=DEFAULT_MAX_ITER, seed=42):
    """Eigenpairs with the `count` largest algebraic eigenvalues, descending.

    The matrix is symmetric but in general indefinite, so the target end of
    the spectrum is largest-algebraic, not largest-magnitude. Large
    problems use a seeded Lanczos iteration (ARPACK) with a deterministic
    start vector; small ones fall back to a dense decomposition. Raises
    EigensolverError on non-convergence, reporting achieved residuals.
    """
    mat = check_square_symmetric(matrix)
    n = mat.shape[0]
    if count < 1:
        raise ValueError("count must be positive")
    if count > n:
        raise ValueError(f"count {count} exceeds matrix dimension {n}")

    ncv = min(n, 2 * count + 10)
    if n <= _DENSE_FALLBACK_N or count >= n - 1 or ncv >= n:
        vals, vecs = np.linalg.eigh(mat.toarray())
        order = np.argsort(vals)[::-1][:count]
        vals, vecs = vals[order], vecs[:, order]
    else:
        rng = np.random.default_rng(seed)
        v0 = rng.standard_normal(n)
        try:
            vals, vecs = scipy.sparse.linalg.eigsh(
                mat, k=count, which="LA", tol=tol, maxiter=max_iter, ncv=ncv, v0=v0
            )
        except scipy.sparse.linalg.ArpackNoConvergence as exc:
            got = len(exc.eigenvalues)
            residuals = None
            if got:
                res = mat @ exc.eigenvectors - exc.eigenvectors * exc.eigenvalues
                residuals = np.linalg.norm(res, axis=0)
            raise EigensolverError(
                f"eigensolver converged only {got}/{count} pairs "
                f"within {max_iter} iterations",
                residuals=residuals,
            ) from exc
        order = np.argsort(vals)[::-1]
        vals, vecs = vals[order], vecs[:, order]

    pairs = []
    for i in range(count):
        vec = _fix_sign(np.ascontiguousarray(vecs[:, i]))
        vec = vec / np.linalg.norm(vec)
        resid = float(np.linalg.norm(mat @ vec - vals[i] * vec))
        pairs.append(EigenPair(eigenvalue=float(vals[i]), vector=vec, residual=resid))
    logger.debug(
        "top_eigenpairs: n=%d count=%d lambda1=%.6g residual1=%.2e",
        n, count, pairs[0].eigenvalue, pairs[0].residual,
    )
    return pairs


def structural_vector(height, width, window_size=3):
    """Unit eigenvector of the normalized affinity at eigenvalue exactly 1.

    Because deviations inside each window sum to zero, the raw affinity's
    row sums equal window_size**2 times the per-pixel window count, a pure
    function of geometry. The square root of those row sums is therefore
    always an exact eigenvector of the normalized matrix, with eigenvalue
    1, regardless of image content. It carries no object information: every
    informative eigenvalue lies strictly below 1 (each window block is
    dominated by window_size**2 times the identity).
    """
    r = window_size // 2

    def axis_counts(length):
        x = np.arange(length)
        lo = np.maximum(r, x - r)
        hi = np.minimum(length - 1 - r, x + r)
        return np.maximum(hi - lo + 1, 0).astype(np.float64)

    counts = np.outer(axis_counts(height), axis_counts(width)).ravel()
    omega = np.sqrt(counts)
    return omega / np.linalg.norm(omega)


def object_eigenpairs(matrix, count, height, width, window_size=3,
                      tol=DEFAULT_TOL, max_iter=DEFAULT_MAX_ITER, seed=42,
                      allow_partial=False):
    """Leading eigenpairs after deflating the structural unit eigenvector.

    The structural eigenpair at eigenvalue 1 (see structural_vector) would
    otherwise always rank first while describing nothing; projecting it out
    leaves the cohesion-ordered object eigenpairs. Standard practice for
    spectrally derived clusterings, where the trivial vector is discarded.
    With `allow_partial`, non-convergence returns the converged subset
    (with a warning) instead of raising.
    """
    mat = check_square_symmetric(matrix)
    n = mat.shape[0]
    if n != height * width:
        raise ValueError(f"matrix dimension {n} != {height}x{width} pixels")
    if count < 1 or count > n - 1:
        raise ValueError(f"count must be in [1, {n - 1}]")
    omega = structural_vector(height, width, window_size)

    ncv = min(n, 2 * count + 10)
    if n <= _DENSE_FALLBACK_N or count >= n - 2 or ncv >= n:
        dense = mat.toarray() - np.outer(omega, omega)
        vals, vecs = np.linalg.eigh(dense)
        order = np.argsort(vals)[::-1][:count]
        vals, vecs = vals[order], vecs[:, order]
    else:
        def matvec(v):
            return mat @ v - omega * (omega @ v)

        op = scipy.sparse.linalg.LinearOperator((n, n), matvec=matvec, dtype=np.float64)
        rng = np.random.default_rng(seed)
        v0 = rng.standard_normal(n)
        # Clustered leading eigenvalues may exhaust the restart budget at
        # the default block size; widen the Krylov block before giving up.
        vals = vecs = None
        last_exc = None
        for block in (ncv, min(n - 1, 3 * ncv), min(n - 1, 9 * ncv)):
            try:
                vals, vecs = scipy.sparse.linalg.eigsh(
                    op, k=count, which="LA", tol=tol, maxiter=max_iter,
                    ncv=block, v0=v0.copy(),
                )
                break
            except scipy.sparse.linalg.ArpackNoConvergence as exc:
                last_exc = exc
                logger.info("object_eigenpairs: no convergence at ncv=%d, retrying", block)
        if vals is None:
            got = len(last_exc.eigenvalues)
            if not allow_partial or got == 0:
                raise EigensolverError(
                    f"eigensolver converged only {got}/{count} pairs "
                    f"within {max_iter} iterations",
                    residuals=None,
                ) from last_exc
            logger.warning("object_eigenpairs: using %d/%d converged pairs", got, count)
            vals, vecs = last_exc.eigenvalues, last_exc.eigenvectors
        order = np.argsort(vals)[::-1]
        vals, vecs = vals[order], vecs[:, order]

    pairs = []
    for i in range(len(vals)):
        vec = _fix_sign(np.ascontiguousarray(vecs[:, i]))
        vec = vec / np.linalg.norm(vec)
        av = mat @ vec - omega * (omega @ vec)
        resid = float(np.linalg.norm(av - vals[i] * vec))
        pairs.append(EigenPair(eigenvalue=float(vals[i]), vector=vec, residual=resid))
    return pairs


def rayleigh_quotient(matrix, vector):
    """v^T A v / v^T v. Scale-invariant; bounded by the extreme eigenvalues."""
    v = np.asarray(vector, dtype=np.float64)
    denom = float(v @ v)
    if denom == 0.0:
        raise ValueError("rayleigh_quotient of the zero vector is undefined")
    return float(v @ (matrix @ v)) / denom


def _frobenius_inner(a, b):
    a_vec = isinstance(a, np.ndarray) and a.ndim == 1
    b_vec = isinstance(b, np.ndarray) and b.ndim == 1
    if a_vec and b_vec:
        return float(a @ b) ** 2
    if a_vec:
        return float(a @ (b @ a))
    if b_vec:
        return float(b @ (a @ b))
    if scipy.sparse.issparse(a) or scipy.sparse.issparse(b):
        return float(a.multiply(b).sum()) if scipy.sparse.issparse(a) else float(b.multiply(a).sum())
    return float(np.sum(a * b))


def kernel_alignment(k1, k2):
    """Normalized Frobenius inner product of two kernel matrices.

    Either argument may be a 1-D vector l, standing for the rank-one kernel
    l l^T; those cases are evaluated as quadratic forms without
    materializing the N x N outer product. Ranges over [-1, 1] with
    kernel_alignment(K, K) = 1.
    """
    num = _frobenius_inner(k1, k2)
    n1 = _frobenius_inner(k1, k1)
    n2 = _frobenius_inner(k2, k2)
    if n1 <= 0.0 or n2 <= 0.0:
        raise ValueError("kernel_alignment requires nonzero arguments")
    return num / np.sqrt(n1 * n2)


def threshold_labels(matrix, delta):
    """Sign matrix over the affinity's sparsity pattern: +1 above delta.

    Returns a CSR matrix with +1 where the stored affinity exceeds delta
    and -1 elsewhere on the pattern. Pairs sharing no window carry no
    entry. Diagnostic view of the clustering-as-labeling relaxation; the
    pipeline itself works with the soft eigenvector labels.
    """
    mat = matrix.tocsr()
    out = mat.copy()
    out.data = np.where(mat.data > delta, 1.0, -1.0)
    return out
