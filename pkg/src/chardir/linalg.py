"""Numerical primitives: PCA reduction, least squares, random rotations.

All functions are pure; randomness is always drawn from an explicitly
passed generator.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "PcaModel",
    "LinearSolveReport",
    "ZeroVarianceError",
    "pca_reduce",
    "solve_least_squares",
    "random_rotation",
]

DEFAULT_EPSILON = 1e-3
DEFAULT_MAX_COMPONENTS = 20
DEFAULT_LSTSQ_TOL = 1e-12


class ZeroVarianceError(ValueError):
    """Raised when the data carry no variance to decompose."""


@dataclass(frozen=True)
class PcaModel:
    """Centered principal-component model of a genes x samples array.

    Attributes:
        mean: Per-gene mean, length n_genes.
        basis: Orthonormal component columns, shape (n_genes, k).
        variances: Nonincreasing component variances, length k.
        retained_fraction: Fraction of total variance the k components
            capture. At least 1 - epsilon unless ``capped`` is set.
        capped: True when the component cap truncated the expansion before
            the variance target was met.
    """

    mean: np.ndarray
    basis: np.ndarray
    variances: np.ndarray
    retained_fraction: float
    capped: bool = False

    @property
    def n_components(self) -> int:
        return self.basis.shape[1]


@dataclass(frozen=True)
class LinearSolveReport:
    """Least-squares solution with its effective rank and tolerance."""

    coefficients: np.ndarray
    rank: int
    tolerance_used: float


def _require_finite(name: str, arr: np.ndarray) -> np.ndarray:
    arr = np.asarray(arr, dtype=np.float64)
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite values")
    return arr


def pca_reduce(
    data: np.ndarray,
    epsilon: float = DEFAULT_EPSILON,
    max_components: int = DEFAULT_MAX_COMPONENTS,
) -> tuple[PcaModel, np.ndarray]:
    """Reduce columns of ``data`` to the leading principal components.

    Components are computed by SVD of the column-centered array and kept
    until they capture a fraction 1 - epsilon of the total variance, up to
    ``max_components`` and never more than n_samples - 1. Basis column
    signs are fixed so each column's largest-magnitude entry is positive.

    Args:
        data: Array of shape (n_genes, n_samples) with n_samples >= 2.
        epsilon: Allowed unexplained variance fraction, in [0, 1).
        max_components: Hard cap on the number of components kept.

    Returns:
        (model, scores) where scores has shape (k, n_samples) and the
        centered data reconstruct as ``basis @ scores`` up to the retained
        variance.

    Raises:
        ZeroVarianceError: all columns are identical.
    """
    data = _require_finite("data", data)
    if data.ndim != 2 or data.shape[0] < 1:
        raise ValueError("data must be a nonempty 2-D array (genes x samples)")
    n_genes, n_samples = data.shape
    if n_samples < 2:
        raise ValueError("need at least 2 samples")
    if not 0 <= epsilon < 1:
        raise ValueError("epsilon must lie in [0, 1)")
    if max_components < 1:
        raise ValueError("max_components must be >= 1")

    mean = data.mean(axis=1)
    centered = data - mean[:, None]
    u, s, _ = np.linalg.svd(centered, full_matrices=False)
    variances = s**2 / (n_samples - 1)
    total = float(variances.sum())

    scale = max(1.0, float(np.abs(data).max()))
    if total <= (1e-12 * scale) ** 2:
        raise ZeroVarianceError("zero total variance: all samples identical")

    cumulative = np.cumsum(variances) / total
    available = min(n_samples - 1, len(variances))
    k_target = min(int(np.searchsorted(cumulative, 1.0 - epsilon) + 1), available)
    capped = k_target > max_components
    k = min(k_target, max_components)

    basis = u[:, :k].copy()
    flips = np.where(basis[np.abs(basis).argmax(axis=0), np.arange(k)] < 0, -1.0, 1.0)
    basis *= flips

    scores = basis.T @ centered
    model = PcaModel(
        mean=mean,
        basis=basis,
        variances=variances[:k].copy(),
        retained_fraction=float(cumulative[k - 1]),
        capped=capped,
    )
    return model, scores


def solve_least_squares(
    design: np.ndarray,
    targets: np.ndarray,
    tol: float = DEFAULT_LSTSQ_TOL,
) -> LinearSolveReport:
    """Minimum-norm least-squares solution of design @ coef = targets.

    Singular values below ``tol`` times the largest singular value are
    treated as zero, so rank-deficient systems get the pseudo-inverse
    solution.
    """
    design = _require_finite("design", design)
    targets = _require_finite("targets", targets)
    coef, _, rank, _ = np.linalg.lstsq(design, targets, rcond=tol)
    return LinearSolveReport(coefficients=coef, rank=int(rank), tolerance_used=tol)


def random_rotation(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Draw a Haar-distributed orthogonal matrix of the given dimension.

    QR decomposition of a standard-Gaussian array, with each factor's sign
    corrected so the triangular part has a positive diagonal; this makes
    the result exactly Haar on the orthogonal group.
    """
    if dim < 1:
        raise ValueError("dim must be >= 1")
    gauss = rng.standard_normal((dim, dim))
    q, r = np.linalg.qr(gauss)
    return q * np.sign(np.diag(r))
