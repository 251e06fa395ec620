"""Characteristic-direction estimators and significant-gene calling.

Both estimators return a unit-norm coefficient vector over genes whose
squared components apportion the total expression difference between the
two classes; the sign convention points the vector from class 1 toward
class 2 (nonnegative dot product with the centroid difference).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import NamedTuple, TextIO

import numpy as np

from .linalg import (
    DEFAULT_EPSILON,
    DEFAULT_MAX_COMPONENTS,
    pca_reduce,
    solve_least_squares,
)

__all__ = [
    "CharacteristicDirection",
    "SignificantGeneCall",
    "RankedGene",
    "NoDifferentialSignalError",
    "lr1_direction",
    "np1_direction",
    "call_significant",
    "write_ranked_tsv",
    "write_ranked_json",
    "DEFAULT_PERMUTATIONS",
]

DEFAULT_PERMUTATIONS = 200

# Relative floor below which a null component's spread counts as degenerate.
NULL_STD_FLOOR = 1e-12


class NoDifferentialSignalError(ValueError):
    """The two classes are indistinguishable; no direction exists."""


@dataclass(frozen=True)
class CharacteristicDirection:
    """Unit-norm per-gene coefficients characterizing a class difference.

    Attributes:
        gene_ids: Gene identifiers, aligned with ``coefficients``.
        coefficients: Unit vector; squared entries sum to 1.
        method: Estimator label, "LR1" or "NP1".
        magnitude: Euclidean norm of the log-space centroid difference the
            unit vector characterizes.
    """

    gene_ids: tuple[str, ...]
    coefficients: np.ndarray
    method: str
    magnitude: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "gene_ids", tuple(self.gene_ids))
        coeffs = np.asarray(self.coefficients, dtype=np.float64)
        object.__setattr__(self, "coefficients", coeffs)
        if coeffs.shape != (len(self.gene_ids),):
            raise ValueError("coefficients and gene_ids lengths differ")


class RankedGene(NamedTuple):
    gene_id: str
    coefficient: float
    squared_coefficient: float
    cumulative_fraction: float


@dataclass(frozen=True)
class SignificantGeneCall:
    """Genes ranked by squared coefficient with a cumulative-mass cutoff.

    ``selected_count`` is the length of the shortest ranking prefix whose
    squared coefficients sum to at least ``alpha``.
    """

    ranked_genes: tuple[RankedGene, ...]
    alpha: float
    selected_count: int


def _validate_classes(x1: np.ndarray, x2: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    x1 = np.asarray(x1, dtype=np.float64)
    x2 = np.asarray(x2, dtype=np.float64)
    if x1.ndim != 2 or x2.ndim != 2:
        raise ValueError("class matrices must be 2-D (genes x samples)")
    if x1.shape[0] != x2.shape[0]:
        raise ValueError("class matrices disagree on gene count")
    if x1.shape[1] < 2 or x2.shape[1] < 2:
        raise ValueError("each class needs at least 2 samples")
    if not (np.all(np.isfinite(x1)) and np.all(np.isfinite(x2))):
        raise ValueError("class matrices contain non-finite values")
    return x1, x2


def _finalize(
    gene_ids,
    raw: np.ndarray,
    centroid_diff: np.ndarray,
    method: str,
) -> CharacteristicDirection:
    """Unit-normalize, orient along the centroid difference, and wrap."""
    scale = max(1.0, float(np.abs(centroid_diff).max(initial=0.0)))
    norm = float(np.linalg.norm(raw))
    if norm <= NULL_STD_FLOOR * scale:
        raise NoDifferentialSignalError(
            "no differential signal between the classes"
        )
    b = raw / norm
    if float(b @ centroid_diff) < 0:
        b = -b
    return CharacteristicDirection(
        gene_ids=tuple(gene_ids),
        coefficients=b,
        method=method,
        magnitude=float(np.linalg.norm(centroid_diff)),
    )


def lr1_direction(
    gene_ids,
    x1: np.ndarray,
    x2: np.ndarray,
    epsilon: float = DEFAULT_EPSILON,
    max_components: int = DEFAULT_MAX_COMPONENTS,
) -> CharacteristicDirection:
    """Characteristic direction via indicator regression in PCA space.

    The pooled samples are reduced with :func:`pca_reduce`, a -1/+1 class
    contrast is regressed on the component scores by least squares, and
    the resulting hyperplane normal is mapped back through the orthonormal
    basis to gene space.

    Raises:
        NoDifferentialSignalError: the classes coincide.
        ZeroVarianceError: all pooled samples are identical.
    """
    x1, x2 = _validate_classes(x1, x2)
    gene_ids = tuple(gene_ids)
    if len(gene_ids) != x1.shape[0]:
        raise ValueError("gene_ids and matrices disagree on gene count")

    pooled = np.hstack([x1, x2])
    centroid_diff = x2.mean(axis=1) - x1.mean(axis=1)
    scale = max(1.0, float(np.abs(pooled).max()))
    if float(np.linalg.norm(centroid_diff)) <= NULL_STD_FLOOR * scale:
        raise NoDifferentialSignalError("no differential signal between the classes")

    model, scores = pca_reduce(pooled, epsilon, max_components)
    target = np.concatenate(
        [np.full(x1.shape[1], -1.0), np.full(x2.shape[1], 1.0)]
    )
    report = solve_least_squares(scores.T, target)
    raw = model.basis @ report.coefficients
    return _finalize(gene_ids, raw, centroid_diff, "LR1")


def np1_direction(
    gene_ids,
    x1: np.ndarray,
    x2: np.ndarray,
    n_permutations: int = DEFAULT_PERMUTATIONS,
    rng: np.random.Generator | None = None,
) -> CharacteristicDirection:
    """Characteristic direction via a permutation-null-corrected centroid
    difference.

    Sample-to-class labels are shuffled ``n_permutations`` times (class
    sizes preserved) and the centroid difference recomputed each time,
    giving a null set of directions. The observed difference is expressed
    in the principal axes of that null set, each component is divided by
    the null's per-axis standard deviation (degenerate axes clamped to
    1e-12 of the largest), and the scaled vector is mapped back to gene
    space and unit-normalized.

    Label shuffles are sampled uniformly; for small sample counts
    duplicate shuffles are accepted. Results are bit-reproducible for a
    given generator state.
    """
    x1, x2 = _validate_classes(x1, x2)
    gene_ids = tuple(gene_ids)
    if len(gene_ids) != x1.shape[0]:
        raise ValueError("gene_ids and matrices disagree on gene count")
    if n_permutations < 100:
        raise ValueError("n_permutations must be at least 100")
    if rng is None:
        rng = np.random.default_rng()

    n1, n2 = x1.shape[1], x2.shape[1]
    pooled = np.hstack([x1, x2])
    centroid_diff = x2.mean(axis=1) - x1.mean(axis=1)
    scale = max(1.0, float(np.abs(pooled).max()))
    if float(np.linalg.norm(centroid_diff)) <= NULL_STD_FLOOR * scale:
        raise NoDifferentialSignalError("no differential signal between the classes")

    # Column j of weights turns pooled @ weights[:, j] into the centroid
    # difference under the j-th label shuffle.
    perms = np.argsort(rng.random((n_permutations, n1 + n2)), axis=1)
    weights = np.full((n1 + n2, n_permutations), 1.0 / n2)
    for j in range(n_permutations):
        weights[perms[j, :n1], j] = -1.0 / n1
    nulls = pooled @ weights

    # Principal axes of the null set about the origin: label shuffles make
    # the null sign-symmetric, so no centering is applied and the per-axis
    # spread is the RMS projection.
    u, s, _ = np.linalg.svd(nulls, full_matrices=False)
    stds = s / np.sqrt(n_permutations)
    floor = NULL_STD_FLOOR * float(stds.max(initial=0.0))
    if floor == 0.0:
        raise NoDifferentialSignalError("null distribution has zero spread")
    components = u.T @ centroid_diff
    raw = u @ (components / np.maximum(stds, floor))
    return _finalize(gene_ids, raw, centroid_diff, "NP1")


def call_significant(
    direction: CharacteristicDirection, alpha: float
) -> SignificantGeneCall:
    """Rank genes by squared coefficient and select the alpha-mass prefix.

    Ties in squared coefficient are broken by gene id, lexicographically.
    ``selected_count`` is the smallest prefix length whose cumulative
    squared-coefficient fraction reaches ``alpha`` (all genes if rounding
    keeps the total a hair below alpha = 1).
    """
    if not 0 < alpha <= 1:
        raise ValueError("alpha must lie in (0, 1]")
    coeffs = direction.coefficients
    order = sorted(
        range(len(coeffs)),
        key=lambda i: (-(coeffs[i] ** 2), direction.gene_ids[i]),
    )
    squared = coeffs[order] ** 2
    cumulative = np.cumsum(squared)
    ranked = tuple(
        RankedGene(
            gene_id=direction.gene_ids[i],
            coefficient=float(coeffs[i]),
            squared_coefficient=float(sq),
            cumulative_fraction=float(cum),
        )
        for i, sq, cum in zip(order, squared, cumulative)
    )
    selected = int(np.searchsorted(cumulative, alpha) + 1)
    selected = min(selected, len(ranked))
    return SignificantGeneCall(ranked, float(alpha), selected)


RANKED_COLUMNS = (
    "gene_id",
    "coefficient",
    "squared_coefficient",
    "cumulative_fraction",
    "rank",
    "discriminant_sign",
    "significant",
)


def _ranked_rows(call: SignificantGeneCall):
    for rank, gene in enumerate(call.ranked_genes, start=1):
        yield {
            "gene_id": gene.gene_id,
            "coefficient": gene.coefficient,
            "squared_coefficient": gene.squared_coefficient,
            "cumulative_fraction": gene.cumulative_fraction,
            "rank": rank,
            "discriminant_sign": "+" if gene.coefficient >= 0 else "-",
            "significant": rank <= call.selected_count,
        }


def write_ranked_tsv(
    call: SignificantGeneCall, out: TextIO, method: str | None = None
) -> None:
    """Write the ranked-gene table as TSV with a fixed column order.

    The estimator label travels in a leading comment line so the column
    schema stays stable.
    """
    if method:
        out.write(f"# method: {method}\n")
    out.write(f"# alpha: {call.alpha!r}\n")
    out.write("\t".join(RANKED_COLUMNS) + "\n")
    for row in _ranked_rows(call):
        out.write(
            "\t".join(
                [
                    row["gene_id"],
                    repr(row["coefficient"]),
                    repr(row["squared_coefficient"]),
                    repr(row["cumulative_fraction"]),
                    str(row["rank"]),
                    row["discriminant_sign"],
                    "true" if row["significant"] else "false",
                ]
            )
            + "\n"
        )


def write_ranked_json(
    call: SignificantGeneCall, out: TextIO, method: str | None = None
) -> None:
    """JSON alternative to the TSV output, identical fields."""
    payload = {
        "alpha": call.alpha,
        "selected_count": call.selected_count,
        "genes": list(_ranked_rows(call)),
    }
    if method:
        payload["method"] = method
    json.dump(payload, out, indent=2)
    out.write("\n")
