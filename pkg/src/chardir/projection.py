"""Projections onto characteristic directions and density curves.

Produces the plot data behind the two-class visualizations: per-sample
coordinates on a hierarchy of mutually orthogonal characteristic
directions, and Gaussian kernel density estimates of the projected
classes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .data import ExpressionMatrix
from .direction import (
    CharacteristicDirection,
    NoDifferentialSignalError,
    lr1_direction,
)
from .linalg import DEFAULT_EPSILON, DEFAULT_MAX_COMPONENTS, ZeroVarianceError

__all__ = [
    "ProjectionHierarchy",
    "DensityCurve",
    "project",
    "project_hierarchy",
    "density_estimate",
    "silverman_bandwidth",
    "FALLBACK_BANDWIDTH",
]

FALLBACK_BANDWIDTH = 1.0
GRID_POINTS = 256


@dataclass(frozen=True)
class ProjectionHierarchy:
    """Samples projected onto successive orthogonal directions.

    ``coords[i, j]`` is sample j's coordinate on direction i, measured on
    the data deflated by directions 0..i-1. ``class_of_sample`` holds 1 or
    2 per column. ``truncated_reason`` is non-empty when the requested
    depth exhausted the differential signal early.
    """

    directions: tuple[CharacteristicDirection, ...]
    coords: np.ndarray
    class_of_sample: tuple[int, ...]
    truncated_reason: str = ""

    @property
    def depth(self) -> int:
        return len(self.directions)


def project(direction: CharacteristicDirection, matrix: ExpressionMatrix) -> np.ndarray:
    """Coordinate of every sample along the direction: ``b . X`` per column."""
    if direction.gene_ids != matrix.gene_ids:
        raise ValueError("direction and matrix gene universes differ")
    return direction.coefficients @ matrix.values


def project_hierarchy(
    gene_ids,
    x1: np.ndarray,
    x2: np.ndarray,
    depth: int = 2,
    epsilon: float = DEFAULT_EPSILON,
    max_components: int = DEFAULT_MAX_COMPONENTS,
) -> ProjectionHierarchy:
    """Fit a hierarchy of mutually orthogonal characteristic directions.

    The pooled data are mean-centered once; each level fits the regression
    estimator on the current data, records every sample's coordinate on
    the fitted direction, and deflates the data by removing that
    direction's component before the next level. If a level finds no
    remaining differential signal the hierarchy is truncated there with a
    diagnostic instead of failing.
    """
    x1 = np.asarray(x1, dtype=np.float64)
    x2 = np.asarray(x2, dtype=np.float64)
    n1, n2 = x1.shape[1], x2.shape[1]
    n_samples = n1 + n2
    if not 1 <= depth <= min(n_samples - 2, x1.shape[0]):
        raise ValueError("depth must lie in [1, min(n_samples - 2, n_genes)]")

    pooled = np.hstack([x1, x2])
    current = pooled - pooled.mean(axis=1, keepdims=True)
    directions: list[CharacteristicDirection] = []
    coords: list[np.ndarray] = []
    truncated_reason = ""
    for _ in range(depth):
        try:
            direction = lr1_direction(
                gene_ids, current[:, :n1], current[:, n1:], epsilon, max_components
            )
        except (NoDifferentialSignalError, ZeroVarianceError) as exc:
            truncated_reason = (
                f"signal exhausted at level {len(directions) + 1}: {exc}"
            )
            break
        b = direction.coefficients
        directions.append(direction)
        coords.append(b @ current)
        current = current - np.outer(b, b @ current)

    if not directions:
        raise NoDifferentialSignalError(truncated_reason)
    return ProjectionHierarchy(
        directions=tuple(directions),
        coords=np.vstack(coords),
        class_of_sample=tuple([1] * n1 + [2] * n2),
        truncated_reason=truncated_reason,
    )


@dataclass(frozen=True)
class DensityCurve:
    """Gaussian KDE sampled on a regular grid, normalized to unit mass."""

    grid: np.ndarray
    density: np.ndarray
    bandwidth: float
    diagnostic: str = ""


def silverman_bandwidth(coords: np.ndarray) -> float:
    """Silverman's rule of thumb: ``1.06 * std * n^(-1/5)``."""
    return 1.06 * float(np.std(coords, ddof=1)) * len(coords) ** (-1 / 5)


def density_estimate(coords, bandwidth: float | None = None) -> DensityCurve:
    """Gaussian kernel density estimate on a 256-point grid.

    The grid spans [min - 3h, max + 3h] and the sampled curve is
    renormalized so its trapezoid integral is 1. ``bandwidth=None``
    applies Silverman's rule; data with zero spread fall back to a fixed
    bandwidth of 1.0 with a diagnostic.
    """
    coords = np.asarray(coords, dtype=np.float64)
    if coords.ndim != 1 or coords.size < 2:
        raise ValueError("need at least 2 one-dimensional points")
    if not np.all(np.isfinite(coords)):
        raise ValueError("coords contain non-finite values")

    diagnostic = ""
    if bandwidth is None:
        h = silverman_bandwidth(coords)
        if h <= 0:
            h = FALLBACK_BANDWIDTH
            diagnostic = "zero spread: fell back to fixed bandwidth"
    else:
        h = float(bandwidth)
        if h <= 0:
            raise ValueError("bandwidth must be positive")

    grid = np.linspace(coords.min() - 3 * h, coords.max() + 3 * h, GRID_POINTS)
    z = (grid[:, None] - coords[None, :]) / h
    density = np.exp(-0.5 * z**2).sum(axis=1) / (
        coords.size * h * math.sqrt(2 * math.pi)
    )
    mass = float(np.trapezoid(density, grid))
    return DensityCurve(grid=grid, density=density / mass, bandwidth=h, diagnostic=diagnostic)
