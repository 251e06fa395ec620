"""Welch t-test baseline with Benjamini-Hochberg FDR correction."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

__all__ = [
    "WelchResult",
    "UndefinedStatisticError",
    "welch_test",
    "student_t_two_sided",
    "bh_fdr",
    "ttest_screen",
]


class UndefinedStatisticError(ValueError):
    """Test statistic is undefined (zero variance, equal means)."""


@dataclass(frozen=True)
class WelchResult:
    """Per-gene Welch test outcome with its BH q-value.

    ``diagnostic`` is non-empty for degenerate rows (zero variance); those
    rows are never flagged significant unless the means actually differ.
    """

    gene_id: str
    t: float
    df: float
    p: float
    q: float
    significant: bool
    diagnostic: str = ""


def student_t_two_sided(t: float, df: float) -> float:
    """Two-sided Student-t tail probability via the regularized
    incomplete beta function: ``I_{df/(df+t^2)}(df/2, 1/2)``."""
    if df <= 0:
        raise ValueError("df must be positive")
    if t == 0.0:
        return 1.0
    return float(special.betainc(df / 2.0, 0.5, df / (df + t * t)))


def welch_test(x1, x2) -> tuple[float, float, float]:
    """Welch's unequal-variance t-test between two samples.

    Uses unbiased sample variances; the statistic is
    ``(mean(x1) - mean(x2)) / sqrt(v1/n1 + v2/n2)`` with
    Welch-Satterthwaite degrees of freedom, and the p-value is the
    two-sided Student-t tail.

    Returns:
        (t, df, p). When both samples have zero variance but different
        means, returns ``(+-inf, n1 + n2 - 2, 0.0)`` by convention.

    Raises:
        UndefinedStatisticError: both variances and the mean difference
            are zero.
        ValueError: a sample has fewer than 2 values or non-finite data.
    """
    x1 = np.asarray(x1, dtype=np.float64)
    x2 = np.asarray(x2, dtype=np.float64)
    if x1.size < 2 or x2.size < 2:
        raise ValueError("each sample needs at least 2 values")
    if not (np.all(np.isfinite(x1)) and np.all(np.isfinite(x2))):
        raise ValueError("samples contain non-finite values")

    n1, n2 = x1.size, x2.size
    m1, m2 = float(x1.mean()), float(x2.mean())
    v1 = float(x1.var(ddof=1))
    v2 = float(x2.var(ddof=1))

    se2 = v1 / n1 + v2 / n2
    if se2 == 0.0:
        if m1 == m2:
            raise UndefinedStatisticError(
                "zero variance in both samples with equal means"
            )
        return math.copysign(math.inf, m1 - m2), float(n1 + n2 - 2), 0.0

    t = (m1 - m2) / math.sqrt(se2)
    df = se2**2 / (v1**2 / (n1**2 * (n1 - 1)) + v2**2 / (n2**2 * (n2 - 1)))
    return t, df, student_t_two_sided(t, df)


def bh_fdr(pvals) -> np.ndarray:
    """Benjamini-Hochberg step-up q-values, returned in input order.

    ``q_k = min_{j >= k} p_(j) * m / j``, capped at 1.
    """
    p = np.asarray(pvals, dtype=np.float64)
    if p.ndim != 1:
        raise ValueError("pvals must be 1-D")
    if p.size == 0:
        return p.copy()
    if np.any(p < 0) or np.any(p > 1) or not np.all(np.isfinite(p)):
        raise ValueError("p-values must lie in [0, 1]")

    m = p.size
    order = np.argsort(p, kind="stable")
    scaled = p[order] * m / np.arange(1, m + 1)
    q_sorted = np.minimum(1.0, np.minimum.accumulate(scaled[::-1])[::-1])
    q = np.empty_like(q_sorted)
    q[order] = q_sorted
    return q


def ttest_screen(
    gene_ids,
    x1: np.ndarray,
    x2: np.ndarray,
    fdr_threshold: float = 0.05,
) -> list[WelchResult]:
    """Welch-test every gene row and correct across genes with BH.

    A gene is significant iff its q-value is at or below ``fdr_threshold``.
    Rows where the statistic is undefined (zero variance, equal means) are
    reported with p = q = 1, never significant, and a diagnostic instead
    of aborting the screen; they are excluded from the BH correction so a
    degenerate probe cannot inflate the other genes' q-values.
    """
    if not 0 < fdr_threshold <= 1:
        raise ValueError("fdr_threshold must lie in (0, 1]")
    x1 = np.asarray(x1, dtype=np.float64)
    x2 = np.asarray(x2, dtype=np.float64)
    gene_ids = list(gene_ids)
    if x1.shape[0] != len(gene_ids) or x2.shape[0] != len(gene_ids):
        raise ValueError("gene_ids and matrices disagree on gene count")

    stats: list[tuple[float, float, float, str]] = []
    for i in range(len(gene_ids)):
        try:
            t, df, p = welch_test(x1[i], x2[i])
        except UndefinedStatisticError:
            stats.append((0.0, float("nan"), 1.0, "zero variance, equal means"))
            continue
        diag = "zero variance, unequal means" if math.isinf(t) else ""
        stats.append((t, df, p, diag))

    defined = [i for i, s in enumerate(stats) if s[3] != "zero variance, equal means"]
    qvals = np.ones(len(gene_ids))
    if defined:
        qvals[defined] = bh_fdr([stats[i][2] for i in defined])

    results = []
    for gid, (t, df, p, diag), q in zip(gene_ids, stats, qvals):
        significant = bool(q <= fdr_threshold) and diag != "zero variance, equal means"
        results.append(WelchResult(gid, t, df, p, float(q), significant, diag))
    return results
