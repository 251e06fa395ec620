"""Expression matrices, two-class designs, and gene-set libraries.

All containers are frozen after construction and safe to share between
threads. Parsers consume text streams (file handles or plain strings) and
report errors with row/column locations.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field
from typing import Iterable, TextIO

import numpy as np

__all__ = [
    "ExpressionMatrix",
    "TwoClassDesign",
    "GeneSet",
    "GeneSetLibrary",
    "ExpressionDataError",
    "canonical_gene_id",
    "parse_expression_tsv",
    "parse_gmt",
    "parse_design_tsv",
    "align_design",
    "matrix_to_tsv",
]


class ExpressionDataError(ValueError):
    """Malformed expression, design, or gene-set input."""


def canonical_gene_id(raw: str) -> str:
    """Canonicalize a gene identifier: strip whitespace, upper-case."""
    return raw.strip().upper()


@dataclass(frozen=True)
class ExpressionMatrix:
    """Genes x samples table of log-scale expression values.

    Attributes:
        gene_ids: Unique canonical gene identifiers, one per row.
        sample_ids: Unique sample identifiers, one per column.
        values: Dense float array of shape (n_genes, n_samples), log space.
        log_base: Base of the logarithm the values live in (metadata).
    """

    gene_ids: tuple[str, ...]
    sample_ids: tuple[str, ...]
    values: np.ndarray
    log_base: float = 2.0

    def __post_init__(self) -> None:
        values = np.asarray(self.values, dtype=np.float64)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "gene_ids", tuple(self.gene_ids))
        object.__setattr__(self, "sample_ids", tuple(self.sample_ids))
        if values.ndim != 2:
            raise ExpressionDataError("expression values must be a 2-D array")
        if values.shape != (len(self.gene_ids), len(self.sample_ids)):
            raise ExpressionDataError(
                f"value shape {values.shape} does not match "
                f"{len(self.gene_ids)} genes x {len(self.sample_ids)} samples"
            )
        if len(set(self.gene_ids)) != len(self.gene_ids):
            raise ExpressionDataError("duplicate gene ids")
        if len(set(self.sample_ids)) != len(self.sample_ids):
            raise ExpressionDataError("duplicate sample ids")
        if values.size == 0:
            raise ExpressionDataError("empty expression matrix")
        if not np.all(np.isfinite(values)):
            bad = np.argwhere(~np.isfinite(values))[0]
            raise ExpressionDataError(
                f"non-finite value at gene {self.gene_ids[bad[0]]!r}, "
                f"sample {self.sample_ids[bad[1]]!r}"
            )
        if self.log_base <= 0:
            raise ExpressionDataError("log_base must be positive")

    @property
    def n_genes(self) -> int:
        return len(self.gene_ids)

    @property
    def n_samples(self) -> int:
        return len(self.sample_ids)

    def column_index(self, sample_id: str) -> int:
        try:
            return self.sample_ids.index(sample_id)
        except ValueError:
            raise ExpressionDataError(f"unknown sample id {sample_id!r}") from None


@dataclass(frozen=True)
class TwoClassDesign:
    """Partition of samples into class 1 (control) and class 2 (treatment).

    Sample order within each class is preserved; it defines the column
    order of the aligned sub-matrices.
    """

    class1_samples: tuple[str, ...]
    class2_samples: tuple[str, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "class1_samples", tuple(self.class1_samples))
        object.__setattr__(self, "class2_samples", tuple(self.class2_samples))
        for label, samples in (("1", self.class1_samples), ("2", self.class2_samples)):
            if len(set(samples)) != len(samples):
                raise ExpressionDataError(f"duplicate sample ids in class {label}")
            if len(samples) < 2:
                raise ExpressionDataError(
                    f"class {label} too small: need >= 2 samples, got {len(samples)}"
                )
        overlap = set(self.class1_samples) & set(self.class2_samples)
        if overlap:
            raise ExpressionDataError(
                f"samples assigned to both classes: {sorted(overlap)}"
            )


@dataclass(frozen=True)
class GeneSet:
    """Named set of gene identifiers (canonicalized, deduplicated)."""

    name: str
    description: str
    members: frozenset[str]

    def __post_init__(self) -> None:
        object.__setattr__(self, "members", frozenset(self.members))
        if not self.name:
            raise ExpressionDataError("gene set name must be non-empty")
        if not self.members:
            raise ExpressionDataError(f"gene set {self.name!r} has no members")


@dataclass(frozen=True)
class GeneSetLibrary:
    """Ordered collection of gene sets with unique names."""

    sets: tuple[GeneSet, ...] = field(default_factory=tuple)

    def __post_init__(self) -> None:
        object.__setattr__(self, "sets", tuple(self.sets))
        names = [s.name for s in self.sets]
        if len(set(names)) != len(names):
            dupes = sorted({n for n in names if names.count(n) > 1})
            raise ExpressionDataError(f"duplicate gene set names: {dupes}")

    def __len__(self) -> int:
        return len(self.sets)

    def __iter__(self):
        return iter(self.sets)


def _as_lines(text: str | TextIO | Iterable[str]) -> Iterable[str]:
    if isinstance(text, str):
        return io.StringIO(text)
    return text


def parse_expression_tsv(
    text: str | TextIO | Iterable[str],
    already_log: bool = True,
    pseudocount: float = 1.0,
) -> ExpressionMatrix:
    """Parse a tab-separated expression table.

    The first non-comment row is a header whose first cell is arbitrary and
    whose remaining cells are sample ids. Each following row is a gene id
    plus one numeric value per sample. Lines starting with ``#`` are
    ignored. When ``already_log`` is false, values are stored as
    ``log2(x + pseudocount)``.

    Duplicate gene ids (after canonicalization) are collapsed by keeping
    the row with the largest mean absolute stored value; the surviving row
    stays at the first occurrence's position. Ties keep the earlier row.

    Raises:
        ExpressionDataError: ragged rows, non-numeric cells, duplicate
            sample ids, values invalid for the log transform, or an empty
            matrix; each reported with its row/column location.
    """
    if pseudocount < 0:
        raise ExpressionDataError("pseudocount must be nonnegative")

    header: list[str] | None = None
    order: list[str] = []
    rows: dict[str, np.ndarray] = {}
    means: dict[str, float] = {}

    for lineno, line in enumerate(_as_lines(text), start=1):
        line = line.rstrip("\n").rstrip("\r")
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        cells = line.split("\t")
        if header is None:
            header = [c.strip() for c in cells]
            sample_ids = header[1:]
            if not sample_ids:
                raise ExpressionDataError(f"row {lineno}: header has no sample ids")
            seen: set[str] = set()
            for sid in sample_ids:
                if not sid:
                    raise ExpressionDataError(f"row {lineno}: empty sample id")
                if sid in seen:
                    raise ExpressionDataError(
                        f"row {lineno}: duplicate sample id {sid!r}"
                    )
                seen.add(sid)
            continue

        if len(cells) != len(header):
            raise ExpressionDataError(
                f"row {lineno}: expected {len(header)} columns, got {len(cells)}"
            )
        gene = canonical_gene_id(cells[0])
        if not gene:
            raise ExpressionDataError(f"row {lineno}: empty gene id")
        raw = np.empty(len(cells) - 1, dtype=np.float64)
        for col, cell in enumerate(cells[1:], start=2):
            try:
                raw[col - 2] = float(cell)
            except ValueError:
                raise ExpressionDataError(
                    f"row {lineno}, column {col}: non-numeric value {cell!r}"
                ) from None
        if not np.all(np.isfinite(raw)):
            col = int(np.argwhere(~np.isfinite(raw))[0][0]) + 2
            raise ExpressionDataError(f"row {lineno}, column {col}: non-finite value")
        if already_log:
            stored = raw
        else:
            shifted = raw + pseudocount
            if np.any(shifted <= 0):
                col = int(np.argwhere(shifted <= 0)[0][0]) + 2
                raise ExpressionDataError(
                    f"row {lineno}, column {col}: value {raw[col - 2]!r} not "
                    f"positive after pseudocount {pseudocount}"
                )
            stored = np.log2(shifted)

        mean_abs = float(np.mean(np.abs(stored)))
        if gene not in rows:
            order.append(gene)
            rows[gene] = stored
            means[gene] = mean_abs
        elif mean_abs > means[gene]:
            rows[gene] = stored
            means[gene] = mean_abs

    if header is None:
        raise ExpressionDataError("empty input: no header row")
    if not order:
        raise ExpressionDataError("empty matrix: no gene rows")

    values = np.vstack([rows[g] for g in order])
    return ExpressionMatrix(tuple(order), tuple(header[1:]), values)


def parse_gmt(text: str | TextIO | Iterable[str]) -> GeneSetLibrary:
    """Parse a GMT gene-set library: name, description, then member ids.

    Member ids are canonicalized to upper case and deduplicated; empty
    trailing fields are dropped. Raises on lines with fewer than 3 fields
    and on duplicate set names.
    """
    sets: list[GeneSet] = []
    names: set[str] = set()
    for lineno, line in enumerate(_as_lines(text), start=1):
        line = line.rstrip("\n").rstrip("\r")
        if not line.strip():
            continue
        cells = line.split("\t")
        if len(cells) < 3:
            raise ExpressionDataError(
                f"line {lineno}: expected name, description and >= 1 gene, "
                f"got {len(cells)} fields"
            )
        name = cells[0].strip()
        if not name:
            raise ExpressionDataError(f"line {lineno}: empty set name")
        if name in names:
            raise ExpressionDataError(f"line {lineno}: duplicate set name {name!r}")
        members = {canonical_gene_id(c) for c in cells[2:] if c.strip()}
        if not members:
            raise ExpressionDataError(f"line {lineno}: set {name!r} has no members")
        names.add(name)
        sets.append(GeneSet(name, cells[1].strip(), frozenset(members)))
    return GeneSetLibrary(tuple(sets))


def parse_design_tsv(text: str | TextIO | Iterable[str]) -> TwoClassDesign:
    """Parse a two-column design table: sample_id TAB class, class in {1,2}."""
    class1: list[str] = []
    class2: list[str] = []
    for lineno, line in enumerate(_as_lines(text), start=1):
        line = line.rstrip("\n").rstrip("\r")
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        cells = [c.strip() for c in line.split("\t")]
        if len(cells) != 2:
            raise ExpressionDataError(
                f"line {lineno}: expected sample_id and class, got {len(cells)} fields"
            )
        sample, label = cells
        if label == "1":
            class1.append(sample)
        elif label == "2":
            class2.append(sample)
        else:
            raise ExpressionDataError(
                f"line {lineno}: class must be 1 or 2, got {label!r}"
            )
    return TwoClassDesign(tuple(class1), tuple(class2))


def align_design(
    matrix: ExpressionMatrix, design: TwoClassDesign
) -> tuple[np.ndarray, np.ndarray]:
    """Split the matrix columns into the two class sub-matrices.

    Returns (X1, X2) with columns in design order and gene rows unchanged.
    Raises on sample ids missing from the matrix.
    """
    idx1 = [matrix.column_index(s) for s in design.class1_samples]
    idx2 = [matrix.column_index(s) for s in design.class2_samples]
    return matrix.values[:, idx1], matrix.values[:, idx2]


def matrix_to_tsv(matrix: ExpressionMatrix, out: TextIO) -> None:
    """Write the matrix as a TSV that parse_expression_tsv round-trips."""
    out.write("gene_id\t" + "\t".join(matrix.sample_ids) + "\n")
    for gid, row in zip(matrix.gene_ids, matrix.values):
        out.write(gid + "\t" + "\t".join(repr(float(v)) for v in row) + "\n")
