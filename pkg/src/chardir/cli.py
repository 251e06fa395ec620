"""Command-line front end: reproducible file-in/file-out pipelines.

Every subcommand writes its tables plus a ``manifest.json`` recording the
command, resolved parameters, input digests, seed and tool version;
re-running with the same manifest reproduces the outputs byte for byte.
Exit codes: 0 success, 1 analysis error, 2 usage error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .data import (
    ExpressionDataError,
    ExpressionMatrix,
    TwoClassDesign,
    align_design,
    canonical_gene_id,
    matrix_to_tsv,
    parse_design_tsv,
    parse_expression_tsv,
    parse_gmt,
)
from .direction import (
    CharacteristicDirection,
    NoDifferentialSignalError,
    call_significant,
    lr1_direction,
    np1_direction,
    write_ranked_json,
    write_ranked_tsv,
)
from .enrichment import (
    angle_enrich,
    dedupe_tss_associations,
    hypergeom_enrich,
    sliding_window_profile,
)
from .linalg import ZeroVarianceError
from .projection import density_estimate, project_hierarchy
from .simulate import (
    METHODS,
    SyntheticSpec,
    benchmark_roc,
    benchmark_sweep,
    generate,
    synthetic_gene_ids,
)
from .welch import UndefinedStatisticError, ttest_screen

USAGE_ERROR = 2
ANALYSIS_ERROR = 1

_ANALYSIS_ERRORS = (
    ExpressionDataError,
    ZeroVarianceError,
    NoDifferentialSignalError,
    UndefinedStatisticError,
    ValueError,
    OSError,
)


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _sha256(path: Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as handle:
        for chunk in iter(lambda: handle.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


def _write_manifest(out_dir: Path, command: str, params: dict, inputs: dict, seed: int) -> None:
    manifest = {
        "command": command,
        "parameters": {k: params[k] for k in sorted(params)},
        "input_digests": {name: _sha256(Path(p)) for name, p in sorted(inputs.items())},
        "seed": seed,
        "tool_version": __version__,
    }
    with open(out_dir / "manifest.json", "w") as handle:
        json.dump(manifest, handle, indent=2, sort_keys=True)
        handle.write("\n")


def _resolve_seed(args) -> int:
    if args.seed is not None:
        return args.seed
    seed = int(np.random.SeedSequence().entropy % (2**63))
    print(f"seed: {seed} (drawn; pass --seed to reproduce)")
    return seed


def _check_input_file(parser: argparse.ArgumentParser, flag: str, path: str | None):
    if path is None:
        return None
    path = Path(path)
    if not path.is_file():
        parser.error(f"{flag}: file not found: {path}")
    return path


def _load_matrix(args) -> ExpressionMatrix:
    with open(args.expression) as handle:
        return parse_expression_tsv(
            handle,
            already_log=not args.log2_transform,
            pseudocount=args.pseudocount,
        )


def _resolve_design(parser, args) -> TwoClassDesign:
    if args.design is not None:
        if args.class1 or args.class2:
            parser.error("--design cannot be combined with --class1/--class2")
        with open(args.design) as handle:
            return parse_design_tsv(handle)
    if not (args.class1 and args.class2):
        parser.error("provide --design, or both --class1 and --class2")
    split = lambda v: tuple(s.strip() for s in v.split(",") if s.strip())
    return TwoClassDesign(split(args.class1), split(args.class2))


def _read_gene_lines(path: Path) -> list[str]:
    genes = []
    with open(path) as handle:
        for line in handle:
            line = line.strip()
            if line and not line.startswith("#"):
                genes.append(canonical_gene_id(line))
    return genes


def _read_ranked_file(path: Path):
    """Read a ranked-gene or Welch output TSV.

    Returns (ranking, significant, coefficients, method) where ranking is
    the row order, coefficients maps gene to coefficient when that column
    exists (None otherwise), and method comes from the comment header when
    present.
    """
    ranking: list[str] = []
    significant: list[str] = []
    coefficients: dict[str, float] | None = None
    method = None
    header = None
    with open(path) as handle:
        for line in handle:
            line = line.rstrip("\n")
            if not line.strip():
                continue
            if line.startswith("#"):
                comment = line.lstrip("#").strip()
                if comment.startswith("method:"):
                    method = comment.split(":", 1)[1].strip()
                continue
            cells = line.split("\t")
            if header is None:
                header = cells
                for column in ("gene_id", "significant"):
                    if column not in header:
                        raise ValueError(
                            f"{path}: expected a '{column}' column in the ranked file"
                        )
                if "coefficient" in header:
                    coefficients = {}
                continue
            row = dict(zip(header, cells))
            gene = row["gene_id"]
            ranking.append(gene)
            if row["significant"] == "true":
                significant.append(gene)
            if coefficients is not None:
                coefficients[gene] = float(row["coefficient"])
    if header is None:
        raise ValueError(f"{path}: empty ranked file")
    return ranking, significant, coefficients, method


# ---------------------------------------------------------------------------
# Table writers


def _write_welch_tsv(results, out_path: Path) -> None:
    with open(out_path, "w") as out:
        out.write("# two-sided p-values\n")
        out.write("gene_id\tt\tdf\tp\tq\tsignificant\tdiagnostic\n")
        for r in results:
            out.write(
                "\t".join(
                    [r.gene_id, _fmt(r.t), _fmt(r.df), _fmt(r.p), _fmt(r.q),
                     _fmt(r.significant), r.diagnostic]
                )
                + "\n"
            )


def _write_enrichment_tsv(results, out_path: Path) -> None:
    with open(out_path, "w") as out:
        out.write("set_name\toverlap\tset_size\tp\tq\tmean_rank\tdiagnostic\n")
        for r in results:
            out.write(
                "\t".join(
                    [r.set_name, str(r.overlap), str(r.set_size_in_universe),
                     _fmt(r.p), _fmt(r.q), _fmt(r.mean_rank), r.diagnostic]
                )
                + "\n"
            )


def _write_angle_enrichment_tsv(results, out_path: Path) -> None:
    with open(out_path, "w") as out:
        out.write("set_name\ttheta\tp\tq\tdiagnostic\n")
        for r in results:
            out.write(
                "\t".join([r.set_name, _fmt(r.theta), _fmt(r.p), _fmt(r.q), r.diagnostic])
                + "\n"
            )


def _write_profile_tsv(profile, out_path: Path) -> None:
    with open(out_path, "w") as out:
        out.write("mean_distance\tminus_log10_p\n")
        for mean_distance, p in profile:
            minus_log10 = -math.log10(p) if p > 0 else math.inf
            out.write(f"{_fmt(mean_distance)}\t{_fmt(minus_log10)}\n")


# ---------------------------------------------------------------------------
# Subcommands


def _cmd_chdir(parser, args) -> int:
    matrix = _load_matrix(args)
    design = _resolve_design(parser, args)
    x1, x2 = align_design(matrix, design)
    seed = _resolve_seed(args)

    if args.method == "lr1":
        direction = lr1_direction(
            matrix.gene_ids, x1, x2, args.epsilon, args.max_components
        )
    else:
        direction = np1_direction(
            matrix.gene_ids, x1, x2, args.permutations, np.random.default_rng(seed)
        )
    call = call_significant(direction, args.alpha)

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    if args.format == "tsv":
        out_path = out_dir / "ranked_genes.tsv"
        with open(out_path, "w") as handle:
            write_ranked_tsv(call, handle, method=direction.method)
    else:
        out_path = out_dir / "ranked_genes.json"
        with open(out_path, "w") as handle:
            write_ranked_json(call, handle, method=direction.method)

    inputs = {"expression": args.expression}
    if args.design:
        inputs["design"] = args.design
    _write_manifest(
        out_dir,
        "chdir",
        {
            "expression": str(args.expression),
            "design": str(args.design) if args.design else "",
            "class1": args.class1 or "",
            "class2": args.class2 or "",
            "method": args.method,
            "alpha": args.alpha,
            "epsilon": args.epsilon,
            "max_components": args.max_components,
            "permutations": args.permutations,
            "log2_transform": args.log2_transform,
            "pseudocount": args.pseudocount,
            "format": args.format,
            "out": str(args.out),
        },
        inputs,
        seed,
    )
    print(
        f"{direction.method}: {len(call.ranked_genes)} genes ranked, "
        f"{call.selected_count} significant at alpha={args.alpha} "
        f"(magnitude {direction.magnitude:.4g}); wrote {out_path}"
    )
    return 0


def _cmd_ttest(parser, args) -> int:
    matrix = _load_matrix(args)
    design = _resolve_design(parser, args)
    x1, x2 = align_design(matrix, design)
    seed = _resolve_seed(args)

    results = ttest_screen(matrix.gene_ids, x1, x2, args.fdr)
    ranked = sorted(results, key=lambda r: (r.p, r.gene_id))

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    out_path = out_dir / "welch_results.tsv"
    _write_welch_tsv(ranked, out_path)

    inputs = {"expression": args.expression}
    if args.design:
        inputs["design"] = args.design
    _write_manifest(
        out_dir,
        "ttest",
        {
            "expression": str(args.expression),
            "design": str(args.design) if args.design else "",
            "class1": args.class1 or "",
            "class2": args.class2 or "",
            "fdr": args.fdr,
            "log2_transform": args.log2_transform,
            "pseudocount": args.pseudocount,
            "out": str(args.out),
        },
        inputs,
        seed,
    )
    n_sig = sum(r.significant for r in results)
    print(f"welch: {len(results)} genes tested, {n_sig} significant at FDR {args.fdr}; wrote {out_path}")
    return 0


def _cmd_enrich(parser, args) -> int:
    seed = _resolve_seed(args)
    with open(args.gmt) as handle:
        library = parse_gmt(handle)

    if args.ranked:
        ranking, significant, coefficients, method = _read_ranked_file(Path(args.ranked))
        universe = _read_gene_lines(Path(args.universe)) if args.universe else ranking
    else:
        if not args.universe:
            parser.error("--genes requires --universe")
        significant = _read_gene_lines(Path(args.genes))
        universe = _read_gene_lines(Path(args.universe))
        ranking, coefficients, method = None, None, None

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    out_path = out_dir / "enrichment.tsv"

    if args.mode == "hypergeom":
        results = hypergeom_enrich(significant, library, universe, ranking)
        _write_enrichment_tsv(results, out_path)
        top = results[0].set_name if results else "none"
    else:
        if coefficients is None:
            raise ValueError(
                "--mode angle needs a ranked file with a coefficient column "
                "(the chdir command's output)"
            )
        direction = CharacteristicDirection(
            gene_ids=tuple(ranking),
            coefficients=np.array([coefficients[g] for g in ranking]),
            method=method or "LR1",
            magnitude=float("nan"),
        )
        results = angle_enrich(direction, library)
        _write_angle_enrichment_tsv(results, out_path)
        top = results[0].set_name if results else "none"

    inputs = {"gmt": args.gmt}
    if args.ranked:
        inputs["ranked"] = args.ranked
    if args.genes:
        inputs["genes"] = args.genes
    if args.universe:
        inputs["universe"] = args.universe
    _write_manifest(
        out_dir,
        "enrich",
        {
            "ranked": str(args.ranked) if args.ranked else "",
            "genes": str(args.genes) if args.genes else "",
            "universe": str(args.universe) if args.universe else "",
            "gmt": str(args.gmt),
            "mode": args.mode,
            "fdr": args.fdr,
            "out": str(args.out),
        },
        inputs,
        seed,
    )
    n_hits = sum(1 for r in results if r.q <= args.fdr and not r.diagnostic)
    print(
        f"enrich ({args.mode}): {len(results)} sets tested, {n_hits} at FDR {args.fdr}, "
        f"top hit {top}; wrote {out_path}"
    )
    return 0


def _cmd_profile(parser, args) -> int:
    seed = _resolve_seed(args)
    pairs = []
    with open(args.associations) as handle:
        for lineno, line in enumerate(handle, start=1):
            line = line.rstrip("\n")
            if not line.strip() or line.startswith("#"):
                continue
            cells = line.split("\t")
            if lineno == 1 and cells[0] == "gene_id":
                continue
            if len(cells) != 2:
                raise ValueError(
                    f"{args.associations}: line {lineno}: expected gene_id and distance"
                )
            pairs.append((canonical_gene_id(cells[0]), float(cells[1])))

    assoc = dedupe_tss_associations(pairs)
    significant = _read_gene_lines(Path(args.significant))
    profile = sliding_window_profile(assoc, significant, args.window, args.universe)

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    out_path = out_dir / "profile.tsv"
    _write_profile_tsv(profile, out_path)

    _write_manifest(
        out_dir,
        "profile",
        {
            "associations": str(args.associations),
            "significant": str(args.significant),
            "window": args.window,
            "universe": args.universe,
            "out": str(args.out),
        },
        {"associations": args.associations, "significant": args.significant},
        seed,
    )
    print(f"profile: {len(profile)} windows over {len(assoc)} genes; wrote {out_path}")
    return 0


def _cmd_project(parser, args) -> int:
    matrix = _load_matrix(args)
    design = _resolve_design(parser, args)
    x1, x2 = align_design(matrix, design)
    seed = _resolve_seed(args)

    hierarchy = project_hierarchy(
        matrix.gene_ids, x1, x2, args.depth, args.epsilon, args.max_components
    )
    sample_ids = list(design.class1_samples) + list(design.class2_samples)

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)

    proj_path = out_dir / "projection.tsv"
    with open(proj_path, "w") as out:
        if hierarchy.truncated_reason:
            out.write(f"# truncated: {hierarchy.truncated_reason}\n")
        cd_cols = [f"cd{i + 1}" for i in range(hierarchy.depth)]
        out.write("sample_id\tclass\t" + "\t".join(cd_cols) + "\n")
        for j, sid in enumerate(sample_ids):
            coords = [_fmt(float(hierarchy.coords[i, j])) for i in range(hierarchy.depth)]
            out.write(f"{sid}\t{hierarchy.class_of_sample[j]}\t" + "\t".join(coords) + "\n")

    bandwidth = None if args.bandwidth == "auto" else float(args.bandwidth)
    n1 = len(design.class1_samples)
    level1 = hierarchy.coords[0]
    curve1 = density_estimate(level1[:n1], bandwidth)
    curve2 = density_estimate(level1[n1:], bandwidth)
    # Resample both classes onto a shared grid spanning the union.
    lo = min(curve1.grid[0], curve2.grid[0])
    hi = max(curve1.grid[-1], curve2.grid[-1])
    grid = np.linspace(lo, hi, len(curve1.grid))
    dens1 = np.interp(grid, curve1.grid, curve1.density, left=0.0, right=0.0)
    dens2 = np.interp(grid, curve2.grid, curve2.density, left=0.0, right=0.0)
    density_path = out_dir / "density.tsv"
    with open(density_path, "w") as out:
        out.write("grid_x\tdensity_class1\tdensity_class2\n")
        for x, d1, d2 in zip(grid, dens1, dens2):
            out.write(f"{_fmt(float(x))}\t{_fmt(float(d1))}\t{_fmt(float(d2))}\n")

    from .linalg import pca_reduce

    _, scores = pca_reduce(
        np.hstack([x1, x2]), args.epsilon, max(2, args.max_components)
    )
    pca_path = out_dir / "pca.tsv"
    with open(pca_path, "w") as out:
        out.write("sample_id\tclass\tpc1\tpc2\n")
        for j, sid in enumerate(sample_ids):
            pc2 = float(scores[1, j]) if scores.shape[0] > 1 else 0.0
            out.write(
                f"{sid}\t{hierarchy.class_of_sample[j]}\t"
                f"{_fmt(float(scores[0, j]))}\t{_fmt(pc2)}\n"
            )

    inputs = {"expression": args.expression}
    if args.design:
        inputs["design"] = args.design
    _write_manifest(
        out_dir,
        "project",
        {
            "expression": str(args.expression),
            "design": str(args.design) if args.design else "",
            "class1": args.class1 or "",
            "class2": args.class2 or "",
            "depth": args.depth,
            "epsilon": args.epsilon,
            "max_components": args.max_components,
            "bandwidth": args.bandwidth,
            "log2_transform": args.log2_transform,
            "pseudocount": args.pseudocount,
            "out": str(args.out),
        },
        inputs,
        seed,
    )
    note = f" ({hierarchy.truncated_reason})" if hierarchy.truncated_reason else ""
    print(
        f"project: depth {hierarchy.depth}{note}; wrote {proj_path}, "
        f"{density_path}, {pca_path}"
    )
    return 0


def _spec_from_args(args, samples_per_class: int, seed: int) -> SyntheticSpec:
    return SyntheticSpec(
        n_genes=args.n_genes,
        samples_per_class=samples_per_class,
        seed=seed,
        intrinsic_dim=args.intrinsic_dim,
        variance_scale=args.variance_scale,
        frac_correlating=args.frac_correlating,
        frac_de=args.frac_de,
        de_magnitude=args.de_magnitude,
    )


def _spec_params(args) -> dict:
    return {
        "n_genes": args.n_genes,
        "intrinsic_dim": args.intrinsic_dim,
        "variance_scale": args.variance_scale,
        "frac_correlating": args.frac_correlating,
        "frac_de": args.frac_de,
        "de_magnitude": args.de_magnitude,
    }


def _cmd_simulate(parser, args) -> int:
    seed = _resolve_seed(args)
    spec = _spec_from_args(args, args.samples_per_class, seed)
    outcome = generate(spec)

    gene_ids = synthetic_gene_ids(spec.n_genes)
    n = spec.samples_per_class
    sample_ids = tuple(
        [f"ctrl_{i + 1}" for i in range(n)] + [f"pert_{i + 1}" for i in range(n)]
    )
    matrix = ExpressionMatrix(
        gene_ids, sample_ids, np.hstack([outcome.x_control, outcome.x_perturbed])
    )

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    expr_path = out_dir / "expression.tsv"
    with open(expr_path, "w") as handle:
        matrix_to_tsv(matrix, handle)
    design_path = out_dir / "design.tsv"
    with open(design_path, "w") as handle:
        for sid in sample_ids[:n]:
            handle.write(f"{sid}\t1\n")
        for sid in sample_ids[n:]:
            handle.write(f"{sid}\t2\n")
    truth_path = out_dir / "truth.gmt"
    planted = [g for g, m in zip(gene_ids, outcome.de_mask) if m]
    with open(truth_path, "w") as handle:
        handle.write("TRUE_DE\tplanted differentially expressed genes\t")
        handle.write("\t".join(planted) + "\n")

    _write_manifest(
        out_dir,
        "simulate",
        {**_spec_params(args), "samples_per_class": args.samples_per_class, "out": str(args.out)},
        {},
        seed,
    )
    print(
        f"simulate: {spec.n_genes} genes x {2 * n} samples, "
        f"{len(planted)} planted DE genes; wrote {expr_path}, {design_path}, {truth_path}"
    )
    return 0


def _cmd_benchmark(parser, args) -> int:
    seed = _resolve_seed(args)
    sizes = [int(s) for s in args.sizes.split(",") if s.strip()]
    if not sizes:
        parser.error("--sizes must list at least one sample size")
    methods = tuple(m.strip().upper() for m in args.methods.split(",") if m.strip())

    template = _spec_from_args(args, max(sizes), seed)
    cells = benchmark_sweep(template, sizes, args.runs, methods, n_jobs=args.jobs)
    curves = benchmark_roc(
        template, args.roc_samples, args.runs, methods, n_jobs=args.jobs
    )

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    sweep_path = out_dir / "sweep.tsv"
    with open(sweep_path, "w") as out:
        out.write("method\tsamples_per_class\tmean_gini\tstderr\tn_runs\tn_excluded\n")
        for cell in cells:
            out.write(
                "\t".join(
                    [cell.method, str(cell.samples_per_class), _fmt(cell.mean_gini),
                     _fmt(cell.stderr), str(cell.n_runs), str(cell.n_excluded)]
                )
                + "\n"
            )
    roc_path = out_dir / "roc.tsv"
    with open(roc_path, "w") as out:
        out.write("method\tfpr\ttpr\n")
        for curve in curves:
            for fpr, tpr in zip(curve.fpr, curve.tpr):
                out.write(f"{curve.method}\t{_fmt(float(fpr))}\t{_fmt(float(tpr))}\n")

    _write_manifest(
        out_dir,
        "benchmark",
        {
            **_spec_params(args),
            "sizes": args.sizes,
            "runs": args.runs,
            "methods": args.methods,
            "roc_samples": args.roc_samples,
            "jobs": args.jobs,
            "out": str(args.out),
        },
        {},
        seed,
    )
    print(f"benchmark: {len(sizes)} sizes x {args.runs} runs; wrote {sweep_path}, {roc_path}")
    return 0


# ---------------------------------------------------------------------------
# Parser assembly


def _add_expression_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--expression", required=True, help="expression TSV (genes x samples)")
    p.add_argument(
        "--log2-transform",
        action="store_true",
        help="input is raw scale; store log2(x + pseudocount)",
    )
    p.add_argument("--pseudocount", type=float, default=1.0)


def _add_design_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--design", help="two-column TSV: sample_id, class in {1,2}")
    p.add_argument("--class1", help="comma-separated class-1 (control) sample ids")
    p.add_argument("--class2", help="comma-separated class-2 (treatment) sample ids")


def _add_common_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, default=None, help="master random seed")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--config", help="flat key=value file of flag defaults")


def _add_spec_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--n-genes", type=int, default=100)
    p.add_argument("--intrinsic-dim", type=int, default=2)
    p.add_argument("--variance-scale", type=float, default=40.0)
    p.add_argument("--frac-correlating", type=float, default=0.1)
    p.add_argument("--frac-de", type=float, default=0.1)
    p.add_argument("--de-magnitude", type=float, default=5.0)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="chardir",
        description="Characteristic-direction differential expression toolkit",
    )
    parser.add_argument("--version", action="version", version=f"chardir {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("chdir", help="rank genes by a characteristic direction")
    _add_expression_args(p)
    _add_design_args(p)
    p.add_argument("--method", choices=("lr1", "np1"), default="lr1")
    p.add_argument("--alpha", type=float, default=0.3, help="cumulative squared-coefficient cutoff")
    p.add_argument("--epsilon", type=float, default=1e-3, help="PCA unexplained-variance budget")
    p.add_argument("--max-components", type=int, default=20)
    p.add_argument("--permutations", type=int, default=200, help="np1 label shuffles")
    p.add_argument("--format", choices=("tsv", "json"), default="tsv")
    _add_common_args(p)
    p.set_defaults(func=_cmd_chdir)

    p = sub.add_parser("ttest", help="Welch t-test screen with BH correction")
    _add_expression_args(p)
    _add_design_args(p)
    p.add_argument("--fdr", type=float, default=0.05)
    _add_common_args(p)
    p.set_defaults(func=_cmd_ttest)

    p = sub.add_parser("enrich", help="gene-set enrichment of a result file")
    p.add_argument("--ranked", help="ranked TSV from the chdir or ttest command")
    p.add_argument("--genes", help="plain significant-gene list (one id per line)")
    p.add_argument("--universe", help="universe gene list (one id per line)")
    p.add_argument("--gmt", required=True, help="gene-set library, GMT format")
    p.add_argument("--mode", choices=("hypergeom", "angle"), default="hypergeom")
    p.add_argument("--fdr", type=float, default=0.05)
    _add_common_args(p)
    p.set_defaults(func=_cmd_enrich)

    p = sub.add_parser("profile", help="sliding-window enrichment along TSS distances")
    p.add_argument("--associations", required=True, help="TSV: gene_id, distance")
    p.add_argument("--significant", required=True, help="significant-gene list")
    p.add_argument("--window", type=int, required=True, help="window size in genes")
    p.add_argument("--universe", type=int, required=True, help="total genes measured")
    _add_common_args(p)
    p.set_defaults(func=_cmd_profile)

    p = sub.add_parser("project", help="projection plot data (directions, KDE, PCA)")
    _add_expression_args(p)
    _add_design_args(p)
    p.add_argument("--depth", type=int, default=2)
    p.add_argument("--epsilon", type=float, default=1e-3)
    p.add_argument("--max-components", type=int, default=20)
    p.add_argument("--bandwidth", default="auto", help="KDE bandwidth or 'auto'")
    _add_common_args(p)
    p.set_defaults(func=_cmd_project)

    p = sub.add_parser("simulate", help="draw a synthetic dataset with known truth")
    _add_spec_args(p)
    p.add_argument("--samples-per-class", type=int, required=True)
    _add_common_args(p)
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("benchmark", help="method-recovery sweep on synthetic data")
    _add_spec_args(p)
    p.add_argument("--sizes", default="3,4,5,6,8,10", help="comma-separated sample sizes")
    p.add_argument("--runs", type=int, default=100)
    p.add_argument(
        "--methods", default="lr1,welch", help=f"comma-separated subset of {METHODS}"
    )
    p.add_argument("--roc-samples", type=int, required=True, help="sample size for the ROC table")
    p.add_argument("--jobs", type=int, default=1, help="parallel workers")
    _add_common_args(p)
    p.set_defaults(func=_cmd_benchmark)

    return parser


def _expand_config(argv: list[str]) -> list[str]:
    """Inject key=value pairs from --config as flags before the explicit
    ones, so the command line wins on conflicts."""
    if "--config" not in argv:
        return argv
    at = argv.index("--config")
    if at + 1 >= len(argv):
        return argv  # argparse will report the missing value
    config_path = Path(argv[at + 1])
    if not config_path.is_file():
        raise FileNotFoundError(f"--config: file not found: {config_path}")
    injected: list[str] = []
    with open(config_path) as handle:
        for lineno, line in enumerate(handle, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ValueError(f"{config_path}: line {lineno}: expected key=value")
            key, value = (part.strip() for part in line.split("=", 1))
            flag = "--" + key.replace("_", "-")
            if value.lower() in ("true", "false"):
                if value.lower() == "true":
                    injected.append(flag)
            else:
                injected.extend([flag, value])
    # Insert after the subcommand (first non-flag token).
    for i, token in enumerate(argv):
        if not token.startswith("-"):
            return argv[: i + 1] + injected + argv[i + 1 :]
    return argv + injected


_INPUT_FILE_FLAGS = (
    ("expression", "--expression"),
    ("design", "--design"),
    ("ranked", "--ranked"),
    ("genes", "--genes"),
    ("universe", "--universe"),
    ("gmt", "--gmt"),
    ("associations", "--associations"),
    ("significant", "--significant"),
)


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        argv = _expand_config(argv)
    except (FileNotFoundError, ValueError) as exc:
        parser.exit(USAGE_ERROR, f"{parser.prog}: error: {exc}\n")
    args = parser.parse_args(argv)

    for attr, flag in _INPUT_FILE_FLAGS:
        value = getattr(args, attr, None)
        if attr == "universe" and args.command == "profile":
            continue  # integer flag, not a file, on this subcommand
        if isinstance(value, str):
            _check_input_file(parser, flag, value)

    try:
        return args.func(parser, args)
    except _ANALYSIS_ERRORS as exc:
        print(f"chardir {args.command}: error: {exc}", file=sys.stderr)
        return ANALYSIS_ERROR


if __name__ == "__main__":
    sys.exit(main())
