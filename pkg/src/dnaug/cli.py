"""Command-line interface.

Subcommands: ``augment`` (full pipeline run), ``tag`` (BIO labels for a
term list), ``score`` (ngm/cosine for pairs), ``stats`` (summarize a
dataset file), ``eval`` (retrieval evaluation with subsampling curves).
Exit codes: 0 success, 1 input error, 2 config error (argparse uses 2 for
bad flags as well).
"""

import argparse
import json
import sys
from pathlib import Path

from .evaluate import subsample_experiment
from .filtering import FilterConfig, HashedNgramEmbedder, load_embedding_file, score_pair
from .pipeline import (
    ConfigError,
    PipelineConfig,
    load_config_file,
    parse_axes,
    parse_methods,
    read_dataset,
    run,
)
from .tagging import LexiconTagger, spans_to_bio
from .terms import TermText
from .vocab import InputError, NormPair, load_axis_lexicons, load_task_pairs

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_CONFIG = 2


def _add_lexicon_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--centers", help="disease-center lexicon file")
    parser.add_argument("--regions", help="anatomical-region lexicon file")
    parser.add_argument("--characteristics", help="disease-characteristic lexicon file")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dnaug", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    augment = sub.add_parser("augment", help="run the full augmentation pipeline")
    augment.add_argument("--config", help="INI config file; flags override its values")
    augment.add_argument("--icd", help="coded vocabulary file")
    augment.add_argument("--task-pairs", help="seed normalization pairs file")
    augment.add_argument("--region-tree", help="child<TAB>parent region edges")
    _add_lexicon_flags(augment)
    augment.add_argument("--pretagged", help="JSONL with externally produced spans")
    augment.add_argument("--embeddings", help="TSV of precomputed vectors")
    augment.add_argument("--out", help="output directory")
    augment.add_argument("--seed", type=int, help="rng seed for sampling caps")
    augment.add_argument("--alpha", type=float, help="ngm threshold (strict >)")
    augment.add_argument("--beta", type=float, help="cosine threshold (strict >)")
    augment.add_argument("--methods", help="comma list: ar1,ar2,mga-code,mga-region")
    augment.add_argument("--axes", help="comma list: center,region,characteristic")
    augment.add_argument("--max-pairs-per-source", type=int, dest="max_pairs")
    augment.add_argument("--workers", type=int, help="parallel scoring workers")
    augment.add_argument("--format", choices=("tsv", "jsonl"), help="output format")
    augment.add_argument("--input-format", choices=("tsv", "jsonl"))

    tag = sub.add_parser("tag", help="emit BIO tags for a term list")
    tag.add_argument("terms", help="file with one term per line")
    _add_lexicon_flags(tag)
    tag.add_argument("--out", help="write TSV here instead of stdout")

    score = sub.add_parser("score", help="print ngm/cosine for pairs")
    score.add_argument("pair", nargs="*", metavar="TERM", help="two terms to score")
    score.add_argument("--pairs", help="TSV file: unnormalized<TAB>standard")
    score.add_argument("--embeddings", help="TSV of precomputed vectors")
    score.add_argument("--dim", type=int, default=256, help="hashed embedder dimension")

    stats = sub.add_parser("stats", help="summarize a dataset file")
    stats.add_argument("dataset", help="dataset file written by augment")
    stats.add_argument("--figure", help="render a summary figure to this path")

    evaluate = sub.add_parser("eval", help="measure augmentation effect on retrieval")
    evaluate.add_argument("--train", required=True, help="seed pairs (task format)")
    evaluate.add_argument("--augmented", help="augmented dataset file")
    evaluate.add_argument("--valid", required=True, help="held-out pairs (task format)")
    evaluate.add_argument("--k", type=int, default=5)
    evaluate.add_argument("--fractions", default="0.05,0.1,0.3,0.5,1.0")
    evaluate.add_argument("--seed", type=int, default=0)
    evaluate.add_argument("--zero-shot", action="store_true", help="add the augmented-only row")
    evaluate.add_argument("--out", help="directory for report.jsonl, summary.txt, curves.png")
    return parser


def _apply_overrides(cfg: PipelineConfig, args: argparse.Namespace) -> PipelineConfig:
    mapping = {
        "icd": "icd_path",
        "task_pairs": "task_pairs_path",
        "region_tree": "region_tree_path",
        "centers": "centers_path",
        "regions": "regions_path",
        "characteristics": "characteristics_path",
        "pretagged": "pretagged_path",
        "embeddings": "embedding_path",
        "out": "output_dir",
        "seed": "rng_seed",
        "alpha": "alpha",
        "beta": "beta",
        "max_pairs": "max_pairs_per_source",
        "workers": "workers",
        "format": "output_format",
        "input_format": "input_format",
    }
    for flag, attribute in mapping.items():
        value = getattr(args, flag, None)
        if value is not None:
            setattr(cfg, attribute, value)
    if args.methods is not None:
        cfg.methods = parse_methods(args.methods)
    if args.axes is not None:
        cfg.axes = parse_axes(args.axes)
    return cfg


def _cmd_augment(args: argparse.Namespace) -> int:
    if args.config:
        cfg = load_config_file(args.config)
    else:
        if not args.icd or not args.task_pairs:
            raise ConfigError("--icd and --task-pairs are required without --config")
        cfg = PipelineConfig(icd_path=args.icd, task_pairs_path=args.task_pairs)
    cfg = _apply_overrides(cfg, args)
    result = run(cfg)
    print(result.stats.format_table())
    print(f"augmented: {result.augmented_path}")
    print(f"original:  {result.original_path}")
    return EXIT_OK


def _load_terms(path: str) -> list[TermText]:
    with open(path, encoding="utf-8") as handle:
        return [TermText(line) for line in handle if line.strip()]


def _cmd_tag(args: argparse.Namespace) -> int:
    if not (args.centers and args.regions and args.characteristics):
        raise ConfigError("tag requires --centers, --regions and --characteristics")
    tagger = LexiconTagger(load_axis_lexicons(args.centers, args.regions, args.characteristics))
    lines = []
    for term in _load_terms(args.terms):
        labels = spans_to_bio(tagger.tag(term))
        lines.append(f"{term.raw}\t{' '.join(labels)}")
    output = "\n".join(lines) + ("\n" if lines else "")
    if args.out:
        Path(args.out).write_text(output, encoding="utf-8")
    else:
        sys.stdout.write(output)
    return EXIT_OK


def _cmd_score(args: argparse.Namespace) -> int:
    if args.embeddings:
        embedder = load_embedding_file(args.embeddings)
    else:
        embedder = HashedNgramEmbedder(dimension=args.dim)
    cfg = FilterConfig(embedder=embedder)
    pairs: list[tuple[str, str]] = []
    if args.pairs:
        with open(args.pairs, encoding="utf-8") as handle:
            for line in handle:
                line = line.rstrip("\n")
                if not line:
                    continue
                left, _, right = line.partition("\t")
                pairs.append((left, right))
    if args.pair:
        if len(args.pair) != 2:
            raise ConfigError("score expects exactly two positional terms")
        pairs.append((args.pair[0], args.pair[1]))
    if not pairs:
        raise ConfigError("nothing to score: give two terms or --pairs FILE")
    for left, right in pairs:
        probe = NormPair(TermText(left), TermText(right))
        ngm, cos = score_pair(probe, cfg)
        cos_text = "" if cos is None else repr(cos)
        print(f"{left}\t{right}\t{ngm!r}\t{cos_text}")
    return EXIT_OK


def _cmd_stats(args: argparse.Namespace) -> int:
    pairs = read_dataset(args.dataset)
    counts: dict[str, int] = {}
    for pair in pairs:
        counts[pair.provenance.value] = counts.get(pair.provenance.value, 0) + 1
    print(f"pairs: {len(pairs)}")
    for name in sorted(counts):
        print(f"  {name}: {counts[name]}")
    scored = [p for p in pairs if p.ngm is not None]
    if scored:
        ngm_values = sorted(p.ngm for p in scored)
        cos_values = sorted(p.cos for p in scored if p.cos is not None)
        print(f"ngm: min={ngm_values[0]:.4f} max={ngm_values[-1]:.4f}")
        if cos_values:
            print(f"cos: min={cos_values[0]:.4f} max={cos_values[-1]:.4f}")
    if args.figure:
        from .plots import render_dataset_stats

        print(f"figure: {render_dataset_stats(pairs, args.figure)}")
    return EXIT_OK


def _load_pairs_any(path: str) -> list[NormPair]:
    fmt = "jsonl" if path.endswith(".jsonl") else "tsv"
    return load_task_pairs(path, format=fmt)


def _cmd_eval(args: argparse.Namespace) -> int:
    train = _load_pairs_any(args.train)
    valid = _load_pairs_any(args.valid)
    augmented = read_dataset(args.augmented) if args.augmented else []
    try:
        fractions = [float(f) for f in args.fractions.split(",") if f.strip()]
    except ValueError:
        raise ConfigError(f"bad --fractions value {args.fractions!r}") from None
    if not fractions:
        raise ConfigError("no fractions given")

    rows = []
    for flag in (False, True) if augmented else (False,):
        pool = augmented if flag else []
        for fraction, report in subsample_experiment(
            train, valid, fractions, args.seed, flag, pool, k=args.k
        ):
            rows.append({"fraction": fraction, "with_augmentation": flag, **report.to_dict()})
    if augmented and args.zero_shot:
        for fraction, report in subsample_experiment(
            train, valid, [0.0], args.seed, True, augmented, k=args.k
        ):
            rows.append({"fraction": fraction, "with_augmentation": True, **report.to_dict()})

    header = f"{'frac':>6} {'aug':>5} {'acc':>8} {'f1':>8} {'recall@k':>9} {'ndcg@k':>8} {'n':>5}"
    lines = [header]
    for row in rows:
        lines.append(
            f"{row['fraction']:>6.2f} {str(row['with_augmentation']).lower():>5}"
            f" {row['accuracy']:>8.4f} {row['f1']:>8.4f}"
            f" {row['recall_at_5']:>9.4f} {row['ndcg_at_5']:>8.4f} {row['n_queries']:>5}"
        )
    summary = "\n".join(lines)
    print(summary)

    if args.out:
        out_dir = Path(args.out)
        out_dir.mkdir(parents=True, exist_ok=True)
        with open(out_dir / "report.jsonl", "w", encoding="utf-8") as handle:
            for row in rows:
                handle.write(json.dumps(row, ensure_ascii=False) + "\n")
        (out_dir / "summary.txt").write_text(summary + "\n", encoding="utf-8")
        from .plots import render_eval_curves

        figure = render_eval_curves(rows, out_dir / "curves.png", k=args.k)
        print(f"report: {out_dir / 'report.jsonl'}")
        print(f"figure: {figure}")
    return EXIT_OK


_COMMANDS = {
    "augment": _cmd_augment,
    "tag": _cmd_tag,
    "score": _cmd_score,
    "stats": _cmd_stats,
    "eval": _cmd_eval,
}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (InputError, OSError, ValueError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
