"""End-to-end augmentation runs.

A run loads every knowledge source, tags all surface strings, generates
candidates with the enabled methods, filters the generated pairs, removes
duplicates, canonically sorts, and writes two dataset files into the output
directory: ``augmented.<ext>`` (the generated pretraining pool) and
``original.<ext>`` (the seed pairs), so a downstream trainer can pretrain
on the former and fine-tune on the latter.  Given identical inputs, config,
and seed, the dataset files are byte-identical across runs.
"""

import configparser
import json
import logging
import time
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path

from .augment import (
    GENERATED_PROVENANCES,
    AugConfig,
    TaggedIndex,
    ar1,
    ar2,
    mga_code,
    mga_region,
)
from .filtering import FilterConfig, HashedNgramEmbedder, filter_pairs, load_embedding_file
from .tagging import AxisLabel, LexiconTagger, PretaggedTagger, load_pretagged
from .vocab import (
    PROVENANCE_PRIORITY,
    InputError,
    NormPair,
    Provenance,
    TermText,
    load_axis_lexicons,
    load_icd,
    load_region_tree,
    load_task_pairs,
    pair_sort_key,
    tagged_terms_needed,
)

log = logging.getLogger(__name__)

DATASET_COLUMNS = ("unnormalized", "standard", "standard_code", "provenance", "ngm", "cos")


class ConfigError(Exception):
    """Invalid pipeline configuration (as opposed to bad input data)."""


@dataclass
class PipelineConfig:
    icd_path: str
    task_pairs_path: str
    centers_path: str | None = None
    regions_path: str | None = None
    characteristics_path: str | None = None
    region_tree_path: str | None = None
    pretagged_path: str | None = None
    embedding_path: str | None = None
    output_dir: str = "out"
    output_format: str = "jsonl"
    input_format: str = "tsv"
    gold_delimiter: str = "##"
    methods: frozenset[Provenance] = frozenset(GENERATED_PROVENANCES)
    axes: frozenset[AxisLabel] = frozenset(AxisLabel)
    max_pairs_per_source: int = 20
    alpha: float = 0.7
    beta: float = 0.8
    ngm_mode: str = "multiset"
    embedding_dim: int = 256
    rng_seed: int = 0
    workers: int = 1

    def validate(self) -> None:
        if self.output_format not in ("tsv", "jsonl"):
            raise ConfigError(f"unknown output format {self.output_format!r}")
        if self.input_format not in ("tsv", "jsonl"):
            raise ConfigError(f"unknown input format {self.input_format!r}")
        if self.ngm_mode not in ("multiset", "distinct"):
            raise ConfigError(f"unknown ngm mode {self.ngm_mode!r}")
        if Provenance.MGA_REGION in self.methods and not self.region_tree_path:
            raise ConfigError("mga-region requires a region tree file")
        needs_tags = bool(self.methods)
        has_lexicons = all((self.centers_path, self.regions_path, self.characteristics_path))
        if needs_tags and not has_lexicons and not self.pretagged_path:
            raise ConfigError("augmentation needs the three lexicon files or a pre-tagged file")


_METHOD_NAMES = {p.value: p for p in GENERATED_PROVENANCES}
_AXIS_NAMES = {label.value: label for label in AxisLabel}


def parse_methods(value: str) -> frozenset[Provenance]:
    names = [part.strip() for part in value.split(",") if part.strip()]
    try:
        return frozenset(_METHOD_NAMES[name] for name in names)
    except KeyError as exc:
        raise ConfigError(f"unknown method {exc.args[0]!r} (expected {sorted(_METHOD_NAMES)})") from None


def parse_axes(value: str) -> frozenset[AxisLabel]:
    names = [part.strip() for part in value.split(",") if part.strip()]
    try:
        return frozenset(_AXIS_NAMES[name] for name in names)
    except KeyError as exc:
        raise ConfigError(f"unknown axis {exc.args[0]!r} (expected {sorted(_AXIS_NAMES)})") from None


def load_config_file(path: str | Path) -> PipelineConfig:
    """Read the declarative key/value run description (INI sections
    [inputs], [augment], [filter], [output]); every key mirrors a CLI flag."""
    parser = configparser.ConfigParser()
    read = parser.read(path, encoding="utf-8")
    if not read:
        raise ConfigError(f"cannot read config file {path}")
    base = Path(path).resolve().parent

    def resolve(section: str, key: str) -> str | None:
        value = parser.get(section, key, fallback=None)
        if value is None or not value.strip():
            return None
        candidate = Path(value.strip())
        return str(candidate if candidate.is_absolute() else base / candidate)

    inputs, aug, flt, out = "inputs", "augment", "filter", "output"
    icd = resolve(inputs, "icd")
    task = resolve(inputs, "task_pairs")
    if not icd or not task:
        raise ConfigError("config must provide [inputs] icd and task_pairs")
    cfg = PipelineConfig(icd_path=icd, task_pairs_path=task)
    cfg.centers_path = resolve(inputs, "centers")
    cfg.regions_path = resolve(inputs, "regions")
    cfg.characteristics_path = resolve(inputs, "characteristics")
    cfg.region_tree_path = resolve(inputs, "region_tree")
    cfg.pretagged_path = resolve(inputs, "pretagged")
    cfg.embedding_path = resolve(inputs, "embeddings")
    cfg.input_format = parser.get(inputs, "format", fallback=cfg.input_format)
    cfg.gold_delimiter = parser.get(inputs, "gold_delimiter", fallback=cfg.gold_delimiter)
    try:
        if parser.has_option(aug, "methods"):
            cfg.methods = parse_methods(parser.get(aug, "methods"))
        if parser.has_option(aug, "axes"):
            cfg.axes = parse_axes(parser.get(aug, "axes"))
        cfg.max_pairs_per_source = parser.getint(aug, "max_pairs_per_source", fallback=cfg.max_pairs_per_source)
        cfg.rng_seed = parser.getint(aug, "seed", fallback=cfg.rng_seed)
        cfg.alpha = parser.getfloat(flt, "alpha", fallback=cfg.alpha)
        cfg.beta = parser.getfloat(flt, "beta", fallback=cfg.beta)
        cfg.ngm_mode = parser.get(flt, "ngm_mode", fallback=cfg.ngm_mode)
        cfg.embedding_dim = parser.getint(flt, "embedding_dim", fallback=cfg.embedding_dim)
        cfg.workers = parser.getint(out, "workers", fallback=cfg.workers)
    except ValueError as exc:
        raise ConfigError(f"bad value in config file: {exc}") from None
    out_dir = resolve(out, "dir")
    if out_dir:
        cfg.output_dir = out_dir
    cfg.output_format = parser.get(out, "format", fallback=cfg.output_format)
    return cfg


@dataclass
class ProvenanceStats:
    generated: int = 0
    kept: int = 0
    dropped: dict[str, int] = field(default_factory=dict)
    dedup_removed: int = 0

    @property
    def dropped_total(self) -> int:
        return sum(self.dropped.values())


@dataclass
class RunStats:
    """Per-provenance accounting; generated = kept + dropped + dedup_removed."""

    per_provenance: dict[str, ProvenanceStats]
    wall_time_seconds: float = 0.0

    def check_conservation(self) -> None:
        for name, stats in self.per_provenance.items():
            total = stats.kept + stats.dropped_total + stats.dedup_removed
            if total != stats.generated:
                raise AssertionError(f"{name}: {total} != generated {stats.generated}")

    def format_table(self) -> str:
        lines = [
            f"{'provenance':<12}{'generated':>10}{'kept':>8}{'dropped':>9}{'dedup':>7}",
        ]
        for name in sorted(self.per_provenance):
            s = self.per_provenance[name]
            lines.append(
                f"{name:<12}{s.generated:>10}{s.kept:>8}{s.dropped_total:>9}{s.dedup_removed:>7}"
            )
            for reason in sorted(s.dropped):
                lines.append(f"{'':<12}  - {reason}: {s.dropped[reason]}")
        lines.append(f"wall time: {self.wall_time_seconds:.2f}s")
        return "\n".join(lines)

    def to_json(self) -> str:
        payload = {
            name: {
                "generated": s.generated,
                "kept": s.kept,
                "dropped": dict(sorted(s.dropped.items())),
                "dedup_removed": s.dedup_removed,
            }
            for name, s in sorted(self.per_provenance.items())
        }
        payload["wall_time_seconds"] = round(self.wall_time_seconds, 3)
        return json.dumps(payload, ensure_ascii=False, indent=2)


def dedupe(pairs: list[NormPair]) -> list[NormPair]:
    """Collapse exact (unnormalized, standard) duplicates, keeping the
    highest-priority provenance (original > ar2 > ar1 > mga-code >
    mga-region); generated pairs that replicate an original pair vanish."""
    best: dict[tuple[str, str], NormPair] = {}
    for pair in sorted(pairs, key=pair_sort_key):
        key = pair.key()
        held = best.get(key)
        if held is None or PROVENANCE_PRIORITY[pair.provenance] < PROVENANCE_PRIORITY[held.provenance]:
            best[key] = pair
    return sorted(best.values(), key=pair_sort_key)


def _format_float(value: float | None) -> str:
    return "" if value is None else repr(value)


def write_dataset(pairs: list[NormPair], path: str | Path, format: str = "jsonl") -> None:
    """Serialize pairs (UTF-8, LF).  Columns/keys: unnormalized, standard,
    standard_code, provenance, ngm, cos."""
    path = Path(path)
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        for pair in pairs:
            if format == "jsonl":
                record = {
                    "unnormalized": pair.unnormalized.raw,
                    "standard": pair.standard.raw,
                    "standard_code": pair.standard_code,
                    "provenance": pair.provenance.value,
                    "ngm": pair.ngm,
                    "cos": pair.cos,
                }
                handle.write(json.dumps(record, ensure_ascii=False) + "\n")
            elif format == "tsv":
                handle.write(
                    "\t".join(
                        (
                            pair.unnormalized.raw,
                            pair.standard.raw,
                            pair.standard_code or "",
                            pair.provenance.value,
                            _format_float(pair.ngm),
                            _format_float(pair.cos),
                        )
                    )
                    + "\n"
                )
            else:
                raise ValueError(f"unknown format {format!r}")


def read_dataset(path: str | Path, format: str | None = None) -> list[NormPair]:
    """Inverse of write_dataset; format inferred from the extension when
    not given."""
    path = Path(path)
    if format is None:
        format = "jsonl" if path.suffix == ".jsonl" else "tsv"
    pairs = []
    with open(path, encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            if format == "jsonl":
                record = json.loads(line)
                code = record.get("standard_code")
                ngm, cos = record.get("ngm"), record.get("cos")
                unnormalized, standard = record["unnormalized"], record["standard"]
                provenance = Provenance(record["provenance"])
            else:
                fields = line.split("\t")
                if len(fields) != len(DATASET_COLUMNS):
                    raise InputError(
                        f"expected {len(DATASET_COLUMNS)} columns", path=path, line=lineno
                    )
                unnormalized, standard, code, prov_name, ngm_s, cos_s = fields
                code = code or None
                provenance = Provenance(prov_name)
                ngm = float(ngm_s) if ngm_s else None
                cos = float(cos_s) if cos_s else None
            pairs.append(
                NormPair(
                    unnormalized=TermText(unnormalized),
                    standard=TermText(standard),
                    standard_code=code,
                    provenance=provenance,
                    ngm=ngm,
                    cos=cos,
                )
            )
    return pairs


@dataclass
class RunResult:
    augmented_path: Path
    original_path: Path
    stats_path: Path
    stats: RunStats
    pairs: list[NormPair]


def run(cfg: PipelineConfig) -> RunResult:
    """Execute load -> tag -> generate -> filter -> dedupe -> sort -> write."""
    cfg.validate()
    started = time.perf_counter()

    vocab = load_icd(cfg.icd_path, format=cfg.input_format)
    task_pairs = load_task_pairs(
        cfg.task_pairs_path, format=cfg.input_format, gold_delimiter=cfg.gold_delimiter
    )
    tree = load_region_tree(cfg.region_tree_path) if cfg.region_tree_path else None

    if cfg.pretagged_path:
        tagger = PretaggedTagger(load_pretagged(cfg.pretagged_path))
    else:
        tagger = LexiconTagger(
            load_axis_lexicons(cfg.centers_path, cfg.regions_path, cfg.characteristics_path)
        )
    index = TaggedIndex.build(tagged_terms_needed(vocab, task_pairs), tagger)

    aug_cfg = AugConfig(
        enabled_methods=cfg.methods,
        axes_for_replacement=cfg.axes,
        max_pairs_per_source=cfg.max_pairs_per_source,
        rng_seed=cfg.rng_seed,
    )
    generated: dict[Provenance, list[NormPair]] = {}
    if Provenance.AR1 in cfg.methods:
        generated[Provenance.AR1] = ar1(vocab, index, aug_cfg)
    if Provenance.AR2 in cfg.methods:
        generated[Provenance.AR2] = ar2(task_pairs, vocab, index, aug_cfg)
    if Provenance.MGA_CODE in cfg.methods:
        generated[Provenance.MGA_CODE] = mga_code(vocab)
    if Provenance.MGA_REGION in cfg.methods:
        generated[Provenance.MGA_REGION] = mga_region(vocab, index, tree)

    if cfg.embedding_path:
        embedder = load_embedding_file(cfg.embedding_path)
    else:
        embedder = HashedNgramEmbedder(dimension=cfg.embedding_dim)
    filter_cfg = FilterConfig(alpha=cfg.alpha, beta=cfg.beta, ngm_mode=cfg.ngm_mode, embedder=embedder)

    stats = {p.value: ProvenanceStats() for p in Provenance}
    stats[Provenance.ORIGINAL.value].generated = len(task_pairs)
    survivors: list[NormPair] = list(task_pairs)
    for provenance, pairs in generated.items():
        outcome = filter_pairs(pairs, filter_cfg, workers=cfg.workers)
        stats[provenance.value].generated = len(pairs)
        stats[provenance.value].dropped = outcome.dropped_by_reason
        survivors.extend(outcome.kept)

    final = dedupe(survivors)
    removed = Counter(p.provenance for p in survivors) - Counter(p.provenance for p in final)
    for provenance, count in removed.items():
        stats[provenance.value].dedup_removed = count
    for pair in final:
        stats[pair.provenance.value].kept += 1

    out_dir = Path(cfg.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    extension = cfg.output_format
    augmented_path = out_dir / f"augmented.{extension}"
    original_path = out_dir / f"original.{extension}"
    write_dataset(
        [p for p in final if p.provenance is not Provenance.ORIGINAL],
        augmented_path,
        format=cfg.output_format,
    )
    write_dataset(
        [p for p in final if p.provenance is Provenance.ORIGINAL],
        original_path,
        format=cfg.output_format,
    )

    run_stats = RunStats(per_provenance=stats, wall_time_seconds=time.perf_counter() - started)
    run_stats.check_conservation()
    stats_path = out_dir / "run_stats.json"
    stats_path.write_text(run_stats.to_json() + "\n", encoding="utf-8")
    return RunResult(
        augmented_path=augmented_path,
        original_path=original_path,
        stats_path=stats_path,
        stats=run_stats,
        pairs=final,
    )
