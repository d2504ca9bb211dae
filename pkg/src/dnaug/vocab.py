"""Coded vocabulary, region tree, axis lexicons, and task-pair ingestion.

File formats (UTF-8, LF):
  - coded vocabulary TSV: ``code<TAB>name``
  - region tree TSV:      ``child<TAB>parent``
  - lexicons:             one entry per line (three files)
  - task pairs TSV:       ``unnormalized<TAB>standard1##standard2[<TAB>code]``
JSONL variants carry the same fields as object keys.
"""

import json
import logging
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Iterable, Iterator

from .terms import TermText, normalize_text

log = logging.getLogger(__name__)

DEFAULT_GOLD_DELIMITER = "##"


class Granularity(Enum):
    FOUR_DIGIT = "four-digit"
    SIX_DIGIT = "six-digit"


class Provenance(Enum):
    ORIGINAL = "original"
    AR1 = "ar1"
    AR2 = "ar2"
    MGA_CODE = "mga-code"
    MGA_REGION = "mga-region"


# Dedup keeps the most trusted origin for a repeated pair.
PROVENANCE_PRIORITY = {
    Provenance.ORIGINAL: 0,
    Provenance.AR2: 1,
    Provenance.AR1: 2,
    Provenance.MGA_CODE: 3,
    Provenance.MGA_REGION: 4,
}


class InputError(Exception):
    """Malformed or inconsistent input data; carries file/line context."""

    def __init__(self, message: str, path: str | Path | None = None, line: int | None = None):
        where = ""
        if path is not None:
            where = f"{path}"
            if line is not None:
                where += f":{line}"
            where += ": "
        super().__init__(where + message)
        self.path = path
        self.line = line


def code_granularity(code: str) -> Granularity:
    """Classify a code by shape: more than four alphanumeric characters
    means a fine-grained (six-digit) entry, e.g. ``A18.201`` vs ``A18.2``."""
    significant = sum(1 for ch in code if ch.isalnum())
    return Granularity.SIX_DIGIT if significant > 4 else Granularity.FOUR_DIGIT


@dataclass(frozen=True)
class IcdEntry:
    code: str
    name: TermText

    @property
    def granularity(self) -> Granularity:
        return code_granularity(self.code)


@dataclass
class IcdVocabulary:
    """Immutable after construction; shared freely across readers."""

    entries: list[IcdEntry]
    by_code: dict[str, IcdEntry] = field(init=False)
    _children: dict[str, list[IcdEntry]] = field(init=False)
    _codes_by_name: dict[str, set[str]] = field(init=False)

    def __post_init__(self) -> None:
        self.entries = sorted(self.entries, key=lambda e: e.code)
        self.by_code = {}
        for entry in self.entries:
            if entry.code in self.by_code:
                raise InputError(f"duplicate code {entry.code!r}")
            self.by_code[entry.code] = entry
        # Hierarchy is pure string-prefix on codes, not digit arithmetic.
        four_digit = [e for e in self.entries if e.granularity is Granularity.FOUR_DIGIT]
        six_digit = [e for e in self.entries if e.granularity is Granularity.SIX_DIGIT]
        self._children = {p.code: [] for p in four_digit}
        for child in six_digit:
            for parent in four_digit:
                if child.code.startswith(parent.code):
                    self._children[parent.code].append(child)
        self._codes_by_name = {}
        for entry in self.entries:
            self._codes_by_name.setdefault(entry.name.raw, set()).add(entry.code)

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self) -> Iterator[IcdEntry]:
        return iter(self.entries)

    def codes_for_name(self, name: str) -> set[str]:
        return self._codes_by_name.get(name, set())

    def children_of(self, code4: str) -> list[IcdEntry]:
        """All six-digit entries whose code starts with ``code4``, in
        ascending code order.  Unknown or non-parent codes yield an empty
        list with a warning rather than an error."""
        entry = self.by_code.get(code4)
        if entry is None or entry.granularity is not Granularity.FOUR_DIGIT:
            log.warning("children_of: %r is not a known four-digit code", code4)
            return []
        return list(self._children[code4])


def children_of(vocab: IcdVocabulary, code4: str) -> list[IcdEntry]:
    return vocab.children_of(code4)


@dataclass
class RegionTree:
    """Anatomical region hierarchy: each node has at most one parent."""

    parent: dict[str, str]
    nodes: set[str] = field(init=False)

    def __post_init__(self) -> None:
        self.nodes = set(self.parent) | set(self.parent.values())
        for node in self.parent:
            seen = {node}
            cursor = node
            while cursor in self.parent:
                cursor = self.parent[cursor]
                if cursor in seen:
                    raise InputError(f"region tree cycle through {cursor!r}")
                seen.add(cursor)

    def ancestors(self, node: str) -> list[str]:
        out = []
        cursor = node
        while cursor in self.parent:
            cursor = self.parent[cursor]
            out.append(cursor)
        return out

    def is_ancestor(self, big: str, small: str) -> bool:
        """True iff ``big`` is a strict ancestor of ``small``; unknown nodes
        are simply not ancestors of anything."""
        return big in self.ancestors(small)


def is_ancestor_region(tree: RegionTree, big: str, small: str) -> bool:
    return tree.is_ancestor(big, small)


@dataclass(frozen=True)
class AxisLexicons:
    centers: frozenset[str]
    regions: frozenset[str]
    characteristics: frozenset[str]


@dataclass(frozen=True)
class NormPair:
    """One (unnormalized, standard) training pair with its origin and,
    once filtered, its two similarity scores."""

    unnormalized: TermText
    standard: TermText
    standard_code: str | None = None
    provenance: Provenance = Provenance.ORIGINAL
    ngm: float | None = None
    cos: float | None = None

    def key(self) -> tuple[str, str]:
        return (self.unnormalized.raw, self.standard.raw)


def pair_sort_key(pair: NormPair) -> tuple:
    return (
        pair.provenance.value,
        pair.unnormalized.raw,
        pair.standard.raw,
        pair.standard_code or "",
    )


# ---------------------------------------------------------------------------
# loaders
# ---------------------------------------------------------------------------


def _read_lines(path: str | Path) -> Iterator[tuple[int, str]]:
    try:
        with open(path, encoding="utf-8") as handle:
            for lineno, line in enumerate(handle, start=1):
                line = line.rstrip("\n").rstrip("\r")
                if line:
                    yield lineno, line
    except OSError as exc:
        raise InputError(str(exc), path=path) from exc


def _split_tsv(line: str, lineno: int, path: str | Path, min_fields: int, max_fields: int) -> list[str]:
    fields = line.split("\t")
    if not min_fields <= len(fields) <= max_fields:
        raise InputError(
            f"expected {min_fields}-{max_fields} tab-separated fields, found {len(fields)}",
            path=path,
            line=lineno,
        )
    return fields


def _json_record(line: str, lineno: int, path: str | Path) -> dict:
    try:
        record = json.loads(line)
    except json.JSONDecodeError as exc:
        raise InputError(f"invalid JSON: {exc}", path=path, line=lineno) from exc
    if not isinstance(record, dict):
        raise InputError("JSONL record must be an object", path=path, line=lineno)
    return record


def load_icd(path: str | Path, format: str = "tsv") -> IcdVocabulary:
    """Load and validate the coded vocabulary (duplicate codes and empty
    names are rejected; the children index is built eagerly)."""
    entries = []
    seen_codes: set[str] = set()
    for lineno, line in _read_lines(path):
        if format == "tsv":
            code, name = _split_tsv(line, lineno, path, 2, 2)
        elif format == "jsonl":
            record = _json_record(line, lineno, path)
            code, name = str(record.get("code", "")), str(record.get("name", ""))
        else:
            raise ValueError(f"unknown format {format!r}")
        code = code.strip()
        if not code:
            raise InputError("empty code", path=path, line=lineno)
        if code in seen_codes:
            raise InputError(f"duplicate code {code!r}", path=path, line=lineno)
        seen_codes.add(code)
        try:
            entries.append(IcdEntry(code=code, name=TermText(name)))
        except ValueError:
            raise InputError(f"empty name for code {code!r}", path=path, line=lineno) from None
    return IcdVocabulary(entries)


def load_region_tree(path: str | Path) -> RegionTree:
    """Load ``child<TAB>parent`` edges; rejects cycles and double parents."""
    parent: dict[str, str] = {}
    for lineno, line in _read_lines(path):
        child, par = _split_tsv(line, lineno, path, 2, 2)
        child, par = normalize_text(child), normalize_text(par)
        if child in parent and parent[child] != par:
            raise InputError(f"node {child!r} has two parents", path=path, line=lineno)
        parent[child] = par
    try:
        return RegionTree(parent)
    except InputError as exc:
        raise InputError(str(exc), path=path) from None


def _load_lexicon_file(path: str | Path) -> frozenset[str]:
    return frozenset(normalize_text(line) for _, line in _read_lines(path))


def load_axis_lexicons(
    centers_path: str | Path,
    regions_path: str | Path,
    characteristics_path: str | Path,
) -> AxisLexicons:
    return AxisLexicons(
        centers=_load_lexicon_file(centers_path),
        regions=_load_lexicon_file(regions_path),
        characteristics=_load_lexicon_file(characteristics_path),
    )


def load_task_pairs(
    path: str | Path,
    format: str = "tsv",
    gold_delimiter: str = DEFAULT_GOLD_DELIMITER,
) -> list[NormPair]:
    """Load seed normalization records, fanning one record with several gold
    standards out into one pair per (unnormalized, gold) combination."""
    pairs = []
    for lineno, line in _read_lines(path):
        code: str | None = None
        if format == "tsv":
            fields = _split_tsv(line, lineno, path, 2, 3)
            unnormalized, golds_field = fields[0], fields[1]
            if len(fields) == 3 and fields[2].strip():
                code = fields[2].strip()
            golds: list[str] = golds_field.split(gold_delimiter)
        elif format == "jsonl":
            record = _json_record(line, lineno, path)
            unnormalized = str(record.get("unnormalized", ""))
            raw_gold = record.get("standard", "")
            if isinstance(raw_gold, list):
                golds = [str(g) for g in raw_gold]
            else:
                golds = str(raw_gold).split(gold_delimiter)
            raw_code = record.get("standard_code") or record.get("code")
            code = str(raw_code) if raw_code else None
        else:
            raise ValueError(f"unknown format {format!r}")
        try:
            source = TermText(unnormalized)
            targets = [TermText(g) for g in golds]
        except ValueError as exc:
            raise InputError(f"empty field ({exc})", path=path, line=lineno) from None
        for target in targets:
            pairs.append(
                NormPair(
                    unnormalized=source,
                    standard=target,
                    standard_code=code,
                    provenance=Provenance.ORIGINAL,
                )
            )
    return pairs


def serialize_icd(vocab: IcdVocabulary) -> str:
    """TSV serialization; load -> serialize -> load is stable."""
    return "".join(f"{e.code}\t{e.name.raw}\n" for e in vocab.entries)


def tagged_terms_needed(vocab: IcdVocabulary, task_pairs: Iterable[NormPair]) -> list[TermText]:
    """Every distinct surface string the taggers must cover: vocabulary
    names plus both sides of the seed pairs."""
    seen: dict[str, TermText] = {}
    for entry in vocab.entries:
        seen.setdefault(entry.name.raw, entry.name)
    for pair in task_pairs:
        seen.setdefault(pair.unnormalized.raw, pair.unnormalized)
        seen.setdefault(pair.standard.raw, pair.standard)
    return [seen[k] for k in sorted(seen)]
