"""Candidate pair generation.

Four generators produce new (unnormalized, standard) pairs:

* Axis-word replacement swaps one axis word between two names that agree on
  another axis word, relying on the structural invariance of disease names
  (the part outside the replaced span is preserved code point for code
  point).  ``ar1`` pairs two vocabulary names; ``ar2`` transplants the swap
  into a seed training pair.
* Multi-granularity aggregation walks hierarchies: ``mga_code`` pairs a
  coarse four-digit name with each of its six-digit children, and
  ``mga_region`` pairs names that share a center while one's region is a
  strict ancestor of the other's in the region tree.

All generators are pure and deterministic: output is canonically sorted and
per-source caps sample with an rng derived from (seed, method, source).
"""

import random
from dataclasses import dataclass, field
from typing import Iterable

from .tagging import AxisLabel, AxisSpan, TaggedTerm, Tagger, axis_span, axis_value
from .terms import TermText
from .vocab import (
    Granularity,
    IcdVocabulary,
    NormPair,
    Provenance,
    RegionTree,
    pair_sort_key,
)

_AXIS_ORDER = list(AxisLabel)

GENERATED_PROVENANCES = (
    Provenance.AR1,
    Provenance.AR2,
    Provenance.MGA_CODE,
    Provenance.MGA_REGION,
)


@dataclass(frozen=True)
class AugConfig:
    enabled_methods: frozenset[Provenance] = frozenset(GENERATED_PROVENANCES)
    axes_for_replacement: frozenset[AxisLabel] = frozenset(AxisLabel)
    max_pairs_per_source: int = 20
    rng_seed: int = 0

    def __post_init__(self) -> None:
        if self.max_pairs_per_source < 1:
            raise ValueError("max_pairs_per_source must be >= 1")


@dataclass
class TaggedIndex:
    """Forward map term -> tagged spans, plus an inverted index from the
    leftmost (label, value) of each term back to the terms carrying it."""

    tags: dict[str, TaggedTerm]
    by_axis: dict[tuple[AxisLabel, str], set[str]] = field(init=False)

    def __post_init__(self) -> None:
        self.by_axis = {}
        for raw, tagged in self.tags.items():
            for label in _AXIS_ORDER:
                value = axis_value(tagged, label)
                if value is not None:
                    self.by_axis.setdefault((label, value), set()).add(raw)

    @classmethod
    def build(cls, terms: Iterable[TermText], tagger: Tagger) -> "TaggedIndex":
        return cls(tags={term.raw: tagger.tag(term) for term in terms})

    def axis_values(self, raw: str) -> dict[AxisLabel, str | None]:
        tagged = self.tags[raw]
        return {label: axis_value(tagged, label) for label in _AXIS_ORDER}


def replace_span(term: TermText, span: AxisSpan, replacement: str) -> TermText:
    """Substitute code points [span.start, span.end) with ``replacement``,
    leaving every other code point untouched."""
    if span.end > len(term):
        raise ValueError(f"span {span} out of bounds for {term.raw!r}")
    if not replacement:
        raise ValueError("replacement must be non-empty")
    return TermText(term.raw[: span.start] + replacement + term.raw[span.end :])


@dataclass(frozen=True)
class ReplacementRecord:
    """One axis-word replacement candidate, kept for auditability: the pair
    plus where it came from and what was spliced in."""

    source: TermText
    span: AxisSpan
    replacement: str
    pair: NormPair
    group: str


def _shares_axis(a: dict[AxisLabel, str | None], b: dict[AxisLabel, str | None]) -> bool:
    return any(a[l] is not None and a[l] == b[l] for l in _AXIS_ORDER)


def ar1_candidates(
    vocab: IcdVocabulary, idx: TaggedIndex, axes: frozenset[AxisLabel]
) -> list[ReplacementRecord]:
    """Every AR1 candidate before per-source caps.

    For an ordered pair (A, B) of distinct vocabulary names agreeing on at
    least one axis value and both carrying a differing value for some axis
    in ``axes``, the candidate replaces A's value with B's and pairs the
    result with B.  Candidates are skipped when the new name is B itself
    (self-pair) or already names a different code in the vocabulary.
    """
    out = []
    for a in vocab.entries:
        values_a = idx.axis_values(a.name.raw)
        partner_names: set[str] = set()
        for label in _AXIS_ORDER:
            if values_a[label] is not None:
                partner_names |= idx.by_axis.get((label, values_a[label]), set())
        for b in vocab.entries:
            if b.name.raw == a.name.raw or b.name.raw not in partner_names:
                continue
            values_b = idx.axis_values(b.name.raw)
            if not _shares_axis(values_a, values_b):
                continue
            for axis2 in _AXIS_ORDER:
                if axis2 not in axes:
                    continue
                value_a, value_b = values_a[axis2], values_b[axis2]
                if value_a is None or value_b is None or value_a == value_b:
                    continue
                span = axis_span(idx.tags[a.name.raw], axis2)
                new_name = replace_span(a.name, span, value_b)
                if new_name.raw == b.name.raw:
                    continue
                other_codes = vocab.codes_for_name(new_name.raw) - {b.code}
                if other_codes:
                    continue
                out.append(
                    ReplacementRecord(
                        source=a.name,
                        span=span,
                        replacement=value_b,
                        pair=NormPair(new_name, b.name, b.code, Provenance.AR1),
                        group=a.code,
                    )
                )
    return out


def ar2_candidates(
    task_pairs: Iterable[NormPair],
    vocab: IcdVocabulary,
    idx: TaggedIndex,
    axes: frozenset[AxisLabel],
) -> list[ReplacementRecord]:
    """Every AR2 candidate before per-source caps.

    For a seed pair (U, S) and a vocabulary name C agreeing with S on some
    axis but differing on a replaceable axis, the candidate rewrites the
    leftmost occurrence of S's axis value inside U to C's value and pairs
    the rewritten U with C.  Seed pairs where S's axis value never occurs
    in U contribute nothing.
    """
    out = []
    for seed in task_pairs:
        u, s = seed.unnormalized, seed.standard
        values_s = idx.axis_values(s.raw)
        for c in vocab.entries:
            values_c = idx.axis_values(c.name.raw)
            if not _shares_axis(values_s, values_c):
                continue
            for axis2 in _AXIS_ORDER:
                if axis2 not in axes:
                    continue
                value_s, value_c = values_s[axis2], values_c[axis2]
                if value_s is None or value_c is None or value_s == value_c:
                    continue
                position = u.raw.find(value_s)
                if position == -1:
                    continue
                span = AxisSpan(position, position + len(value_s), axis2)
                new_u = replace_span(u, span, value_c)
                if new_u.raw == c.name.raw:
                    continue
                out.append(
                    ReplacementRecord(
                        source=u,
                        span=span,
                        replacement=value_c,
                        pair=NormPair(new_u, c.name, c.code, Provenance.AR2),
                        group=f"{u.raw}\t{s.raw}",
                    )
                )
    return out


def _cap_groups(
    records: list[ReplacementRecord], cfg: AugConfig, method: str
) -> list[NormPair]:
    groups: dict[str, list[ReplacementRecord]] = {}
    for record in records:
        groups.setdefault(record.group, []).append(record)
    pairs = []
    for group in sorted(groups):
        members = sorted(groups[group], key=lambda r: pair_sort_key(r.pair))
        if len(members) > cfg.max_pairs_per_source:
            rng = random.Random(f"{cfg.rng_seed}|{method}|{group}")
            members = sorted(
                rng.sample(members, cfg.max_pairs_per_source),
                key=lambda r: pair_sort_key(r.pair),
            )
        pairs.extend(r.pair for r in members)
    return sorted(pairs, key=pair_sort_key)


def ar1(vocab: IcdVocabulary, idx: TaggedIndex, cfg: AugConfig) -> list[NormPair]:
    return _cap_groups(ar1_candidates(vocab, idx, cfg.axes_for_replacement), cfg, "ar1")


def ar2(
    task_pairs: Iterable[NormPair],
    vocab: IcdVocabulary,
    idx: TaggedIndex,
    cfg: AugConfig,
) -> list[NormPair]:
    records = ar2_candidates(task_pairs, vocab, idx, cfg.axes_for_replacement)
    return _cap_groups(records, cfg, "ar2")


def mga_code(vocab: IcdVocabulary) -> list[NormPair]:
    """Pair every four-digit name with each of its six-digit children,
    assigning the child's label to the coarse name."""
    pairs = []
    for parent in vocab.entries:
        if parent.granularity is not Granularity.FOUR_DIGIT:
            continue
        for child in vocab.children_of(parent.code):
            if parent.name.raw == child.name.raw:
                continue
            pairs.append(
                NormPair(parent.name, child.name, child.code, Provenance.MGA_CODE)
            )
    return sorted(pairs, key=pair_sort_key)


def mga_region(vocab: IcdVocabulary, idx: TaggedIndex, tree: RegionTree) -> list[NormPair]:
    """For names sharing a center where one region strictly contains the
    other, assign the finer name's label to the coarser name."""
    pairs = []
    for x in vocab.entries:
        values_x = idx.axis_values(x.name.raw)
        center_x, region_x = values_x[AxisLabel.CENTER], values_x[AxisLabel.REGION]
        if center_x is None or region_x is None:
            continue
        partner_names = idx.by_axis.get((AxisLabel.CENTER, center_x), set())
        for y in vocab.entries:
            if y.name.raw == x.name.raw or y.name.raw not in partner_names:
                continue
            region_y = axis_value(idx.tags[y.name.raw], AxisLabel.REGION)
            if region_y is None or not tree.is_ancestor(region_y, region_x):
                continue
            pairs.append(
                NormPair(y.name, x.name, x.code, Provenance.MGA_REGION)
            )
    return sorted(pairs, key=pair_sort_key)
