"""Retrieval-based normalization evaluation.

The normalizer under test is deliberately transparent: every standard name
owns a set of surface forms (itself, plus the unnormalized side of any pair
mapped to it), a query scores each standard by its best surface under the
n-gram matching score, and standards are ranked by score with lexicographic
tie-breaking.  The harness measures how adding augmented surface forms
moves accuracy, micro-F1, recall@k, and NDCG@k, including on nested
subsamples of the seed training pairs and in a zero-shot setup where only
augmented pairs populate the index.
"""

import math
import random
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .filtering import ngm_score
from .terms import TermText
from .vocab import NormPair, pair_sort_key


@dataclass
class SynonymIndex:
    """Label space plus surface forms.  Every standard is a surface form of
    itself; pairs whose standard falls outside the label space are ignored
    so the label space stays fixed across index variants."""

    standards: tuple[str, ...]
    surfaces: dict[str, set[str]] = field(init=False)

    def __post_init__(self) -> None:
        self.standards = tuple(sorted(set(self.standards)))
        self.surfaces = {name: {name} for name in self.standards}

    @classmethod
    def build(cls, standards: Iterable[str], pairs: Iterable[NormPair] = ()) -> "SynonymIndex":
        index = cls(standards=tuple(standards))
        index.add_pairs(pairs)
        return index

    def add_pairs(self, pairs: Iterable[NormPair]) -> int:
        added = 0
        for pair in pairs:
            target = pair.standard.raw
            if target in self.surfaces:
                self.surfaces[target].add(pair.unnormalized.raw)
                added += 1
        return added

    def __len__(self) -> int:
        return len(self.standards)


def rank(query: str | TermText, index: SynonymIndex, k: int) -> list[tuple[str, float]]:
    """Top-k standards for a query: each scores the maximum ngm over its
    surface forms; ties break lexicographically by standard name."""
    if len(index) == 0:
        raise ValueError("cannot rank against an empty index")
    if k < 1:
        raise ValueError("k must be >= 1")
    query = str(query)
    scored = []
    for standard in index.standards:
        best = max(ngm_score(query, surface) for surface in index.surfaces[standard])
        scored.append((standard, best))
    scored.sort(key=lambda item: (-item[1], item[0]))
    return scored[:k]


def _check_lengths(gold: Sequence, other: Sequence) -> None:
    if len(gold) != len(other):
        raise ValueError(f"length mismatch: {len(gold)} gold sets vs {len(other)} results")


def accuracy(gold: Sequence[set[str]], ranked: Sequence[Sequence[str]]) -> float:
    """Fraction of queries whose rank-1 prediction is in the gold set."""
    _check_lengths(gold, ranked)
    if not gold:
        return 0.0
    hits = sum(1 for g, names in zip(gold, ranked) if names and names[0] in g)
    return hits / len(gold)


def f1_set(gold: Sequence[set[str]], predicted: Sequence[set[str]]) -> float:
    """Micro-F1 over (query, standard) decisions."""
    _check_lengths(gold, predicted)
    true_positive = sum(len(g & p) for g, p in zip(gold, predicted))
    predicted_total = sum(len(p) for p in predicted)
    gold_total = sum(len(g) for g in gold)
    if predicted_total == 0 and gold_total == 0:
        return 0.0
    precision = true_positive / predicted_total if predicted_total else 0.0
    recall = true_positive / gold_total if gold_total else 0.0
    if precision + recall == 0.0:
        return 0.0
    return 2 * precision * recall / (precision + recall)


def recall_at_k(gold: Sequence[set[str]], ranked: Sequence[Sequence[str]], k: int = 5) -> float:
    """Mean over queries of |top-k intersected with gold| / |gold|."""
    _check_lengths(gold, ranked)
    if not gold:
        return 0.0
    total = 0.0
    for g, names in zip(gold, ranked):
        if not g:
            raise ValueError("empty gold set")
        total += len(set(names[:k]) & g) / len(g)
    return total / len(gold)


def ndcg_at_k(gold: Sequence[set[str]], ranked: Sequence[Sequence[str]], k: int = 5) -> float:
    """Binary-relevance NDCG with 1/log2(i+1) discounting, ideal ordering
    truncated at k."""
    _check_lengths(gold, ranked)
    if not gold:
        return 0.0
    total = 0.0
    for g, names in zip(gold, ranked):
        if not g:
            raise ValueError("empty gold set")
        dcg = sum(
            1.0 / math.log2(i + 1) for i, name in enumerate(names[:k], start=1) if name in g
        )
        ideal = sum(1.0 / math.log2(i + 1) for i in range(1, min(len(g), k) + 1))
        total += dcg / ideal
    return total / len(gold)


@dataclass(frozen=True)
class EvalReport:
    """Metric snapshot for one evaluation (field names follow the default
    k = 5 cutoff)."""

    accuracy: float
    f1: float
    recall_at_5: float
    ndcg_at_5: float
    n_queries: int

    def to_dict(self) -> dict:
        return {
            "accuracy": self.accuracy,
            "f1": self.f1,
            "recall_at_5": self.recall_at_5,
            "ndcg_at_5": self.ndcg_at_5,
            "n_queries": self.n_queries,
        }


def evaluate(
    queries: Sequence[str],
    gold: Sequence[set[str]],
    index: SynonymIndex,
    k: int = 5,
    f1_threshold: float | None = None,
) -> EvalReport:
    """Rank every query and compute all four metrics.  The predicted set
    for F1 is the rank-1 name unless a score threshold is supplied, in
    which case it is every top-k name scoring strictly above it."""
    _check_lengths(gold, queries)
    rankings = [rank(q, index, k) for q in queries]
    names = [[name for name, _ in r] for r in rankings]
    if f1_threshold is None:
        predicted = [set(n[:1]) for n in names]
    else:
        predicted = [
            {name for name, score in r if score > f1_threshold} for r in rankings
        ]
    return EvalReport(
        accuracy=accuracy(gold, names),
        f1=f1_set(gold, predicted),
        recall_at_5=recall_at_k(gold, names, k),
        ndcg_at_5=ndcg_at_k(gold, names, k),
        n_queries=len(queries),
    )


def group_queries(pairs: Iterable[NormPair]) -> tuple[list[str], list[set[str]]]:
    """Collapse task pairs into (query, gold set) rows, preserving first
    appearance order; multi-gold records share one query row."""
    queries: list[str] = []
    gold: dict[str, set[str]] = {}
    for pair in pairs:
        query = pair.unnormalized.raw
        if query not in gold:
            queries.append(query)
            gold[query] = set()
        gold[query].add(pair.standard.raw)
    return queries, [gold[q] for q in queries]


def label_space(
    train_pairs: Iterable[NormPair], valid_pairs: Iterable[NormPair]
) -> tuple[str, ...]:
    """The fixed set of standards every evaluation ranks over: standard
    sides of the full training data plus all validation golds."""
    names = {p.standard.raw for p in train_pairs} | {p.standard.raw for p in valid_pairs}
    return tuple(sorted(names))


def nested_sample(pairs: Sequence[NormPair], fraction: float, seed: int) -> list[NormPair]:
    """Seeded sample of ceil(fraction * n) pairs; smaller fractions are
    prefixes of larger ones, so samples are nested."""
    if not 0.0 <= fraction <= 1.0:
        raise ValueError(f"fraction {fraction} outside [0, 1]")
    ordered = sorted(pairs, key=pair_sort_key)
    random.Random(seed).shuffle(ordered)
    if fraction == 0.0:
        return []
    return ordered[: math.ceil(fraction * len(ordered))]


def subsample_experiment(
    train_pairs: Sequence[NormPair],
    valid_pairs: Sequence[NormPair],
    fractions: Sequence[float],
    seed: int,
    with_augmentation: bool,
    augmented_pairs: Sequence[NormPair] = (),
    k: int = 5,
) -> list[tuple[float, EvalReport]]:
    """Evaluate against indexes built from nested seeded samples of the
    seed pairs (plus the full augmented pool when flagged) on a fixed
    validation split.  Fraction 0 with augmentation is the zero-shot
    setup: the index holds augmented surface forms only."""
    standards = label_space(train_pairs, valid_pairs)
    queries, gold = group_queries(valid_pairs)
    results = []
    for fraction in fractions:
        sample = nested_sample(train_pairs, fraction, seed)
        if not sample and not with_augmentation:
            raise ValueError(f"fraction {fraction} yields zero pairs and no augmentation")
        index = SynonymIndex.build(standards, sample)
        if with_augmentation:
            index.add_pairs(augmented_pairs)
        results.append((fraction, evaluate(queries, gold, index, k=k)))
    return results
