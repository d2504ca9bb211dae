"""Two-stage semantic filter for generated pairs.

Stage one scores character overlap: the normalized n-gram matching score
sums, for n from 1 up to the shorter name's length, the multiset
intersection sizes of the two names' n-gram bags, divided by the shorter
length.  The score is not capped at 1 (a name scored against itself yields
(len+1)/2) and thresholds are applied to the raw value.

Stage two scores an embedding cosine.  The embedding source is pluggable;
the built-in default is a hashed character n-gram bag and a TSV file of
precomputed vectors can stand in for a contextual encoder.

A generated pair is kept only if ngm > alpha AND cosine > beta, both
strictly.  Pairs from the original task data bypass the filter.
"""

import hashlib
import math
from collections import Counter
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Protocol, Sequence

from .terms import TermText
from .vocab import InputError, NormPair, Provenance

DEFAULT_ALPHA = 0.7
DEFAULT_BETA = 0.8

DROP_LOW_NGM = "low_ngm"
DROP_LOW_COSINE = "low_cosine"
DROP_NO_EMBEDDING = "embedding_unavailable"


def ngram_counts(text: str, n: int) -> Counter:
    """Multiset of the contiguous length-n substrings (L-n+1 of them)."""
    return Counter(text[i : i + n] for i in range(len(text) - n + 1))


def ngram_profile(text: str) -> dict[int, Counter]:
    return {n: ngram_counts(text, n) for n in range(1, len(text) + 1)}


def ngm_score(u: str | TermText, s: str | TermText, mode: str = "multiset") -> float:
    """Normalized n-gram matching score; symmetric in its arguments.

    ``mode`` selects how matches are counted per n: "multiset" (min of
    occurrence counts, the default) or "distinct" (shared distinct grams).
    """
    u, s = str(u), str(s)
    if not u or not s:
        raise ValueError("ngm_score requires non-empty terms")
    if mode not in ("multiset", "distinct"):
        raise ValueError(f"unknown ngm mode {mode!r}")
    m = min(len(u), len(s))
    total = 0
    for n in range(1, m + 1):
        counts: dict[str, int] = {}
        for i in range(len(u) - n + 1):
            gram = u[i : i + n]
            counts[gram] = counts.get(gram, 0) + 1
        matched = 0
        if mode == "multiset":
            for i in range(len(s) - n + 1):
                gram = s[i : i + n]
                remaining = counts.get(gram, 0)
                if remaining:
                    counts[gram] = remaining - 1
                    matched += 1
        else:
            seen: set[str] = set()
            for i in range(len(s) - n + 1):
                gram = s[i : i + n]
                if gram in counts and gram not in seen:
                    seen.add(gram)
                    matched += 1
        if matched == 0:
            break  # no shared n-gram means no shared (n+1)-gram either
        total += matched
    return total / m


def cosine(a: Sequence[float], b: Sequence[float]) -> float:
    if len(a) != len(b):
        raise ValueError(f"dimension mismatch: {len(a)} vs {len(b)}")
    norm_a = math.sqrt(sum(x * x for x in a))
    norm_b = math.sqrt(sum(x * x for x in b))
    if norm_a == 0.0 or norm_b == 0.0:
        raise ValueError("cosine is undefined for a zero vector")
    value = sum(x * y for x, y in zip(a, b)) / (norm_a * norm_b)
    return max(-1.0, min(1.0, value))


class EmbeddingProvider(Protocol):
    name: str
    dimension: int

    def embed(self, text: str) -> Sequence[float]: ...


def _bucket(gram: str, dimension: int) -> int:
    # Stable across platforms and runs: first 8 bytes of SHA-256, big-endian.
    digest = hashlib.sha256(gram.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big") % dimension


@dataclass(frozen=True)
class HashedNgramEmbedder:
    """Hashed character-bigram bag.

    Every unigram and bigram of the text is hashed to one of ``dimension``
    buckets (SHA-256 of the UTF-8 gram, first 8 bytes big-endian, modulo the
    dimension); components are raw bucket counts, so they sum to the number
    of unigrams plus bigrams.
    """

    dimension: int = 256
    name: str = "hashed-bigram"

    def embed(self, text: str) -> list[float]:
        if not text:
            raise ValueError("cannot embed empty text")
        vector = [0.0] * self.dimension
        for n in (1, 2):
            for i in range(len(text) - n + 1):
                vector[_bucket(text[i : i + n], self.dimension)] += 1.0
        return vector


@dataclass(frozen=True)
class FileEmbedder:
    """Precomputed vectors from a ``term<TAB>v1,v2,...`` TSV file."""

    vectors: dict[str, tuple[float, ...]]
    dimension: int
    name: str = "file"

    def embed(self, text: str) -> tuple[float, ...]:
        try:
            return self.vectors[text]
        except KeyError:
            raise LookupError(f"no embedding for {text!r}") from None


def load_embedding_file(path: str | Path) -> FileEmbedder:
    vectors: dict[str, tuple[float, ...]] = {}
    dimension: int | None = None
    try:
        handle = open(path, encoding="utf-8")
    except OSError as exc:
        raise InputError(str(exc), path=path) from exc
    with handle:
        for lineno, line in enumerate(handle, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            term, sep, values = line.partition("\t")
            if not sep or not term:
                raise InputError("expected term<TAB>comma-separated floats", path=path, line=lineno)
            try:
                vector = tuple(float(v) for v in values.split(","))
            except ValueError:
                raise InputError("bad float in vector", path=path, line=lineno) from None
            if dimension is None:
                dimension = len(vector)
            elif len(vector) != dimension:
                raise InputError(
                    f"vector dimension {len(vector)} != {dimension}", path=path, line=lineno
                )
            vectors[term] = vector
    if dimension is None:
        raise InputError("embedding file is empty", path=path)
    return FileEmbedder(vectors=vectors, dimension=dimension)


@dataclass(frozen=True)
class FilterConfig:
    alpha: float = DEFAULT_ALPHA
    beta: float = DEFAULT_BETA
    ngm_mode: str = "multiset"
    embedder: EmbeddingProvider = field(default_factory=HashedNgramEmbedder)

    def __post_init__(self) -> None:
        if self.alpha < 0:
            raise ValueError("alpha must be >= 0")
        if not -1.0 <= self.beta <= 1.0:
            raise ValueError("beta must lie in [-1, 1]")


@dataclass
class FilterResult:
    kept: list[NormPair]
    dropped_by_reason: dict[str, int]


def score_pair(pair: NormPair, cfg: FilterConfig) -> tuple[float, float | None]:
    """(ngm, cosine) for one pair; cosine is None if the provider fails."""
    ngm = ngm_score(pair.unnormalized, pair.standard, mode=cfg.ngm_mode)
    try:
        vec_u = cfg.embedder.embed(pair.unnormalized.raw)
        vec_s = cfg.embedder.embed(pair.standard.raw)
        cos = cosine(vec_u, vec_s)
    except (LookupError, ValueError):
        return ngm, None
    return ngm, cos


def filter_pairs(pairs: Iterable[NormPair], cfg: FilterConfig, workers: int = 1) -> FilterResult:
    """Keep pairs scoring strictly above both thresholds; original task
    pairs pass through untouched.  Input order is preserved."""
    pairs = list(pairs)
    generated = [p for p in pairs if p.provenance is not Provenance.ORIGINAL]
    scores = _score_many(generated, cfg, workers)

    kept: list[NormPair] = []
    dropped: dict[str, int] = {}
    score_iter = iter(scores)
    for pair in pairs:
        if pair.provenance is Provenance.ORIGINAL:
            kept.append(pair)
            continue
        ngm, cos = next(score_iter)
        if not ngm > cfg.alpha:
            dropped[DROP_LOW_NGM] = dropped.get(DROP_LOW_NGM, 0) + 1
        elif cos is None:
            dropped[DROP_NO_EMBEDDING] = dropped.get(DROP_NO_EMBEDDING, 0) + 1
        elif not cos > cfg.beta:
            dropped[DROP_LOW_COSINE] = dropped.get(DROP_LOW_COSINE, 0) + 1
        else:
            kept.append(replace(pair, ngm=ngm, cos=cos))
    return FilterResult(kept=kept, dropped_by_reason=dropped)


def _score_many(
    pairs: list[NormPair], cfg: FilterConfig, workers: int
) -> list[tuple[float, float | None]]:
    if workers <= 1 or len(pairs) < 64:
        return [score_pair(p, cfg) for p in pairs]
    from concurrent.futures import ProcessPoolExecutor

    chunk = max(16, len(pairs) // (workers * 4))
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(score_pair, pairs, [cfg] * len(pairs), chunksize=chunk))
