"""Axis-word span tagging.

Disease names decompose into three kinds of axis words: the disease center
(what the disease is), the anatomical region (where it is), and the disease
characteristic (subtype or cause).  The default tagger is a deterministic
lexicon matcher: greedy longest-match-first, then leftmost-first, on exact
NFKC strings.  It sits behind a small interface so externally produced span
annotations (e.g. from a learned sequence model) can be dropped in instead.
"""

import json
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Iterable, Protocol

from .terms import TermText
from .vocab import AxisLexicons, InputError


class AxisLabel(Enum):
    CENTER = "center"
    REGION = "region"
    CHARACTERISTIC = "characteristic"

    @property
    def bio_tag(self) -> str:
        return {"center": "CEN", "region": "REG", "characteristic": "CHAR"}[self.value]


_BIO_TO_LABEL = {label.bio_tag: label for label in AxisLabel}
_LABEL_ORDER = {label: i for i, label in enumerate(AxisLabel)}


@dataclass(frozen=True, order=True)
class AxisSpan:
    """Half-open code-point span [start, end) carrying one axis label."""

    start: int
    end: int
    label: AxisLabel = field(compare=False)

    def __post_init__(self) -> None:
        if not 0 <= self.start < self.end:
            raise ValueError(f"invalid span bounds [{self.start}, {self.end})")


@dataclass(frozen=True)
class TaggedTerm:
    term: TermText
    spans: tuple[AxisSpan, ...]

    def __post_init__(self) -> None:
        spans = tuple(sorted(self.spans, key=lambda s: (s.start, s.end)))
        object.__setattr__(self, "spans", spans)
        previous_end = 0
        for span in spans:
            if span.end > len(self.term):
                raise ValueError(f"span {span} exceeds term length {len(self.term)}")
            if span.start < previous_end:
                raise ValueError(f"overlapping spans in {self.term.raw!r}")
            previous_end = span.end

    def span_text(self, span: AxisSpan) -> str:
        return self.term.raw[span.start : span.end]


class Tagger(Protocol):
    def tag(self, term: TermText) -> TaggedTerm: ...


@dataclass(frozen=True)
class LexiconTagger:
    """Greedy maximal matcher over the three axis lexicons.

    Candidate matches are ranked by length (longest first), then start
    offset (leftmost first), then label declaration order; a candidate is
    kept only if it does not overlap an already-kept span.  Matched
    characters are never re-matched, unmatched characters carry no span.
    """

    lexicons: AxisLexicons

    def __post_init__(self) -> None:
        if not (self.lexicons.centers or self.lexicons.regions or self.lexicons.characteristics):
            raise ValueError("all axis lexicons are empty; tagging would be a no-op")

    def _candidates(self, text: str) -> list[tuple[int, int, AxisLabel]]:
        out = []
        lexicon_by_label = {
            AxisLabel.CENTER: self.lexicons.centers,
            AxisLabel.REGION: self.lexicons.regions,
            AxisLabel.CHARACTERISTIC: self.lexicons.characteristics,
        }
        for label, entries in lexicon_by_label.items():
            for entry in entries:
                start = text.find(entry)
                while start != -1:
                    out.append((start, start + len(entry), label))
                    start = text.find(entry, start + 1)
        return out

    def tag(self, term: TermText) -> TaggedTerm:
        candidates = self._candidates(term.raw)
        candidates.sort(key=lambda c: (-(c[1] - c[0]), c[0], _LABEL_ORDER[c[2]]))
        taken = [False] * len(term)
        chosen = []
        for start, end, label in candidates:
            if any(taken[start:end]):
                continue
            for i in range(start, end):
                taken[i] = True
            chosen.append(AxisSpan(start, end, label))
        return TaggedTerm(term=term, spans=tuple(chosen))


def tag(term: TermText, lexicons: AxisLexicons) -> TaggedTerm:
    return LexiconTagger(lexicons).tag(term)


def spans_to_bio(tagged: TaggedTerm) -> list[str]:
    """One label per code point: B-/I- on span characters, O elsewhere."""
    labels = ["O"] * len(tagged.term)
    for span in tagged.spans:
        labels[span.start] = f"B-{span.label.bio_tag}"
        for i in range(span.start + 1, span.end):
            labels[i] = f"I-{span.label.bio_tag}"
    return labels


def bio_to_spans(term: TermText, labels: Iterable[str]) -> TaggedTerm:
    """Inverse of spans_to_bio; rejects sequences that are not valid BIO."""
    labels = list(labels)
    if len(labels) != len(term):
        raise ValueError(f"expected {len(term)} labels, got {len(labels)}")
    spans: list[AxisSpan] = []
    open_start: int | None = None
    open_label: AxisLabel | None = None

    def close(end: int) -> None:
        nonlocal open_start, open_label
        if open_start is not None:
            spans.append(AxisSpan(open_start, end, open_label))
            open_start, open_label = None, None

    for i, raw in enumerate(labels):
        if raw == "O":
            close(i)
            continue
        prefix, _, tag_name = raw.partition("-")
        label = _BIO_TO_LABEL.get(tag_name)
        if prefix not in ("B", "I") or label is None:
            raise ValueError(f"invalid BIO label {raw!r} at position {i}")
        if prefix == "B":
            close(i)
            open_start, open_label = i, label
        else:
            if open_label is not label:
                raise ValueError(f"dangling {raw!r} at position {i}")
    close(len(labels))
    return TaggedTerm(term=term, spans=tuple(spans))


def axis_value(tagged: TaggedTerm, label: AxisLabel) -> str | None:
    """Substring of the leftmost span carrying ``label``, if any."""
    for span in tagged.spans:
        if span.label is label:
            return tagged.span_text(span)
    return None


def axis_span(tagged: TaggedTerm, label: AxisLabel) -> AxisSpan | None:
    for span in tagged.spans:
        if span.label is label:
            return span
    return None


def load_pretagged(path: str | Path) -> dict[str, TaggedTerm]:
    """Read externally produced span annotations (JSONL: term + spans),
    bypassing the lexicon matcher for the terms listed."""
    tagged: dict[str, TaggedTerm] = {}
    try:
        handle = open(path, encoding="utf-8")
    except OSError as exc:
        raise InputError(str(exc), path=path) from exc
    with handle:
        for lineno, line in enumerate(handle, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                record = json.loads(line)
                term = TermText(record["term"])
                spans = tuple(
                    AxisSpan(int(s["start"]), int(s["end"]), AxisLabel(s["label"]))
                    for s in record.get("spans", [])
                )
                tagged[term.raw] = TaggedTerm(term=term, spans=spans)
            except (KeyError, TypeError, ValueError, json.JSONDecodeError) as exc:
                raise InputError(f"bad pre-tagged record: {exc}", path=path, line=lineno) from None
    return tagged


@dataclass(frozen=True)
class PretaggedTagger:
    """Serves spans from a pre-tagged file; unknown terms get no spans."""

    tagged: dict[str, TaggedTerm]

    def tag(self, term: TermText) -> TaggedTerm:
        hit = self.tagged.get(term.raw)
        if hit is not None:
            return hit
        return TaggedTerm(term=term, spans=())
