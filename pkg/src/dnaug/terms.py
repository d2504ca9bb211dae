"""Normalized term strings.

All text entering the toolkit is NFKC-normalized and whitespace-trimmed at
ingestion, and every offset or length is counted in Unicode code points,
never bytes.
"""

import unicodedata
from dataclasses import dataclass


def normalize_text(raw: str) -> str:
    """NFKC-normalize and trim; raises ValueError if nothing remains."""
    text = unicodedata.normalize("NFKC", raw).strip()
    if not text:
        raise ValueError(f"empty term after normalization: {raw!r}")
    return text


@dataclass(frozen=True, order=True)
class TermText:
    """A non-empty, NFKC-normalized disease-name string.

    Indexing and length are in code points (Python str semantics).
    """

    raw: str

    def __post_init__(self) -> None:
        object.__setattr__(self, "raw", normalize_text(self.raw))

    @property
    def length(self) -> int:
        return len(self.raw)

    def __len__(self) -> int:
        return len(self.raw)

    def __str__(self) -> str:
        return self.raw
