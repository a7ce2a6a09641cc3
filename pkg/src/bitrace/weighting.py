"""Emphasis of consensual biterms from issue summaries and commit messages."""
from __future__ import annotations

import math
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field

from .corpus import SectionKind


def sentence_score(variant_scores: Iterable[float]) -> float:
    """Best variant score of a sentence."""
    return max(variant_scores)


def section_score(sentence_scores: Sequence[float]) -> float:
    """Mean sentence score; 0 for a section without sentences."""
    if not sentence_scores:
        return 0.0
    return math.fsum(sentence_scores) / len(sentence_scores)


@dataclass(frozen=True)
class CorpusBaseline:
    mean_cons_distinc: float

    @classmethod
    def from_scores(cls, sentence_scores: Sequence[float]) -> "CorpusBaseline":
        return cls(section_score(sentence_scores))


def emphasis(section_value: float, baseline: CorpusBaseline | float) -> float:
    """Section score, floored at the corpus mean."""
    mean = baseline.mean_cons_distinc if isinstance(baseline, CorpusBaseline) else baseline
    return max(section_value, mean)


def validate_scale(scale: float) -> float:
    if not 0.0 < scale < 1.0:
        raise ValueError(f"scale factor must lie in (0, 1), got {scale}")
    return scale


def repetition_count(emph: float, artifact_len: int, scale: float = 0.1) -> int:
    """ceil(scale * emph * artifact_len)."""
    validate_scale(scale)
    # rounding guards against 0.1*1.0*100 landing on 10.000000000000002
    return max(0, math.ceil(round(scale * emph * artifact_len, 9)))


@dataclass(frozen=True)
class SectionEmphasis:
    artifact_id: str
    section_kind: SectionKind
    cons_distinc: float
    emph: float
    repetition_count: int


@dataclass(frozen=True)
class EnrichedDocument:
    """Base text plus appended enrichment tokens.

    Appended tokens are already stems and must bypass tokenization.
    """

    base_text: str
    appended: tuple[str, ...] = field(default_factory=tuple)

    @property
    def text(self) -> str:
        return " ".join([self.base_text, *self.appended]).strip()


def apply_enrichment(
    base_text: str,
    routine: Iterable[str],
    emphasized: Iterable[str] = (),
    rep: int = 0,
) -> EnrichedDocument:
    """Append each routine token once, then each emphasized token ``rep`` more times."""
    appended = sorted(set(routine))
    extra = sorted(set(emphasized))
    for _ in range(rep):
        appended.extend(extra)
    return EnrichedDocument(base_text, tuple(appended))


def token_length(text: str) -> int:
    return len(text.split())
