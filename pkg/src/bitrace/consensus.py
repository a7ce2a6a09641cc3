"""Consensual biterms, inverse translation-variant frequency and selection.

A biterm is consensual when it is extracted from at least one issue-side
variant and at least one commit-side variant. Its distinctiveness is

    itvf(bt) = log10(N / (1 + tvf(bt)))

where N counts all translation variants of the project and tvf(bt) the
variants containing bt. Scores are min-max normalized over the consensual
set.
"""
from __future__ import annotations

import csv
import math
from collections import Counter
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass, field

from .parsing import Biterm


@dataclass(frozen=True)
class ConsensusIndex:
    consensual: frozenset[Biterm]
    tvf: Mapping[Biterm, int]
    itvf_raw: Mapping[Biterm, float]
    itvf_norm: Mapping[Biterm, float]
    n_variants: int

    def raw(self, bt: Biterm) -> float:
        return self.itvf_raw.get(bt, 0.0)

    def norm(self, bt: Biterm) -> float:
        return self.itvf_norm.get(bt, 0.0)


def itvf(n_variants: int, tvf: int) -> float:
    return math.log10(n_variants / (1 + tvf))


def build_consensus_index(
    bt_issues: Sequence[Counter],
    bt_commits: Sequence[Counter],
    n_variants: int | None = None,
) -> ConsensusIndex:
    """Index consensual biterms from per-variant biterm multisets.

    ``n_variants`` defaults to the number of multisets supplied, which is
    right when every variant (even one without biterms) is passed in.
    """
    if n_variants is None:
        n_variants = len(bt_issues) + len(bt_commits)
    if n_variants < 1:
        raise ValueError("consensus index needs at least one translation variant")

    issue_side: set[Biterm] = set()
    commit_side: set[Biterm] = set()
    tvf: Counter = Counter()
    for bag in bt_issues:
        issue_side.update(bag)
        tvf.update(set(bag))
    for bag in bt_commits:
        commit_side.update(bag)
        tvf.update(set(bag))

    consensual = frozenset(issue_side & commit_side)
    raw = {bt: itvf(n_variants, tvf[bt]) for bt in consensual}
    return ConsensusIndex(consensual, dict(tvf), raw, min_max(raw), n_variants)


def min_max(scores: Mapping) -> dict:
    """Min-max scale to [0, 1]; a single distinct value maps to 1."""
    if not scores:
        return {}
    lo, hi = min(scores.values()), max(scores.values())
    if hi == lo:
        return {k: 1.0 for k in scores}
    return {k: (v - lo) / (hi - lo) for k, v in scores.items()}


def cons_distinc_variant(biterms: Counter, index: ConsensusIndex) -> float:
    """Sum over a variant's distinct biterms of relative frequency times normalized ITVF."""
    total = sum(biterms.values())
    if total == 0:
        return 0.0
    return sum(count / total * index.norm(bt) for bt, count in biterms.items())


@dataclass(frozen=True)
class SentenceSelection:
    scores: dict[str, float]
    winner: str
    selected: frozenset[Biterm] = field(default_factory=frozenset)
    sentence: object = None

    @property
    def best_score(self) -> float:
        return self.scores[self.winner]


def select_sentence_biterms(
    variants: Sequence[tuple[str, Counter]],
    index: ConsensusIndex,
    threshold: float = 0.6,
    sentence=None,
) -> SentenceSelection:
    """Two-tier selection over the variants of one sentence.

    ``variants`` is a sequence of ``(translator, biterm multiset)`` in roster
    order; the first maximum wins ties. Tier one takes every consensual
    biterm of the winning variant, tier two adds consensual biterms from the
    other variants whose normalized ITVF is strictly above ``threshold``.
    """
    if not variants:
        raise ValueError("a sentence needs at least one translation variant")
    scores = {name: cons_distinc_variant(bag, index) for name, bag in variants}
    winner_pos = max(range(len(variants)), key=lambda i: (scores[variants[i][0]], -i))
    winner, winner_bag = variants[winner_pos]
    selected = {bt for bt in winner_bag if bt in index.consensual}
    for i, (_, bag) in enumerate(variants):
        if i == winner_pos:
            continue
        selected.update(bt for bt in bag if bt in index.consensual and index.norm(bt) > threshold)
    return SentenceSelection(scores, winner, frozenset(selected), sentence)


@dataclass(frozen=True)
class EnrichmentToken:
    text: str
    origin: Biterm


def enrichment_token(bt: Biterm) -> EnrichmentToken:
    a, b = sorted((bt.gov_stem, bt.dep_stem))
    return EnrichmentToken(a + b, bt)


def enrichment_tokens(selections: Iterable[SentenceSelection | Iterable[Biterm]]) -> list[EnrichmentToken]:
    """Distinct enrichment tokens of an artifact, sorted by text.

    Biterms differing only in relation collapse to one token; the
    lexicographically smallest origin is kept.
    """
    tokens: dict[str, EnrichmentToken] = {}
    for sel in selections:
        biterms = sel.selected if isinstance(sel, SentenceSelection) else sel
        for bt in sorted(biterms):
            tok = enrichment_token(bt)
            if tok.text not in tokens or bt < tokens[tok.text].origin:
                tokens[tok.text] = tok
    return [tokens[k] for k in sorted(tokens)]


def export_tsv(index: ConsensusIndex, path) -> None:
    """Consensual-biterm table sorted by raw ITVF descending."""
    rows = sorted(index.consensual, key=lambda bt: (-index.raw(bt), bt))
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, delimiter="\t", lineterminator="\n")
        w.writerow(["gov_stem", "dep_stem", "reln", "tvf", "itvf_raw", "itvf_norm"])
        for bt in rows:
            w.writerow([bt.gov_stem, bt.dep_stem, bt.reln, index.tvf[bt],
                        f"{index.raw(bt):.6f}", f"{index.norm(bt):.6f}"])
