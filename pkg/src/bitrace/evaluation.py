"""Precision, recall, average precision and mean average precision.

AP and MAP are reported on a 0-100 scale.
"""
from __future__ import annotations

import json
from collections import defaultdict
from collections.abc import Collection, Sequence
from dataclasses import dataclass, field

from .retrieval import RankedLink


class EvaluationError(ValueError):
    pass


def _relevance(ranked: Sequence[RankedLink], truth: Collection[tuple[str, str]]) -> list[bool]:
    return [(link.issue_id, link.commit_id) in truth for link in ranked]


def precision_recall_at(ranked: Sequence[RankedLink], truth: Collection[tuple[str, str]], r: int):
    if not 1 <= r <= len(ranked):
        raise EvaluationError(f"cutoff {r} outside [1, {len(ranked)}]")
    hits = sum(_relevance(ranked[:r], truth))
    recall = hits / len(truth) if truth else 0.0
    return hits / r, recall


def average_precision(ranked: Sequence[RankedLink], truth: Collection[tuple[str, str]]) -> float:
    """Sum of precision at each relevant rank over |truth|, times 100."""
    if not truth:
        raise EvaluationError("average precision is undefined without true links")
    hits = 0
    total = 0.0
    for r, relevant in enumerate(_relevance(ranked, truth), 1):
        if relevant:
            hits += 1
            total += hits / r
    return 100.0 * total / len(truth)


def per_issue_rankings(ranked: Sequence[RankedLink]) -> dict[str, list[RankedLink]]:
    """Each issue's row, keeping the global order (and so its tie-break)."""
    rows: dict[str, list[RankedLink]] = defaultdict(list)
    for link in ranked:
        rows[link.issue_id].append(link)
    return dict(rows)


def per_query_ap(ranked: Sequence[RankedLink], truth: Collection[tuple[str, str]]):
    """AP per issue with at least one true link, plus the excluded issue ids."""
    by_issue: dict[str, set] = defaultdict(set)
    for issue_id, commit_id in truth:
        by_issue[issue_id].add((issue_id, commit_id))
    scores, excluded = {}, []
    for issue_id, row in per_issue_rankings(ranked).items():
        if by_issue.get(issue_id):
            scores[issue_id] = average_precision(row, by_issue[issue_id])
        else:
            excluded.append(issue_id)
    return scores, sorted(excluded)


def mean_average_precision(ranked: Sequence[RankedLink], truth: Collection[tuple[str, str]]) -> float:
    scores, _ = per_query_ap(ranked, truth)
    if not scores:
        raise EvaluationError("no issue has a true link; MAP is undefined")
    return sum(scores.values()) / len(scores)


@dataclass
class MetricsReport:
    project: str
    mode: str
    ap: float
    map: float
    per_query_ap: dict[str, float] = field(default_factory=dict)
    excluded_queries: list[str] = field(default_factory=list)
    n_true_links: int = 0
    n_candidates: int = 0

    def to_json(self) -> str:
        doc = {
            "project": self.project,
            "mode": self.mode,
            "ap": round(self.ap, 2),
            "map": round(self.map, 2),
            "per_query_ap": {k: round(v, 2) for k, v in sorted(self.per_query_ap.items())},
            "excluded_queries": list(self.excluded_queries),
        }
        return json.dumps(doc, ensure_ascii=False, indent=2) + "\n"


def evaluate(ranked: Sequence[RankedLink], truth: Collection[tuple[str, str]],
             project: str = "", mode: str = "") -> MetricsReport:
    truth = set(truth)
    scores, excluded = per_query_ap(ranked, truth)
    if not scores:
        raise EvaluationError("no issue has a true link; MAP is undefined")
    return MetricsReport(
        project=project,
        mode=mode,
        ap=average_precision(ranked, truth),
        map=sum(scores.values()) / len(scores),
        per_query_ap=scores,
        excluded_queries=excluded,
        n_true_links=len(truth),
        n_candidates=len(ranked),
    )
