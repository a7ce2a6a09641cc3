"""
TF-IDF ranking and AP/MAP
=========================

Builds vectors for a toy project, ranks every issue-commit pair and scores
the ranking against the true links.
"""
import numpy as np

from bitrace.evaluation import evaluate, precision_recall_at
from bitrace.retrieval import build_vectors, normalize_tokens, rank_links, similarity_matrix

texts = {
    "I1": "disabled attribute is not rendered to the DOM",
    "I2": "parseTemplate drops comment nodes",
    "C1": "render disabled attributes when the value is false",
    "C2": "keep comment node in parseTemplate output",
    "C3": "bump version",
}
terms = {k: normalize_tokens(v) for k, v in texts.items()}
for k, v in terms.items():
    print(k, v)

vectors = build_vectors(terms)
issues = {k: vectors[k] for k in ("I1", "I2")}
commits = {k: vectors[k] for k in ("C1", "C2", "C3")}
print(np.round(similarity_matrix(list(issues.values()), list(commits.values())), 3))

ranked = rank_links(issues, commits)
for link in ranked:
    print(link.rank, link.issue_id, link.commit_id, f"{link.similarity:.3f}")

truth = {("I1", "C1"), ("I2", "C2")}
print("P/R at 2:", precision_recall_at(ranked, truth, 2))
print(evaluate(ranked, truth, "toy", "basic").to_json())
