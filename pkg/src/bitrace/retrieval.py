"""TF-IDF vector space model and issue-commit link ranking."""
from __future__ import annotations

import csv
import math
import re
from collections import Counter
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np
from scipy import sparse

from .parsing import stem

# ASCII alphanumeric runs, or runs of other letters (CJK and friends)
_WORD = re.compile(r"[A-Za-z0-9]+|[^\W\dA-Za-z_]+")
_CAMEL = re.compile(r"(?<=[a-z])(?=[A-Z])")


def load_stopwords(path=None) -> frozenset[str]:
    """Read a stopword file (one word per line, ``#`` comments)."""
    if path is None:
        text = resources.files("bitrace").joinpath("data/stopwords_en.txt").read_text(encoding="utf-8")
    else:
        text = Path(path).read_text(encoding="utf-8")
    return frozenset(
        line.strip().lower() for line in text.splitlines()
        if line.strip() and not line.lstrip().startswith("#")
    )


DEFAULT_STOPWORDS = load_stopwords()


def split_camel_case(token: str) -> list[str]:
    return [p for p in _CAMEL.split(token) if p]


def normalize_tokens(
    text: str,
    stopwords: frozenset[str] = DEFAULT_STOPWORDS,
    protected: Iterable[str] = (),
) -> list[str]:
    """Tokenize, camelCase-split, drop stopwords, lowercase and Porter-stem.

    Tokens in ``protected`` are kept verbatim; enrichment tokens are
    already stems and must not be split or stemmed again.
    """
    protected = set(protected)
    terms = []
    for raw in _WORD.findall(text):
        if raw in protected:
            terms.append(raw)
            continue
        for part in split_camel_case(raw):
            low = part.lower()
            if low in stopwords:
                continue
            term = stem(low)
            if term:
                terms.append(term)
    return terms


def document_terms(doc, stopwords: frozenset[str] = DEFAULT_STOPWORDS) -> list[str]:
    """Terms of an ``EnrichedDocument`` or a plain string."""
    if isinstance(doc, str):
        return normalize_tokens(doc, stopwords)
    return normalize_tokens(doc.base_text, stopwords) + list(doc.appended)


@dataclass(frozen=True)
class DocumentVector:
    artifact_id: str
    weights: Mapping[str, float]


def build_vectors(documents: Mapping[str, Sequence[str]]) -> dict[str, DocumentVector]:
    """TF-IDF vectors from per-document term lists.

    tf = count / document length, idf = log10(D / df).
    """
    if len(documents) < 2:
        raise ValueError("TF-IDF needs at least two documents")
    n_docs = len(documents)
    df: Counter = Counter()
    for terms in documents.values():
        df.update(set(terms))
    idf = {t: math.log10(n_docs / d) for t, d in df.items()}
    out = {}
    for doc_id, terms in documents.items():
        counts = Counter(terms)
        length = len(terms)
        out[doc_id] = DocumentVector(
            doc_id, {t: c / length * idf[t] for t, c in sorted(counts.items())})
    return out


def cosine(a: DocumentVector, b: DocumentVector) -> float:
    na = math.sqrt(sum(w * w for w in a.weights.values()))
    nb = math.sqrt(sum(w * w for w in b.weights.values()))
    if na == 0.0 or nb == 0.0:
        return 0.0
    # fsum over the shared terms keeps the result symmetric to the last bit
    dot = math.fsum(a.weights[t] * b.weights[t] for t in a.weights.keys() & b.weights.keys())
    return min(1.0, max(0.0, dot / (na * nb)))


def _matrix(vectors: Sequence[DocumentVector], vocab: Mapping[str, int]) -> sparse.csr_matrix:
    rows, cols, vals = [], [], []
    for i, v in enumerate(vectors):
        for t, w in v.weights.items():
            if w:
                rows.append(i)
                cols.append(vocab[t])
                vals.append(w)
    m = sparse.csr_matrix((vals, (rows, cols)), shape=(len(vectors), len(vocab)), dtype=np.float64)
    norms = np.sqrt(np.asarray(m.multiply(m).sum(axis=1)).ravel())
    inv = np.divide(1.0, norms, out=np.zeros_like(norms), where=norms > 0)
    return sparse.diags(inv) @ m


def similarity_matrix(issues: Sequence[DocumentVector], commits: Sequence[DocumentVector]) -> np.ndarray:
    """Dense issue x commit cosine matrix."""
    vocab: dict[str, int] = {}
    for v in (*issues, *commits):
        for t in v.weights:
            vocab.setdefault(t, len(vocab))
    sim = (_matrix(issues, vocab) @ _matrix(commits, vocab).T).toarray()
    return np.clip(sim, 0.0, 1.0)


@dataclass(frozen=True)
class RankedLink:
    issue_id: str
    commit_id: str
    similarity: float
    rank: int


def rank_pairs(pairs: Iterable[tuple[str, str, float]]) -> list[RankedLink]:
    """Sort by similarity descending, ties by (issue id, commit id)."""
    ordered = sorted(pairs, key=lambda p: (-p[2], p[0], p[1]))
    return [RankedLink(i, c, s, r) for r, (i, c, s) in enumerate(ordered, 1)]


def rank_links(
    issue_vectors: Mapping[str, DocumentVector],
    commit_vectors: Mapping[str, DocumentVector],
) -> list[RankedLink]:
    """Rank the full issue x commit cross product."""
    issue_ids, commit_ids = list(issue_vectors), list(commit_vectors)
    if not issue_ids or not commit_ids:
        return []
    sim = similarity_matrix([issue_vectors[i] for i in issue_ids],
                            [commit_vectors[c] for c in commit_ids])
    return rank_pairs(
        (i, c, float(sim[a, b]))
        for a, i in enumerate(issue_ids)
        for b, c in enumerate(commit_ids)
    )


def write_ranked_csv(links: Sequence[RankedLink], path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["issue_id", "commit_id", "similarity", "rank"])
        for link in links:
            w.writerow([link.issue_id, link.commit_id, f"{link.similarity:.6f}", link.rank])


def read_ranked_csv(path) -> list[RankedLink]:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != ["issue_id", "commit_id", "similarity", "rank"]:
            raise ValueError(f"{path}: unexpected header {reader.fieldnames}")
        links = [RankedLink(r["issue_id"], r["commit_id"], float(r["similarity"]), int(r["rank"]))
                 for r in reader]
    return sorted(links, key=lambda link: link.rank)
