"""Dependency parses of translation variants and candidate biterm extraction.

Parses are cached on disk as one CoNLL-U file per sentence, named by the
SHA-256 of the sentence text. An HTTP provider may fill cache misses; its
protocol is ``POST {"text": str}`` answered by a JSON token array of
``{"index", "form", "pos", "head", "deprel"}`` objects (optionally wrapped
as ``{"tokens": [...]}``).
"""
from __future__ import annotations

import os
import tempfile
import threading
from collections import Counter
from collections.abc import Iterable, Sequence
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path
from typing import Callable, Protocol

from nltk.stem.porter import PorterStemmer

from .translation import sha256_text

_PORTER = PorterStemmer(mode=PorterStemmer.MARTIN_EXTENSIONS)


@lru_cache(maxsize=65536)
def stem(term: str) -> str:
    """Lowercase Porter stem."""
    return _PORTER.stem(term.lower(), to_lowercase=True)


class ParseError(RuntimeError):
    """Missing or malformed dependency parse."""


@dataclass(frozen=True)
class ParsedToken:
    index: int
    surface: str
    pos: str
    head: int
    deprel: str


@dataclass(frozen=True)
class DependencyEdge:
    gov: ParsedToken
    dep: ParsedToken

    @property
    def reln(self) -> str:
        return self.dep.deprel


@dataclass(frozen=True, order=True)
class Biterm:
    gov_stem: str
    dep_stem: str
    reln: str

    def __post_init__(self):
        if not self.gov_stem or not self.dep_stem:
            raise ValueError(f"biterm stems must be non-empty: {self}")


@dataclass(frozen=True)
class PosFilter:
    """Tag prefixes for the three accepted POS classes.

    A tag matches a class when it starts with one of the class's entries,
    so ``"NN"`` covers NN, NNS, NNP and NNPS.
    """

    noun_tags: frozenset[str] = frozenset({"NN", "NOUN", "PROPN"})
    verb_tags: frozenset[str] = frozenset({"VB", "VERB"})
    adj_tags: frozenset[str] = frozenset({"JJ", "ADJ"})

    def __post_init__(self):
        if (self.noun_tags & self.verb_tags or self.noun_tags & self.adj_tags
                or self.verb_tags & self.adj_tags):
            raise ValueError("noun, verb and adjective tag sets must be disjoint")

    def accepts(self, tag: str) -> bool:
        return any(tag.startswith(p) for p in (*self.noun_tags, *self.verb_tags, *self.adj_tags))


def validate_tokens(tokens: Sequence[ParsedToken]) -> None:
    n = len(tokens)
    seen = set()
    for tok in tokens:
        if tok.index in seen or not 1 <= tok.index <= n:
            raise ParseError(f"bad token index {tok.index} in a {n}-token sentence")
        if not 0 <= tok.head <= n:
            raise ParseError(f"token {tok.index} has head {tok.head} outside [0, {n}]")
        seen.add(tok.index)


def dependency_edges(tokens: Sequence[ParsedToken]) -> list[DependencyEdge]:
    """Edges gov -> dep, skipping root attachments and self-loops."""
    by_index = {t.index: t for t in tokens}
    return [
        DependencyEdge(by_index[t.head], t)
        for t in tokens
        if t.head != 0 and t.head != t.index and t.head in by_index
    ]


def extract_candidate_biterms(
    tokens: Sequence[ParsedToken],
    pos_filter: PosFilter | None = None,
    stemmer: Callable[[str], str] = stem,
) -> Counter:
    """Multiset of (gov stem, dep stem, relation) over noun/verb/adjective edges."""
    pos_filter = pos_filter or PosFilter()
    out: Counter = Counter()
    for edge in dependency_edges(tokens):
        if not (pos_filter.accepts(edge.gov.pos) and pos_filter.accepts(edge.dep.pos)):
            continue
        gov, dep = stemmer(edge.gov.surface), stemmer(edge.dep.surface)
        if gov and dep:
            out[Biterm(gov, dep, edge.reln)] += 1
    return out


# -- CoNLL-U ---------------------------------------------------------------

def tokens_to_conllu(tokens: Sequence[ParsedToken], text: str | None = None) -> str:
    lines = []
    if text is not None:
        lines.append("# text = " + " ".join(text.split()))
    for t in tokens:
        pos = t.pos or "_"
        lines.append("\t".join([str(t.index), t.surface, "_", pos, pos, "_",
                                str(t.head), t.deprel or "_", "_", "_"]))
    return "\n".join(lines) + "\n\n"


def read_conllu(text: str, source: str = "<string>") -> list[list[ParsedToken]]:
    """Parse CoNLL-U text into sentences of tokens.

    Multiword ranges (``1-2``) and empty nodes (``1.1``) are skipped. The
    XPOS column is preferred for the POS tag, UPOS is the fallback.
    """
    sentences, current = [], []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.rstrip("\n")
        if not line.strip():
            if current:
                sentences.append(current)
                current = []
            continue
        if line.startswith("#"):
            continue
        cols = line.split("\t")
        if len(cols) != 10:
            raise ParseError(f"{source}:{lineno}: expected 10 columns, got {len(cols)}")
        if "-" in cols[0] or "." in cols[0]:
            continue
        try:
            index, head = int(cols[0]), int(cols[6])
        except ValueError as exc:
            raise ParseError(f"{source}:{lineno}: non-integer ID or HEAD") from exc
        pos = cols[4] if cols[4] != "_" else cols[3]
        current.append(ParsedToken(index, cols[1], pos, head, cols[7]))
    if current:
        sentences.append(current)
    return sentences


class ParseCache:
    """Directory of ``<sha256>.conllu`` files."""

    def __init__(self, directory):
        self.directory = Path(directory)
        self._lock = threading.Lock()

    def path_for(self, text: str) -> Path:
        return self.directory / f"{sha256_text(text)}.conllu"

    def get(self, text: str) -> list[ParsedToken] | None:
        path = self.path_for(text)
        if not path.exists():
            return None
        sentences = read_conllu(path.read_text(encoding="utf-8"), str(path))
        tokens = [t for s in sentences for t in s] if len(sentences) <= 1 else _renumber(sentences)
        validate_tokens(tokens)
        return tokens

    def put(self, text: str, tokens: Sequence[ParsedToken]) -> None:
        with self._lock:
            self.directory.mkdir(parents=True, exist_ok=True)
            path = self.path_for(text)
            fd, tmp = tempfile.mkstemp(dir=self.directory, suffix=".tmp")
            with os.fdopen(fd, "w", encoding="utf-8") as fh:
                fh.write(tokens_to_conllu(tokens, text))
            os.replace(tmp, path)


def _renumber(sentences: list[list[ParsedToken]]) -> list[ParsedToken]:
    # a provider may split one variant into several sentences; merge them
    out, offset = [], 0
    for sent in sentences:
        for t in sent:
            out.append(ParsedToken(t.index + offset, t.surface, t.pos,
                                   t.head + offset if t.head else 0, t.deprel))
        offset += len(sent)
    return out


class ParseProvider(Protocol):
    def parse(self, text: str) -> list[ParsedToken]: ...


class HttpParseProvider:
    def __init__(self, endpoint, timeout=30.0, session=None):
        import requests

        self.endpoint = endpoint
        self.timeout = timeout
        self.session = session or requests.Session()

    def parse(self, text):
        resp = self.session.post(self.endpoint, json={"text": text}, timeout=self.timeout)
        resp.raise_for_status()
        return tokens_from_json(resp.json())


def tokens_from_json(payload) -> list[ParsedToken]:
    items = payload.get("tokens") if isinstance(payload, dict) else payload
    if not isinstance(items, list):
        raise ParseError(f"malformed parse payload: {str(payload)[:200]!r}")
    try:
        tokens = [ParsedToken(int(o["index"]), str(o["form"]), str(o["pos"]),
                              int(o["head"]), str(o["deprel"])) for o in items]
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"malformed parse payload ({exc}): {str(payload)[:200]!r}") from exc
    validate_tokens(tokens)
    return tokens


class CachedParser:
    """Cache-first parser; ``provider=None`` means offline."""

    def __init__(self, cache: ParseCache, provider: ParseProvider | None = None):
        self.cache = cache
        self.provider = provider

    def parse(self, text: str) -> list[ParsedToken]:
        tokens = self.cache.get(text)
        if tokens is not None:
            return tokens
        if self.provider is None:
            raise ParseError(f"no cached parse for sentence {sha256_text(text)} and no provider")
        try:
            tokens = self.provider.parse(text)
        except ParseError:
            raise
        except Exception as exc:
            raise ParseError(f"provider failed for sentence {sha256_text(text)}: {exc}") from exc
        validate_tokens(tokens)
        self.cache.put(text, tokens)
        return tokens


def parse_variant(tv, parser: CachedParser) -> list[ParsedToken]:
    if not tv.text.strip():
        raise ParseError("cannot parse an empty variant")
    return parser.parse(tv.text)


def parse_all(texts: Iterable[str], parser: CachedParser, max_workers: int = 4) -> dict[str, list[ParsedToken]]:
    """Parse distinct texts with bounded concurrency."""
    from concurrent.futures import ThreadPoolExecutor

    unique = sorted(set(texts))
    with ThreadPoolExecutor(max_workers=max(1, max_workers)) as pool:
        results = list(pool.map(parser.parse, unique))
    return dict(zip(unique, results))
