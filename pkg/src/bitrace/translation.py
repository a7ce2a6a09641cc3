"""Non-English detection and multi-translator variant generation.

Translated text is stored in a JSON-lines cache keyed by
``(sha256(source text), translator)`` so runs can be replayed offline::

    {"src_sha256": "<hex>", "translator": "google", "text": "..."}
"""
from __future__ import annotations

import hashlib
import json
import logging
import re
import threading
import time
from collections.abc import Mapping, Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Protocol

from .preprocess import CleanSentence

log = logging.getLogger(__name__)

IDENTITY = "identity"

# ASCII letters, digits, punctuation and whitespace
_ENGLISH_DEFAULT = re.compile(r"[^\x20-\x7e\t\n\r\f\v]")


class TranslationError(RuntimeError):
    """A translator failed for good, or a replay cache had no entry."""


def sha256_text(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def is_non_english(sentence: str, pattern: re.Pattern = _ENGLISH_DEFAULT) -> bool:
    """True when ``sentence`` has a character outside the English set."""
    return pattern.search(sentence) is not None


@dataclass(frozen=True)
class TranslationVariant:
    source: CleanSentence
    translator: str
    text: str
    partial: bool = False  # translator output still has non-English characters


class TranslationCache:
    """Append-only store of translations, optionally backed by a JSONL file."""

    def __init__(self, path=None):
        self.path = Path(path) if path is not None else None
        self._entries: dict[tuple[str, str], str] = {}
        self._lock = threading.Lock()
        if self.path is not None and self.path.exists():
            self._load(self.path)

    def _load(self, path: Path) -> None:
        with path.open(encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, 1):
                if not line.strip():
                    continue
                try:
                    rec = json.loads(line)
                    key = (rec["src_sha256"], rec["translator"])
                    text = rec["text"]
                except (json.JSONDecodeError, KeyError, TypeError) as exc:
                    raise TranslationError(f"{path}:{lineno}: bad cache entry ({exc})") from exc
                self._entries.setdefault(key, text)

    def __len__(self):
        return len(self._entries)

    def __contains__(self, key):
        return key in self._entries

    def get(self, src_hash: str, translator: str) -> str | None:
        return self._entries.get((src_hash, translator))

    def put(self, src_hash: str, translator: str, text: str) -> None:
        with self._lock:
            key = (src_hash, translator)
            if key in self._entries:
                return
            self._entries[key] = text
            if self.path is not None:
                self.path.parent.mkdir(parents=True, exist_ok=True)
                with self.path.open("a", encoding="utf-8") as fh:
                    fh.write(json.dumps(
                        {"src_sha256": src_hash, "translator": translator, "text": text},
                        ensure_ascii=False) + "\n")

    def entries(self):
        return dict(self._entries)

    def export(self, path) -> None:
        """Write every entry to ``path`` in sorted order."""
        with Path(path).open("w", encoding="utf-8") as fh:
            for (h, t), text in sorted(self._entries.items()):
                fh.write(json.dumps({"src_sha256": h, "translator": t, "text": text},
                                    ensure_ascii=False) + "\n")

    def merge(self, path) -> int:
        """Import entries from another cache file; returns the number added."""
        other = TranslationCache(path)
        before = len(self)
        for (h, t), text in sorted(other.entries().items()):
            self.put(h, t, text)
        return len(self) - before


class Translator(Protocol):
    name: str

    def translate(self, text: str, source_lang: str, target_lang: str) -> str: ...


class HttpTranslator:
    """Generic JSON-over-HTTP translation client.

    POSTs ``{"text", "source", "target"}`` and reads ``"text"`` from the
    response. Failed calls are retried with exponential backoff.
    """

    def __init__(self, name, endpoint, token=None, rate_limit=None,
                 attempts=3, backoff=0.5, timeout=30.0, session=None):
        import requests

        self.name = name
        self.endpoint = endpoint
        self.token = token
        self.min_interval = 1.0 / rate_limit if rate_limit else 0.0
        self.attempts = attempts
        self.backoff = backoff
        self.timeout = timeout
        self.session = session or requests.Session()
        self._last_call = 0.0
        self._lock = threading.Lock()

    def _throttle(self):
        if not self.min_interval:
            return
        with self._lock:
            wait = self._last_call + self.min_interval - time.monotonic()
            if wait > 0:
                time.sleep(wait)
            self._last_call = time.monotonic()

    def translate(self, text, source_lang, target_lang):
        headers = {"Authorization": f"Bearer {self.token}"} if self.token else {}
        payload = {"text": text, "source": source_lang, "target": target_lang}
        last_exc = None
        for attempt in range(self.attempts):
            if attempt:
                time.sleep(self.backoff * 2 ** (attempt - 1))
            self._throttle()
            try:
                resp = self.session.post(self.endpoint, json=payload, headers=headers,
                                         timeout=self.timeout)
                resp.raise_for_status()
                out = resp.json()["text"]
                if not isinstance(out, str):
                    raise ValueError("response field 'text' is not a string")
                return out
            except Exception as exc:  # noqa: BLE001 - any failure is retried
                last_exc = exc
                log.warning("%s attempt %d failed: %s", self.name, attempt + 1, exc)
        raise TranslationError(f"{self.name}: gave up after {self.attempts} attempts: {last_exc}")


class ReplayTranslator:
    """Client that never translates; every request must be a cache hit."""

    def __init__(self, name):
        self.name = name

    def translate(self, text, source_lang, target_lang):
        raise TranslationError(f"{self.name}: no cached translation (offline replay)")


@dataclass
class TranslationRun:
    variants: list[TranslationVariant]
    cache_hits: int = 0
    client_calls: int = 0
    by_sentence: dict[CleanSentence, list[TranslationVariant]] = field(default_factory=dict)


def translate_corpus(
    sentences: Sequence[CleanSentence],
    roster: Sequence[str],
    cache: TranslationCache,
    clients: Mapping[str, Translator] | None = None,
    lang_pair: tuple[str, str] = ("zh", "en"),
    max_workers: int = 4,
) -> list[TranslationVariant]:
    """Fan every non-English sentence out to each roster translator.

    English sentences get a single ``identity`` variant and never reach a
    client. Output is grouped per sentence in input order, roster order
    within a group.
    """
    return translate_corpus_run(sentences, roster, cache, clients, lang_pair, max_workers).variants


def translate_corpus_run(sentences, roster, cache, clients=None, lang_pair=("zh", "en"),
                         max_workers=4) -> TranslationRun:
    if len(set(roster)) != len(roster) or any(not t for t in roster):
        raise ValueError(f"translator roster must hold unique non-empty names: {list(roster)}")
    if IDENTITY in roster:
        raise ValueError(f"{IDENTITY!r} is reserved and cannot be a roster translator")
    clients = dict(clients or {})
    source_lang, target_lang = lang_pair

    # collect distinct cache misses first, then call clients concurrently
    jobs: dict[tuple[str, str], str] = {}
    hits = 0
    for s in sentences:
        if not is_non_english(s.text):
            continue
        h = sha256_text(s.text)
        for t in roster:
            if cache.get(h, t) is not None:
                hits += 1
            elif (h, t) not in jobs:
                if t not in clients:
                    raise TranslationError(
                        f"no client registered for translator {t!r} and sentence {h} not cached")
                jobs[(h, t)] = s.text

    def work(key):
        h, t = key
        try:
            text = clients[t].translate(jobs[key], source_lang, target_lang)
        except TranslationError as exc:
            raise TranslationError(f"sentence {h} translator {t}: {exc}") from exc
        cache.put(h, t, text)

    if jobs:
        with ThreadPoolExecutor(max_workers=max(1, max_workers)) as pool:
            for fut in [pool.submit(work, k) for k in sorted(jobs)]:
                fut.result()

    variants = []
    by_sentence = {}
    for s in sentences:
        if not is_non_english(s.text):
            group = [TranslationVariant(s, IDENTITY, s.text)]
        else:
            h = sha256_text(s.text)
            group = []
            for t in roster:
                text = cache.get(h, t)
                group.append(TranslationVariant(s, t, text, partial=is_non_english(text)))
        by_sentence[s] = group
        variants.extend(group)
    return TranslationRun(variants, hits, len(jobs), by_sentence)


def variant_count(issue_variants: Sequence, commit_variants: Sequence = ()) -> int:
    """N = |TV_issues| + |TV_commits|."""
    return len(issue_variants) + len(commit_variants)
