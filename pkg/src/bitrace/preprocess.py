"""Sentence splitting, sentence cleaning and commit-diff trimming."""
from __future__ import annotations

import os
import re
from dataclasses import dataclass

from .corpus import Artifact, Section, SectionKind

DEFAULT_EXCLUDED_EXTENSIONS = (".properties", ".pom", ".axml", ".vue", ".css", ".styl")

# "." "!" "?" end a sentence only before whitespace or end of text, so that
# URLs, dotted identifiers and version numbers survive until cleaning.
_SENTENCE_BREAK = re.compile(r"[\r\n]+|[.!?]+(?=\s|$)|[。！？]+")

_URL = re.compile(r"[A-Za-z][A-Za-z0-9+.\-]*://\S+")
_MENTION = re.compile(r"@\w+")
_FORMATTING = re.compile(r"\*{2,}|_{2,}|~{2,}|`+")
_TOKEN = re.compile(r"\S+")
_SPACES = re.compile(r"\s+")

DEFAULT_JUNK = frozenset("*#>|~^=<[]{}\"`\\" "【】「」『』《》〈〉")


def _is_path(token: str) -> bool:
    return sum(1 for part in re.split(r"[/\\]", token) if part) >= 2


def _normalize_ext(ext: str) -> str:
    ext = ext.strip().lower()
    return ext if ext.startswith(".") else "." + ext


@dataclass(frozen=True)
class DiffTrimConfig:
    excluded_extensions: frozenset[str] = frozenset(DEFAULT_EXCLUDED_EXTENSIONS)
    keep_added_only: bool = True

    def __post_init__(self):
        object.__setattr__(
            self, "excluded_extensions",
            frozenset(_normalize_ext(e) for e in self.excluded_extensions),
        )


@dataclass(frozen=True)
class CleanSentence:
    artifact_id: str
    section_kind: SectionKind
    index: int
    text: str


def split_sentences(section: Section | str) -> list[str]:
    text = section.text if isinstance(section, Section) else section
    parts = (p.strip() for p in _SENTENCE_BREAK.split(text))
    return [p for p in parts if p]


def _clean_once(text: str, junk: frozenset[str]) -> str:
    text = _URL.sub(" ", text)
    text = _TOKEN.sub(lambda m: " " if _is_path(m.group()) else m.group(), text)
    text = _MENTION.sub(" ", text)
    text = _FORMATTING.sub(" ", text)
    text = "".join(" " if ch in junk else ch for ch in text)
    return _SPACES.sub(" ", text).strip()


def clean_sentence(raw: str, junk: frozenset[str] = DEFAULT_JUNK) -> str | None:
    """Strip URLs, file paths, @mentions, markdown runs and junk punctuation.

    Rules are reapplied until nothing changes, because a removal can expose
    a new match (``"@|bob"`` becomes ``"@bob"``). Returns None when nothing
    but whitespace is left.
    """
    text = _SPACES.sub(" ", raw).strip()
    while True:
        cleaned = _clean_once(text, junk)
        if cleaned == text:
            break
        text = cleaned
    return text or None


def _header_path(line: str) -> str | None:
    path = line[4:].strip().split("\t")[0]
    if path == "/dev/null":
        return None
    if path[:2] in ("a/", "b/"):
        path = path[2:]
    return path


def _diff_git_path(line: str) -> str | None:
    m = re.match(r"diff --git a/(\S+) b/(\S+)", line)
    if m:
        return m.group(2)
    parts = line.split()
    return parts[-1] if len(parts) > 2 else None


def trim_diff(diff_text: str, cfg: DiffTrimConfig | None = None) -> str:
    """Keep the added lines of a unified diff, dropping excluded file types.

    Segments start at ``diff --git`` lines or at a ``---``/``+++`` header
    pair. Text without headers is a single segment of unknown type.
    """
    cfg = cfg or DiffTrimConfig()
    lines = diff_text.splitlines()
    kept: list[str] = []
    path: str | None = None
    i = 0
    while i < len(lines):
        line = lines[i]
        if line.startswith("diff --git"):
            path = _diff_git_path(line)
            i += 1
            continue
        if line.startswith("--- ") and i + 1 < len(lines) and lines[i + 1].startswith("+++ "):
            old, new = _header_path(line), _header_path(lines[i + 1])
            path = new or old or path
            i += 2
            continue
        i += 1
        ext = os.path.splitext(path)[1].lower() if path else ""
        if ext and ext in cfg.excluded_extensions:
            continue
        if line.startswith("+"):
            kept.append(line[1:])
        elif not cfg.keep_added_only and line.startswith(" "):
            kept.append(line[1:])
    # an added markdown bullet ("+- item") must not read as a removed line
    return "\n".join(k.lstrip("-") for k in kept)


def preprocess_artifact(
    artifact: Artifact,
    diff_cfg: DiffTrimConfig | None = None,
    junk: frozenset[str] = DEFAULT_JUNK,
) -> list[CleanSentence]:
    """Cleaned sentences of every section, in section order."""
    out = []
    for section in artifact.sections:
        text = section.text
        if section.kind is SectionKind.COMMIT_DIFF:
            text = trim_diff(text, diff_cfg)
        index = 0
        for raw in split_sentences(text):
            cleaned = clean_sentence(raw, junk)
            if cleaned is None:
                continue
            out.append(CleanSentence(artifact.id, section.kind, index, cleaned))
            index += 1
    return out
