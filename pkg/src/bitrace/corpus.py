"""Artifact data model and project dataset I/O.

A project dataset is a single UTF-8 JSON document::

    {"name": str,
     "issues":  [{"id": str, "summary": str, "description": str}],
     "commits": [{"id": str, "message": str, "diff": str}],
     "links":   [{"issue": str, "commit": str}]}
"""
from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator


class DatasetError(ValueError):
    """Raised for malformed or inconsistent project datasets."""


class ArtifactKind(str, enum.Enum):
    ISSUE = "issue"
    COMMIT = "commit"


class SectionKind(str, enum.Enum):
    ISSUE_SUMMARY = "summary"
    ISSUE_DESCRIPTION = "description"
    COMMIT_MESSAGE = "message"
    COMMIT_DIFF = "diff"


SECTION_KINDS = {
    ArtifactKind.ISSUE: (SectionKind.ISSUE_SUMMARY, SectionKind.ISSUE_DESCRIPTION),
    ArtifactKind.COMMIT: (SectionKind.COMMIT_MESSAGE, SectionKind.COMMIT_DIFF),
}

# sections whose consensual biterms get emphasized
KEY_SECTION = {
    ArtifactKind.ISSUE: SectionKind.ISSUE_SUMMARY,
    ArtifactKind.COMMIT: SectionKind.COMMIT_MESSAGE,
}


@dataclass(frozen=True)
class Section:
    kind: SectionKind
    text: str


@dataclass(frozen=True)
class Artifact:
    id: str
    kind: ArtifactKind
    sections: tuple[Section, ...]

    def __post_init__(self):
        kinds = tuple(s.kind for s in self.sections)
        if kinds != SECTION_KINDS[self.kind]:
            raise DatasetError(
                f"{self.kind.value} {self.id!r} must have sections "
                f"{[k.value for k in SECTION_KINDS[self.kind]]}, got {[k.value for k in kinds]}"
            )

    @classmethod
    def issue(cls, id: str, summary: str = "", description: str = "") -> "Artifact":
        return cls(id, ArtifactKind.ISSUE, (
            Section(SectionKind.ISSUE_SUMMARY, summary),
            Section(SectionKind.ISSUE_DESCRIPTION, description),
        ))

    @classmethod
    def commit(cls, id: str, message: str = "", diff: str = "") -> "Artifact":
        return cls(id, ArtifactKind.COMMIT, (
            Section(SectionKind.COMMIT_MESSAGE, message),
            Section(SectionKind.COMMIT_DIFF, diff),
        ))

    def section(self, kind: SectionKind) -> Section:
        for s in self.sections:
            if s.kind is kind:
                return s
        raise KeyError(kind)


@dataclass(frozen=True)
class Project:
    name: str
    issues: tuple[Artifact, ...] = ()
    commits: tuple[Artifact, ...] = ()
    true_links: frozenset[tuple[str, str]] = field(default_factory=frozenset)

    def __post_init__(self):
        _check_unique(self.issues, "issue")
        _check_unique(self.commits, "commit")
        issue_ids = {a.id for a in self.issues}
        commit_ids = {a.id for a in self.commits}
        for issue_id, commit_id in sorted(self.true_links):
            if issue_id not in issue_ids:
                raise DatasetError(f"link refers to unknown issue {issue_id!r}")
            if commit_id not in commit_ids:
                raise DatasetError(f"link refers to unknown commit {commit_id!r}")

    def artifacts(self) -> Iterator[Artifact]:
        yield from self.issues
        yield from self.commits


def _check_unique(artifacts, what):
    seen = set()
    for a in artifacts:
        if a.id in seen:
            raise DatasetError(f"duplicate {what} id {a.id!r}")
        seen.add(a.id)


def project_stats(project: Project) -> tuple[int, int, int]:
    """Return ``(n_issues, n_commits, n_links)``."""
    return len(project.issues), len(project.commits), len(project.true_links)


def _field(obj, name, where):
    if not isinstance(obj, dict):
        raise DatasetError(f"{where}: expected an object, got {type(obj).__name__}")
    if name not in obj:
        raise DatasetError(f"{where}: missing field {name!r}")
    value = obj[name]
    if not isinstance(value, str):
        raise DatasetError(f"{where}.{name}: expected a string, got {type(value).__name__}")
    return value


def _list(doc, name):
    value = doc.get(name, [])
    if not isinstance(value, list):
        raise DatasetError(f"field {name!r}: expected a list")
    return value


def project_from_dict(doc: dict) -> Project:
    if not isinstance(doc, dict):
        raise DatasetError("dataset root must be a JSON object")
    name = _field(doc, "name", "root")
    issues = tuple(
        Artifact.issue(
            _field(o, "id", f"issues[{i}]"),
            _field(o, "summary", f"issues[{i}]"),
            _field(o, "description", f"issues[{i}]"),
        )
        for i, o in enumerate(_list(doc, "issues"))
    )
    commits = tuple(
        Artifact.commit(
            _field(o, "id", f"commits[{i}]"),
            _field(o, "message", f"commits[{i}]"),
            _field(o, "diff", f"commits[{i}]"),
        )
        for i, o in enumerate(_list(doc, "commits"))
    )
    links = set()
    for i, o in enumerate(_list(doc, "links")):
        pair = (_field(o, "issue", f"links[{i}]"), _field(o, "commit", f"links[{i}]"))
        if pair in links:
            raise DatasetError(f"links[{i}]: duplicate link {pair[0]!r} -> {pair[1]!r}")
        links.add(pair)
    return Project(name, issues, commits, frozenset(links))


def project_to_dict(project: Project) -> dict:
    return {
        "name": project.name,
        "issues": [
            {"id": a.id,
             "summary": a.section(SectionKind.ISSUE_SUMMARY).text,
             "description": a.section(SectionKind.ISSUE_DESCRIPTION).text}
            for a in project.issues
        ],
        "commits": [
            {"id": a.id,
             "message": a.section(SectionKind.COMMIT_MESSAGE).text,
             "diff": a.section(SectionKind.COMMIT_DIFF).text}
            for a in project.commits
        ],
        "links": [{"issue": i, "commit": c} for i, c in sorted(project.true_links)],
    }


def load_project(path) -> Project:
    """Load and validate a project dataset file.

    Raises DatasetError on malformed JSON (with line/column), missing or
    mistyped fields, duplicate ids or links, and dangling link endpoints.
    """
    path = Path(path)
    raw = path.read_bytes()
    if raw.startswith(b"\xef\xbb\xbf"):
        raise DatasetError(f"{path}: file starts with a UTF-8 BOM")
    try:
        doc = json.loads(raw.decode("utf-8"))
    except UnicodeDecodeError as exc:
        raise DatasetError(f"{path}: not valid UTF-8 ({exc})") from exc
    except json.JSONDecodeError as exc:
        raise DatasetError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    return project_from_dict(doc)


def save_project(project: Project, path) -> None:
    text = json.dumps(project_to_dict(project), ensure_ascii=False, indent=2)
    Path(path).write_text(text + "\n", encoding="utf-8")
