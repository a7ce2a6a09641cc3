import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bitrace.corpus import Artifact, Section, SectionKind
from bitrace.preprocess import (
    DEFAULT_EXCLUDED_EXTENSIONS,
    DiffTrimConfig,
    clean_sentence,
    preprocess_artifact,
    split_sentences,
    trim_diff,
)


@pytest.mark.parametrize("text, expected", [
    ("line one\nline two", ["line one", "line two"]),
    ("A. B", ["A", "B"]),
    ("修复bug。done", ["修复bug", "done"]),
    ("a\r\nb", ["a", "b"]),
    ("really? yes! ok", ["really", "yes", "ok"]),
    ("出错！再试？好", ["出错", "再试", "好"]),
    ("", []),
    ("\n\n", []),
])
def test_split_sentences(text, expected):
    assert split_sentences(Section(SectionKind.ISSUE_DESCRIPTION, text)) == expected


def test_split_keeps_dotted_tokens():
    assert split_sentences("see https://x.y/z and san.parseTemplate v1.2") == [
        "see https://x.y/z and san.parseTemplate v1.2"]


@pytest.mark.parametrize("raw, expected", [
    ("see https://x.y/z for details", "see for details"),
    ("@alice **fix** applied", "fix applied"),
    ("", None),
    ("   ", None),
    ("edit src/view/element.js now", "edit now"),
    ("C:\\temp\\log.txt removed", "removed"),
    ("~~old~~ new", "old new"),
    ("# Title", "Title"),
    ("@|bob hi", "@ bob hi"),
    ("【重要】修复", "重要 修复"),
    ("a and/or b", "a b"),
])
def test_clean_sentence(raw, expected):
    assert clean_sentence(raw) == expected


def test_clean_keeps_identifiers():
    assert clean_sentence("call parseTemplate(x) on el.value") == "call parseTemplate(x) on el.value"


@settings(max_examples=300)
@given(st.lists(st.sampled_from(list("ab /\\:@*_~`#|.xyz属性\n\t") + ["http://", "**", "see "]),
                max_size=30).map("".join))
def test_clean_idempotent(raw):
    once = clean_sentence(raw)
    if once is not None:
        assert clean_sentence(once) == once
        assert once.strip() == once and once


JAVA_CSS = """diff --git a/src/Main.java b/src/Main.java
index 1..2 100644
--- a/src/Main.java
+++ b/src/Main.java
@@ -1,3 +1,3 @@
+foo
-bar
 baz
diff --git a/web/style.css b/web/style.css
--- a/web/style.css
+++ b/web/style.css
@@ -1 +1,5 @@
+.a { color: red }
+.b { color: red }
+.c { color: red }
+.d { color: red }
+.e { color: red }
"""


def test_trim_java_segment():
    java_only = JAVA_CSS.split("diff --git a/web")[0]
    assert trim_diff(java_only) == "foo"


def test_trim_css_dropped():
    css_only = "diff --git a/web" + JAVA_CSS.split("diff --git a/web")[1]
    assert trim_diff(css_only) == ""


def test_trim_mixed():
    assert trim_diff(JAVA_CSS) == "foo"


def test_trim_headerless():
    assert trim_diff("+added\n-removed\n context\n+more") == "added\nmore"


def test_trim_plain_header_pair_without_diff_git():
    text = "--- a/app.vue\n+++ b/app.vue\n+<template/>\n--- a/x.py\n+++ b/x.py\n+print(1)\n"
    assert trim_diff(text) == "print(1)"


def test_trim_deleted_file_uses_old_path():
    text = "--- a/x.styl\n+++ /dev/null\n+ghost\n"
    assert trim_diff(text) == ""


def test_trim_markdown_bullet_not_a_removed_line():
    assert trim_diff("+- item one\n+-- two") == " item one\n two"


def test_trim_config_normalizes_extensions():
    cfg = DiffTrimConfig(frozenset({"JS", ".Py"}))
    assert cfg.excluded_extensions == {".js", ".py"}
    assert trim_diff("--- a/a.js\n+++ b/a.js\n+x\n", cfg) == ""


def test_default_exclusions():
    assert set(DiffTrimConfig().excluded_extensions) == set(DEFAULT_EXCLUDED_EXTENSIONS)


def random_diff(rng):
    exts = [".java", ".js", ".css", ".vue", ".pom", ".properties", ".axml", ".styl", ".py", ""]
    parts = []
    for k in range(rng.randint(0, 4)):
        ext = rng.choice(exts)
        marker = "EXCLUDED" if ext in DEFAULT_EXCLUDED_EXTENSIONS else "kept"
        if rng.random() < 0.5:
            parts.append(f"diff --git a/f{k}{ext} b/f{k}{ext}")
        parts += [f"--- a/f{k}{ext}", f"+++ b/f{k}{ext}", "@@ -1 +1 @@"]
        for _ in range(rng.randint(0, 6)):
            prefix = rng.choice(["+", "-", " ", "+-", "+--", "-+"])
            parts.append(f"{prefix}{marker} {rng.randint(0, 99)}")
    return "\n".join(parts)


def test_trim_properties_fuzz():
    rng = random.Random(7)
    for _ in range(500):
        out = trim_diff(random_diff(rng))
        for line in out.splitlines():
            assert not line.startswith("-")
        assert "EXCLUDED" not in out


def test_preprocess_artifact_sections_and_order():
    art = Artifact.commit("c1", "fix it. done", "--- a/a.css\n+++ b/a.css\n+x\n--- a/b.js\n+++ b/b.js\n+render it\n")
    out = preprocess_artifact(art)
    assert [(s.section_kind, s.index, s.text) for s in out] == [
        (SectionKind.COMMIT_MESSAGE, 0, "fix it"),
        (SectionKind.COMMIT_MESSAGE, 1, "done"),
        (SectionKind.COMMIT_DIFF, 0, "render it"),
    ]


def test_preprocess_empty_sections():
    assert preprocess_artifact(Artifact.issue("i")) == []


def test_preprocess_deterministic():
    art = Artifact.issue("i", "@a see http://x.io **bold**", "one\ntwo")
    assert preprocess_artifact(art) == preprocess_artifact(art)


def test_clean_idempotent_seeded_corpus():
    rng = random.Random(20240501)
    pieces = ["fix", "the", "bug", "@dev", "http://a.b/c", "src/a.js", "**", "__", "~~", "`",
              "#", ">", "|", "属性", "渲染", "。", " ", "\t", "and/or", "x.y", "{", "}", "【", "】"]
    for _ in range(1000):
        raw = "".join(rng.choice(pieces) + rng.choice(["", " "]) for _ in range(rng.randint(0, 12)))
        once = clean_sentence(raw)
        assert once is None or clean_sentence(once) == once
