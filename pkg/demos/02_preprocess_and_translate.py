"""
Cleaning text, trimming diffs and fanning out translations
==========================================================

Sentences are split and cleaned, diffs keep only added lines of source
files, and every non-English sentence goes to each translator while
English sentences pass through untouched.
"""
import tempfile
from pathlib import Path

from bitrace.corpus import Artifact
from bitrace.preprocess import clean_sentence, preprocess_artifact, trim_diff
from bitrace.translation import TranslationCache, translate_corpus_run

for raw in ["@alice see https://example.org/issue/338 for **details**",
            "edit src/view/element.js then rerun",
            "【重要】disabled属性不会被渲染"]:
    print(repr(raw), "->", repr(clean_sentence(raw)))

diff = """diff --git a/src/view/element.js b/src/view/element.js
--- a/src/view/element.js
+++ b/src/view/element.js
@@ -10,2 +10,2 @@
-    if (value) el.setAttribute(name, value)
+    if (value != null && value !== false) el.setAttribute(name, value)
diff --git a/example/style.css b/example/style.css
--- a/example/style.css
+++ b/example/style.css
@@ -1 +1 @@
+button[disabled] { opacity: .5 }
"""
print("trimmed diff:", trim_diff(diff))

issue = Artifact.issue("338", "disabled属性不会被渲染", "按钮仍然可以点击. Tested on Chrome")
sentences = preprocess_artifact(issue)
for s in sentences:
    print(s.section_kind.value, s.index, s.text)


class Shouty:
    """Stand-in translator: echoes the length of the source text."""

    def __init__(self, name):
        self.name = name

    def translate(self, text, source_lang, target_lang):
        return f"[{self.name}] {len(text)} characters from {source_lang}"


roster = ("nllb", "google", "tencent")
with tempfile.TemporaryDirectory() as tmp:
    path = Path(tmp) / "translations.jsonl"
    live = translate_corpus_run(sentences, roster, TranslationCache(path), {t: Shouty(t) for t in roster})
    print(f"live run: {live.client_calls} calls, {len(live.variants)} variants")
    for v in live.variants:
        print(f"  {v.translator:8s} {v.text}")
    # a second run needs no clients at all
    replay = translate_corpus_run(sentences, roster, TranslationCache(path))
    print(f"replay: {replay.cache_hits} cache hits, identical = {replay.variants == live.variants}")
    print(path.read_text(encoding="utf-8").splitlines()[0])
