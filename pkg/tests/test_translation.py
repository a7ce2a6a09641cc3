import json
import threading

import pytest

from bitrace.corpus import SectionKind
from bitrace.preprocess import CleanSentence
from bitrace.translation import (
    IDENTITY,
    HttpTranslator,
    ReplayTranslator,
    TranslationCache,
    TranslationError,
    is_non_english,
    sha256_text,
    translate_corpus,
    translate_corpus_run,
    variant_count,
)

ROSTER = ("nllb", "m2m100", "google", "tencent")


def sent(text, idx=0, art="i1"):
    return CleanSentence(art, SectionKind.ISSUE_DESCRIPTION, idx, text)


class FakeClient:
    def __init__(self, name, fail=False, keep_source=False):
        self.name = name
        self.calls = []
        self.fail = fail
        self.keep_source = keep_source
        self._lock = threading.Lock()

    def translate(self, text, source_lang, target_lang):
        with self._lock:
            self.calls.append(text)
        if self.fail:
            raise TranslationError("boom")
        if self.keep_source:
            return f"{self.name} half {text}"
        return f"{self.name} says {len(text)}"


def clients(**kw):
    return {t: FakeClient(t, **kw) for t in ROSTER}


@pytest.mark.parametrize("text, expected", [
    ("fix the bug", False),
    ("Fix: a/b (c) 1+2=3!", False),
    ("修复 bug", True),
    ("café", True),
    ("tab\tand\nnewline", False),
    ("", False),
])
def test_is_non_english(text, expected):
    assert is_non_english(text) is expected


def test_variant_count_english_plus_chinese():
    cache = TranslationCache()
    out = translate_corpus([sent("fix the bug"), sent("修复属性", 1)], ROSTER, cache, clients())
    assert len(out) == 1 + 4
    assert [v.translator for v in out] == [IDENTITY, *ROSTER]
    assert out[0].text == "fix the bug"


def test_identity_never_reaches_client():
    cs = clients()
    translate_corpus([sent("plain english"), sent("also english", 1)], ROSTER, TranslationCache(), cs)
    assert all(not c.calls for c in cs.values())


def test_replay_equals_live(tmp_path):
    sentences = [sent("修复属性"), sent("ok then", 1), sent("渲染失败", 2)]
    path = tmp_path / "tr.jsonl"
    live = translate_corpus(sentences, ROSTER, TranslationCache(path), clients())
    offline = {t: ReplayTranslator(t) for t in ROSTER}
    replay = translate_corpus(sentences, ROSTER, TranslationCache(path), offline)
    assert replay == live
    replay_no_clients = translate_corpus(sentences, ROSTER, TranslationCache(path))
    assert replay_no_clients == live


def test_cache_hits_and_calls_counted():
    cache = TranslationCache()
    sentences = [sent("修复属性"), sent("修复属性", 1, "i2")]
    first = translate_corpus_run(sentences, ROSTER, cache, clients())
    assert first.client_calls == 4  # duplicates deduplicated by hash
    second = translate_corpus_run(sentences, ROSTER, cache, clients())
    assert second.client_calls == 0 and second.cache_hits == 8


def test_cache_jsonl_format(tmp_path):
    path = tmp_path / "tr.jsonl"
    translate_corpus([sent("修复")], ("google",), TranslationCache(path), {"google": FakeClient("google")})
    (line,) = path.read_text(encoding="utf-8").splitlines()
    assert json.loads(line) == {"src_sha256": sha256_text("修复"), "translator": "google",
                                "text": "google says 2"}


def test_cache_first_entry_wins(tmp_path):
    path = tmp_path / "tr.jsonl"
    rows = [{"src_sha256": "h", "translator": "t", "text": "first"},
            {"src_sha256": "h", "translator": "t", "text": "second"}]
    path.write_text("".join(json.dumps(r) + "\n" for r in rows), encoding="utf-8")
    assert TranslationCache(path).get("h", "t") == "first"


def test_cache_bad_line(tmp_path):
    path = tmp_path / "tr.jsonl"
    path.write_text('{"src_sha256": "h"}\n', encoding="utf-8")
    with pytest.raises(TranslationError, match=":1:"):
        TranslationCache(path)


def test_cache_export_merge(tmp_path):
    a = TranslationCache()
    a.put("h1", "t", "x")
    a.put("h2", "t", "y")
    a.export(tmp_path / "a.jsonl")
    b = TranslationCache()
    b.put("h1", "t", "kept")
    assert b.merge(tmp_path / "a.jsonl") == 1
    assert b.get("h1", "t") == "kept" and b.get("h2", "t") == "y"


def test_partial_flag():
    out = translate_corpus([sent("修复")], ("nllb",), TranslationCache(),
                           {"nllb": FakeClient("nllb", keep_source=True)})
    assert out[0].partial is True


def test_missing_client_names_hash_and_translator():
    h = sha256_text("修复")
    with pytest.raises(TranslationError) as err:
        translate_corpus([sent("修复")], ROSTER, TranslationCache(), {})
    assert h in str(err.value) and "nllb" in str(err.value)


def test_client_failure_names_hash_and_translator():
    with pytest.raises(TranslationError) as err:
        translate_corpus([sent("修复")], ("google",), TranslationCache(),
                         {"google": FakeClient("google", fail=True)})
    assert sha256_text("修复") in str(err.value) and "google" in str(err.value)


def test_replay_translator_raises():
    with pytest.raises(TranslationError):
        ReplayTranslator("x").translate("a", "zh", "en")


@pytest.mark.parametrize("roster", [("a", "a"), ("a", ""), ("identity",)])
def test_bad_roster(roster):
    with pytest.raises(ValueError):
        translate_corpus([], roster, TranslationCache())


def test_group_order_and_variant_count():
    sentences = [sent("修复", 0), sent("english", 1), sent("渲染", 2)]
    run = translate_corpus_run(sentences, ROSTER, TranslationCache(), clients())
    assert list(run.by_sentence) == sentences
    assert [len(g) for g in run.by_sentence.values()] == [4, 1, 4]
    assert variant_count(run.variants[:5], run.variants[5:]) == 9


class FakeResponse:
    def __init__(self, status, body):
        self.status, self.body = status, body

    def raise_for_status(self):
        if self.status >= 400:
            raise RuntimeError(f"HTTP {self.status}")

    def json(self):
        return self.body


class FakeSession:
    def __init__(self, responses):
        self.responses = list(responses)
        self.requests = []

    def post(self, url, json=None, headers=None, timeout=None):
        self.requests.append((url, json, headers))
        return self.responses.pop(0)


def test_http_translator_retries_then_succeeds():
    session = FakeSession([FakeResponse(503, {}), FakeResponse(200, {"text": "attribute"})])
    tr = HttpTranslator("google", "http://mt/x", token="k", backoff=0.0, session=session)
    assert tr.translate("属性", "zh", "en") == "attribute"
    url, payload, headers = session.requests[-1]
    assert payload == {"text": "属性", "source": "zh", "target": "en"}
    assert headers == {"Authorization": "Bearer k"}
    assert len(session.requests) == 2


def test_http_translator_gives_up():
    session = FakeSession([FakeResponse(500, {})] * 3)
    tr = HttpTranslator("google", "http://mt/x", attempts=3, backoff=0.0, session=session)
    with pytest.raises(TranslationError, match="3 attempts"):
        tr.translate("属性", "zh", "en")


def test_http_translator_bad_body():
    session = FakeSession([FakeResponse(200, {"text": 5})])
    tr = HttpTranslator("g", "http://mt/x", attempts=1, backoff=0.0, session=session)
    with pytest.raises(TranslationError):
        tr.translate("属性", "zh", "en")
