import math
import random
from collections import Counter

import pytest
from hypothesis import given
from hypothesis import strategies as st

from bitrace.retrieval import document_terms
from bitrace.weighting import (
    CorpusBaseline,
    EnrichedDocument,
    apply_enrichment,
    emphasis,
    repetition_count,
    section_score,
    sentence_score,
    token_length,
    validate_scale,
)


def test_sentence_score():
    assert sentence_score([0.333, 0, 0, 0]) == 0.333
    assert sentence_score([0.5]) == 0.5


@pytest.mark.parametrize("scores, expected", [([0.333], 0.333), ([0.2, 0.4], 0.3), ([], 0.0)])
def test_section_score(scores, expected):
    assert section_score(scores) == pytest.approx(expected)


@pytest.mark.parametrize("value, base, expected", [(0.333, 0.179, 0.333), (0.05, 0.179, 0.179), (0, 0, 0)])
def test_emphasis(value, base, expected):
    assert emphasis(value, CorpusBaseline(base)) == expected
    assert emphasis(value, base) == expected


@pytest.mark.parametrize("emph, length, expected", [(0.333, 15, 1), (0.0, 15, 0), (0.0, 0, 0), (1.0, 100, 10)])
def test_repetition_count(emph, length, expected):
    assert repetition_count(emph, length, 0.1) == expected


@pytest.mark.parametrize("scale", [0.0, 1.0, -0.1, 1.5])
def test_scale_validation(scale):
    with pytest.raises(ValueError):
        validate_scale(scale)
    with pytest.raises(ValueError):
        repetition_count(0.5, 10, scale)


@given(st.floats(0, 1), st.floats(0, 1), st.integers(0, 500), st.integers(0, 500),
       st.sampled_from([0.05, 0.1, 0.2, 0.3, 0.9]))
def test_repetition_monotone(e1, e2, n1, n2, scale):
    lo_e, hi_e = sorted((e1, e2))
    lo_n, hi_n = sorted((n1, n2))
    assert repetition_count(lo_e, lo_n, scale) <= repetition_count(hi_e, lo_n, scale)
    assert repetition_count(lo_e, lo_n, scale) <= repetition_count(lo_e, hi_n, scale)
    assert repetition_count(hi_e, hi_n, scale) >= 0


def test_summary_token_appears_twice():
    doc = apply_enrichment("base", ["attributdisabl"], ["attributdisabl"], rep=1)
    assert doc.appended.count("attributdisabl") == 2


def test_diff_origin_token_appears_once():
    doc = apply_enrichment("base", ["domrender", "attributdisabl"], ["attributdisabl"], rep=1)
    assert doc.appended.count("domrender") == 1


def test_rep_59():
    doc = apply_enrichment("msg", ["classmerg", "mergstyl"], ["classmerg", "mergstyl"], rep=59)
    counts = Counter(doc.appended)
    assert counts == {"classmerg": 60, "mergstyl": 60}
    # routine pass first, then repetition passes in sorted order
    assert doc.appended[:4] == ("classmerg", "mergstyl", "classmerg", "mergstyl")


def test_worked_example_tf():
    base = " ".join(f"w{i}" for i in range(15))
    assert token_length(base) == 15
    rep = repetition_count(emphasis(0.333, 0.179), token_length(base), 0.1)
    doc = apply_enrichment(base, ["attributdisabl"], ["attributdisabl"], rep)
    terms = document_terms(doc, stopwords=frozenset())
    assert len(terms) == 17
    assert abs(terms.count("attributdisabl") / len(terms) - 2 / 17) <= 1e-9


@given(st.lists(st.sampled_from(["fix", "render", "dom", "attribut"]), max_size=15),
       st.sets(st.sampled_from(["ab", "cd", "ef"])), st.sets(st.sampled_from(["ab", "cd", "gh"])),
       st.integers(0, 5))
def test_enrichment_length_and_prefix(words, routine, emphasized, rep):
    base = " ".join(words)
    routine = routine | emphasized
    doc = apply_enrichment(base, routine, emphasized, rep)
    assert doc.text.split()[:len(words)] == words
    assert token_length(doc.text) == len(words) + len(routine) + rep * len(emphasized)


def test_enriched_document_text():
    assert EnrichedDocument("a b", ("x",)).text == "a b x"
    assert EnrichedDocument("", ("x",)).text == "x"


def test_baseline_matches_brute_force():
    rng = random.Random(3)
    for _ in range(50):
        sentences = [[rng.random() for _ in range(rng.randint(1, 5))] for _ in range(rng.randint(1, 30))]
        best = [sentence_score(v) for v in sentences]
        naive = 0.0
        for v in sentences:
            m = v[0]
            for x in v[1:]:
                if x > m:
                    m = x
            naive += m
        naive /= len(sentences)
        assert math.isclose(CorpusBaseline.from_scores(best).mean_cons_distinc, naive, rel_tol=1e-12)
