"""
Consensual biterms and emphasis, step by step
=============================================

One Chinese issue sentence is translated four ways. Only one translation
agrees with the commit on "attribute", so only that variant yields the
consensual biterm that ends up appended to the issue.
"""
from collections import Counter

from bitrace.consensus import build_consensus_index, enrichment_tokens, select_sentence_biterms
from bitrace.parsing import Biterm, ParsedToken, extract_candidate_biterms
from bitrace.retrieval import document_terms
from bitrace.weighting import apply_enrichment, emphasis, repetition_count, token_length

T = ParsedToken

# dependency parses of the issue sentence under each translator
issue_parses = {
    "nllb": [T(1, "disabled", "JJ", 2, "amod"), T(2, "property", "NN", 5, "nsubj:pass"),
             T(3, "is", "VBZ", 5, "aux:pass"), T(4, "not", "RB", 5, "advmod"),
             T(5, "rendered", "VBN", 0, "root")],
    "google": [T(1, "the", "DT", 3, "det"), T(2, "disabled", "JJ", 3, "amod"),
               T(3, "property", "NN", 6, "nsubj:pass"), T(4, "will", "MD", 6, "aux"),
               T(5, "not", "RB", 6, "advmod"), T(6, "rendered", "VBN", 0, "root")],
    "tencent": [T(1, "the", "DT", 3, "det"), T(2, "disabled", "JJ", 3, "amod"),
                T(3, "attribute", "NN", 5, "nsubj:pass"), T(4, "is", "VBZ", 5, "aux:pass"),
                T(5, "rendered", "VBN", 0, "root"), T(6, "DOM", "NN", 5, "obl")],
}
issue_bags = {name: extract_candidate_biterms(toks) for name, toks in issue_parses.items()}
for name, bag in issue_bags.items():
    print(f"{name:8s}", sorted((b.gov_stem, b.dep_stem, b.reln) for b in bag))

# the commit message, already English, has a single identity variant
commit_bag = extract_candidate_biterms([
    T(1, "skip", "VB", 0, "root"), T(2, "disabled", "JJ", 3, "amod"), T(3, "attributes", "NNS", 1, "obj"),
    T(4, "render", "VB", 1, "advcl"), T(5, "DOM", "NN", 4, "obj"),
])

# a larger project would have thousands of variants; pretend there are 40
index = build_consensus_index(list(issue_bags.values()), [commit_bag, Counter()], n_variants=40)
for bt in sorted(index.consensual):
    print(f"consensual {bt.gov_stem}/{bt.dep_stem}/{bt.reln}: tvf {index.tvf[bt]} "
          f"itvf {index.raw(bt):.3f} norm {index.norm(bt):.3f}")

# two-tier selection for the issue sentence
sel = select_sentence_biterms(list(issue_bags.items()), index)
print("variant scores", {k: round(v, 3) for k, v in sel.scores.items()}, "winner", sel.winner)
tokens = [t.text for t in enrichment_tokens([sel])]
print("enrichment tokens", tokens)

# the sentence is the whole summary; pretend the corpus mean is 0.179
base = "disabled attribute is not rendered on DOM button still clickable after setting disabled on it"
emph = emphasis(sel.best_score, 0.179)
rep = repetition_count(emph, token_length(base), 0.1)
doc = apply_enrichment(base, tokens, tokens, rep)
terms = document_terms(doc)  # stopwords drop out of the term list
print(f"emphasis {emph:.3f}, length {token_length(base)}, repetitions {rep}")
print("appended", doc.appended)
for t in tokens:
    print(f"TF({t}) = {terms.count(t)}/{len(terms)} = {terms.count(t) / len(terms):.3f}")
