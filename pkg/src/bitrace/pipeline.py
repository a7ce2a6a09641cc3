"""End-to-end tracing runs, ablation modes and run manifests.

Modes:

``basic``
    VSM over the cleaned, untranslated text.
``single:<translator>``
    Non-English sentences replaced by one translator's output.
``multicob``
    Every roster translator, consensual biterms appended once each.
``aviate``
    ``multicob`` plus repetition of biterms from issue summaries and
    commit messages, scaled by their distinctiveness.
"""
from __future__ import annotations

import csv
import hashlib
import io
import json
import logging
import os
import shutil
import tempfile
import time
from collections import Counter
from contextlib import contextmanager
from dataclasses import asdict, dataclass, field
from pathlib import Path

from . import consensus, weighting
from .corpus import KEY_SECTION, ArtifactKind, Project, load_project
from .evaluation import MetricsReport, evaluate
from .parsing import CachedParser, HttpParseProvider, ParseCache, extract_candidate_biterms, parse_all
from .preprocess import DEFAULT_EXCLUDED_EXTENSIONS, CleanSentence, DiffTrimConfig, preprocess_artifact
from .retrieval import build_vectors, document_terms, load_stopwords, rank_links, write_ranked_csv
from .translation import IDENTITY, HttpTranslator, TranslationCache, translate_corpus_run

log = logging.getLogger(__name__)

DEFAULT_ROSTER = ("nllb", "m2m100", "google", "tencent")
OUTPUT_FILES = ("ranked.csv", "metrics.json", "manifest.json")


class ConfigError(ValueError):
    pass


@dataclass
class PipelineConfig:
    dataset: Path
    mode: str = "aviate"
    translators: tuple[str, ...] = DEFAULT_ROSTER
    base_translator: str | None = None
    source_lang: str = "zh"
    target_lang: str = "en"
    scale_factor: float = 0.1
    itvf_threshold: float = 0.6
    excluded_extensions: tuple[str, ...] = DEFAULT_EXCLUDED_EXTENSIONS
    stopwords: Path | None = None
    translation_cache: Path | None = None
    parse_cache: Path | None = None
    out: Path = Path("out")
    offline: bool = False
    translator_endpoints: dict = field(default_factory=dict)
    parse_endpoint: str | None = None
    max_workers: int = 4
    debug: bool = False

    def __post_init__(self):
        self.dataset = Path(self.dataset)
        self.out = Path(self.out)
        for name in ("stopwords", "translation_cache", "parse_cache"):
            value = getattr(self, name)
            if value is not None:
                setattr(self, name, Path(value))
        self.translators = tuple(self.translators)
        self.excluded_extensions = tuple(self.excluded_extensions)

    @property
    def kind(self) -> str:
        return self.mode.split(":", 1)[0]

    @property
    def single_translator(self) -> str | None:
        return self.mode.split(":", 1)[1] if self.kind == "single" else None

    @property
    def roster(self) -> tuple[str, ...]:
        if self.kind == "basic":
            return ()
        if self.kind == "single":
            return (self.single_translator,)
        return self.translators

    @property
    def text_translator(self) -> str | None:
        """Translator whose output forms the document text."""
        if self.kind == "basic":
            return None
        if self.kind == "single":
            return self.single_translator
        return self.base_translator or self.translators[0]

    def validate(self) -> "PipelineConfig":
        if self.kind not in ("basic", "single", "multicob", "aviate"):
            raise ConfigError(f"unknown mode {self.mode!r}")
        if self.kind == "single" and not self.single_translator:
            raise ConfigError("mode 'single' needs a translator, e.g. single:tencent")
        if self.kind in ("multicob", "aviate"):
            if not self.translators:
                raise ConfigError(f"mode {self.mode!r} needs a translator roster")
            if len(set(self.translators)) != len(self.translators):
                raise ConfigError(f"duplicate translator in roster {list(self.translators)}")
            if self.base_translator and self.base_translator not in self.translators:
                raise ConfigError(f"base translator {self.base_translator!r} is not in the roster")
            if self.parse_cache is None:
                raise ConfigError(f"mode {self.mode!r} needs a parse cache directory")
        if IDENTITY in self.roster:
            raise ConfigError(f"{IDENTITY!r} is reserved")
        if self.kind != "basic" and self.translation_cache is None and not self.translator_endpoints:
            raise ConfigError("translated modes need a translation cache or translator endpoints")
        try:
            weighting.validate_scale(self.scale_factor)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        if not 0.0 <= self.itvf_threshold <= 1.0:
            raise ConfigError(f"ITVF threshold must lie in [0, 1], got {self.itvf_threshold}")
        if self.max_workers < 1:
            raise ConfigError("max_workers must be positive")
        return self

    def snapshot(self) -> dict:
        doc = asdict(self)
        for k, v in doc.items():
            if isinstance(v, Path):
                doc[k] = str(v)
            elif isinstance(v, tuple):
                doc[k] = list(v)
        # endpoint tokens stay out of the manifest
        doc["translator_endpoints"] = {
            name: {k: v for k, v in spec.items() if k != "token"}
            for name, spec in sorted(self.translator_endpoints.items())
        }
        return doc


@dataclass
class RunManifest:
    config: dict
    inputs: dict
    timings: dict
    outputs: dict
    metrics: dict
    stats: dict

    def to_json(self) -> str:
        return json.dumps(asdict(self), ensure_ascii=False, indent=2, sort_keys=True) + "\n"

    @classmethod
    def load(cls, path) -> "RunManifest":
        return cls(**json.loads(Path(path).read_text(encoding="utf-8")))


def sha256_file(path: Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def sha256_dir(path: Path) -> str:
    h = hashlib.sha256()
    for p in sorted(path.glob("*.conllu")):
        h.update(p.name.encode())
        h.update(sha256_file(p).encode())
    return h.hexdigest()


class _Timer:
    def __init__(self):
        self.timings = {}

    @contextmanager
    def stage(self, name):
        start = time.perf_counter()
        try:
            yield
        finally:
            self.timings[name] = round(time.perf_counter() - start, 4)


def make_clients(cfg: PipelineConfig) -> dict:
    if cfg.offline:
        return {}
    clients = {}
    for name in cfg.roster:
        spec = cfg.translator_endpoints.get(name)
        if spec:
            clients[name] = HttpTranslator(
                name, spec["endpoint"], token=spec.get("token"), rate_limit=spec.get("rate_limit"))
    return clients


def make_parser(cfg: PipelineConfig) -> CachedParser:
    provider = None
    if cfg.parse_endpoint and not cfg.offline:
        provider = HttpParseProvider(cfg.parse_endpoint)
    return CachedParser(ParseCache(cfg.parse_cache), provider)


@dataclass
class SentenceRecord:
    sentence: CleanSentence
    variants: list  # TranslationVariant, roster order
    bags: list = field(default_factory=list)  # (translator, Counter) per variant
    selection: consensus.SentenceSelection | None = None


@dataclass
class ArtifactState:
    artifact_id: str
    kind: ArtifactKind
    sentences: list[SentenceRecord]
    base_text: str = ""
    document: weighting.EnrichedDocument | None = None
    emphasis: weighting.SectionEmphasis | None = None


def _base_text(records: list[SentenceRecord], translator: str | None) -> str:
    parts = []
    for rec in records:
        if translator is None:
            parts.append(rec.sentence.text)
            continue
        chosen = next((v for v in rec.variants if v.translator in (translator, IDENTITY)), None)
        parts.append(chosen.text if chosen else rec.sentence.text)
    return " ".join(parts)


def build_documents(project: Project, cfg: PipelineConfig, timer: _Timer | None = None):
    """Run every stage up to the enriched documents.

    Returns ``(states, debug)`` where states maps artifact id to its
    ArtifactState (issues first, file order).
    """
    timer = timer or _Timer()
    diff_cfg = DiffTrimConfig(frozenset(cfg.excluded_extensions))
    debug: dict = {}

    with timer.stage("preprocess"):
        states = {}
        for art in project.artifacts():
            records = [SentenceRecord(s, []) for s in preprocess_artifact(art, diff_cfg)]
            states[art.id] = ArtifactState(art.id, art.kind, records)

    with timer.stage("translate"):
        if cfg.kind != "basic":
            cache = TranslationCache(cfg.translation_cache)
            all_sentences = [r.sentence for st in states.values() for r in st.sentences]
            run = translate_corpus_run(all_sentences, cfg.roster, cache, make_clients(cfg),
                                       (cfg.source_lang, cfg.target_lang), cfg.max_workers)
            for st in states.values():
                for rec in st.sentences:
                    rec.variants = run.by_sentence[rec.sentence]
            debug["translation"] = {"cache_hits": run.cache_hits, "client_calls": run.client_calls,
                                    "variants": len(run.variants),
                                    "partial": sum(v.partial for v in run.variants)}
        for st in states.values():
            st.base_text = _base_text(st.sentences, cfg.text_translator)

    if cfg.kind in ("multicob", "aviate"):
        with timer.stage("parse"):
            parser = make_parser(cfg)
            texts = [v.text for st in states.values() for r in st.sentences for v in r.variants]
            parses = parse_all(texts, parser, cfg.max_workers)
            for st in states.values():
                for rec in st.sentences:
                    rec.bags = [(v.translator, extract_candidate_biterms(parses[v.text]))
                                for v in rec.variants]

        with timer.stage("consensus"):
            issue_bags = [bag for st in states.values() if st.kind is ArtifactKind.ISSUE
                          for r in st.sentences for _, bag in r.bags]
            commit_bags = [bag for st in states.values() if st.kind is ArtifactKind.COMMIT
                           for r in st.sentences for _, bag in r.bags]
            n_variants = len(issue_bags) + len(commit_bags)
            index = consensus.build_consensus_index(issue_bags, commit_bags, n_variants) if n_variants else None
            for st in states.values():
                for rec in st.sentences:
                    rec.selection = consensus.select_sentence_biterms(
                        rec.bags, index, cfg.itvf_threshold, rec.sentence)
            debug["consensus_index"] = index
            debug["n_variants"] = n_variants

        with timer.stage("enrich"):
            scores = [r.selection.best_score for st in states.values() for r in st.sentences]
            baseline = weighting.CorpusBaseline.from_scores(scores)
            debug["baseline"] = baseline.mean_cons_distinc
            for st in states.values():
                routine = [t.text for t in consensus.enrichment_tokens(r.selection for r in st.sentences)]
                if cfg.kind == "multicob":
                    st.document = weighting.apply_enrichment(st.base_text, routine)
                    continue
                key = KEY_SECTION[st.kind]
                key_records = [r for r in st.sentences if r.sentence.section_kind is key]
                sec = weighting.section_score([r.selection.best_score for r in key_records])
                emph = weighting.emphasis(sec, baseline)
                rep = weighting.repetition_count(emph, weighting.token_length(st.base_text), cfg.scale_factor)
                emphasized = [t.text for t in consensus.enrichment_tokens(r.selection for r in key_records)]
                st.emphasis = weighting.SectionEmphasis(st.artifact_id, key, sec, emph, rep)
                st.document = weighting.apply_enrichment(st.base_text, routine, emphasized, rep)
    else:
        for st in states.values():
            st.document = weighting.EnrichedDocument(st.base_text)
    return states, debug


def trace(project: Project, cfg: PipelineConfig, timer: _Timer | None = None):
    """Rank links for ``project``; returns ``(ranked, report, states, debug)``."""
    timer = timer or _Timer()
    states, debug = build_documents(project, cfg, timer)
    stopwords = load_stopwords(cfg.stopwords)
    with timer.stage("retrieve"):
        terms = {aid: document_terms(st.document, stopwords) for aid, st in states.items()}
        vectors = build_vectors(terms)
        ranked = rank_links({a.id: vectors[a.id] for a in project.issues},
                            {a.id: vectors[a.id] for a in project.commits})
    with timer.stage("evaluate"):
        report = evaluate(ranked, project.true_links, project.name, cfg.mode)
    return ranked, report, states, debug


def _write_debug(staging: Path, states, debug) -> list[str]:
    written = []
    index = debug.get("consensus_index")
    if index is not None:
        consensus.export_tsv(index, staging / "consensus.tsv")
        written.append("consensus.tsv")
    rows = []
    for st in states.values():
        if st.emphasis is None:
            continue
        counts = Counter(st.document.appended)
        rows.append({
            "artifact_id": st.artifact_id,
            "section": st.emphasis.section_kind.value,
            "section_score": st.emphasis.cons_distinc,
            "emphasis": st.emphasis.emph,
            "repetition_count": st.emphasis.repetition_count,
            "appended": dict(sorted(counts.items())),
        })
    if rows:
        (staging / "weighting.json").write_text(json.dumps(rows, indent=2) + "\n", encoding="utf-8")
        written.append("weighting.json")
    return written


def _input_hashes(cfg: PipelineConfig) -> dict:
    hashes = {"dataset": sha256_file(cfg.dataset)}
    if cfg.kind != "basic" and cfg.translation_cache and cfg.translation_cache.exists():
        hashes["translation_cache"] = sha256_file(cfg.translation_cache)
    if cfg.kind in ("multicob", "aviate") and cfg.parse_cache and cfg.parse_cache.exists():
        hashes["parse_cache"] = sha256_dir(cfg.parse_cache)
    if cfg.stopwords:
        hashes["stopwords"] = sha256_file(cfg.stopwords)
    return hashes


def run(cfg: PipelineConfig) -> RunManifest:
    """Execute one mode and write ranked.csv, metrics.json and manifest.json.

    Outputs are staged in a temporary directory and moved into ``cfg.out``
    only when every stage succeeded.
    """
    cfg.validate()
    timer = _Timer()
    with timer.stage("load"):
        project = load_project(cfg.dataset)
    cfg.out.mkdir(parents=True, exist_ok=True)
    staging = Path(tempfile.mkdtemp(prefix=".staging-", dir=cfg.out))
    try:
        ranked, report, states, debug = trace(project, cfg, timer)
        write_ranked_csv(ranked, staging / "ranked.csv")
        (staging / "metrics.json").write_text(report.to_json(), encoding="utf-8")
        extra = _write_debug(staging, states, debug) if cfg.debug else []
        files = ["ranked.csv", "metrics.json", *extra]
        manifest = RunManifest(
            config=cfg.snapshot(),
            inputs=_input_hashes(cfg),
            timings=timer.timings,
            outputs={name: sha256_file(staging / name) for name in files},
            metrics={"project": project.name, "mode": cfg.mode,
                     "ap": round(report.ap, 2), "map": round(report.map, 2)},
            stats={"issues": len(project.issues), "commits": len(project.commits),
                   "links": len(project.true_links), "candidates": len(ranked),
                   "excluded_queries": len(report.excluded_queries),
                   **{k: v for k, v in debug.items() if k in ("n_variants", "baseline", "translation")}},
        )
        (staging / "manifest.json").write_text(manifest.to_json(), encoding="utf-8")
        for name in [*files, "manifest.json"]:
            os.replace(staging / name, cfg.out / name)
    finally:
        shutil.rmtree(staging, ignore_errors=True)
    log.info("%s %s: AP %.2f MAP %.2f", project.name, cfg.mode, report.ap, report.map)
    return manifest


def ablation_report(manifests) -> tuple[str, str]:
    """Side-by-side AP/MAP of several runs with deltas against the first.

    Returns ``(text table, csv)``.
    """
    manifests = [RunManifest.load(m) if isinstance(m, (str, Path)) else m for m in manifests]
    if len(manifests) < 2:
        raise ValueError("an ablation report needs at least two runs")
    datasets = {m.inputs.get("dataset") for m in manifests}
    if len(datasets) != 1:
        raise ValueError("runs were made on different datasets")
    modes = [m.metrics["mode"] for m in manifests]
    base = manifests[0].metrics
    rows = [
        ["AP", *[f"{m.metrics['ap']:.2f}" for m in manifests]],
        ["MAP", *[f"{m.metrics['map']:.2f}" for m in manifests]],
        ["ΔAP", *[f"{m.metrics['ap'] - base['ap']:+.2f}" for m in manifests]],
        ["ΔMAP", *[f"{m.metrics['map'] - base['map']:+.2f}" for m in manifests]],
    ]
    header = ["metric", *modes]
    widths = [max(len(r[i]) for r in [header, *rows]) for i in range(len(header))]
    lines = ["  ".join(c.rjust(w) for c, w in zip(r, widths)) for r in [header, *rows]]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return "\n".join(lines) + "\n", buf.getvalue()
