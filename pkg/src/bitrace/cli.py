"""Command-line entry point.

Exit codes: 0 success, 2 configuration error, 3 external-service error,
4 data validation error.
"""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .corpus import DatasetError, load_project
from .evaluation import EvaluationError, evaluate
from .parsing import ParseError, parse_all
from .pipeline import (
    DEFAULT_ROSTER,
    ConfigError,
    PipelineConfig,
    ablation_report,
    make_clients,
    make_parser,
    run,
)
from .preprocess import DiffTrimConfig, preprocess_artifact
from .retrieval import read_ranked_csv
from .translation import TranslationCache, TranslationError, translate_corpus_run

EXIT_CONFIG, EXIT_EXTERNAL, EXIT_DATA = 2, 3, 4

log = logging.getLogger("bitrace")

# flag dest -> PipelineConfig field
_FLAG_FIELDS = {
    "dataset": "dataset",
    "mode": "mode",
    "translators": "translators",
    "base_translator": "base_translator",
    "source_lang": "source_lang",
    "target_lang": "target_lang",
    "scale_factor": "scale_factor",
    "itvf_threshold": "itvf_threshold",
    "excluded_extensions": "excluded_extensions",
    "translation_cache": "translation_cache",
    "parse_cache": "parse_cache",
    "parse_endpoint": "parse_endpoint",
    "out": "out",
    "stopwords": "stopwords",
    "offline": "offline",
    "max_workers": "max_workers",
    "debug": "debug",
}


def _csv_list(value: str) -> tuple[str, ...]:
    return tuple(v.strip() for v in value.split(",") if v.strip())


def load_config_file(path) -> dict:
    """Read a TOML config; keys mirror the long flags with underscores.

    ``[translators.<name>]`` tables give ``endpoint``, ``token`` and
    ``rate_limit`` for HTTP translation clients; the roster itself goes
    under the top-level ``roster`` key.
    """
    with open(path, "rb") as fh:
        doc = tomllib.load(fh)
    endpoints = doc.pop("translators", {})
    if not isinstance(endpoints, dict):
        raise ConfigError("'translators' must be a table of endpoint settings; use 'roster' for names")
    out = {"translator_endpoints": endpoints}
    if "roster" in doc:
        out["translators"] = tuple(doc.pop("roster"))
    trim = doc.pop("diff_trim", {})
    if "excluded_extensions" in trim:
        out["excluded_extensions"] = tuple(trim["excluded_extensions"])
    unknown = set(doc) - set(_FLAG_FIELDS.values())
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    out.update(doc)
    return out


def build_config(args) -> PipelineConfig:
    values = load_config_file(args.config) if getattr(args, "config", None) else {}
    for dest, name in _FLAG_FIELDS.items():
        value = getattr(args, dest, None)
        if value is not None and value is not False:
            values[name] = value
    if "dataset" not in values:
        raise ConfigError("--dataset is required (flag or config file)")
    try:
        return PipelineConfig(**values)
    except TypeError as exc:
        raise ConfigError(str(exc)) from None


def _add_common(p, mode=True):
    p.add_argument("--config", type=Path, help="TOML config file; flags override it")
    p.add_argument("--dataset", type=Path)
    if mode:
        p.add_argument("--mode", help="basic | single:<translator> | multicob | aviate")
    p.add_argument("--translators", type=_csv_list,
                   help=f"comma-separated roster (default {','.join(DEFAULT_ROSTER)})")
    p.add_argument("--base-translator", help="translator whose text forms the documents")
    p.add_argument("--source-lang")
    p.add_argument("--target-lang")
    p.add_argument("--scale-factor", type=float)
    p.add_argument("--itvf-threshold", type=float)
    p.add_argument("--excluded-extensions", type=_csv_list)
    p.add_argument("--translation-cache", type=Path)
    p.add_argument("--parse-cache", type=Path)
    p.add_argument("--parse-endpoint")
    p.add_argument("--stopwords", type=Path)
    p.add_argument("--out", type=Path)
    p.add_argument("--offline", action="store_true", help="forbid network access")
    p.add_argument("--max-workers", type=int)
    p.add_argument("--debug", action="store_true", help="also write consensus.tsv and weighting.json")


def cmd_translate(args) -> int:
    cfg = build_config(args)
    if cfg.translation_cache is None:
        raise ConfigError("--translation-cache is required")
    project = load_project(cfg.dataset)
    diff_cfg = DiffTrimConfig(frozenset(cfg.excluded_extensions))
    sentences = [s for a in project.artifacts() for s in preprocess_artifact(a, diff_cfg)]
    roster = cfg.roster if cfg.kind == "single" else cfg.translators
    cache = TranslationCache(cfg.translation_cache)
    result = translate_corpus_run(sentences, roster, cache, make_clients(cfg),
                                  (cfg.source_lang, cfg.target_lang), cfg.max_workers)
    print(f"{len(result.variants)} variants, {result.cache_hits} cached, "
          f"{result.client_calls} translated")
    return 0


def cmd_parse(args) -> int:
    cfg = build_config(args)
    if cfg.parse_cache is None:
        raise ConfigError("--parse-cache is required")
    if cfg.translation_cache is None:
        raise ConfigError("--translation-cache is required")
    project = load_project(cfg.dataset)
    diff_cfg = DiffTrimConfig(frozenset(cfg.excluded_extensions))
    sentences = [s for a in project.artifacts() for s in preprocess_artifact(a, diff_cfg)]
    result = translate_corpus_run(sentences, cfg.translators, TranslationCache(cfg.translation_cache),
                                  {}, (cfg.source_lang, cfg.target_lang))
    parsed = parse_all([v.text for v in result.variants], make_parser(cfg), cfg.max_workers)
    print(f"{len(parsed)} distinct variant texts parsed into {cfg.parse_cache}")
    return 0


def cmd_trace(args) -> int:
    cfg = build_config(args)
    manifest = run(cfg)
    m = manifest.metrics
    print(f"{m['project']} [{m['mode']}] AP {m['ap']:.2f} MAP {m['map']:.2f} -> {cfg.out}")
    return 0


def cmd_eval(args) -> int:
    project = load_project(args.dataset)
    ranked = read_ranked_csv(args.ranked)
    report = evaluate(ranked, project.true_links, project.name, args.mode or "external")
    if args.out:
        Path(args.out).write_text(report.to_json(), encoding="utf-8")
    print(f"AP {report.ap:.2f} MAP {report.map:.2f}")
    return 0


def cmd_ablate(args) -> int:
    base = build_config(args)
    modes = args.modes or ("basic", f"single:{base.text_translator or base.translators[0]}",
                           "multicob", "aviate")
    manifests = []
    for mode in modes:
        cfg = PipelineConfig(**{**base.__dict__, "mode": mode,
                                "out": base.out / mode.replace(":", "-")})
        manifests.append(run(cfg))
    text, table = ablation_report(manifests)
    base.out.mkdir(parents=True, exist_ok=True)
    (base.out / "ablation.txt").write_text(text, encoding="utf-8")
    (base.out / "ablation.csv").write_text(table, encoding="utf-8")
    print(text, end="")
    return 0


def make_parser_cli() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bitrace", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("translate", help="populate the translation cache")
    _add_common(p)
    p.set_defaults(func=cmd_translate)

    p = sub.add_parser("parse", help="populate the parse cache for all cached variants")
    _add_common(p)
    p.set_defaults(func=cmd_parse)

    p = sub.add_parser("trace", help="run one mode end to end")
    _add_common(p)
    p.set_defaults(func=cmd_trace)

    p = sub.add_parser("eval", help="metrics for an existing ranked CSV")
    p.add_argument("--dataset", type=Path, required=True)
    p.add_argument("--ranked", type=Path, required=True)
    p.add_argument("--mode")
    p.add_argument("--out", type=Path, help="write metrics JSON here")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("ablate", help="run several modes and compare them")
    _add_common(p, mode=False)
    p.add_argument("--modes", type=_csv_list, help="comma-separated modes, in column order")
    p.set_defaults(func=cmd_ablate)
    return parser


def main(argv=None) -> int:
    args = make_parser_cli().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ConfigError, tomllib.TOMLDecodeError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (TranslationError, ParseError) as exc:
        print(f"external service error: {exc}", file=sys.stderr)
        return EXIT_EXTERNAL
    except (DatasetError, EvaluationError, FileNotFoundError, ValueError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
