"""
Ablation on the planted bilingual fixture
=========================================

Six Chinese issues and eight commits, translated by four scripted
translators. Each mode adds one ingredient: translation, consensus
enrichment, then emphasis of summaries and messages.
"""
import tempfile
from pathlib import Path

from bitrace.pipeline import PipelineConfig, ablation_report, run

fixture = Path(__file__).resolve().parent.parent / "tests" / "fixtures" / "planted"

with tempfile.TemporaryDirectory() as tmp:
    manifests = []
    for mode in ["basic", "single:tencent", "multicob", "aviate"]:
        cfg = PipelineConfig(
            dataset=fixture / "project.json",
            mode=mode,
            base_translator="tencent",
            translation_cache=fixture / "translations.jsonl",
            parse_cache=fixture / "parses",
            offline=True,
            debug=True,
            out=Path(tmp) / mode.replace(":", "-"),
        )
        manifests.append(run(cfg))
    text, _ = ablation_report(manifests)
    print(text)

    # what the full pipeline appended to each artifact
    weighting = (Path(tmp) / "aviate" / "weighting.json").read_text()
    print(weighting[:600], "...")
    print((Path(tmp) / "aviate" / "consensus.tsv").read_text())
