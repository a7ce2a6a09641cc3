from pathlib import Path

import pytest

from bitrace.pipeline import PipelineConfig

PLANTED = Path(__file__).parent / "fixtures" / "planted"


@pytest.fixture
def planted_config(tmp_path):
    def make(mode, **kw):
        values = dict(
            dataset=PLANTED / "project.json",
            mode=mode,
            base_translator="tencent",
            translation_cache=PLANTED / "translations.jsonl",
            parse_cache=PLANTED / "parses",
            offline=True,
            out=tmp_path / mode.replace(":", "-"),
        )
        values.update(kw)
        return PipelineConfig(**values)
    return make


def pytest_terminal_summary(terminalreporter):
    import sys
    module = sys.modules.get("test_acceptance")
    if module is None or not module.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(module.RESULTS):
        terminalreporter.write_line(line)
