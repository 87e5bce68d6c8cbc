from __future__ import annotations

import sys
from pathlib import Path

import pytest

TESTS = Path(__file__).resolve().parent
CORPUS = TESTS.parent / "corpus"
sys.path.insert(0, str(TESTS))

from qmlc import config  # noqa: E402
from qmlc.compiler import compile_entry  # noqa: E402
from qmlc.parser import parse_program  # noqa: E402


def corpus_program(stem: str):
    path = CORPUS / f"{stem}.qml"
    return parse_program(path.read_text(encoding="utf-8"), str(path))


def corpus_entry(stem: str, entry: str | None = None):
    return compile_entry(corpus_program(stem), entry or stem)


@pytest.fixture(autouse=True)
def _default_tolerance():
    config.set_tolerance(config.DEFAULT_TOLERANCE)
    yield
    config.set_tolerance(config.DEFAULT_TOLERANCE)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in mod.summary_lines():
        terminalreporter.write_line(line)
