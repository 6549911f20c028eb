from __future__ import annotations

from pathlib import Path

import numpy as np
import pytest

from skillpop.corpus import read_postings, read_skill_dictionary
from skillpop.documents import PseudoCorpus, PseudoDocument
from skillpop.sptm import Hyperparameters
from skillpop.synthetic import generate_corpus

DATA = Path(__file__).parent / "data"

_criteria_results: list[tuple[int, str, str, str]] = []
_details: dict[str, str] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n, text): acceptance criterion number and summary")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        status = {"passed": "PASS", "failed": "FAIL", "skipped": "SKIP"}[report.outcome]
        _criteria_results.append((marker.args[0], marker.args[1], status, _details.get(item.nodeid, "")))


def pytest_terminal_summary(terminalreporter):
    if not _criteria_results:
        return
    terminalreporter.section("acceptance criteria")
    for n, text, status, detail in sorted(_criteria_results):
        line = f"criterion {n:>2}: {status}  {text}"
        terminalreporter.write_line(f"{line}  [{detail}]" if detail else line)


@pytest.fixture
def measured(request):
    """Record a measurement to show next to the criterion's pass/fail line."""
    def _record(text: str) -> None:
        _details[request.node.nodeid] = text
        print(text)
    return _record


@pytest.fixture(scope="session")
def data_dir() -> Path:
    return DATA


@pytest.fixture(scope="session")
def dictionary():
    return read_skill_dictionary(DATA / "dictionary.csv")


@pytest.fixture(scope="session")
def table1_postings(dictionary):
    postings, report = read_postings(DATA / "postings.jsonl", dictionary)
    assert report.n_dropped == 0
    return postings


@pytest.fixture
def tiny_corpus() -> PseudoCorpus:
    """Two documents, two topics, three skills in two categories."""
    docs = [PseudoDocument(0, ((0, 1), (1, 1)), (0, 1)),
            PseudoDocument(1, ((1, 1), (2, 1)), (0, 1))]
    return PseudoCorpus(docs, np.array([0, 0, 1]), 2)


@pytest.fixture(scope="session")
def synthetic_small():
    hp = Hyperparameters(alpha=0.5, beta=0.05, delta=1.0, gamma=0.5)
    return generate_corpus(hp, M=40, N=30, K=4, S=24, L=3, seed=11)
