from __future__ import annotations

from pathlib import Path

import pytest

from diwindow.corpus import CitationEdge, Cohort, Corpus, PaperRecord
from diwindow.graph_index import build_index

ACCEPTANCE_RESULTS: list[tuple[int, str, bool, str]] = []


def make_corpus(papers, edges) -> Corpus:
    """papers: (id, year[, cohort]) tuples; edges: (citer, cited) tuples."""
    recs = []
    for row in papers:
        pid, year, *rest = row
        recs.append(PaperRecord(pid, year, cohort=rest[0] if rest else Cohort.BACKGROUND))
    return Corpus(tuple(recs), tuple(CitationEdge(a, b) for a, b in edges))


@pytest.fixture
def four_citer_corpus() -> Corpus:
    # F(2000) cites R1, R2; C1..C3 cite F, C2 also R1; K1 cites R2 only.
    return make_corpus(
        [("F", 2000, Cohort.FOCAL), ("R1", 1998), ("R2", 1999),
         ("C1", 2001), ("C2", 2002), ("C3", 2003), ("K1", 2002)],
        [("F", "R1"), ("F", "R2"), ("C1", "F"), ("C2", "F"), ("C2", "R1"),
         ("C3", "F"), ("K1", "R2")],
    )


@pytest.fixture
def four_citer_index(four_citer_corpus):
    return build_index(four_citer_corpus)


def write_text(path: Path, text: str) -> Path:
    path.write_text(text, encoding="utf-8")
    return path


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number, name, passed, detail in sorted(ACCEPTANCE_RESULTS):
        status = "PASS" if passed else "FAIL"
        terminalreporter.write_line(f"[{status}] {number:2d}. {name}: {detail}")
