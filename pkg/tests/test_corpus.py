from __future__ import annotations

import dataclasses

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from diwindow.corpus import (
    Cohort,
    Corpus,
    CorpusError,
    Discipline,
    IngestOptions,
    dumps_corpus,
    ingest,
    load_corpus,
    loads_corpus,
    merge,
    save_corpus,
    validate,
    write_tsv,
)

from conftest import write_text
from oracle import random_corpus

PAPERS_HEADER = "id\tyear\tissue_key\tdiscipline\tcohort\n"
EDGES_HEADER = "citer\tcited\n"


def _files(tmp_path, papers: str, edges: str):
    return (
        write_text(tmp_path / "papers.tsv", PAPERS_HEADER + papers),
        write_text(tmp_path / "edges.tsv", EDGES_HEADER + edges),
    )


def test_clean_minimal_input(tmp_path):
    p, e = _files(
        tmp_path,
        "A\t2000\tJ1\tPhysics\tFocal\nB\t1999\tJ1\t\t\nC\t1998\t\tMedicine\tBackground\n",
        "A\tB\nB\tC\n",
    )
    corpus, report = ingest(p, e)
    assert len(corpus.papers) == 3
    assert len(corpus.edges) == 2
    assert report.self_loops == report.dangling_edges == 0
    assert report.demoted_focal == [] and report.malformed_rows == []
    assert corpus.paper_map()["B"].discipline is Discipline.OTHER
    assert corpus.paper_map()["B"].cohort is Cohort.BACKGROUND
    assert corpus.paper_map()["C"].issue_key == ""


def test_trailing_fields_may_be_omitted(tmp_path):
    p, e = _files(tmp_path, "A\t2000\nB\t2001\tJ9\n", "B\tA\n")
    corpus, _ = ingest(p, e)
    assert [x.issue_key for x in corpus.papers] == ["", "J9"]


def test_self_loop_dropped(tmp_path):
    p, e = _files(tmp_path, "A\t2000\t\t\t\nB\t2001\t\t\t\n", "A\tA\nB\tA\n")
    corpus, report = ingest(p, e)
    assert report.self_loops == 1
    assert [(x.citer, x.cited) for x in corpus.edges] == [("B", "A")]


def test_focal_without_references_is_demoted(tmp_path):
    p, e = _files(tmp_path, "F\t2000\tJ\t\tFocal\nC\t2001\t\t\t\n", "C\tF\n")
    corpus, report = ingest(p, e)
    assert report.demoted_focal == ["F"]
    assert corpus.paper_map()["F"].cohort is Cohort.BACKGROUND
    # still present as a node, so it can contribute to other papers' counts
    assert "F" in corpus.paper_map()


def test_focal_whose_only_reference_dangles_is_demoted(tmp_path):
    p, e = _files(tmp_path, "F\t2000\tJ\t\tFocal\n", "F\tMISSING\n")
    corpus, report = ingest(p, e)
    assert report.dangling_edges == 1
    assert report.demoted_focal == ["F"]


def test_duplicates_and_anomalies_counted(tmp_path):
    p, e = _files(tmp_path, "A\t2000\t\t\t\nB\t2005\t\t\t\n", "A\tB\nA\tB\nB\tA\nX\tA\n")
    corpus, report = ingest(p, e)
    assert report.duplicate_edges == 1
    assert report.year_anomalies == 1  # A (2000) citing B (2005) is kept
    assert report.dangling_edges == 1
    assert len(corpus.edges) == 2


def test_duplicate_id_fatal_by_default(tmp_path):
    p, e = _files(tmp_path, "A\t2000\t\t\t\nA\t2001\t\t\t\n", "")
    with pytest.raises(CorpusError, match="duplicate paper id 'A'") as info:
        ingest(p, e)
    assert info.value.row == 3


def test_duplicate_id_keep_first(tmp_path):
    p, e = _files(tmp_path, "A\t2000\t\t\t\nA\t2001\t\t\t\n", "")
    corpus, report = ingest(p, e, IngestOptions(on_duplicate="keep-first"))
    assert corpus.paper_map()["A"].year == 2000
    assert report.duplicate_ids == ["A"]


@pytest.mark.parametrize(
    "row, reason",
    [
        ("A\tnineteen\t\t\t\n", "not an integer"),
        ("A\t3000\t\t\t\n", "outside"),
        ("\t2000\t\t\t\n", "empty paper id"),
        ("A\t2000\t\tBiology\t\n", "unknown discipline"),
        ("A\t2000\t\t\tNobel\n", "unknown cohort"),
        ("A\t2000\t\t\t\textra\n", "at most 5"),
    ],
)
def test_malformed_rows(tmp_path, row, reason):
    p, e = _files(tmp_path, "OK\t2000\t\t\t\n" + row, "")
    with pytest.raises(CorpusError, match=reason) as info:
        ingest(p, e, IngestOptions(strict=True))
    assert info.value.row == 3
    corpus, report = ingest(p, e)
    assert [x.id for x in corpus.papers] == ["OK"]
    assert report.malformed_rows[0][1] == 3


def test_missing_file_named(tmp_path):
    p, _ = _files(tmp_path, "A\t2000\n", "")
    with pytest.raises(CorpusError, match="nope.tsv"):
        ingest(p, tmp_path / "nope.tsv")


def test_header_required(tmp_path):
    p = write_text(tmp_path / "p.tsv", "")
    e = write_text(tmp_path / "e.tsv", EDGES_HEADER)
    with pytest.raises(CorpusError, match="header"):
        ingest(p, e)


def test_validate_clean():
    report = validate(random_corpus(1, 50, 200))
    bad = [c.name for c in report.checks if not c.passed and c.name != "focal_references"]
    assert bad == []


def test_validate_flags_injected_year():
    corpus = random_corpus(2, 30, 60)
    papers = list(corpus.papers)
    papers[3] = dataclasses.replace(papers[3], year=3000)
    report = validate(Corpus(tuple(papers), corpus.edges))
    check = report.check("year_range")
    assert not check.passed
    assert check.offenders == [papers[3].id]


def test_validate_flags_focal_that_lost_references(tmp_path):
    p, e = _files(tmp_path, "F\t2000\t\t\tFocal\nR\t1999\t\t\t\n", "F\tR\n")
    corpus, _ = ingest(p, e)
    assert validate(corpus).passed
    stripped = Corpus(corpus.papers, ())
    check = validate(stripped).check("focal_references")
    assert check.offenders == ["F"] and check.total == 1


def test_validate_offender_list_capped():
    corpus = random_corpus(3, 60, 0)
    papers = tuple(dataclasses.replace(p, year=1500) for p in corpus.papers)
    check = validate(Corpus(papers, ())).check("year_range")
    assert check.total == 60
    assert len(check.offenders) == 20


def test_ingest_deterministic_bytes(tmp_path):
    corpus = random_corpus(5, 80, 300)
    write_tsv(corpus, tmp_path / "p.tsv", tmp_path / "e.tsv")
    a, _ = ingest(tmp_path / "p.tsv", tmp_path / "e.tsv")
    b, _ = ingest(tmp_path / "p.tsv", tmp_path / "e.tsv")
    assert dumps_corpus(a) == dumps_corpus(b)


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 10_000), n=st.integers(2, 40), m=st.integers(0, 120))
def test_serialization_roundtrip(seed, n, m):
    corpus = random_corpus(seed, n, m)
    assert loads_corpus(dumps_corpus(corpus)) == corpus


def test_every_edge_endpoint_known(tmp_path):
    corpus = random_corpus(9, 40, 150)
    write_tsv(corpus, tmp_path / "p.tsv", tmp_path / "e.tsv")
    with (tmp_path / "e.tsv").open("a") as f:
        f.write("P0000\tGHOST\n")
    loaded, report = ingest(tmp_path / "p.tsv", tmp_path / "e.tsv")
    ids = {p.id for p in loaded.papers}
    assert all(e.citer in ids and e.cited in ids for e in loaded.edges)
    assert report.dangling_edges == 1


def test_save_load(tmp_path):
    corpus = random_corpus(4, 20, 40)
    save_corpus(corpus, tmp_path / "c.json")
    assert load_corpus(tmp_path / "c.json") == corpus


def test_load_rejects_foreign_file(tmp_path):
    (tmp_path / "x.json").write_text('{"format": "other"}')
    with pytest.raises(CorpusError, match="format"):
        load_corpus(tmp_path / "x.json")


def test_merge_rejects_overlap():
    a = random_corpus(1, 5, 3)
    with pytest.raises(CorpusError):
        merge([a, a])
