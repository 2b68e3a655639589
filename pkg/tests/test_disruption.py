from __future__ import annotations

from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from diwindow.corpus import Cohort
from diwindow.disruption import (
    UNBOUNDED,
    DiCounts,
    WindowSpec,
    batch_series,
    compute_di,
    compute_di_series,
    diagnose_di_one,
)
from diwindow.graph_index import UnknownPaperError, build_index
from diwindow.synth import DisruptivePure, SynthSpec, generate

from conftest import make_corpus
from oracle import brute_di, random_corpus


def test_four_citer_unbounded(four_citer_index):
    v = compute_di(four_citer_index, "F", UNBOUNDED)
    assert v.counts == DiCounts(2, 1, 1, 2)
    assert v.score == Fraction(1, 4)


def test_four_citer_one_year(four_citer_index):
    v = compute_di(four_citer_index, "F", WindowSpec(1))
    assert (v.counts.n_i, v.counts.n_j, v.counts.n_k) == (1, 0, 0)
    assert v.score == 1


def test_four_citer_series(four_citer_index):
    series = compute_di_series(four_citer_index, "F", 3)
    assert [(t, v.score) for t, v in series] == [(1, 1), (2, 0), (3, Fraction(1, 4))]
    assert series[1][1].counts == DiCounts(1, 1, 1, 2)


def test_publication_year_inside_every_window():
    idx = build_index(make_corpus([("F", 2000), ("R", 1990), ("C", 2000)], [("F", "R"), ("C", "F")]))
    assert compute_di(idx, "F", WindowSpec(0)).counts.n_i == 1


def test_undefined_when_nothing_in_window():
    idx = build_index(make_corpus([("F", 2000), ("R", 1990)], [("F", "R")]))
    v = compute_di(idx, "F", UNBOUNDED)
    assert v.score is None and not v.defined
    assert v.counts == DiCounts(0, 0, 0, 1)
    assert v.render() == "NA"
    assert all(val.score is None for _, val in compute_di_series(idx, "F", 5))


def test_all_citers_consolidating():
    papers = [("F", 2000), ("R", 1990)] + [(f"C{k}", 2001) for k in range(4)]
    edges = [("F", "R")] + [(f"C{k}", x) for k in range(4) for x in ("F", "R")]
    v = compute_di(build_index(make_corpus(papers, edges)), "F")
    assert v.counts == DiCounts(0, 4, 0, 1)
    assert v.score == -1


def test_unknown_focal(four_citer_index):
    with pytest.raises(UnknownPaperError):
        compute_di(four_citer_index, "nope")
    with pytest.raises(UnknownPaperError):
        compute_di_series(four_citer_index, "nope", 3)
    with pytest.raises(UnknownPaperError):
        diagnose_di_one(four_citer_index, "nope")


def test_negative_window_rejected():
    with pytest.raises(ValueError):
        WindowSpec(-1)


def test_reference_citing_focal_counts_as_citer():
    # year anomaly: R (1990) cites F (2000); R is an ordinary in-window citer
    idx = build_index(make_corpus([("F", 2000), ("R", 1990), ("Q", 1980)], [("F", "R"), ("R", "F"), ("R", "Q")]))
    v = compute_di(idx, "F")
    assert v.counts == DiCounts(1, 0, 0, 1)


def test_paper_citing_two_references_counted_once():
    idx = build_index(make_corpus(
        [("F", 2000), ("R1", 1990), ("R2", 1990), ("K", 2001)],
        [("F", "R1"), ("F", "R2"), ("K", "R1"), ("K", "R2")],
    ))
    assert compute_di(idx, "F").counts == DiCounts(0, 0, 1, 2)


def test_diagnose_unresolved_references():
    papers = [("F", 2000)] + [(f"C{k}", 2001) for k in range(3)]
    idx = build_index(make_corpus(papers, [(f"C{k}", "F") for k in range(3)]))
    r = diagnose_di_one(idx, "F", UNBOUNDED)
    assert r.is_di_one and r.zero_resolved_refs and r.low_citation


def test_diagnose_clean_paper(four_citer_index):
    r = diagnose_di_one(four_citer_index, "F", UNBOUNDED, t_max=3)
    assert not (r.is_di_one or r.zero_resolved_refs or r.persistent_one)
    # 3 citers sit under the default threshold of 10
    assert r.low_citation


def test_diagnose_low_citation_threshold_configurable(four_citer_index):
    assert diagnose_di_one(four_citer_index, "F", low_citation_threshold=3).low_citation is False
    assert diagnose_di_one(four_citer_index, "F", low_citation_threshold=4).low_citation is True


def test_diagnose_persistent_one_on_synthetic():
    corpus, _ = generate(SynthSpec(DisruptivePure(), n_focal=3, years=20, seed=1))
    idx = build_index(corpus)
    for pid in corpus.ids_with_cohort(Cohort.FOCAL):
        assert diagnose_di_one(idx, pid, UNBOUNDED, t_max=20).persistent_one


def test_batch_matches_single_and_threads():
    corpus = random_corpus(21, 150, 900)
    idx = build_index(corpus)
    ids = list(idx.ids)
    single = batch_series(idx, ids, 8, threads=1)
    multi = batch_series(idx, reversed(ids), 8, threads=4)
    assert list(single) == sorted(ids) == list(multi)
    assert single == multi
    for pid in ids[:20]:
        assert single[pid] == compute_di_series(idx, pid, 8)


def test_batch_rejects_unknown_before_work():
    idx = build_index(random_corpus(1, 10, 10))
    with pytest.raises(UnknownPaperError):
        batch_series(idx, ["P0000", "zzz"], 3)


def test_computation_independent_of_other_focals():
    corpus = random_corpus(22, 120, 700)
    idx = build_index(corpus)
    before = {pid: compute_di(idx, pid, WindowSpec(3)) for pid in idx.ids}
    batch_series(idx, idx.ids, 10, threads=3)
    after = {pid: compute_di(idx, pid, WindowSpec(3)) for pid in reversed(idx.ids)}
    assert before == after


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 1_000_000), n=st.integers(3, 50), m=st.integers(0, 250), span=st.integers(0, 8))
def test_matches_brute_force(seed, n, m, span):
    corpus = random_corpus(seed, n, m, year_span=span)
    idx = build_index(corpus)
    for pid in idx.ids:
        for t in list(range(span + 2)) + [None]:
            v = compute_di(idx, pid, WindowSpec(t))
            counts, score = brute_di(corpus, pid, t)
            assert (v.counts.n_i, v.counts.n_j, v.counts.n_k) == counts
            assert v.score == score


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 1_000_000), n=st.integers(3, 60), m=st.integers(0, 300))
def test_populations_monotone_in_window(seed, n, m):
    idx = build_index(random_corpus(seed, n, m, year_span=10))
    for pid in idx.ids:
        prev = None
        for _, v in compute_di_series(idx, pid, 12):
            c = v.counts
            if prev is not None:
                assert c.n_citing >= prev.n_citing and c.n_k >= prev.n_k
            assert c.n_i >= 0 and c.n_j >= 0 and c.n_k >= 0
            prev = c
