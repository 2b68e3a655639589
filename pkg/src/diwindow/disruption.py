"""Windowed disruption index.

For a focal paper F with resolvable references R, and a window of t years
(a paper P is in the window iff ``year(P) <= year(F) + t``):

* n_i: in-window citers of F that cite no member of R
* n_j: in-window citers of F that cite at least one member of R
* n_k: in-window papers other than F that cite a member of R but not F

``DI = (n_i - n_j) / (n_i + n_j + n_k)``, kept as an exact Fraction, and
undefined when the denominator is zero.

Every population is fixed once per focal paper (citation relations do not
depend on the window), sorted by handle. Because handles are year-ordered,
the in-window part of each population is a prefix found by binary search, so
a whole t = 1..t_max series costs one set computation plus t_max bisections.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .graph_index import CitationIndex

DEFAULT_LOW_CITATION = 10


@dataclass(frozen=True)
class WindowSpec:
    """Citation window in years after publication; ``t=None`` is unbounded."""

    t: int | None = None

    def __post_init__(self):
        if self.t is not None and self.t < 0:
            raise ValueError(f"window must be >= 0 years, got {self.t}")

    @property
    def unbounded(self) -> bool:
        return self.t is None

    def label(self) -> str:
        return "inf" if self.t is None else str(self.t)


UNBOUNDED = WindowSpec(None)


@dataclass(frozen=True)
class DiCounts:
    n_i: int
    n_j: int
    n_k: int
    refs_resolved: int

    @property
    def n_citing(self) -> int:
        return self.n_i + self.n_j


@dataclass(frozen=True)
class DiValue:
    counts: DiCounts
    score: Fraction | None

    @classmethod
    def from_counts(cls, counts: DiCounts) -> "DiValue":
        denom = counts.n_i + counts.n_j + counts.n_k
        score = Fraction(counts.n_i - counts.n_j, denom) if denom else None
        return cls(counts, score)

    @property
    def defined(self) -> bool:
        return self.score is not None

    def render(self) -> str:
        return "NA" if self.score is None else f"{float(self.score):.6f}"


@dataclass(frozen=True)
class _Profile:
    """Window-independent populations of one focal paper, as sorted handles."""

    year: int
    refs_resolved: int
    citers: np.ndarray
    j_citers: np.ndarray
    k_papers: np.ndarray

    def counts(self, cutoff: int) -> DiCounts:
        n_citing = int(np.searchsorted(self.citers, cutoff))
        n_j = int(np.searchsorted(self.j_citers, cutoff))
        n_k = int(np.searchsorted(self.k_papers, cutoff))
        return DiCounts(n_citing - n_j, n_j, n_k, self.refs_resolved)


_EMPTY = np.empty(0, dtype=np.int64)


def _profile(index: CitationIndex, focal: str) -> _Profile:
    h = index.handle(focal)
    refs = index.references(h)
    citers = index.citers(h)
    if refs.shape[0]:
        ptr, idx = index.bwd_ptr, index.bwd_idx
        touching = np.unique(np.concatenate([idx[ptr[r]:ptr[r + 1]] for r in refs]))
    else:
        touching = _EMPTY
    j_mask = np.isin(citers, touching, assume_unique=True)
    k_papers = np.setdiff1d(touching, citers, assume_unique=True)
    k_papers = k_papers[k_papers != h]
    return _Profile(
        year=int(index.years[h]),
        refs_resolved=int(refs.shape[0]),
        citers=citers,
        j_citers=citers[j_mask],
        k_papers=k_papers,
    )


def _cutoff(index: CitationIndex, prof: _Profile, window: WindowSpec) -> int:
    if window.t is None:
        return len(index)
    return index.cutoff(prof.year + window.t)


def compute_di(index: CitationIndex, focal: str, window: WindowSpec = UNBOUNDED) -> DiValue:
    """DI of ``focal`` with every population restricted to ``window``.

    Raises UnknownPaperError for an id outside the index.
    """
    prof = _profile(index, focal)
    return DiValue.from_counts(prof.counts(_cutoff(index, prof, window)))


def compute_di_series(index: CitationIndex, focal: str, t_max: int) -> list[tuple[int, DiValue]]:
    if t_max < 1:
        raise ValueError(f"t_max must be >= 1, got {t_max}")
    prof = _profile(index, focal)
    return [
        (t, DiValue.from_counts(prof.counts(index.cutoff(prof.year + t))))
        for t in range(1, t_max + 1)
    ]


def resolve_threads(threads: int) -> int:
    if threads < 0:
        raise ValueError("thread count must be >= 0")
    return threads or (os.cpu_count() or 1)


def batch_series(
    index: CitationIndex,
    focals: Iterable[str],
    t_max: int,
    threads: int = 1,
) -> dict[str, list[tuple[int, DiValue]]]:
    """DI series for many focal papers, keyed by id in ascending id order.

    The index is only read, so workers share it without locking. Results are
    placed by focal id, never by completion order.
    """
    order = sorted(set(focals))
    if t_max < 1:
        raise ValueError(f"t_max must be >= 1, got {t_max}")
    for pid in order:
        index.handle(pid)
    workers = resolve_threads(threads)
    if workers == 1 or len(order) < 2:
        return {pid: compute_di_series(index, pid, t_max) for pid in order}
    chunk = max(1, len(order) // (workers * 4))
    chunks = [order[i:i + chunk] for i in range(0, len(order), chunk)]

    def run(ids: Sequence[str]):
        return [compute_di_series(index, pid, t_max) for pid in ids]

    with ThreadPoolExecutor(max_workers=workers) as pool:
        results = list(pool.map(run, chunks))
    out: dict[str, list[tuple[int, DiValue]]] = {}
    for ids, series in zip(chunks, results):
        out.update(zip(ids, series))
    return {pid: out[pid] for pid in order}


@dataclass(frozen=True)
class DegeneracyReport:
    focal: str
    window: WindowSpec
    value: DiValue
    is_di_one: bool
    zero_resolved_refs: bool
    low_citation: bool
    persistent_one: bool

    def flags(self) -> dict[str, bool]:
        return {
            "is_di_one": self.is_di_one,
            "zero_resolved_refs": self.zero_resolved_refs,
            "low_citation": self.low_citation,
            "persistent_one": self.persistent_one,
        }


def diagnose_di_one(
    index: CitationIndex,
    focal: str,
    window: WindowSpec = UNBOUNDED,
    t_max: int | None = None,
    low_citation_threshold: int = DEFAULT_LOW_CITATION,
) -> DegeneracyReport:
    """Flag structural reasons behind a DI of exactly 1.

    ``persistent_one`` needs a series and is only evaluated when ``t_max`` is
    given: it holds when DI(t) == 1 for every t in 1..t_max.
    """
    prof = _profile(index, focal)
    value = DiValue.from_counts(prof.counts(_cutoff(index, prof, window)))
    persistent = False
    if t_max is not None:
        if t_max < 1:
            raise ValueError(f"t_max must be >= 1, got {t_max}")
        persistent = all(
            DiValue.from_counts(prof.counts(index.cutoff(prof.year + t))).score == 1
            for t in range(1, t_max + 1)
        )
    return DegeneracyReport(
        focal=focal,
        window=window,
        value=value,
        is_di_one=value.score == 1,
        zero_resolved_refs=prof.refs_resolved == 0,
        low_citation=value.counts.n_citing < low_citation_threshold,
        persistent_one=persistent,
    )
