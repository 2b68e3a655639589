"""Immutable bidirectional CSR adjacency over a corpus.

Dense handles are assigned in (year, id) order, so the handle sequence is
also a year sequence. Every adjacency row is sorted by handle, which turns a
"published no later than year Y" filter into a prefix of the row: the cutoff
is one binary search over the year array.
"""

from __future__ import annotations

import enum
import hashlib
from dataclasses import dataclass
from pathlib import Path
from types import MappingProxyType
from typing import Mapping

import numpy as np

from .corpus import Corpus

SNAPSHOT_FORMAT = "diwindow-index"
SNAPSHOT_VERSION = 1


class UnknownPaperError(KeyError):
    """Raised for a paper id the index does not contain."""

    def __init__(self, pid: str):
        self.pid = pid
        super().__init__(pid)

    def __str__(self) -> str:
        return f"unknown paper id {self.pid!r}"


class IndexBuildError(ValueError):
    pass


class Direction(str, enum.Enum):
    REFERENCES = "references"
    CITERS = "citers"


def _readonly(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class CitationIndex:
    ids: tuple[str, ...]
    handle_of: Mapping[str, int]
    years: np.ndarray
    fwd_ptr: np.ndarray
    fwd_idx: np.ndarray
    bwd_ptr: np.ndarray
    bwd_idx: np.ndarray

    def __len__(self) -> int:
        return len(self.ids)

    @property
    def n_edges(self) -> int:
        return int(self.fwd_idx.shape[0])

    def handle(self, pid: str) -> int:
        try:
            return self.handle_of[pid]
        except KeyError:
            raise UnknownPaperError(pid) from None

    def year(self, pid: str) -> int:
        return int(self.years[self.handle(pid)])

    def references(self, h: int) -> np.ndarray:
        return self.fwd_idx[self.fwd_ptr[h]:self.fwd_ptr[h + 1]]

    def citers(self, h: int) -> np.ndarray:
        return self.bwd_idx[self.bwd_ptr[h]:self.bwd_ptr[h + 1]]

    def cutoff(self, year_cap: int) -> int:
        """First handle whose paper was published after ``year_cap``."""
        return int(np.searchsorted(self.years, year_cap, side="right"))

    def content_equal(self, other: "CitationIndex") -> bool:
        return (
            self.ids == other.ids
            and all(
                np.array_equal(getattr(self, name), getattr(other, name))
                for name in ("years", "fwd_ptr", "fwd_idx", "bwd_ptr", "bwd_idx")
            )
        )

    def digest(self) -> str:
        h = hashlib.sha256()
        h.update("\0".join(self.ids).encode("utf-8"))
        for name in ("years", "fwd_ptr", "fwd_idx", "bwd_ptr", "bwd_idx"):
            h.update(np.ascontiguousarray(getattr(self, name), dtype=np.int64).tobytes())
        return h.hexdigest()


def _csr(src: np.ndarray, dst: np.ndarray, n: int, dtype) -> tuple[np.ndarray, np.ndarray]:
    order = np.lexsort((dst, src))
    counts = np.bincount(src, minlength=n)
    ptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(counts, out=ptr[1:])
    return ptr, dst[order].astype(dtype)


def build_index(corpus: Corpus, handle_dtype=np.int32) -> CitationIndex:
    """Build the index; deterministic for a given corpus.

    Raises IndexBuildError for more papers than ``handle_dtype`` can address
    and for edges that are self-loops or reference unknown papers.
    """
    limit = int(np.iinfo(handle_dtype).max)
    n = len(corpus.papers)
    if n > limit:
        raise IndexBuildError(
            f"corpus has {n} papers but {np.dtype(handle_dtype).name} handles address at most {limit}"
        )
    order = sorted(corpus.papers, key=lambda p: (p.year, p.id))
    ids = tuple(p.id for p in order)
    handle_of = {pid: h for h, pid in enumerate(ids)}
    if len(handle_of) != n:
        raise IndexBuildError("corpus contains duplicate paper ids")
    years = np.fromiter((p.year for p in order), dtype=np.int32, count=n)

    m = len(corpus.edges)
    src = np.empty(m, dtype=np.int64)
    dst = np.empty(m, dtype=np.int64)
    try:
        for k, e in enumerate(corpus.edges):
            src[k] = handle_of[e.citer]
            dst[k] = handle_of[e.cited]
    except KeyError as exc:
        raise IndexBuildError(f"edge endpoint {exc.args[0]!r} is not in the paper table") from None
    if np.any(src == dst):
        raise IndexBuildError("corpus contains self-loop edges")
    if m:
        key = np.unique(src * n + dst)
        src, dst = key // n, key % n

    fwd_ptr, fwd_idx = _csr(src, dst, n, handle_dtype)
    bwd_ptr, bwd_idx = _csr(dst, src, n, handle_dtype)
    return CitationIndex(
        ids=ids,
        handle_of=MappingProxyType(handle_of),
        years=_readonly(years),
        fwd_ptr=_readonly(fwd_ptr),
        fwd_idx=_readonly(fwd_idx),
        bwd_ptr=_readonly(bwd_ptr),
        bwd_idx=_readonly(bwd_idx),
    )


def neighbors(
    index: CitationIndex,
    pid: str,
    direction: Direction | str,
    year_cap: int | None = None,
) -> list[str]:
    """References or citers of ``pid`` in ascending handle order.

    With ``year_cap`` only neighbors published in or before that year are kept.
    """
    h = index.handle(pid)
    row = index.references(h) if Direction(direction) is Direction.REFERENCES else index.citers(h)
    if year_cap is not None:
        row = row[: int(np.searchsorted(row, index.cutoff(year_cap)))]
    return [index.ids[int(x)] for x in row]


# -- snapshot --------------------------------------------------------------
#
# numpy .npz archive (no pickling) with arrays:
#   meta     int64 [format-version]
#   format   str   "diwindow-index"
#   checksum str   sha256 of the serialized corpus the index was built from
#   ids      str   paper ids by handle
#   years, fwd_ptr, fwd_idx, bwd_ptr, bwd_idx   as in CitationIndex


def save_index(index: CitationIndex, path: str | Path, corpus_checksum: str = "") -> None:
    with Path(path).open("wb") as f:
        np.savez(
            f,
            meta=np.array([SNAPSHOT_VERSION], dtype=np.int64),
            format=np.array(SNAPSHOT_FORMAT),
            checksum=np.array(corpus_checksum),
            ids=np.array(index.ids, dtype=str),
            years=index.years,
            fwd_ptr=index.fwd_ptr,
            fwd_idx=index.fwd_idx,
            bwd_ptr=index.bwd_ptr,
            bwd_idx=index.bwd_idx,
        )


def load_index(path: str | Path, expect_checksum: str | None = None) -> CitationIndex:
    """Load a snapshot; raise IndexBuildError if it is foreign, stale, or of another version."""
    try:
        with np.load(Path(path), allow_pickle=False) as data:
            if str(data["format"]) != SNAPSHOT_FORMAT or int(data["meta"][0]) != SNAPSHOT_VERSION:
                raise IndexBuildError(f"{path}: not a version-{SNAPSHOT_VERSION} index snapshot")
            if expect_checksum is not None and str(data["checksum"]) != expect_checksum:
                raise IndexBuildError(f"{path}: snapshot was built from a different corpus")
            ids = tuple(str(x) for x in data["ids"])
            arrays = {k: np.array(data[k]) for k in ("years", "fwd_ptr", "fwd_idx", "bwd_ptr", "bwd_idx")}
    except (OSError, KeyError, ValueError) as exc:
        if isinstance(exc, IndexBuildError):
            raise
        raise IndexBuildError(f"{path}: unreadable index snapshot ({exc})") from exc
    return CitationIndex(
        ids=ids,
        handle_of=MappingProxyType({pid: h for h, pid in enumerate(ids)}),
        **{k: _readonly(v) for k, v in arrays.items()},
    )
