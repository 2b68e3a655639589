"""Paper table and citation edge list: ingestion, validation, persistence.

Input files are tab-separated with a header line::

    papers:  id  year  issue_key  discipline  cohort
    edges:   citer  cited

A parsed corpus keeps papers in file order and edges in first-seen order, so
identical inputs always serialize to identical bytes.
"""

from __future__ import annotations

import enum
import hashlib
import json
import logging
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Iterator, Literal, Sequence

logger = logging.getLogger(__name__)

MIN_YEAR = 1800
MAX_YEAR = 2100
CORPUS_FORMAT = "diwindow-corpus"
CORPUS_VERSION = 1
# offender lists in reports are truncated to this many ids
OFFENDER_CAP = 20


class CorpusError(ValueError):
    """Fatal problem with corpus input (bad file, malformed row, duplicate id)."""

    def __init__(self, message: str, *, path: str | None = None, row: int | None = None):
        self.path = path
        self.row = row
        where = ""
        if path is not None:
            where = f"{path}"
            if row is not None:
                where += f":{row}"
            where += ": "
        super().__init__(where + message)


class Discipline(str, enum.Enum):
    PHYSICS = "Physics"
    CHEMISTRY = "Chemistry"
    MEDICINE = "Medicine"
    OTHER = "Other"

    @classmethod
    def parse(cls, text: str) -> "Discipline":
        text = text.strip()
        if not text:
            return cls.OTHER
        for member in cls:
            if member.value.lower() == text.lower():
                return member
        raise ValueError(f"unknown discipline {text!r}")


class Cohort(str, enum.Enum):
    FOCAL = "Focal"
    BENCHMARK = "Benchmark"
    BACKGROUND = "Background"

    @classmethod
    def parse(cls, text: str) -> "Cohort":
        text = text.strip()
        if not text:
            return cls.BACKGROUND
        for member in cls:
            if member.value.lower() == text.lower():
                return member
        raise ValueError(f"unknown cohort {text!r}")


@dataclass(frozen=True)
class PaperRecord:
    id: str
    year: int
    issue_key: str = ""
    discipline: Discipline = Discipline.OTHER
    cohort: Cohort = Cohort.BACKGROUND


@dataclass(frozen=True)
class CitationEdge:
    citer: str
    cited: str


@dataclass(frozen=True)
class Corpus:
    """Immutable paper table plus deduplicated edge list."""

    papers: tuple[PaperRecord, ...] = ()
    edges: tuple[CitationEdge, ...] = ()

    def paper_map(self) -> dict[str, PaperRecord]:
        return {p.id: p for p in self.papers}

    def ids_with_cohort(self, cohort: Cohort) -> list[str]:
        return sorted(p.id for p in self.papers if p.cohort is cohort)

    def checksum(self) -> str:
        return hashlib.sha256(dumps_corpus(self)).hexdigest()


@dataclass
class IngestOptions:
    # strict: a malformed row aborts ingestion; otherwise it is skipped and reported
    strict: bool = False
    on_duplicate: Literal["error", "keep-first"] = "error"


@dataclass
class IngestReport:
    papers_read: int = 0
    papers_kept: int = 0
    edges_read: int = 0
    edges_kept: int = 0
    malformed_rows: list[tuple[str, int, str]] = field(default_factory=list)
    duplicate_ids: list[str] = field(default_factory=list)
    duplicate_edges: int = 0
    dangling_edges: int = 0
    self_loops: int = 0
    demoted_focal: list[str] = field(default_factory=list)
    year_anomalies: int = 0

    def as_dict(self) -> dict:
        return {
            "papers_read": self.papers_read,
            "papers_kept": self.papers_kept,
            "edges_read": self.edges_read,
            "edges_kept": self.edges_kept,
            "malformed_rows": len(self.malformed_rows),
            "duplicate_ids": len(self.duplicate_ids),
            "duplicate_edges": self.duplicate_edges,
            "dangling_edges": self.dangling_edges,
            "self_loops": self.self_loops,
            "demoted_focal": len(self.demoted_focal),
            "year_anomalies": self.year_anomalies,
        }

    def lines(self) -> list[str]:
        out = [f"{k}\t{v}" for k, v in self.as_dict().items()]
        for path, row, reason in self.malformed_rows[:OFFENDER_CAP]:
            out.append(f"malformed\t{path}:{row}\t{reason}")
        return out


def _rows(path: Path) -> Iterator[tuple[int, list[str]]]:
    """Yield (1-based line number, fields) for every data line after the header."""
    try:
        handle = path.open("r", encoding="utf-8", newline="")
    except OSError as exc:
        raise CorpusError(f"cannot read file: {exc.strerror}", path=str(path)) from exc
    with handle:
        try:
            header = handle.readline()
        except UnicodeDecodeError as exc:
            raise CorpusError("file is not valid UTF-8", path=str(path), row=1) from exc
        if not header.strip():
            raise CorpusError("missing header line", path=str(path), row=1)
        lineno = 1
        while True:
            try:
                line = handle.readline()
            except UnicodeDecodeError as exc:
                raise CorpusError("file is not valid UTF-8", path=str(path), row=lineno + 1) from exc
            if not line:
                break
            lineno += 1
            line = line.rstrip("\r\n")
            if not line.strip():
                continue
            yield lineno, line.split("\t")


def _parse_paper(fields: list[str]) -> PaperRecord:
    if len(fields) > 5:
        raise ValueError(f"expected at most 5 fields, got {len(fields)}")
    if len(fields) < 2:
        raise ValueError("missing year field")
    fields = fields + [""] * (5 - len(fields))
    pid, year_text, issue_key, discipline, cohort = (f.strip() for f in fields)
    if not pid:
        raise ValueError("empty paper id")
    try:
        year = int(year_text)
    except ValueError:
        raise ValueError(f"year {year_text!r} is not an integer") from None
    if not MIN_YEAR <= year <= MAX_YEAR:
        raise ValueError(f"year {year} outside [{MIN_YEAR}, {MAX_YEAR}]")
    return PaperRecord(
        id=pid,
        year=year,
        issue_key=issue_key,
        discipline=Discipline.parse(discipline),
        cohort=Cohort.parse(cohort),
    )


def ingest(
    papers_path: str | Path,
    edges_path: str | Path,
    options: IngestOptions | None = None,
) -> tuple[Corpus, IngestReport]:
    """Read the paper and edge files into a Corpus.

    Self-loops and edges with an unknown endpoint are dropped and counted.
    Edges whose citer is older than the cited paper are kept but counted.
    Focal papers left without any reference are demoted to Background.
    """
    options = options or IngestOptions()
    papers_path, edges_path = Path(papers_path), Path(edges_path)
    for p in (papers_path, edges_path):
        if not p.is_file():
            raise CorpusError("file not found", path=str(p))
    report = IngestReport()

    def malformed(path: Path, row: int, reason: str) -> None:
        if options.strict:
            raise CorpusError(f"malformed row: {reason}", path=str(path), row=row)
        report.malformed_rows.append((str(path), row, reason))

    papers: dict[str, PaperRecord] = {}
    for row, fields in _rows(papers_path):
        report.papers_read += 1
        try:
            rec = _parse_paper(fields)
        except ValueError as exc:
            malformed(papers_path, row, str(exc))
            continue
        if rec.id in papers:
            if options.on_duplicate == "error":
                raise CorpusError(f"duplicate paper id {rec.id!r}", path=str(papers_path), row=row)
            report.duplicate_ids.append(rec.id)
            continue
        papers[rec.id] = rec

    seen: set[tuple[str, str]] = set()
    edges: list[CitationEdge] = []
    for row, fields in _rows(edges_path):
        report.edges_read += 1
        if len(fields) != 2 or not fields[0].strip() or not fields[1].strip():
            malformed(edges_path, row, f"expected 2 non-empty fields, got {fields!r}")
            continue
        citer, cited = fields[0].strip(), fields[1].strip()
        if citer == cited:
            report.self_loops += 1
            continue
        if citer not in papers or cited not in papers:
            report.dangling_edges += 1
            continue
        if (citer, cited) in seen:
            report.duplicate_edges += 1
            continue
        seen.add((citer, cited))
        if papers[citer].year < papers[cited].year:
            report.year_anomalies += 1
        edges.append(CitationEdge(citer, cited))

    has_refs = {e.citer for e in edges}
    for pid, rec in papers.items():
        if rec.cohort is Cohort.FOCAL and pid not in has_refs:
            papers[pid] = replace(rec, cohort=Cohort.BACKGROUND)
            report.demoted_focal.append(pid)
    if report.demoted_focal:
        logger.warning(
            "demoted %d focal paper(s) without resolvable references to Background",
            len(report.demoted_focal),
        )

    report.papers_kept = len(papers)
    report.edges_kept = len(edges)
    return Corpus(tuple(papers.values()), tuple(edges)), report


@dataclass
class CheckResult:
    name: str
    offenders: list[str]
    total: int

    @property
    def passed(self) -> bool:
        return self.total == 0


@dataclass
class ValidationReport:
    checks: list[CheckResult]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def check(self, name: str) -> CheckResult:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def lines(self) -> list[str]:
        out = []
        for c in self.checks:
            status = "pass" if c.passed else "FAIL"
            out.append(f"{c.name}\t{status}\t{c.total}\t{','.join(c.offenders)}")
        return out


def _check(name: str, offenders: Iterable[str]) -> CheckResult:
    offenders = list(offenders)
    return CheckResult(name, offenders[:OFFENDER_CAP], len(offenders))


def validate(corpus: Corpus) -> ValidationReport:
    """Re-check every record and edge invariant; never raises."""
    ids = [p.id for p in corpus.papers]
    known = set(ids)
    seen: set[str] = set()
    dups = []
    for pid in ids:
        if pid in seen:
            dups.append(pid)
        seen.add(pid)
    cited_from = {e.citer for e in corpus.edges if e.cited in known and e.citer != e.cited}
    edge_seen: set[tuple[str, str]] = set()
    dup_edges = []
    for e in corpus.edges:
        if (e.citer, e.cited) in edge_seen:
            dup_edges.append(f"{e.citer}->{e.cited}")
        edge_seen.add((e.citer, e.cited))
    return ValidationReport([
        _check("id_nonempty", (repr(p.id) for p in corpus.papers if not p.id)),
        _check("id_unique", dups),
        _check("year_range", (p.id for p in corpus.papers if not MIN_YEAR <= p.year <= MAX_YEAR)),
        _check("edge_endpoints", (
            f"{e.citer}->{e.cited}" for e in corpus.edges if e.citer not in known or e.cited not in known
        )),
        _check("self_loops", (e.citer for e in corpus.edges if e.citer == e.cited)),
        _check("duplicate_edges", dup_edges),
        _check("focal_references", (
            p.id for p in corpus.papers if p.cohort is Cohort.FOCAL and p.id not in cited_from
        )),
    ])


def merge(corpora: Sequence[Corpus]) -> Corpus:
    """Concatenate corpora with disjoint id sets."""
    papers: list[PaperRecord] = []
    edges: list[CitationEdge] = []
    seen: set[str] = set()
    for c in corpora:
        for p in c.papers:
            if p.id in seen:
                raise CorpusError(f"duplicate paper id {p.id!r} while merging")
            seen.add(p.id)
            papers.append(p)
        edges.extend(c.edges)
    return Corpus(tuple(papers), tuple(edges))


# -- persistence -----------------------------------------------------------
#
# Serialized layout (UTF-8 JSON, keys sorted, no whitespace):
#   {"edges": [[citer, cited], ...],
#    "format": "diwindow-corpus",
#    "papers": [[id, year, issue_key, discipline, cohort], ...],
#    "version": 1}


def dumps_corpus(corpus: Corpus) -> bytes:
    payload = {
        "format": CORPUS_FORMAT,
        "version": CORPUS_VERSION,
        "papers": [[p.id, p.year, p.issue_key, p.discipline.value, p.cohort.value] for p in corpus.papers],
        "edges": [[e.citer, e.cited] for e in corpus.edges],
    }
    return json.dumps(payload, sort_keys=True, separators=(",", ":"), ensure_ascii=False).encode("utf-8")


def loads_corpus(data: bytes) -> Corpus:
    try:
        payload = json.loads(data.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise CorpusError(f"not a serialized corpus: {exc}") from exc
    if not isinstance(payload, dict) or payload.get("format") != CORPUS_FORMAT:
        raise CorpusError("not a serialized corpus (format tag missing)")
    if payload.get("version") != CORPUS_VERSION:
        raise CorpusError(f"unsupported corpus version {payload.get('version')!r}")
    papers = tuple(
        PaperRecord(pid, int(year), issue, Discipline(disc), Cohort(cohort))
        for pid, year, issue, disc, cohort in payload["papers"]
    )
    edges = tuple(CitationEdge(a, b) for a, b in payload["edges"])
    return Corpus(papers, edges)


def save_corpus(corpus: Corpus, path: str | Path) -> None:
    Path(path).write_bytes(dumps_corpus(corpus))


def load_corpus(path: str | Path) -> Corpus:
    path = Path(path)
    try:
        data = path.read_bytes()
    except OSError as exc:
        raise CorpusError(f"cannot read file: {exc.strerror}", path=str(path)) from exc
    return loads_corpus(data)


def write_tsv(corpus: Corpus, papers_path: str | Path, edges_path: str | Path) -> None:
    """Write the corpus back out in the ingestible two-file format."""
    with Path(papers_path).open("w", encoding="utf-8", newline="\n") as f:
        f.write("id\tyear\tissue_key\tdiscipline\tcohort\n")
        for p in corpus.papers:
            f.write(f"{p.id}\t{p.year}\t{p.issue_key}\t{p.discipline.value}\t{p.cohort.value}\n")
    with Path(edges_path).open("w", encoding="utf-8", newline="\n") as f:
        f.write("citer\tcited\n")
        for e in corpus.edges:
            f.write(f"{e.citer}\t{e.cited}\n")
