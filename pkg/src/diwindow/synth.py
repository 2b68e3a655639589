"""Constructive synthetic corpora with exactly known DI counts.

Every generated focal (or benchmark) paper owns a private neighbourhood:

* ``refs_per_focal`` references published the year before it,
* citers published 1..``years`` years after it, each citing the paper and,
  for j-type citers, one of its references,
* k-papers in the same years citing one reference and not the paper.

Nothing is shared between neighbourhoods, so the counts at window t are
plain cumulative sums of the per-year schedule. Those sums are recorded as
ground truth while the corpus is written.

Per-year schedules (``c`` = citers_per_year):

DisruptivePure      c i-citers per year, no j-citers, no k-papers.
ConsolidatingPure   c j-citers per year, no i-citers, no k-papers.
Mixed(p_j, rate)    c citers per year, each j-type with probability p_j;
                    floor(rate) k-papers plus one more with probability
                    frac(rate).
WindowFlip(T) and CrossoverProfile(T), paired focal/benchmark units, each
unit drawing its own rate r uniformly from 1..c:
    focal      years 1..T-1: r j-citers;  year T: r*T i-citers;
               years after T: r i-citers.
    benchmark  the same schedule with i and j swapped.
    So for t >= T the focal has i = r*t > j = r*(T-1), and DI changes sign
    at exactly t = T in both cohorts, in opposite directions; the median
    difference (focal - benchmark) is negative for t < T and positive from
    t = T on. CrossoverProfile adds k-papers at ``p_k_rate`` per year,
    which rescales DI without moving its sign.

All draws come from SplitMix64 seeded with ``spec.seed`` in a fixed order.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Union

from .corpus import CitationEdge, Cohort, Corpus, Discipline, PaperRecord, write_tsv
from .disruption import DiCounts
from .rng import SplitMix64

DEFAULT_MAX_PAPERS = 2_000_000


class SynthError(ValueError):
    pass


@dataclass(frozen=True)
class DisruptivePure:
    pass


@dataclass(frozen=True)
class ConsolidatingPure:
    pass


@dataclass(frozen=True)
class Mixed:
    p_j: float = 0.5
    p_k_rate: float = 1.0


@dataclass(frozen=True)
class WindowFlip:
    flip_t: int = 7


@dataclass(frozen=True)
class CrossoverProfile:
    crossover_t: int = 10
    p_k_rate: float = 1.0


Motif = Union[DisruptivePure, ConsolidatingPure, Mixed, WindowFlip, CrossoverProfile]
PAIRED = (WindowFlip, CrossoverProfile)


@dataclass(frozen=True)
class SynthSpec:
    motif: Motif
    n_focal: int = 1
    refs_per_focal: int = 2
    citers_per_year: int = 3
    years: int = 10
    seed: int = 0
    discipline: Discipline = Discipline.OTHER
    base_year: int = 2000
    id_prefix: str = ""

    def check(self, max_papers: int = DEFAULT_MAX_PAPERS) -> None:
        m = self.motif
        if self.n_focal < 0 or self.citers_per_year < 0 or self.years < 1:
            raise SynthError("n_focal and citers_per_year must be >= 0 and years >= 1")
        if self.refs_per_focal < 1:
            # a focal paper without references would be demoted on ingestion
            raise SynthError("refs_per_focal must be >= 1")
        if not 1801 <= self.base_year <= 2100 - self.years:
            raise SynthError(f"base_year {self.base_year} leaves generated years outside [1800, 2100]")
        if isinstance(m, (Mixed, CrossoverProfile)) and not (m.p_k_rate >= 0 and math.isfinite(m.p_k_rate)):
            raise SynthError("p_k_rate must be a finite non-negative number")
        if isinstance(m, Mixed) and not 0.0 <= m.p_j <= 1.0:
            raise SynthError("p_j must lie in [0, 1]")
        if isinstance(m, PAIRED):
            planted = planted_t(m)
            if not 2 <= planted <= self.years:
                raise SynthError(f"planted year {planted} must lie in [2, years={self.years}]")
            if self.citers_per_year < 1:
                raise SynthError("paired motifs need citers_per_year >= 1")
        estimate = self.estimated_papers()
        if estimate > max_papers:
            raise SynthError(f"spec would generate about {estimate} papers, above the limit of {max_papers}")

    def estimated_papers(self) -> int:
        m = self.motif
        units = self.n_focal * (2 if isinstance(m, PAIRED) else 1)
        per_year = self.citers_per_year
        if isinstance(m, (Mixed, CrossoverProfile)):
            per_year += math.ceil(m.p_k_rate)
        if isinstance(m, PAIRED):
            # the burst year adds r*T citers on top of the regular schedule
            per_year += self.citers_per_year
        return units * (1 + self.refs_per_focal + per_year * self.years)


def planted_t(motif: Motif) -> int:
    if isinstance(motif, WindowFlip):
        return motif.flip_t
    if isinstance(motif, CrossoverProfile):
        return motif.crossover_t
    raise TypeError(f"{type(motif).__name__} has no planted year")


@dataclass
class GroundTruth:
    """Expected DiCounts per generated paper for t = 0..horizon."""

    horizon: int
    counts: dict[str, tuple[DiCounts, ...]] = field(default_factory=dict)
    planted_t: int | None = None
    pairs: tuple[tuple[str, str], ...] = ()

    def at(self, pid: str, t: int | None) -> DiCounts:
        """Counts at window t; windows past the horizon (or None) see everything."""
        row = self.counts[pid]
        return row[-1] if t is None or t >= self.horizon else row[t]

    def write(self, path: str | Path) -> None:
        with Path(path).open("w", encoding="utf-8", newline="\n") as f:
            f.write("focal_id\tt\tn_i\tn_j\tn_k\n")
            for pid in sorted(self.counts):
                for t, c in enumerate(self.counts[pid]):
                    f.write(f"{pid}\t{t}\t{c.n_i}\t{c.n_j}\t{c.n_k}\n")


def _k_count(rng: SplitMix64, rate: float) -> int:
    whole = math.floor(rate)
    return whole + (1 if rng.random() < rate - whole else 0)


class _Builder:
    def __init__(self, spec: SynthSpec):
        self.spec = spec
        self.rng = SplitMix64(spec.seed)
        self.papers: list[PaperRecord] = []
        self.edges: list[CitationEdge] = []
        self.truth = GroundTruth(horizon=spec.years)

    def paper(self, pid: str, year: int, issue: str = "", cohort: Cohort = Cohort.BACKGROUND) -> str:
        self.papers.append(PaperRecord(pid, year, issue, self.spec.discipline, cohort))
        return pid

    def unit(self, uid: str, issue: str, cohort: Cohort, schedule: list[tuple[int, int, int]]) -> None:
        """Emit one paper and its neighbourhood; schedule[y-1] = (i, j, k) for year y."""
        spec, rng = self.spec, self.rng
        y0 = spec.base_year
        self.paper(uid, y0, issue, cohort)
        refs = [self.paper(f"{uid}.R{r}", y0 - 1) for r in range(spec.refs_per_focal)]
        for ref in refs:
            self.edges.append(CitationEdge(uid, ref))
        totals = [DiCounts(0, 0, 0, len(refs))]
        ci = cj = ck = 0
        for y, (n_i, n_j, n_k) in enumerate(schedule, start=1):
            seq = 0
            for kind, n in (("i", n_i), ("j", n_j)):
                for _ in range(n):
                    cid = self.paper(f"{uid}.C{y:02d}.{seq:04d}", y0 + y)
                    seq += 1
                    self.edges.append(CitationEdge(cid, uid))
                    if kind == "j":
                        self.edges.append(CitationEdge(cid, rng.choice(refs)))
            for q in range(n_k):
                kid = self.paper(f"{uid}.K{y:02d}.{q:04d}", y0 + y)
                self.edges.append(CitationEdge(kid, rng.choice(refs)))
            ci, cj, ck = ci + n_i, cj + n_j, ck + n_k
            totals.append(DiCounts(ci, cj, ck, len(refs)))
        self.truth.counts[uid] = tuple(totals)

    def corpus(self) -> Corpus:
        return Corpus(tuple(self.papers), tuple(self.edges))


def _single_schedule(spec: SynthSpec, rng: SplitMix64) -> list[tuple[int, int, int]]:
    m, c = spec.motif, spec.citers_per_year
    out = []
    for _ in range(spec.years):
        if isinstance(m, DisruptivePure):
            out.append((c, 0, 0))
        elif isinstance(m, ConsolidatingPure):
            out.append((0, c, 0))
        else:
            n_j = sum(1 for _ in range(c) if rng.random() < m.p_j)
            out.append((c - n_j, n_j, _k_count(rng, m.p_k_rate)))
    return out


def generate(spec: SynthSpec, max_papers: int = DEFAULT_MAX_PAPERS) -> tuple[Corpus, GroundTruth]:
    """Corpus of ``n_focal`` Focal papers built from a single-cohort motif."""
    if isinstance(spec.motif, PAIRED):
        raise SynthError(f"{type(spec.motif).__name__} builds paired cohorts; use generate_paired_cohort")
    spec.check(max_papers)
    b = _Builder(spec)
    for idx in range(spec.n_focal):
        schedule = _single_schedule(spec, b.rng)
        b.unit(f"{spec.id_prefix}F{idx:05d}", f"{spec.id_prefix}J{idx:05d}", Cohort.FOCAL, schedule)
    return b.corpus(), b.truth


def _flip_schedule(rate: int, planted: int, years: int, k: list[int], focal: bool) -> list[tuple[int, int, int]]:
    out = []
    for y in range(1, years + 1):
        if y < planted:
            early, late = rate, 0
        elif y == planted:
            early, late = 0, rate * planted
        else:
            early, late = 0, rate
        # focal: early citers are j-type, late ones i-type; benchmark mirrors
        n_i, n_j = (late, early) if focal else (early, late)
        out.append((n_i, n_j, k[y - 1]))
    return out


def generate_paired_cohort(spec: SynthSpec, max_papers: int = DEFAULT_MAX_PAPERS) -> tuple[Corpus, GroundTruth]:
    """Focal and Benchmark cohorts whose median DI curves cross at the planted year.

    Focal ``F{n}`` and benchmark ``B{n}`` share issue key ``J{n}`` and nothing
    else in the corpus carries that key, so same-issue sampling recovers the
    planted pairing.
    """
    m = spec.motif
    if not isinstance(m, PAIRED):
        raise SynthError(f"paired cohorts need WindowFlip or CrossoverProfile, not {type(m).__name__}")
    spec.check(max_papers)
    planted = planted_t(m)
    b = _Builder(spec)
    pairs = []
    for idx in range(spec.n_focal):
        issue = f"{spec.id_prefix}J{idx:05d}"
        for focal, cohort, tag in ((True, Cohort.FOCAL, "F"), (False, Cohort.BENCHMARK, "B")):
            rate = b.rng.randint(1, spec.citers_per_year)
            if isinstance(m, CrossoverProfile):
                k = [_k_count(b.rng, m.p_k_rate) for _ in range(spec.years)]
            else:
                k = [0] * spec.years
            b.unit(f"{spec.id_prefix}{tag}{idx:05d}", issue, cohort,
                   _flip_schedule(rate, planted, spec.years, k, focal))
        pairs.append((f"{spec.id_prefix}F{idx:05d}", f"{spec.id_prefix}B{idx:05d}"))
    b.truth.planted_t = planted
    b.truth.pairs = tuple(pairs)
    return b.corpus(), b.truth


def spec_to_dict(spec: SynthSpec) -> dict:
    d = asdict(spec)
    d["motif"] = {"kind": type(spec.motif).__name__, **asdict(spec.motif)}
    d["discipline"] = spec.discipline.value
    return d


def write_synth(corpus: Corpus, truth: GroundTruth, spec: SynthSpec, out_dir: str | Path) -> dict[str, Path]:
    """Write papers.tsv, edges.tsv, ground_truth.tsv and synth.json into ``out_dir``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {
        "papers": out / "papers.tsv",
        "edges": out / "edges.tsv",
        "ground_truth": out / "ground_truth.tsv",
        "meta": out / "synth.json",
    }
    write_tsv(corpus, paths["papers"], paths["edges"])
    truth.write(paths["ground_truth"])
    meta = {"spec": spec_to_dict(spec), "planted_t": truth.planted_t, "pairs": [list(p) for p in truth.pairs]}
    paths["meta"].write_text(json.dumps(meta, sort_keys=True, indent=2) + "\n", encoding="utf-8")
    return paths
