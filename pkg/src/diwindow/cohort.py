"""Benchmark sampling, group filters, and median-DI series comparison."""

from __future__ import annotations

import enum
import logging
from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, NamedTuple, Sequence

from .corpus import Cohort, Corpus, Discipline
from .disruption import DiValue
from .rng import SplitMix64

logger = logging.getLogger(__name__)

ERA_BOUNDARY = 1980

Number = Fraction | float | int


class Era(str, enum.Enum):
    BEFORE_1980 = "Before1980"
    FROM_1980 = "From1980"

    @classmethod
    def of(cls, year: int) -> "Era":
        return cls.BEFORE_1980 if year < ERA_BOUNDARY else cls.FROM_1980


class Member(NamedTuple):
    """What group filters need to know about one scored paper."""

    id: str
    cohort: Cohort
    discipline: Discipline
    year: int


@dataclass(frozen=True)
class GroupKey:
    cohort: Cohort
    discipline: Discipline | None = None
    era: Era | None = None

    def __post_init__(self):
        if self.cohort not in (Cohort.FOCAL, Cohort.BENCHMARK):
            raise ValueError(f"group cohort must be Focal or Benchmark, not {self.cohort.value}")

    def matches(self, member: Member) -> bool:
        return (
            member.cohort is self.cohort
            and (self.discipline is None or member.discipline is self.discipline)
            and (self.era is None or Era.of(member.year) is self.era)
        )

    def slice_label(self) -> str:
        """Name of the discipline/era slice, without the cohort."""
        parts = [x.value for x in (self.discipline, self.era) if x is not None]
        return "_".join(parts) or "all"


# -- sampling ----------------------------------------------------------------


@dataclass
class SamplerReport:
    matched: int = 0
    unmatched: list[str] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)


def sample_benchmarks(corpus: Corpus, seed: int) -> tuple[list[tuple[str, str]], SamplerReport]:
    """Draw one same-issue benchmark per focal paper.

    Focal papers are visited in ascending id order and each draws uniformly
    from the non-focal papers sharing its (non-empty) issue key, sorted by id.
    Draws are independent across focal papers, so two focals in one issue
    may receive the same benchmark.
    """
    report = SamplerReport()
    by_issue: dict[str, list[str]] = defaultdict(list)
    for p in corpus.papers:
        if p.cohort is not Cohort.FOCAL and p.issue_key:
            by_issue[p.issue_key].append(p.id)
    for ids in by_issue.values():
        ids.sort()
    focals = sorted((p for p in corpus.papers if p.cohort is Cohort.FOCAL), key=lambda p: p.id)
    if not focals:
        report.warnings.append("corpus has no focal papers")
        logger.warning("corpus has no focal papers; nothing to sample")
        return [], report
    rng = SplitMix64(seed)
    pairs = []
    for f in focals:
        candidates = by_issue.get(f.issue_key) if f.issue_key else None
        if not candidates:
            report.unmatched.append(f.id)
            continue
        pairs.append((f.id, rng.choice(candidates)))
    report.matched = len(pairs)
    if report.unmatched:
        logger.info("%d focal paper(s) had no same-issue candidate", len(report.unmatched))
    return pairs, report


# -- aggregation -------------------------------------------------------------


def median(values: Sequence[Number]) -> Number:
    """Middle value, or the mean of the two middle values for even sizes."""
    if not values:
        raise ValueError("median of empty sequence")
    s = sorted(values)
    mid = len(s) // 2
    if len(s) % 2:
        return s[mid]
    return (s[mid - 1] + s[mid]) / 2


class SeriesRow(NamedTuple):
    t: int
    median_di: Fraction | None
    n_defined: int
    n_undefined: int


@dataclass(frozen=True)
class CohortSeries:
    group: GroupKey
    rows: tuple[SeriesRow, ...]

    @property
    def t_values(self) -> list[int]:
        return [r.t for r in self.rows]

    def medians(self) -> dict[int, Fraction | None]:
        return {r.t: r.median_di for r in self.rows}


def aggregate_median(
    series_inputs: Iterable[tuple[Member, Sequence[tuple[int, DiValue]]]],
    group: GroupKey,
    t_max: int,
) -> CohortSeries:
    """Per-t median of defined DI values over the members of ``group``.

    Undefined values are left out of the median and counted in n_undefined;
    a t with no defined value gets an undefined median.
    """
    if t_max < 1:
        raise ValueError(f"t_max must be >= 1, got {t_max}")
    columns: dict[int, list[Fraction]] = {t: [] for t in range(1, t_max + 1)}
    missing = {t: 0 for t in range(1, t_max + 1)}
    for member, series in series_inputs:
        by_t = dict(series)
        if any(t not in by_t for t in columns):
            raise ValueError(
                f"series for {member.id!r} does not cover t=1..{t_max} "
                f"(has {len(by_t)} entries)"
            )
        if not group.matches(member):
            continue
        for t in columns:
            v = by_t[t]
            if v.score is None:
                missing[t] += 1
            else:
                columns[t].append(v.score)
    rows = tuple(
        SeriesRow(t, median(vals) if vals else None, len(vals), missing[t])
        for t, vals in columns.items()
    )
    return CohortSeries(group, rows)


# -- comparison --------------------------------------------------------------


BANDS = (("t<=5", 1, 5), ("6<=t<=9", 6, 9), ("t>=10", 10, None))


def _sign(x: Fraction) -> int:
    return (x > 0) - (x < 0)


def _differences(focal: CohortSeries, benchmark: CohortSeries) -> dict[int, Fraction | None]:
    fm, bm = focal.medians(), benchmark.medians()
    out = {}
    for t in sorted(set(fm) & set(bm)):
        a, b = fm[t], bm[t]
        out[t] = None if a is None or b is None else a - b
    return out


@dataclass(frozen=True)
class BandResult:
    name: str
    t_lo: int
    t_hi: int
    n_points: int
    mean_diff: Fraction | None
    sign: int | None


@dataclass(frozen=True)
class BandComparison:
    bands: tuple[BandResult, ...]
    conflict: bool

    def band(self, name: str) -> BandResult:
        for b in self.bands:
            if b.name == name:
                return b
        raise KeyError(name)


def band_report(focal_series: CohortSeries, benchmark_series: CohortSeries) -> BandComparison:
    """Mean focal-minus-benchmark median difference per window band.

    The open band t>=10 stops at the series' t_max; ``t_hi`` records the
    effective end. Conflict means two bands carry strictly opposite signs.
    """
    if focal_series.t_values != benchmark_series.t_values:
        raise ValueError("focal and benchmark series cover different t ranges")
    t_max = max(focal_series.t_values, default=0)
    if t_max < 10:
        raise ValueError(f"window bands need t_max >= 10, got {t_max}")
    diffs = _differences(focal_series, benchmark_series)
    bands = []
    for name, lo, hi in BANDS:
        hi = t_max if hi is None else hi
        vals = [d for t, d in diffs.items() if lo <= t <= hi and d is not None]
        mean = sum(vals, Fraction(0)) / len(vals) if vals else None
        bands.append(BandResult(name, lo, hi, len(vals), mean, None if mean is None else _sign(mean)))
    signs = {b.sign for b in bands}
    return BandComparison(tuple(bands), conflict={1, -1} <= signs)


def crossover_detect(focal_series: CohortSeries, benchmark_series: CohortSeries) -> list[int]:
    """Every t whose difference sign differs from the sign at t-1.

    An undefined difference breaks the run: neither it nor the t after it
    counts as a crossover (see ``undefined_points``).
    """
    diffs = _differences(focal_series, benchmark_series)
    out = []
    for t, d in diffs.items():
        prev = diffs.get(t - 1)
        if d is not None and prev is not None and _sign(d) != _sign(prev):
            out.append(t)
    return out


def undefined_points(focal_series: CohortSeries, benchmark_series: CohortSeries) -> list[int]:
    """t values where either median is undefined."""
    return [t for t, d in _differences(focal_series, benchmark_series).items() if d is None]
