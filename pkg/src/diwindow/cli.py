"""Command-line interface: ``diwindow <command> [options]``.

Commands: ingest, validate, di, sample-bp, pipeline, diagnose, synth.
Exit codes: 0 success, 1 user error (bad arguments, missing file, unknown
id), 2 data error (malformed or inconsistent corpus).

All tables are TSV with a header row and a trailing newline. DI values are
printed with six decimals, or ``NA`` when undefined.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import sys
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Sequence

from . import __version__
from .cohort import (
    Era,
    GroupKey,
    Member,
    aggregate_median,
    band_report,
    crossover_detect,
    sample_benchmarks,
    undefined_points,
)
from .corpus import (
    Cohort,
    Corpus,
    CorpusError,
    Discipline,
    IngestOptions,
    ingest,
    load_corpus,
    save_corpus,
    validate,
)
from .disruption import (
    DEFAULT_LOW_CITATION,
    UNBOUNDED,
    DiValue,
    WindowSpec,
    batch_series,
    compute_di,
    diagnose_di_one,
)
from .graph_index import CitationIndex, IndexBuildError, build_index, load_index, save_index
from .synth import (
    ConsolidatingPure,
    CrossoverProfile,
    DisruptivePure,
    Mixed,
    SynthError,
    SynthSpec,
    WindowFlip,
    generate,
    generate_paired_cohort,
    write_synth,
)

logger = logging.getLogger("diwindow")

EXIT_OK, EXIT_USER, EXIT_DATA = 0, 1, 2
DEFAULT_T_MAX = 20
DEFAULT_WINDOW = 10


class UserError(Exception):
    pass


class DataError(Exception):
    pass


@dataclass
class RunConfig:
    corpus: str
    t_max: int = DEFAULT_T_MAX
    window: int = DEFAULT_WINDOW
    seed: int = 0
    discipline: str | None = None
    era: str | None = None
    group_by: list[str] = field(default_factory=list)
    out: str = "."
    threads: int = 0
    bands: bool = True

    def check(self) -> None:
        if self.t_max < 1:
            raise UserError(f"--t-max must be >= 1, got {self.t_max}")
        if not 0 <= self.window <= self.t_max:
            raise UserError(f"default window {self.window} must lie in [0, t_max={self.t_max}]")
        if self.threads < 0:
            raise UserError("--threads must be >= 0")
        if not 0 <= self.seed < 2**64:
            raise UserError("--seed must be an unsigned 64-bit integer")


# -- formatting ----------------------------------------------------------------


def fmt_num(x: Fraction | None) -> str:
    return "NA" if x is None else f"{float(x):.6f}"


def fmt_bool(b: bool) -> str:
    return "true" if b else "false"


def _cell(v) -> str:
    s = str(v)
    if "\t" in s or "\n" in s:
        raise DataError(f"value {s!r} cannot be written to TSV")
    return s


def render_tsv(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    lines = ["\t".join(header)]
    lines.extend("\t".join(_cell(v) for v in row) for row in rows)
    return "\n".join(lines) + "\n"


def _emit(text: str, out_dir: str | None, name: str) -> Path | None:
    if out_dir is None:
        sys.stdout.write(text)
        return None
    path = Path(out_dir)
    path.mkdir(parents=True, exist_ok=True)
    target = path / name
    target.write_text(text, encoding="utf-8", newline="\n")
    return target


# -- corpus loading --------------------------------------------------------------


def index_path_for(corpus_path: Path) -> Path:
    return corpus_path.with_name(corpus_path.name + ".index.npz")


def open_corpus(path: str) -> tuple[Corpus, CitationIndex]:
    """Load a serialized corpus and its index, reusing a matching snapshot."""
    p = Path(path)
    if not p.is_file():
        raise UserError(f"corpus file not found: {path}")
    try:
        corpus = load_corpus(p)
    except CorpusError as exc:
        raise DataError(str(exc)) from exc
    snap = index_path_for(p)
    if snap.is_file():
        try:
            return corpus, load_index(snap, expect_checksum=corpus.checksum())
        except IndexBuildError as exc:
            logger.info("ignoring index snapshot: %s", exc)
    try:
        return corpus, build_index(corpus)
    except IndexBuildError as exc:
        raise DataError(str(exc)) from exc


def _persist(corpus: Corpus, out_dir: str, name: str = "corpus.json") -> Path:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    path = out / name
    save_corpus(corpus, path)
    save_index(build_index(corpus), index_path_for(path), corpus.checksum())
    return path


# -- commands --------------------------------------------------------------------


def cmd_ingest(args) -> int:
    for p in (args.papers, args.edges):
        if not Path(p).is_file():
            raise UserError(f"input file not found: {p}")
    options = IngestOptions(strict=args.strict, on_duplicate="keep-first" if args.keep_first else "error")
    try:
        corpus, report = ingest(args.papers, args.edges, options)
    except CorpusError as exc:
        raise DataError(str(exc)) from exc
    path = _persist(corpus, args.out or ".")
    lines = ["ingest"] + report.lines() + ["validate"] + validate(corpus).lines()
    lines.append(f"corpus\t{path}")
    print("\n".join(lines))
    return EXIT_OK


def cmd_validate(args) -> int:
    corpus, _ = open_corpus(args.corpus)
    report = validate(corpus)
    print("\n".join(report.lines()))
    return EXIT_OK if report.passed else EXIT_DATA


def _parse_window(text: str) -> WindowSpec:
    if text.lower() in ("inf", "unbounded"):
        return UNBOUNDED
    try:
        return WindowSpec(int(text))
    except ValueError:
        raise argparse.ArgumentTypeError(f"window must be a non-negative integer or 'inf', got {text!r}") from None


def _select_ids(corpus: Corpus, index: CitationIndex, ids: list[str] | None, cohort: str | None) -> list[str]:
    chosen = set(ids or [])
    if cohort:
        chosen.update(corpus.ids_with_cohort(Cohort.parse(cohort)))
    if not ids and not cohort:
        raise UserError("give paper ids with --id or a cohort with --cohort")
    unknown = sorted(pid for pid in chosen if pid not in index.handle_of)
    if unknown:
        for pid in unknown:
            print(f"unknown paper id: {pid}", file=sys.stderr)
        raise UserError(f"{len(unknown)} unknown paper id(s)")
    return sorted(chosen)


DI_HEADER = ("focal_id", "t", "n_i", "n_j", "n_k", "di")


def _di_row(pid: str, t: str | int, v: DiValue) -> tuple:
    c = v.counts
    return (pid, t, c.n_i, c.n_j, c.n_k, v.render())


def cmd_di(args) -> int:
    corpus, index = open_corpus(args.corpus)
    ids = _select_ids(corpus, index, args.id, args.cohort)
    rows = []
    if args.series:
        if args.t_max < 1:
            raise UserError("--t-max must be >= 1")
        for pid, series in batch_series(index, ids, args.t_max, args.threads).items():
            rows.extend(_di_row(pid, t, v) for t, v in series)
    else:
        window = args.t if args.t is not None else WindowSpec(DEFAULT_WINDOW)
        rows = [_di_row(pid, window.label(), compute_di(index, pid, window)) for pid in ids]
    _emit(render_tsv(DI_HEADER, rows), args.out, "di.tsv")
    return EXIT_OK


PAIRS_HEADER = ("focal_id", "benchmark_id", "issue_key", "status")


def _pairs_table(corpus: Corpus, seed: int) -> tuple[list[tuple[str, str]], str, dict]:
    pairs, report = sample_benchmarks(corpus, seed)
    papers = corpus.paper_map()
    rows = [(f, b, papers[f].issue_key, "matched") for f, b in pairs]
    rows += [(f, "", papers[f].issue_key, "unmatched") for f in report.unmatched]
    rows.sort()
    summary = {"matched": report.matched, "unmatched": len(report.unmatched)}
    return pairs, render_tsv(PAIRS_HEADER, rows), summary


def cmd_sample_bp(args) -> int:
    corpus, _ = open_corpus(args.corpus)
    _, text, summary = _pairs_table(corpus, args.seed)
    _emit(text, args.out, "pairs.tsv")
    print(f"matched\t{summary['matched']}\nunmatched\t{summary['unmatched']}", file=sys.stderr)
    return EXIT_OK


def _slices(members: list[Member], group_by: list[str]) -> list[tuple[Discipline | None, Era | None]]:
    discs = sorted({m.discipline for m in members}, key=list(Discipline).index)
    eras = sorted({Era.of(m.year) for m in members}, key=list(Era).index)
    out: list[tuple[Discipline | None, Era | None]] = [(None, None)]
    if "discipline" in group_by and "era" in group_by:
        out += [(d, None) for d in discs] + [(None, e) for e in eras]
        out += [(d, e) for d in discs for e in eras]
    elif "discipline" in group_by:
        out += [(d, None) for d in discs]
    elif "era" in group_by:
        out += [(None, e) for e in eras]
    return out


SERIES_HEADER = (
    "t", "focal_median", "focal_n_defined", "focal_n_undefined",
    "benchmark_median", "benchmark_n_defined", "benchmark_n_undefined", "difference",
)
BANDS_HEADER = ("group", "band", "t_lo", "t_hi", "n_points", "mean_diff", "sign", "conflict")
CROSS_HEADER = ("group", "t", "kind")


def run_pipeline(config: RunConfig) -> dict[str, Path]:
    """Sample benchmarks, score both cohorts, aggregate, compare; write the bundle."""
    config.check()
    corpus, index = open_corpus(config.corpus)
    papers = corpus.paper_map()
    focal_ids = corpus.ids_with_cohort(Cohort.FOCAL)
    if not focal_ids:
        raise DataError("corpus has no focal papers; nothing to compare")
    if config.bands and config.t_max < 10:
        raise UserError(f"window bands need --t-max >= 10, got {config.t_max} (or pass --no-bands)")
    pairs, pairs_text, sampler = _pairs_table(corpus, config.seed)

    members = [Member(f, Cohort.FOCAL, papers[f].discipline, papers[f].year) for f in focal_ids]
    members += [Member(b, Cohort.BENCHMARK, papers[b].discipline, papers[b].year) for _, b in pairs]
    if config.discipline:
        members = [m for m in members if m.discipline is Discipline.parse(config.discipline)]
    if config.era:
        members = [m for m in members if Era.of(m.year) is Era(config.era)]

    series = batch_series(index, [m.id for m in members], config.t_max, config.threads)
    inputs = [(m, series[m.id]) for m in members]

    out = Path(config.out)
    out.mkdir(parents=True, exist_ok=True)
    written: dict[str, Path] = {}

    def put(name: str, text: str) -> None:
        path = out / name
        path.write_text(text, encoding="utf-8", newline="\n")
        written[name] = path

    put("pairs.tsv", pairs_text)
    di_rows = []
    for cohort in (Cohort.FOCAL, Cohort.BENCHMARK):
        for pid in sorted({m.id for m in members if m.cohort is cohort}):
            di_rows.extend((cohort.value,) + _di_row(pid, t, v) for t, v in series[pid])
    put("di_series.tsv", render_tsv(("cohort",) + DI_HEADER, di_rows))

    band_rows, cross_rows = [], []
    for disc, era in _slices(members, config.group_by):
        fs = aggregate_median(inputs, GroupKey(Cohort.FOCAL, disc, era), config.t_max)
        bs = aggregate_median(inputs, GroupKey(Cohort.BENCHMARK, disc, era), config.t_max)
        label = fs.group.slice_label()
        rows = []
        for fr, br in zip(fs.rows, bs.rows):
            diff = None if fr.median_di is None or br.median_di is None else fr.median_di - br.median_di
            rows.append((fr.t, fmt_num(fr.median_di), fr.n_defined, fr.n_undefined,
                         fmt_num(br.median_di), br.n_defined, br.n_undefined, fmt_num(diff)))
        put(f"series_{label}.tsv", render_tsv(SERIES_HEADER, rows))
        if config.bands:
            comparison = band_report(fs, bs)
            for b in comparison.bands:
                band_rows.append((label, b.name, b.t_lo, b.t_hi, b.n_points, fmt_num(b.mean_diff),
                                  "NA" if b.sign is None else b.sign, fmt_bool(comparison.conflict)))
        cross_rows += [(label, t, "crossover") for t in crossover_detect(fs, bs)]
        cross_rows += [(label, t, "undefined") for t in undefined_points(fs, bs)]
    if config.bands:
        put("bands.tsv", render_tsv(BANDS_HEADER, band_rows))
    put("crossovers.tsv", render_tsv(CROSS_HEADER, cross_rows))

    manifest = {
        "tool": "diwindow",
        "version": __version__,
        # the output directory is not part of the replayable configuration
        "config": {k: v for k, v in asdict(config).items() if k != "out"},
        "corpus_sha256": corpus.checksum(),
        "sampler": sampler,
        "scored_papers": len(series),
        "outputs": {name: hashlib.sha256(p.read_bytes()).hexdigest() for name, p in sorted(written.items())},
    }
    put("manifest.json", json.dumps(manifest, sort_keys=True, indent=2) + "\n")
    return written


def cmd_pipeline(args) -> int:
    config = RunConfig(
        corpus=args.corpus,
        t_max=args.t_max,
        window=args.window,
        seed=args.seed,
        discipline=args.discipline,
        era=args.era,
        group_by=sorted(set(filter(None, (args.group_by or "").split(",")))),
        out=args.out or "pipeline_out",
        threads=args.threads,
        bands=not args.no_bands,
    )
    bad = set(config.group_by) - {"discipline", "era"}
    if bad:
        raise UserError(f"--group-by accepts discipline and/or era, not {', '.join(sorted(bad))}")
    written = run_pipeline(config)
    for name in sorted(written):
        print(f"wrote\t{written[name]}")
    return EXIT_OK


DIAG_HEADER = (
    "paper_id", "cohort", "t", "n_i", "n_j", "n_k", "di",
    "is_di_one", "zero_resolved_refs", "low_citation", "persistent_one",
)


def cmd_diagnose(args) -> int:
    config = RunConfig(corpus=args.corpus, t_max=args.t_max, window=args.t, seed=args.seed)
    config.check()
    corpus, index = open_corpus(args.corpus)
    targets = {pid: Cohort.FOCAL for pid in corpus.ids_with_cohort(Cohort.FOCAL)}
    for pid in corpus.ids_with_cohort(Cohort.BENCHMARK):
        targets.setdefault(pid, Cohort.BENCHMARK)
    if args.sample_benchmarks:
        for _, b in sample_benchmarks(corpus, args.seed)[0]:
            targets.setdefault(b, Cohort.BENCHMARK)
    window = WindowSpec(args.t)
    reports = [
        (diagnose_di_one(index, pid, window, args.t_max, args.low_citation), cohort)
        for pid, cohort in targets.items()
    ]
    reports.sort(key=lambda rc: (not rc[0].persistent_one, rc[0].focal))
    rows = []
    for r, cohort in reports:
        c = r.value.counts
        rows.append((r.focal, cohort.value, window.label(), c.n_i, c.n_j, c.n_k, r.value.render(),
                     *(fmt_bool(f) for f in r.flags().values())))
    _emit(render_tsv(DIAG_HEADER, rows), args.out, "diagnose.tsv")
    return EXIT_OK


MOTIFS = {
    "disruptive": lambda a: DisruptivePure(),
    "consolidating": lambda a: ConsolidatingPure(),
    "mixed": lambda a: Mixed(a.p_j, a.p_k_rate),
    "window-flip": lambda a: WindowFlip(a.flip_t),
    "crossover": lambda a: CrossoverProfile(a.crossover_t, a.p_k_rate),
}


def cmd_synth(args) -> int:
    spec = SynthSpec(
        motif=MOTIFS[args.motif](args),
        n_focal=args.n_focal,
        refs_per_focal=args.refs,
        citers_per_year=args.citers_per_year,
        years=args.years,
        seed=args.seed,
        discipline=Discipline.parse(args.discipline),
        base_year=args.base_year,
        id_prefix=args.id_prefix,
    )
    try:
        if isinstance(spec.motif, (WindowFlip, CrossoverProfile)):
            corpus, truth = generate_paired_cohort(spec)
        else:
            corpus, truth = generate(spec)
    except SynthError as exc:
        raise UserError(str(exc)) from exc
    out = args.out or "synth_out"
    paths = write_synth(corpus, truth, spec, out)
    paths["corpus"] = _persist(corpus, out)
    for name in sorted(paths):
        print(f"wrote\t{paths[name]}")
    return EXIT_OK


# -- argument parsing ----------------------------------------------------------------


def _global_flags(suppress: bool) -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    default = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    p.add_argument("--seed", type=int, default=default(0), help="unsigned 64-bit seed (default 0)")
    p.add_argument("--threads", type=int, default=default(0), help="DI scoring threads, 0 = all cores")
    p.add_argument("--out", default=default(None), help="output directory")
    p.add_argument("-v", "--verbose", action="store_true", default=default(False))
    return p


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="diwindow",
        description="Windowed disruption index analysis of citation corpora.",
        parents=[_global_flags(suppress=False)],
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    common = [_global_flags(suppress=True)]

    p = sub.add_parser("ingest", parents=common, help="parse papers/edges TSV into a corpus file")
    p.add_argument("papers")
    p.add_argument("edges")
    p.add_argument("--strict", action="store_true", help="abort on the first malformed row")
    p.add_argument("--keep-first", action="store_true", help="keep the first of duplicate paper ids")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("validate", parents=common, help="re-check corpus invariants")
    p.add_argument("corpus")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("di", parents=common, help="DI table for selected papers")
    p.add_argument("corpus")
    p.add_argument("--id", action="append", help="paper id (repeatable)")
    p.add_argument("--cohort", choices=["focal", "benchmark"])
    p.add_argument("--t", type=_parse_window, default=None,
                   help=f"window in years, or 'inf' (default {DEFAULT_WINDOW})")
    p.add_argument("--series", action="store_true", help="emit t = 1..t-max")
    p.add_argument("--t-max", type=int, default=DEFAULT_T_MAX)
    p.set_defaults(func=cmd_di)

    p = sub.add_parser("sample-bp", parents=common, help="draw same-issue benchmark papers")
    p.add_argument("corpus")
    p.set_defaults(func=cmd_sample_bp)

    p = sub.add_parser("pipeline", parents=common, help="full focal-vs-benchmark comparison")
    p.add_argument("corpus")
    p.add_argument("--t-max", type=int, default=DEFAULT_T_MAX)
    p.add_argument("--window", type=int, default=DEFAULT_WINDOW, help="default window recorded in the run config")
    p.add_argument("--group-by", default="", help="comma list of: discipline, era")
    p.add_argument("--discipline", help="only papers of this discipline")
    p.add_argument("--era", choices=[e.value for e in Era], help="only papers of this era")
    p.add_argument("--no-bands", action="store_true", help="skip window-band comparison")
    p.set_defaults(func=cmd_pipeline)

    p = sub.add_parser("diagnose", parents=common, help="flag degenerate DI = 1 papers")
    p.add_argument("corpus")
    p.add_argument("--t-max", type=int, default=DEFAULT_T_MAX)
    p.add_argument("--t", type=int, default=DEFAULT_WINDOW, help="window for the is_di_one flag")
    p.add_argument("--low-citation", type=int, default=DEFAULT_LOW_CITATION)
    p.add_argument("--sample-benchmarks", action="store_true",
                   help="also diagnose benchmarks drawn with --seed")
    p.set_defaults(func=cmd_diagnose)

    p = sub.add_parser("synth", parents=common, help="generate a synthetic corpus with ground truth")
    p.add_argument("--motif", choices=sorted(MOTIFS), required=True)
    p.add_argument("--n-focal", type=int, default=10)
    p.add_argument("--refs", type=int, default=2, help="references per focal paper")
    p.add_argument("--citers-per-year", type=int, default=3)
    p.add_argument("--years", type=int, default=20)
    p.add_argument("--p-j", type=float, default=0.5)
    p.add_argument("--p-k-rate", type=float, default=1.0)
    p.add_argument("--flip-t", type=int, default=7)
    p.add_argument("--crossover-t", type=int, default=10)
    p.add_argument("--discipline", default="Other")
    p.add_argument("--base-year", type=int, default=2000)
    p.add_argument("--id-prefix", default="")
    p.set_defaults(func=cmd_synth)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USER
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if not 0 <= args.seed < 2**64:
            raise UserError("--seed must be an unsigned 64-bit integer")
        if args.threads < 0:
            raise UserError("--threads must be >= 0")
        return args.func(args)
    except UserError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USER
    except (DataError, CorpusError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USER


if __name__ == "__main__":
    sys.exit(main())
