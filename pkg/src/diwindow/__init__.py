"""Windowed disruption-index analytics for citation corpora."""

__version__ = "0.1.0"

from .corpus import (  # noqa: E402
    CitationEdge,
    Cohort,
    Corpus,
    CorpusError,
    Discipline,
    IngestOptions,
    IngestReport,
    PaperRecord,
    ValidationReport,
    ingest,
    load_corpus,
    save_corpus,
    validate,
)
from .graph_index import CitationIndex, Direction, build_index, neighbors  # noqa: E402
from .disruption import (  # noqa: E402
    UNBOUNDED,
    DegeneracyReport,
    DiCounts,
    DiValue,
    WindowSpec,
    batch_series,
    compute_di,
    compute_di_series,
    diagnose_di_one,
)
from .cohort import (  # noqa: E402
    BandComparison,
    CohortSeries,
    Era,
    GroupKey,
    Member,
    aggregate_median,
    band_report,
    crossover_detect,
    sample_benchmarks,
)
from .synth import (  # noqa: E402
    ConsolidatingPure,
    CrossoverProfile,
    DisruptivePure,
    GroundTruth,
    Mixed,
    SynthSpec,
    WindowFlip,
    generate,
    generate_paired_cohort,
)
