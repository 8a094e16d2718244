"""Coarsest bisimulation on deterministic labelled transition systems.

Worklist partition refinement with letter-free splitters and smaller-half
scanning: O(m log n) time, O(k + m + n) space on a normalized instance.
Ships with a set-based reference implementation, seeded instance generators,
and a DFA minimizer built on the same engine.
"""

from .bisim import (
    DEBUG_ENV,
    LetterBuckets,
    ScanStats,
    SplitterSet,
    collect_smaller_preimages,
    dbisim,
    init_refine,
    select_block,
)
from .cli import MinimizeReport, bench_rows, main, minimize_dfa
from .lts import (
    Dfa,
    LtsError,
    LtsParseError,
    NondeterminismError,
    NormalizedDlts,
    RawLts,
    check_deterministic,
    format_dfa,
    format_dlts,
    format_partition,
    normalize,
    parse_dfa,
    parse_lts,
    parse_partition,
)
from .oracle import (
    GenConfig,
    canonical_view,
    dfa_language_equivalent,
    gen_random_dfa,
    gen_random_dlts,
    instance_stream,
    is_bisimulation,
    naive_fixpoint,
)
from .partition import BlockDesc, PartitionError, RefinablePartition, SplitRecord

__version__ = "0.1.0"

__all__ = [
    "BlockDesc",
    "DEBUG_ENV",
    "Dfa",
    "GenConfig",
    "LetterBuckets",
    "LtsError",
    "LtsParseError",
    "MinimizeReport",
    "NondeterminismError",
    "NormalizedDlts",
    "PartitionError",
    "RawLts",
    "RefinablePartition",
    "ScanStats",
    "SplitRecord",
    "SplitterSet",
    "bench_rows",
    "canonical_view",
    "check_deterministic",
    "collect_smaller_preimages",
    "dbisim",
    "dfa_language_equivalent",
    "format_dfa",
    "format_dlts",
    "format_partition",
    "gen_random_dfa",
    "gen_random_dlts",
    "init_refine",
    "instance_stream",
    "is_bisimulation",
    "main",
    "minimize_dfa",
    "naive_fixpoint",
    "normalize",
    "parse_dfa",
    "parse_lts",
    "parse_partition",
    "select_block",
]
