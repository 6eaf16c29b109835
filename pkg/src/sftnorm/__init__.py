"""Shifts of finite type: Parry measures, normality testing, and
finite-state compression at desk scale."""

__version__ = "0.1.0"

from .errors import (
    AmbiguousRunError,
    ConstructionError,
    ConvergenceError,
    EnumerationCapError,
    RunRejectedError,
    ValidationError,
)
from .sft import (
    BlockSet,
    ShiftSpec,
    blocks,
    count_blocks,
    full_shift,
    golden_mean_spec,
    is_aperiodic,
    is_block,
    is_irreducible,
    matrix_from_forbidden,
    shift_prefix,
    topological_entropy,
)
from .spectral import PerronData, perron
from .measures import (
    Measure,
    ParryMeasure,
    bernoulli,
    empirical,
    is_compatible,
    is_invariant,
    markov,
    markov_entropy,
    measure_entropy_truncated,
    parry,
    total_block_mass,
)
from .occurrences import (
    OccurrenceTable,
    alocc,
    alocc_star,
    block_entropy,
    block_entropy_prefix,
    build_occurrence_table,
    occ,
    relative_frequency,
)
from .normality import (
    NormalityReport,
    sample_parry,
    sample_skewed,
    test_aligned,
    test_nonaligned,
    test_strong_aligned,
)
from .transducer import (
    KraftAudit,
    RunResult,
    Transducer,
    build_transducer,
    check_injective_blocks,
    check_kraft_bound,
    compose,
    identity_transducer,
    load_transducer,
    min_output_length,
    parse_transducer,
    run,
)
from .compressor import (
    BlockCode,
    CompressionReport,
    EmpiricalChain,
    RecoderPlan,
    build_block_code,
    build_empirical_chain,
    build_kraft_compressor,
    build_recoder,
    block_encoder,
    compress_nonnormal,
    compression_ratio,
    design_recoder,
    entropy_gap_certificate,
    kraft_transducer,
    rank_anchored,
    recoder_from_plan,
    unrank_anchored,
)
from .prng import PRNG_ID

__all__ = [name for name in dir() if not name.startswith("_")]
