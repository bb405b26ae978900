"""cynerkit: corpus engineering and cross-dataset evaluation for cybersecurity NER.

Unifies heterogeneous dataset label schemes onto a four-type inventory,
enforces leakage-free train/eval pairings, and scores cross-dataset
predictions with span-level metrics and distributional diagnostics.
"""

__version__ = "0.1.0"

from ._kernels import BACKEND as KERNEL_BACKEND
from .corpus import (
    Corpus,
    EntitySpan,
    Sentence,
    Token,
    Violation,
    ViolationKind,
    encode_spans,
    entity_label_distribution,
    extract_spans,
    pos_distribution,
    repair_bio2,
    repair_corpus,
    span_length_distribution,
    token_distribution,
    validate_bio2,
)
from .dedup import (
    DuplicateReport,
    find_duplicates_across,
    find_duplicates_within,
    remove_overlap,
    sentence_key,
)
from .distributions import CategoricalDistribution
from .divergence import (
    CorrelationResult,
    DivergenceMatrix,
    correlate_divergence_with_performance,
    divergence_matrix,
    js_divergence,
    pearson,
)
from .harness import (
    EvalMatrix,
    ExperimentConfig,
    build_combined_train,
    load_config,
    prepare_pairing,
    run_cross_eval,
    write_cross_eval,
)
from .ingest import (
    AttackerFieldMap,
    DatasetDescriptor,
    RawLine,
    builtin_descriptors,
    clean_aptner,
    clean_dnrti,
    parse_attacker,
    parse_conll,
    read_conll_file,
    write_conll,
    write_conll_file,
)
from .metrics import (
    ConfusionMatrix,
    MatchMode,
    MetricReport,
    PredictionFile,
    PredictionSentence,
    build_prediction_file,
    disagreement_report,
    fn_rate,
    parse_prediction_file,
    read_prediction_file,
    span_prf,
    token_confusion,
    write_prediction_file,
)
from .unify import (
    UNIFIED_LABELS,
    UnificationMap,
    builtin_map,
    builtin_maps,
    load_mapping_file,
    parse_mapping_file,
    unify_corpus,
)

__all__ = [name for name in dir() if not name.startswith("_")]
