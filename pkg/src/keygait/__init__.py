"""Keystroke-dynamics anomaly detection.

The pipeline aligns free-text keystroke captures against a per-subject
target template, extracts duration and latency features, normalizes them
robustly, scores queries with one-class detectors, and evaluates with
equal-error-rate metrics. A seeded synthetic generator with known ground
truth supports controlled experiments.
"""

from .alignment import (
    AlignmentMapping,
    AuditReport,
    align,
    align_subject,
    audit_dataset,
    damerau_levenshtein,
    discard_modifiers,
    select_target,
    truncate_align,
)
from .config import (
    ALIGNMENT_METHODS,
    SCORE_NORM_KINDS,
    DetectorConfig,
    PipelineConfig,
    ScoreNormConfig,
    load_config,
    write_config_snapshot,
)
from .datasets import (
    attach_labels,
    load_dataset,
    read_labels,
    read_scores,
    write_dataset,
    write_labels,
    write_metrics,
    write_scores,
)
from .detectors import (
    DETECTOR_NAMES,
    ContractiveAutoencoder,
    Detector,
    ManhattanDetector,
    MeanEnsemble,
    OneClassSvm,
    TiedAutoencoder,
    VariationalAutoencoder,
    build_detector,
)
from .errors import (
    AlignmentError,
    DatasetError,
    EvaluationError,
    FeatureError,
    KeygaitError,
    PairingError,
    ParseError,
    ResolutionError,
    ScoreNormError,
    TrainingError,
)
from .events import (
    Action,
    Keystroke,
    KeystrokeSequence,
    Label,
    RawEvent,
    Role,
    Sample,
    SubjectDataset,
    UnreleasedKeyWarning,
    pair_events,
    parse_raw_events,
    serialize_events,
)
from .evaluation import (
    MonteCarloResult,
    RocCurve,
    SubjectEerReport,
    derive_seed,
    global_eer,
    monte_carlo_validate,
    roc,
    run_pipeline,
    subject_eer,
)
from .features import (
    FeatureNormalizer,
    RawFeatureVector,
    extract_features,
    fit_feature_normalizer,
    normalize_features,
    write_feature_matrix,
)
from .resolution import collect_latencies, estimate_resolution
from .scancodes import MODIFIER_KEYS, SHIFT_KEYS, key_name, scancode_for
from .scorenorm import ScoreRecord, ScoreSet, apply_normalization
from .synthesis import (
    PerturbationRecord,
    SynthConfig,
    generate_synthetic,
    write_ground_truth,
    write_perturbations,
)

__all__ = [
    "Action",
    "AlignmentError",
    "AlignmentMapping",
    "ALIGNMENT_METHODS",
    "AuditReport",
    "ContractiveAutoencoder",
    "DatasetError",
    "Detector",
    "DetectorConfig",
    "DETECTOR_NAMES",
    "EvaluationError",
    "FeatureError",
    "FeatureNormalizer",
    "KeygaitError",
    "Keystroke",
    "KeystrokeSequence",
    "Label",
    "ManhattanDetector",
    "MeanEnsemble",
    "MODIFIER_KEYS",
    "MonteCarloResult",
    "OneClassSvm",
    "PairingError",
    "ParseError",
    "PerturbationRecord",
    "PipelineConfig",
    "RawEvent",
    "RawFeatureVector",
    "ResolutionError",
    "RocCurve",
    "Role",
    "Sample",
    "ScoreNormConfig",
    "SCORE_NORM_KINDS",
    "ScoreNormError",
    "ScoreRecord",
    "ScoreSet",
    "SHIFT_KEYS",
    "SubjectDataset",
    "SubjectEerReport",
    "SynthConfig",
    "TiedAutoencoder",
    "TrainingError",
    "UnreleasedKeyWarning",
    "VariationalAutoencoder",
    "align",
    "align_subject",
    "apply_normalization",
    "attach_labels",
    "audit_dataset",
    "build_detector",
    "collect_latencies",
    "damerau_levenshtein",
    "derive_seed",
    "discard_modifiers",
    "estimate_resolution",
    "extract_features",
    "fit_feature_normalizer",
    "generate_synthetic",
    "global_eer",
    "key_name",
    "load_config",
    "load_dataset",
    "monte_carlo_validate",
    "normalize_features",
    "pair_events",
    "parse_raw_events",
    "read_labels",
    "read_scores",
    "roc",
    "run_pipeline",
    "scancode_for",
    "select_target",
    "serialize_events",
    "subject_eer",
    "truncate_align",
    "write_config_snapshot",
    "write_dataset",
    "write_feature_matrix",
    "write_ground_truth",
    "write_labels",
    "write_metrics",
    "write_perturbations",
    "write_scores",
]
