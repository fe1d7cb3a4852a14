"""riffgauge: parse, score, measure, and compare tokenized guitar tablature.

The pipeline: tokenize/validate a token stream, build a timed Score, compute
nine per-song metrics, aggregate corpora, compare a generated corpus against
a reference by histogram KL divergence, rank generator checkpoints, and
continue prompts with an order-k count model. The command-line entry point
lives in riffgauge.cli.
"""

from .corpus import (
    CorpusTable,
    Edges,
    Histogram,
    KldReport,
    RankReport,
    box_stats,
    build_histogram,
    compare,
    corpus_metrics,
    kld,
    rank_checkpoints,
    shared_edges,
)
from .errors import (
    BuildError,
    CorpusError,
    GeneratorError,
    InvalidStreamError,
    RiffgaugeError,
)
from .generator import (
    CheckpointSpec,
    GeneratorConfig,
    NGramModel,
    apply_instrument_closure,
    continue_sequence,
    derive_seed,
    load_model,
    sample_from_counts,
    save_model,
    sweep,
    tempo_inheritance,
    train,
    train_texts,
)
from .metrics import (
    MetricId,
    MetricVector,
    compute_all,
    drum_in_pattern_rate,
    drum_pattern_consistency,
    n_pitch_classes,
    n_pitches,
    pitch_class_entropy,
    pitch_class_histogram,
    pitch_entropy,
    pitch_range,
    polyphony,
    polyphony_rate,
    scale_consistency,
)
from .midi import export_midi
from .plotting import render_box_plot
from .score import (
    DEFAULT_TUNINGS,
    Measure,
    NoteEvent,
    Score,
    Tuning,
    active_pitch_timeline,
    build_score,
    canonical_prompt,
    extract_prompt,
    resolve_pitch,
    time_signature_profile,
)
from .tokens import (
    TICKS_PER_QUARTER,
    Diagnostic,
    Instrument,
    Severity,
    Token,
    TokenStream,
    diagnose,
    measure_duration,
    serialize,
    stream_from_tokens,
    tokenize,
    validate,
)

__version__ = "0.1.0"

__all__ = [
    "BuildError",
    "CheckpointSpec",
    "CorpusError",
    "CorpusTable",
    "DEFAULT_TUNINGS",
    "Diagnostic",
    "Edges",
    "GeneratorConfig",
    "GeneratorError",
    "Histogram",
    "Instrument",
    "InvalidStreamError",
    "KldReport",
    "Measure",
    "MetricId",
    "MetricVector",
    "NGramModel",
    "NoteEvent",
    "RankReport",
    "RiffgaugeError",
    "Score",
    "Severity",
    "TICKS_PER_QUARTER",
    "Token",
    "TokenStream",
    "Tuning",
    "active_pitch_timeline",
    "apply_instrument_closure",
    "box_stats",
    "build_histogram",
    "build_score",
    "canonical_prompt",
    "compare",
    "compute_all",
    "continue_sequence",
    "corpus_metrics",
    "derive_seed",
    "diagnose",
    "drum_in_pattern_rate",
    "drum_pattern_consistency",
    "export_midi",
    "extract_prompt",
    "kld",
    "load_model",
    "measure_duration",
    "n_pitch_classes",
    "n_pitches",
    "pitch_class_entropy",
    "pitch_class_histogram",
    "pitch_entropy",
    "pitch_range",
    "polyphony",
    "polyphony_rate",
    "rank_checkpoints",
    "render_box_plot",
    "resolve_pitch",
    "sample_from_counts",
    "save_model",
    "scale_consistency",
    "serialize",
    "shared_edges",
    "stream_from_tokens",
    "sweep",
    "tempo_inheritance",
    "time_signature_profile",
    "tokenize",
    "train",
    "train_texts",
    "validate",
]
