"""Transducer ASR with a synchronized role-diarization head."""

from ._rdlab import (
    AsrModel,
    Corpus,
    DataError,
    NumericalError,
    RdModel,
    RunConfig,
    beam_search,
    decode,
    force_align,
    hat_probabilities,
    rnnt_gradients,
    rnnt_log_likelihood,
    score,
    shared_blank_log_likelihood,
    suppress_blank,
    train_asr,
    train_rd,
)

__all__ = [
    "AsrModel",
    "Corpus",
    "DataError",
    "NumericalError",
    "RdModel",
    "RunConfig",
    "beam_search",
    "decode",
    "force_align",
    "hat_probabilities",
    "rnnt_gradients",
    "rnnt_log_likelihood",
    "score",
    "shared_blank_log_likelihood",
    "suppress_blank",
    "train_asr",
    "train_rd",
]
