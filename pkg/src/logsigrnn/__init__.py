"""Truncated log-signatures of piecewise-linear paths, a differentiable
log-signature sequence layer, and recurrent stream classifiers built on it."""

from .tensor_algebra import (
    TruncatedTensor,
    Word,
    shuffle,
    tensor_exp,
    tensor_log,
    tensor_mul,
    word_index,
)
from .lyndon import (
    LyndonBasis,
    enumerate_lyndon,
    expand_from_basis,
    logsig_dim,
    lyndon_words,
    project_to_basis,
    sig_dim,
    witt_number,
)
from .paths import (
    TimedPath,
    evaluate,
    insert_sample_times,
    log_signature,
    reparameterize,
    restrict,
    reverse_path,
    signature,
)
from .logsig_layer import (
    SegmentPartition,
    logsig_sequence,
    logsig_sequence_backward,
    logsig_sequence_forward,
    backward_from_state,
)
from .neural import (
    ModelConfig,
    SkeletonSequence,
    StreamClassifier,
    TrainSettings,
    TrainResult,
    accumulative_layer,
    add_start_points,
    embedding_forward,
    evaluate_model,
    gcn_forward,
    gcn_logsig_rnn_forward,
    logsig_rnn_forward,
    rnn_forward,
    time_incorporated_layer,
    train,
)
from .datasets import (
    LabeledStreamSet,
    StreamParseError,
    digit_polyline,
    gen_synthetic,
    load_streams,
    mape,
    mape_drop_study,
    perturb_drop,
    perturb_insert,
    save_streams,
    upsample_linear,
)

__version__ = "0.1.0"
