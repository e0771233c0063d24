"""fedsim: a federated-SGD simulator with a purely functional 2-3-2 ANN core.

Clients train on locally generated data; a server aggregates their models
each round, either across in-process mailboxes or over a TCP wire protocol
that workers in other languages can speak bit-compatibly.
"""

from .ann import (
    Gradient,
    GradientMode,
    ModelWeights,
    Sample,
    backprop_layer,
    forward_layer,
    gradient,
    hidden_error,
    mse,
    output_error,
    sigmoid,
    train_batch,
    train_epoch,
)
from .datagen import (
    Fixed,
    Seeded,
    fixed_weights,
    gen_batch,
    gen_sample,
    initial_weights,
    seeded_weights,
)
from .fedsgd import (
    ClientUpdate,
    Partition,
    aggregate,
    central_step,
    local_gradient_step,
    select_subset,
)
from .protocol import Assignment, ProtocolError, TransportError, Update
from .rng import SplitMix64, Xoshiro256StarStar, derive_streams
from .runtime import (
    Duration,
    ExperimentConfig,
    Mode,
    RoundMetrics,
    Rounds,
    RunResult,
    client_step,
    run,
    server_round,
)

__all__ = [
    "Assignment",
    "ClientUpdate",
    "Duration",
    "ExperimentConfig",
    "Fixed",
    "Gradient",
    "GradientMode",
    "Mode",
    "ModelWeights",
    "Partition",
    "ProtocolError",
    "RoundMetrics",
    "Rounds",
    "RunResult",
    "Sample",
    "Seeded",
    "SplitMix64",
    "TransportError",
    "Update",
    "Xoshiro256StarStar",
    "aggregate",
    "backprop_layer",
    "central_step",
    "client_step",
    "derive_streams",
    "fixed_weights",
    "forward_layer",
    "gen_batch",
    "gen_sample",
    "gradient",
    "hidden_error",
    "initial_weights",
    "local_gradient_step",
    "mse",
    "output_error",
    "run",
    "seeded_weights",
    "select_subset",
    "server_round",
    "sigmoid",
    "train_batch",
    "train_epoch",
]
