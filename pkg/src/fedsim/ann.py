"""Purely functional 2-3-2 feedforward network with backpropagation.

The network shape is frozen: 2 inputs, 3 hidden neurons, 2 outputs, sigmoid
activations, and one bias node feeding each non-input layer.  A bias is
stored as the trailing column of its weight matrix and behaves like a weight
whose source activation is the constant 1.0.  The learning rate is fixed at
1 and folded into the update (``w - delta * input``).

Everything here is value-to-value: weights are immutable, every operation
returns fresh values, and repeated calls with equal inputs are bit-identical.
Cross-language workers replicate these functions operation-for-operation
(see PROTOCOL.md), so the accumulation order inside each loop is part of the
contract - do not "simplify" the arithmetic.

Two update orderings exist for the backward pass:

* ``GradientMode.CLASSIC`` computes hidden deltas from the pre-update output
  weights; one epoch then equals exactly ``weights - gradient(weights, s)``.
* ``GradientMode.CHAINED`` (the default elsewhere) updates the output layer
  first and derives hidden deltas from the already-updated matrix, chaining
  the second layer's update through the first.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

from .fmath import exp

N_INPUT = 2
N_HIDDEN = 3
N_OUTPUT = 2
N_WEIGHTS = N_HIDDEN * (N_INPUT + 1) + N_OUTPUT * (N_HIDDEN + 1)  # 17

Row = tuple[float, ...]
Matrix = tuple[Row, ...]


class GradientMode(enum.Enum):
    CLASSIC = "classic"
    CHAINED = "chained"


@dataclass(frozen=True)
class ModelWeights:
    """Full parameter vector: 3x3 input->hidden and 2x4 hidden->output matrices.

    Row i holds the incoming weights of destination neuron i; the last column
    of each row is the bias weight.
    """

    w_input: Matrix
    w_hidden: Matrix

    def __post_init__(self):
        _check_matrix(self.w_input, N_HIDDEN, N_INPUT + 1, "w_input")
        _check_matrix(self.w_hidden, N_OUTPUT, N_HIDDEN + 1, "w_hidden")

    def flat(self) -> tuple[float, ...]:
        """Canonical flattening: w_input rows then w_hidden rows (17 values)."""
        return tuple(v for row in self.w_input for v in row) + tuple(
            v for row in self.w_hidden for v in row
        )

    @classmethod
    def from_flat(cls, values: Sequence[float]) -> "ModelWeights":
        if len(values) != N_WEIGHTS:
            raise ValueError(f"expected {N_WEIGHTS} weights, got {len(values)}")
        v = tuple(float(x) for x in values)
        return cls(
            w_input=(v[0:3], v[3:6], v[6:9]),
            w_hidden=(v[9:13], v[13:17]),
        )


# A gradient has exactly the shape of the weights it differentiates.
Gradient = ModelWeights


@dataclass(frozen=True)
class Sample:
    """One training example: 2 inputs in [0, 1), 2 target values."""

    input: tuple[float, float]
    target: tuple[float, float]

    def __post_init__(self):
        if len(self.input) != N_INPUT or len(self.target) != N_OUTPUT:
            raise ValueError("samples are fixed at 2 inputs / 2 targets")
        for v in (*self.input, *self.target):
            if not math.isfinite(v):
                raise ValueError("sample values must be finite")


def _check_matrix(m: Matrix, rows: int, cols: int, name: str) -> None:
    if len(m) != rows or any(len(r) != cols for r in m):
        raise ValueError(f"{name} must be {rows}x{cols}")
    for r in m:
        for v in r:
            if not math.isfinite(v):
                raise ValueError(f"{name} entries must be finite")


def sigmoid(x: float) -> float:
    """Logistic function 1/(1 + e**-x)."""
    return 1.0 / (1.0 + exp(-x))


def forward_layer(activations: Sequence[float], layer: Matrix) -> tuple[float, ...]:
    """Pre-activation of each destination neuron: dot(activations, row) + bias.

    The bias column acts as a weight on a constant 1.0 input.  Terms are
    accumulated left to right; this order is normative.
    """
    n = len(activations)
    if any(len(row) != n + 1 for row in layer):
        raise ValueError("forward_layer: len(activations) + 1 != columns(layer)")
    outs = []
    for row in layer:
        acc = 0.0
        for a, w in zip(activations, row):
            acc += a * w
        acc += row[n]  # 1.0 * bias
        outs.append(acc)
    return tuple(outs)


def output_error(outputs: Sequence[float], targets: Sequence[float]) -> tuple[float, ...]:
    """Output deltas o*(1-o)*(o-t): dE/dnet for E = 1/2 sum (o-t)^2."""
    if len(outputs) != len(targets):
        raise ValueError("output_error: length mismatch")
    return tuple(o * (1.0 - o) * (o - t) for o, t in zip(outputs, targets))


def backprop_layer(
    inputs: Sequence[float], deltas: Sequence[float], layer: Matrix
) -> Matrix:
    """Weight update w' = w - delta * input per row (bias input is 1.0).

    Returns a new matrix; ``layer`` is untouched.
    """
    if len(deltas) != len(layer):
        raise ValueError("backprop_layer: len(deltas) != rows(layer)")
    n = len(inputs)
    if any(len(row) != n + 1 for row in layer):
        raise ValueError("backprop_layer: len(inputs) + 1 != columns(layer)")
    new_rows = []
    for d, row in zip(deltas, layer):
        new_row = tuple(w - d * i for w, i in zip(row, (*inputs, 1.0)))
        new_rows.append(new_row)
    return tuple(new_rows)


def hidden_error(
    hidden_outs: Sequence[float],
    output_deltas: Sequence[float],
    w_hidden_used: Matrix,
) -> tuple[float, ...]:
    """Hidden deltas: (sum_k w[k][h] * delta_k) * h * (1-h).

    Only the non-bias columns of ``w_hidden_used`` participate: the output
    bias has no source neuron in the hidden layer.
    """
    n = len(hidden_outs)
    if any(len(row) != n + 1 for row in w_hidden_used):
        raise ValueError("hidden_error: columns(w_hidden) != len(hidden_outs) + 1")
    if len(output_deltas) != len(w_hidden_used):
        raise ValueError("hidden_error: len(output_deltas) != rows(w_hidden)")
    deltas = []
    for h_idx, h in enumerate(hidden_outs):
        acc = 0.0
        for d, row in zip(output_deltas, w_hidden_used):
            acc += d * row[h_idx]
        deltas.append(acc * h * (1.0 - h))
    return tuple(deltas)


def _forward_pass(weights: ModelWeights, inp: Sequence[float]):
    hidden_out = tuple(sigmoid(x) for x in forward_layer(inp, weights.w_input))
    output_out = tuple(sigmoid(x) for x in forward_layer(hidden_out, weights.w_hidden))
    return hidden_out, output_out


def train_epoch(
    sample: Sample, weights: ModelWeights, mode: GradientMode
) -> tuple[tuple[float, ...], ModelWeights]:
    """One forward + backward pass; returns (output deltas, updated weights)."""
    hidden_out, output_out = _forward_pass(weights, sample.input)
    deltas_out = output_error(output_out, sample.target)
    w_hidden_new = backprop_layer(hidden_out, deltas_out, weights.w_hidden)
    if mode is GradientMode.CHAINED:
        deltas_hidden = hidden_error(hidden_out, deltas_out, w_hidden_new)
    else:
        deltas_hidden = hidden_error(hidden_out, deltas_out, weights.w_hidden)
    w_input_new = backprop_layer(sample.input, deltas_hidden, weights.w_input)
    return deltas_out, ModelWeights(w_input=w_input_new, w_hidden=w_hidden_new)


def gradient(weights: ModelWeights, sample: Sample) -> Gradient:
    """Exact gradient of E = 1/2 sum_k (o_k - t_k)^2 w.r.t. every weight."""
    hidden_out, output_out = _forward_pass(weights, sample.input)
    deltas_out = output_error(output_out, sample.target)
    deltas_hidden = hidden_error(hidden_out, deltas_out, weights.w_hidden)
    g_hidden = tuple(
        tuple(d * i for i in (*hidden_out, 1.0)) for d in deltas_out
    )
    g_input = tuple(
        tuple(d * i for i in (*sample.input, 1.0)) for d in deltas_hidden
    )
    return Gradient(w_input=g_input, w_hidden=g_hidden)


def train_batch(
    samples: Iterable[Sample], weights: ModelWeights, mode: GradientMode
) -> tuple[list[tuple[float, ...]], ModelWeights]:
    """Sequential per-sample training, threading weights through the batch.

    Per-sample output deltas come back in input order.  An empty batch
    returns the weights unchanged.
    """
    errors: list[tuple[float, ...]] = []
    w = weights
    for s in samples:
        e, w = train_epoch(s, w, mode)
        errors.append(e)
    return errors, w


def mse(weights: ModelWeights, samples: Sequence[Sample]) -> float:
    """Mean squared error over samples and output neurons; forward pass only.

    The squared errors are summed with ``math.fsum`` (exact accumulation), so
    the result is literally invariant under sample permutation.
    """
    if not samples:
        raise ValueError("mse requires at least one sample")
    terms = []
    for s in samples:
        _, out = _forward_pass(weights, s.input)
        for o, t in zip(out, s.target):
            d = o - t
            terms.append(d * d)
    return math.fsum(terms) / (len(samples) * N_OUTPUT)
