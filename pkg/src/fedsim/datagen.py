"""Synthetic data and initial weights.

Samples are drawn as (x, y) uniform on [0, 1)^2 with targets
(sqrt(x*y), fourth-root(x*y)).  The fourth root is computed as
``sqrt(sqrt(z))`` - two correctly-rounded square roots - because ``pow`` is
not correctly rounded and would break bit-parity with workers in other
languages.  Each sample consumes exactly two RNG draws, x first.

The fixed initial weight set below is repository-chosen (evenly spaced small
values); it exists so that every documented run is reproducible without
carrying a seed around.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .ann import ModelWeights, Sample
from .rng import Xoshiro256StarStar

DEFAULT_SAMPLES_PER_ROUND = 250

# Canonical order: w_input rows then w_hidden rows, bias last in each row.
FIXED_INITIAL_WEIGHTS = (
    -0.40, -0.35, -0.30,
    -0.25, -0.20, -0.15,
    -0.10, -0.05, 0.00,
    0.05, 0.10, 0.15, 0.20,
    0.25, 0.30, 0.35, 0.40,
)


def gen_sample(rng: Xoshiro256StarStar) -> Sample:
    """Draw one training example; consumes two uniforms (x then y)."""
    x = rng.uniform()
    y = rng.uniform()
    z = x * y
    t1 = math.sqrt(z)
    t2 = math.sqrt(t1)
    return Sample(input=(x, y), target=(t1, t2))


def gen_batch(rng: Xoshiro256StarStar, n: int = DEFAULT_SAMPLES_PER_ROUND) -> list[Sample]:
    if n < 0:
        raise ValueError("batch size must be >= 0")
    return [gen_sample(rng) for _ in range(n)]


@dataclass(frozen=True)
class Fixed:
    """Use the documented constant weight set."""


@dataclass(frozen=True)
class Seeded:
    """Draw small random initial weights from the given seed."""

    seed: int


WeightInit = Fixed | Seeded


def initial_weights(init: WeightInit) -> ModelWeights:
    if isinstance(init, Fixed):
        return fixed_weights()
    return seeded_weights(init.seed)


def fixed_weights() -> ModelWeights:
    """The documented constant starting point used by all reference runs."""
    return ModelWeights.from_flat(FIXED_INITIAL_WEIGHTS)


def seeded_weights(seed: int) -> ModelWeights:
    """17 weights drawn uniform from the open interval (-0.5, 0.5)."""
    rng = Xoshiro256StarStar(seed)
    values = []
    while len(values) < len(FIXED_INITIAL_WEIGHTS):
        u = rng.uniform()
        if u == 0.0:  # keep the interval open at -0.5
            continue
        values.append(u - 0.5)
    return ModelWeights.from_flat(values)


def dump_samples_csv(samples: Sequence[Sample], path: str) -> None:
    """One `x,y,t1,t2` line per sample; 17 significant digits round-trip binary64."""
    with open(path, "w", encoding="ascii") as fh:
        fh.write("x,y,t1,t2\n")
        for s in samples:
            fh.write(
                f"{s.input[0]:.17g},{s.input[1]:.17g},"
                f"{s.target[0]:.17g},{s.target[1]:.17g}\n"
            )


def load_samples_csv(path: str) -> list[Sample]:
    samples = []
    with open(path, "r", encoding="ascii") as fh:
        header = fh.readline().strip()
        if header != "x,y,t1,t2":
            raise ValueError(f"unexpected dataset header: {header!r}")
        for line in fh:
            line = line.strip()
            if not line:
                continue
            x, y, t1, t2 = (float(v) for v in line.split(","))
            samples.append(Sample(input=(x, y), target=(t1, t2)))
    return samples
