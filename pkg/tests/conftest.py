"""Shared helpers for the test suite."""

from __future__ import annotations

import random
import struct

import pytest

from fedsim.ann import ModelWeights, Sample


def rand_weights(rnd: random.Random, lo: float = -1.0, hi: float = 1.0) -> ModelWeights:
    return ModelWeights.from_flat([rnd.uniform(lo, hi) for _ in range(17)])


def rand_sample(rnd: random.Random) -> Sample:
    return Sample(
        input=(rnd.random(), rnd.random()),
        target=(rnd.random(), rnd.random()),
    )


def bits(x: float) -> bytes:
    return struct.pack("<d", x)


def weight_bits(w: ModelWeights) -> bytes:
    return struct.pack("<17d", *w.flat())


def assert_weights_identical(a: ModelWeights, b: ModelWeights) -> None:
    """Bitwise equality, distinguishing 0.0 from -0.0 and failing on NaN."""
    assert weight_bits(a) == weight_bits(b)


@pytest.fixture
def rnd() -> random.Random:
    return random.Random(0xFED51)
