"""Federated SGD arithmetic: local full-batch steps and server aggregation.

Two client-side training semantics exist in this package and must not be
conflated:

* ``local_gradient_step`` takes ONE full-batch gradient step, with every
  per-sample gradient evaluated at the incoming weights.  Aggregating such
  steps over any partitioning of a dataset is algebraically identical to
  ``central_step`` on the union - the equivalence the acceptance suite
  machine-checks.
* The round engine's clients instead run ``ann.train_batch`` (sequential
  per-sample updates), which is what the reference formulation actually
  executes.  Both paths are exposed deliberately.

Aggregation computes the sample-count-weighted mean in exact rational
arithmetic and rounds once per entry.  That makes two stated invariants hold
literally, not just approximately: aggregating identical updates returns
them bit-for-bit, and every aggregated entry lies inside the min/max hull of
the client entries.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .ann import ModelWeights, N_WEIGHTS, Sample, gradient
from .rng import Xoshiro256StarStar


@dataclass(frozen=True)
class Partition:
    """One client's local dataset; must be nonempty."""

    samples: tuple[Sample, ...]

    def __post_init__(self):
        if not self.samples:
            raise ValueError("a partition must hold at least one sample")

    @property
    def size(self) -> int:
        return len(self.samples)


@dataclass(frozen=True)
class ClientUpdate:
    """A locally trained model plus the number of samples that trained it."""

    weights: ModelWeights
    sample_count: int

    def __post_init__(self):
        if self.sample_count < 1:
            raise ValueError("sample_count must be >= 1")


def _check_eta(eta: float) -> None:
    # 0 is admitted so the identity step stays testable; live experiment
    # configs restrict to (0, 1].
    if not 0.0 <= eta <= 1.0:
        raise ValueError("learning rate must lie in [0, 1]")


def _gradient_sum(w: ModelWeights, samples: Sequence[Sample]) -> list[float]:
    acc = [0.0] * N_WEIGHTS
    for s in samples:
        g = gradient(w, s).flat()
        for i in range(N_WEIGHTS):
            acc[i] += g[i]
    return acc


def local_gradient_step(w: ModelWeights, p: Partition, eta: float) -> ModelWeights:
    """w - (eta/|P|) * sum of per-sample gradients, all evaluated at w."""
    _check_eta(eta)
    gsum = _gradient_sum(w, p.samples)
    scale = eta / p.size
    return ModelWeights.from_flat(
        [wv - scale * g for wv, g in zip(w.flat(), gsum)]
    )


def central_step(w: ModelWeights, all_samples: Sequence[Sample], eta: float) -> ModelWeights:
    """The equivalent centralized update over the whole sample set."""
    _check_eta(eta)
    if not all_samples:
        raise ValueError("central_step requires at least one sample")
    gsum = _gradient_sum(w, all_samples)
    scale = eta / len(all_samples)
    return ModelWeights.from_flat(
        [wv - scale * g for wv, g in zip(w.flat(), gsum)]
    )


def aggregate(updates: Sequence[ClientUpdate]) -> ModelWeights:
    """Sample-count-weighted mean of client models, correctly rounded per entry."""
    if not updates:
        raise ValueError("aggregate requires at least one update")
    n = sum(u.sample_count for u in updates)
    flats = [u.weights.flat() for u in updates]
    out = []
    for i in range(N_WEIGHTS):
        acc = Fraction(0)
        for u, flat in zip(updates, flats):
            acc += u.sample_count * Fraction(flat[i])
        out.append(float(acc / n))
    return ModelWeights.from_flat(out)


def select_subset(
    client_ids: Sequence[int], k: int, rng: Xoshiro256StarStar
) -> list[int]:
    """Uniform k-subset without replacement; deterministic for a given stream.

    Implemented as a partial Fisher-Yates shuffle, so the output order is
    well-defined per seed but carries no semantic meaning.
    """
    if not 0 <= k <= len(client_ids):
        raise ValueError("subset size out of range")
    pool = list(client_ids)
    for i in range(k):
        j = i + rng.randbelow(len(pool) - i)
        pool[i], pool[j] = pool[j], pool[i]
    return pool[:k]
