"""Seeded random streams shared by every component.

The generator is xoshiro256** (Blackman & Vigna) with splitmix64 state
initialization, chosen because both are trivially portable: plain 64-bit
integer arithmetic, so a worker in any language reproduces the exact stream.
Uniform doubles take the top 53 bits, ``(u64 >> 11) * 2**-53``, which is an
exact binary64 operation.  The normative description lives in PROTOCOL.md;
``fixtures/rng_stream.json`` carries golden vectors.
"""

from __future__ import annotations

_MASK64 = (1 << 64) - 1
_DOUBLE_SCALE = 2.0**-53


class SplitMix64:
    """Stateful splitmix64; used for seeding and for deriving sub-seeds."""

    def __init__(self, seed: int):
        self._state = seed & _MASK64

    def next_u64(self) -> int:
        self._state = (self._state + 0x9E3779B97F4A7C15) & _MASK64
        z = self._state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
        return z ^ (z >> 31)


def _rotl(x: int, k: int) -> int:
    return ((x << k) | (x >> (64 - k))) & _MASK64


class Xoshiro256StarStar:
    """xoshiro256** stream; the package-wide random source."""

    def __init__(self, seed: int):
        sm = SplitMix64(seed)
        self._s = [sm.next_u64() for _ in range(4)]

    @classmethod
    def from_state(cls, state: tuple[int, int, int, int]) -> "Xoshiro256StarStar":
        rng = cls.__new__(cls)
        rng._s = [w & _MASK64 for w in state]
        return rng

    def next_u64(self) -> int:
        s = self._s
        result = (_rotl((s[1] * 5) & _MASK64, 7) * 9) & _MASK64
        t = (s[1] << 17) & _MASK64
        s[2] ^= s[0]
        s[3] ^= s[1]
        s[1] ^= s[2]
        s[0] ^= s[3]
        s[2] ^= t
        s[3] = _rotl(s[3], 45)
        return result

    def uniform(self) -> float:
        """Uniform double in [0, 1), 53 bits of entropy."""
        return (self.next_u64() >> 11) * _DOUBLE_SCALE

    def randbelow(self, n: int) -> int:
        """Uniform integer in [0, n); n up to 2**32 keeps modulo bias negligible."""
        if n <= 0:
            raise ValueError("randbelow requires n >= 1")
        return self.next_u64() % n


def derive_streams(master_seed: int, n_clients: int) -> tuple[int, int, list[int]]:
    """Expand one experiment seed into (eval_seed, subset_seed, client_seeds).

    Derivation order is fixed so that concurrent and distributed runs hand the
    same seed to the same client id.
    """
    sm = SplitMix64(master_seed)
    eval_seed = sm.next_u64()
    subset_seed = sm.next_u64()
    client_seeds = [sm.next_u64() for _ in range(n_clients)]
    return eval_seed, subset_seed, client_seeds
