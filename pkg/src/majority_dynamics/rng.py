"""Counter-based randomness for tie-breaking.

Tie bits must be a pure function of (seed, round, node) so that the
synchronous engine, the lazy path-at-a-time scheduler and any batched
runner consume identical randomness regardless of evaluation order.
The generator is the splitmix64 output function applied twice.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

_MASK64 = (1 << 64) - 1
GOLDEN64 = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB
_INV53 = 1.0 / 9007199254740992.0  # 2**-53


def mix64(x: int) -> int:
    """splitmix64 finalizer on a 64-bit integer."""
    x &= _MASK64
    x = ((x ^ (x >> 30)) * _MIX1) & _MASK64
    x = ((x ^ (x >> 27)) * _MIX2) & _MASK64
    return x ^ (x >> 31)


def derive_seed(master: int, *indices: int) -> int:
    """Derive an independent 64-bit stream seed from a master seed and indices.

    Pure function of its arguments; used to give every experiment point and
    trial its own reproducible stream.
    """
    h = mix64(master)
    for ix in indices:
        h = mix64((h + (ix + 1) * GOLDEN64) & _MASK64)
    return h


@dataclass(frozen=True)
class TieRng:
    """Per-(round, node) fair-coin source keyed by a single seed.

    ``uniform(t, v)`` is in [0, 1) and depends only on (seed, t, v), never on
    call order, so two schedulers that visit the same tied nodes in a round
    resolve them identically.
    """

    seed: int

    def uniform(self, t: int, v: int) -> float:
        a = mix64((self.seed + t * GOLDEN64) & _MASK64)
        h = mix64((a + v * GOLDEN64) & _MASK64)
        return (h >> 11) * _INV53

    def blue(self, t: int, v: int, q: float = 0.5) -> bool:
        """Tie resolution: blue with probability q."""
        return self.uniform(t, v) < q


def tie_uniform_array(seed: int, t: int, n: int) -> np.ndarray:
    """Vectorized ``TieRng(seed).uniform(t, v)`` for v = 0..n-1."""
    with np.errstate(over="ignore"):
        g = np.uint64(GOLDEN64)
        a = np.uint64(mix64((seed + t * GOLDEN64) & _MASK64))
        x = a + np.arange(n, dtype=np.uint64) * g
        x = (x ^ (x >> np.uint64(30))) * np.uint64(_MIX1)
        x = (x ^ (x >> np.uint64(27))) * np.uint64(_MIX2)
        x = x ^ (x >> np.uint64(31))
        return (x >> np.uint64(11)).astype(np.float64) * _INV53


def tie_uniform_matrix(seeds: np.ndarray, t: int, n: int) -> np.ndarray:
    """Vectorized uniforms for many independent streams at once.

    Row j equals ``tie_uniform_array(seeds[j], t, n)``; used by batched
    trial runners so each batched trial matches its sequential twin.
    """
    with np.errstate(over="ignore"):
        g = np.uint64(GOLDEN64)
        a = np.asarray(seeds, dtype=np.uint64) + np.uint64(t * GOLDEN64 & _MASK64)
        a = (a ^ (a >> np.uint64(30))) * np.uint64(_MIX1)
        a = (a ^ (a >> np.uint64(27))) * np.uint64(_MIX2)
        a = a ^ (a >> np.uint64(31))
        x = a[:, None] + np.arange(n, dtype=np.uint64)[None, :] * g
        x = (x ^ (x >> np.uint64(30))) * np.uint64(_MIX1)
        x = (x ^ (x >> np.uint64(27))) * np.uint64(_MIX2)
        x = x ^ (x >> np.uint64(31))
        return (x >> np.uint64(11)).astype(np.float64) * _INV53
