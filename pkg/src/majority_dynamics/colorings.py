"""Two-color node colorings and the cycle-specific structure on them.

A coloring is a bit vector packed into a Python int (bit v set = node v is
blue), which doubles as the state index used by the exhaustive analyses:
state = sum of 2**v over blue v, node 0 in the least significant bit.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import UndefinedPartitionError

BLUE = 1
WHITE = 0

__all__ = [
    "Coloring",
    "PathPartition",
    "p_random_coloring",
    "exact_density_coloring",
    "path_partition",
    "longest_alternating_run",
    "is_stable",
    "solitary_nodes",
    "extreme_tight_coloring",
    "k_alternating_coloring",
    "coloring_to_json",
    "coloring_from_json",
]


@dataclass(frozen=True)
class Coloring:
    """Immutable blue/white coloring of n nodes."""

    n: int
    bits: int

    def __post_init__(self):
        if self.bits < 0 or self.bits >> self.n:
            raise ValueError("bits outside range for n nodes")

    @staticmethod
    def from_string(s: str) -> "Coloring":
        """Parse a 'b'/'w' string ('B'/'W' and '1'/'0' also accepted), node 0 first."""
        bits = 0
        for i, ch in enumerate(s):
            if ch in "bB1":
                bits |= 1 << i
            elif ch not in "wW0":
                raise ValueError(f"bad color character {ch!r}")
        return Coloring(len(s), bits)

    @staticmethod
    def from_blue(n: int, blue: "list[int] | set[int] | tuple[int, ...]") -> "Coloring":
        bits = 0
        for v in blue:
            if not (0 <= v < n):
                raise ValueError(f"node {v} out of range")
            bits |= 1 << v
        return Coloring(n, bits)

    @staticmethod
    def all_blue(n: int) -> "Coloring":
        return Coloring(n, (1 << n) - 1)

    @staticmethod
    def all_white(n: int) -> "Coloring":
        return Coloring(n, 0)

    @staticmethod
    def from_array(arr: np.ndarray) -> "Coloring":
        bits = 0
        for i, x in enumerate(arr):
            if x:
                bits |= 1 << i
        return Coloring(len(arr), bits)

    @cached_property
    def blue_count(self) -> int:
        return self.bits.bit_count()

    def color(self, v: int) -> int:
        return (self.bits >> v) & 1

    def is_blue(self, v: int) -> bool:
        return bool((self.bits >> v) & 1)

    def is_monochromatic(self) -> bool:
        return self.bits == 0 or self.bits == (1 << self.n) - 1

    def invert(self) -> "Coloring":
        return Coloring(self.n, self.bits ^ ((1 << self.n) - 1))

    def to_array(self) -> np.ndarray:
        out = np.zeros(self.n, dtype=np.uint8)
        bits = self.bits
        while bits:
            low = bits & -bits
            out[low.bit_length() - 1] = 1
            bits ^= low
        return out

    def to_string(self) -> str:
        return "".join("b" if self.is_blue(v) else "w" for v in range(self.n))

    def __str__(self) -> str:
        return self.to_string()


@dataclass(frozen=True)
class PathPartition:
    """Decomposition of a cycle coloring into maximal monochromatic runs
    (length >= 2) and the maximal alternating paths between them.

    mono_runs: (start, length, color) triples; alt_runs: (start, length)
    pairs with length >= 1.  Together they cover all n positions.  Index
    arithmetic is cyclic; a run may wrap past position n-1.
    """

    n: int
    mono_runs: tuple[tuple[int, int, int], ...]
    alt_runs: tuple[tuple[int, int], ...]

    def reconstruct(self) -> "Coloring":
        """Rebuild the coloring the partition was computed from.

        An alternating path's first node carries the color opposite to the
        monochromatic run it follows, which pins down the whole path.
        """
        colors: list[int | None] = [None] * self.n
        for start, length, color in self.mono_runs:
            for k in range(length):
                colors[(start + k) % self.n] = color
        for start, length in self.alt_runs:
            prev = colors[(start - 1) % self.n]
            if prev is None:
                raise ValueError("alternating run not preceded by a monochromatic run")
            for k in range(length):
                colors[(start + k) % self.n] = (prev + 1 + k) % 2
        if any(col is None for col in colors):
            raise ValueError("partition does not cover the cycle")
        return Coloring.from_array(np.array(colors, dtype=np.uint8))


def p_random_coloring(n: int, p: float, seed: int) -> Coloring:
    """Each node blue independently with probability p (node i uses draw i)."""
    if not (0.0 <= p <= 1.0):
        raise ValueError(f"p must be in [0,1], got {p}")
    u = np.random.default_rng(seed).random(n)
    return Coloring.from_array((u < p).astype(np.uint8))


def exact_density_coloring(n: int, k: int, seed: int) -> Coloring:
    """Exactly k blue nodes at uniformly random positions."""
    if not (0 <= k <= n):
        raise ValueError(f"blue count {k} out of range for n={n}")
    rng = np.random.default_rng(seed)
    idx = rng.choice(n, size=k, replace=False)
    return Coloring.from_blue(n, [int(i) for i in idx])


def _cyclic_runs(c: Coloring) -> list[tuple[int, int, int]]:
    """Maximal same-color runs (start, length, color) in cyclic order."""
    n = c.n
    runs = []
    start = 0
    # rotate so position 0 starts a run (unless monochromatic)
    while start < n and c.color((start - 1) % n) == c.color(start):
        start += 1
    if start == n:
        return [(0, n, c.color(0))]
    i = start
    total = 0
    while total < n:
        color = c.color(i % n)
        length = 1
        while length < n and c.color((i + length) % n) == color:
            length += 1
        runs.append((i % n, length, color))
        i += length
        total += length
    return runs


def path_partition(c: Coloring) -> PathPartition | None:
    """Path partition of a cycle coloring, or None for an alternating coloring.

    Monochromatic runs are the maximal same-color runs of length >= 2; the
    remaining positions form the maximal alternating paths between them.
    """
    runs = _cyclic_runs(c)
    if all(length == 1 for _, length, _ in runs):
        return None  # alternating coloring of an even cycle
    n = c.n
    mono = []
    alt = []
    k = len(runs)
    i = 0
    while i < k:
        start, length, color = runs[i]
        if length >= 2:
            mono.append((start, length, color))
            i += 1
        else:
            j = i
            alt_len = 0
            while j < k and runs[j][1] == 1:
                alt_len += 1
                j += 1
            alt.append((start, alt_len))
            i = j
    # runs list begins at a run boundary; a leading block of length-1 runs
    # can only occur mid-partition because _cyclic_runs starts on a maximal
    # run boundary, so no wrap-around merge of alt segments is needed here
    # unless the first and last runs are both singletons.
    if len(alt) >= 2 and runs[0][1] == 1 and runs[-1][1] == 1:
        first_start, first_len = alt[0]
        last_start, last_len = alt[-1]
        if (last_start + last_len) % n == first_start:
            alt = alt[1:-1] + [(last_start, last_len + first_len)]
    return PathPartition(n, tuple(mono), tuple(alt))


def longest_alternating_run(c: Coloring) -> int:
    """Length of the longest alternating path in the partition (0 if none)."""
    part = path_partition(c)
    if part is None:
        raise UndefinedPartitionError("alternating coloring has no path partition")
    if not part.alt_runs:
        return 0
    return max(length for _, length in part.alt_runs)


def solitary_nodes(c: Coloring) -> frozenset[int]:
    """Cycle nodes whose both neighbors carry the opposite color."""
    n = c.n
    out = set()
    for v in range(n):
        left = c.color((v - 1) % n)
        right = c.color((v + 1) % n)
        if left != c.color(v) and right != c.color(v):
            out.add(v)
    return frozenset(out)


def is_stable(g, c: Coloring, model: str) -> bool:
    """True iff one application of the model deterministically reproduces c.

    For "rmm" this additionally requires that no node is tied.
    """
    from .dynamics import mm_step, tied_nodes

    model = model.lower()
    if model not in ("mm", "rmm"):
        raise ValueError(f"unknown model {model!r}")
    if model == "rmm" and tied_nodes(g, c):
        return False
    return mm_step(g, c) == c


def extreme_tight_coloring(n: int) -> Coloring:
    """White run of length 2 (odd n) or 3 (even n), remainder alternating.

    The slowest-stabilizing cycle coloring for the majority rule: its longest
    alternating path has length n-2 (odd n) or n-3 (even n).
    """
    if n < 5:
        raise ValueError(f"needs n >= 5, got {n}")
    w = 2 if n % 2 == 1 else 3
    bits = 0
    for i in range(w, n):
        if (i - w) % 2 == 0:
            bits |= 1 << i
    return Coloring(n, bits)


def k_alternating_coloring(n: int, k: int) -> Coloring:
    """Blue path of length n-k followed by an alternating path of length k.

    k must be odd with 5 <= k <= n-4; the alternating part starts and ends
    white, so the blue count is n - k + k//2.
    """
    if k % 2 == 0:
        raise ValueError(f"k must be odd, got {k}")
    if not (5 <= k <= n - 4):
        raise ValueError(f"need 5 <= k <= n-4, got k={k}, n={n}")
    bits = (1 << (n - k)) - 1
    for i in range(n - k, n):
        if (i - (n - k)) % 2 == 1:
            bits |= 1 << i
    return Coloring(n, bits)


# --- serialization ---------------------------------------------------------


def coloring_to_json(c: Coloring) -> str:
    return json.dumps({"n": c.n, "blue": [v for v in range(c.n) if c.is_blue(v)]})


def coloring_from_json(text: str) -> Coloring:
    obj = json.loads(text)
    if not isinstance(obj, dict) or "n" not in obj or "blue" not in obj:
        raise ValueError("coloring JSON must be an object with 'n' and 'blue'")
    return Coloring.from_blue(int(obj["n"]), [int(v) for v in obj["blue"]])
