"""Fast RMM-on-cycle runner used by the Monte-Carlo experiment harness.

Simulating to absorption takes ~n^2 rounds, most of which the coloring spends
as one monochromatic run in an otherwise alternating sea.  The kernel runs
bit-packed synchronous rounds while several runs exist and switches to an
exact O(1)-per-round reduction once a single run remains: only the two run
endpoints are tied, so the round is two coin bits that move the endpoints and
nudge the blue count by -1/0/+1.  Single-run states are closed under the
update rule (the run shrinks, grows, flips color in place when it would
vanish on an odd cycle, or yields the alternating pair on an even one), so
the switch is one-way and bit-exact.

Randomness: fair tie coins only (q = 1/2).  The coin for node v in round t is
bit (v mod 64) of splitmix64(splitmix64(seed + t*GOLDEN) + (v >> 6)*GOLDEN),
a pure function of (seed, t, v).  ``rmm_cycle_reference`` is a plain numpy
twin of the same convention used to validate the kernel bit for bit.
"""

from __future__ import annotations

import numpy as np
from numba import njit, prange

U64 = np.uint64
_GOLDEN = U64(0x9E3779B97F4A7C15)
_M1 = U64(0xBF58476D1CE4E5B9)
_M2 = U64(0x94D049BB133111EB)
_ONES = U64(0xFFFFFFFFFFFFFFFF)

# outcome codes
WHITE, BLUE, BLINKING, CAPPED = 0, 1, 2, 3

_DETECT_EVERY = 16  # rounds between single-run checks in packed mode


@njit(cache=True, inline="always")
def _mix64(x):
    x = (x ^ (x >> U64(30))) * _M1
    x = (x ^ (x >> U64(27))) * _M2
    return x ^ (x >> U64(31))


@njit(cache=True, inline="always")
def _popcount64(x):
    x = x - ((x >> U64(1)) & U64(0x5555555555555555))
    x = (x & U64(0x3333333333333333)) + ((x >> U64(2)) & U64(0x3333333333333333))
    x = (x + (x >> U64(4))) & U64(0x0F0F0F0F0F0F0F0F)
    return (x * U64(0x0101010101010101)) >> U64(56)


@njit(cache=True)
def _pack(colors, words):
    n = colors.shape[0]
    for k in range(words.shape[0]):
        words[k] = U64(0)
    for v in range(n):
        if colors[v]:
            words[v >> 6] |= U64(1) << U64(v & 63)


@njit(cache=True)
def _next_rotated(x, xs, n, w, r):
    """xs bit v = x bit (v+1 mod n); junk bits of the last word stay zero."""
    for k in range(w - 1):
        xs[k] = (x[k] >> U64(1)) | (x[k + 1] << U64(63))
    last = x[w - 1] >> U64(1)
    last |= (x[0] & U64(1)) << U64(r - 1)
    if r < 64:
        last &= (U64(1) << U64(r)) - U64(1)
    xs[w - 1] = last


@njit(cache=True)
def _run_cycle(x, n, seed, max_rounds):
    """Run packed RMM to absorption. Returns (outcome, rounds)."""
    w = (n + 63) // 64
    r = n - 64 * (w - 1)
    lastmask = _ONES if r == 64 else (U64(1) << U64(r)) - U64(1)
    xs = np.empty(w, U64)
    newx = np.empty(w, U64)
    t = 0
    a = np.int64(-1)  # single-run endpoints once found
    c = np.int64(-1)
    while True:
        # classify the current configuration
        or_acc = U64(0)
        blue_acc = U64(0)
        alt_acc = U64(0)
        _next_rotated(x, xs, n, w, r)
        for k in range(w):
            fm = lastmask if k == w - 1 else _ONES
            or_acc |= x[k]
            blue_acc |= x[k] ^ fm
            alt_acc |= (x[k] ^ xs[k]) ^ fm
        if or_acc == U64(0):
            return WHITE, t
        if blue_acc == U64(0):
            return BLUE, t
        if alt_acc == U64(0):
            return BLINKING, t
        if t >= max_rounds:
            return CAPPED, t

        # single-run detection: exactly one boundary->interior transition
        if t % _DETECT_EVERY == 0:
            nz_words = 0
            sw = U64(0)
            kstar = -1
            # e bit v = boundary edge (v, v+1); run-start bit v requires
            # edge v interior and edge v-1 boundary
            for k in range(w):
                fm = lastmask if k == w - 1 else _ONES
                e = (x[k] ^ xs[k]) & fm
                # previous-edge word: e shifted up with wraparound seam
                if k == 0:
                    em1 = x[w - 1] ^ xs[w - 1]
                    carry = (em1 >> U64(r - 1)) & U64(1)
                else:
                    eprev_src = x[k - 1] ^ xs[k - 1]
                    carry = eprev_src >> U64(63)
                ecur = x[k] ^ xs[k]
                eshift = ((ecur << U64(1)) | carry) & fm
                s = (~e) & eshift & fm
                if s != U64(0):
                    nz_words += 1
                    sw = s
                    kstar = k
            if nz_words == 1 and (sw & (sw - U64(1))) == U64(0):
                # locate the run and switch to the endpoint walk
                j = 0
                while ((sw >> U64(j)) & U64(1)) == U64(0):
                    j += 1
                a = np.int64(64 * kstar + j)
                m0 = np.int64(1)
                e = a
                while True:
                    u = e
                    v2 = e + 1 if e + 1 < n else 0
                    bu = (x[u >> 6] >> U64(u & 63)) & U64(1)
                    bv = (x[v2 >> 6] >> U64(v2 & 63)) & U64(1)
                    if bu != bv:
                        break
                    m0 += 1
                    e = e + 1 if e + 1 < n else 0
                c = a + m0 - 1
                if c >= n:
                    c -= n
                color = np.int64((x[a >> 6] >> U64(a & 63)) & U64(1))
                b = np.int64(0)
                for k in range(w):
                    b += np.int64(_popcount64(x[k]))
                return _run_scalar(n, seed, max_rounds, t, a, c, m0, color, b)

        # packed synchronous round
        at = _mix64(seed + U64(t) * _GOLDEN)
        for k in range(w):
            fm = lastmask if k == w - 1 else _ONES
            # left neighbor bits (v-1) and right neighbor bits (v+1)
            if k == 0:
                lw = (x[0] << U64(1)) | ((x[w - 1] >> U64(r - 1)) & U64(1))
            else:
                lw = (x[k] << U64(1)) | (x[k - 1] >> U64(63))
            rw = xs[k]
            tiedw = (lw ^ rw) & fm
            detw = lw & rw & fm
            if tiedw != U64(0):
                coin = _mix64(at + U64(k) * _GOLDEN)
                newx[k] = detw | (tiedw & coin)
            else:
                newx[k] = detw
        for k in range(w):
            x[k] = newx[k]
        t += 1


@njit(cache=True)
def _run_scalar(n, seed, max_rounds, t, a, c, m0, color, b):
    """Single-run endpoint walk; exact continuation of the packed process."""
    while t < max_rounds:
        at = _mix64(seed + U64(t) * _GOLDEN)
        bit_a = np.int64((_mix64(at + U64(a >> 6) * _GOLDEN) >> U64(a & 63)) & U64(1))
        bit_c = np.int64((_mix64(at + U64(c >> 6) * _GOLDEN) >> U64(c & 63)) & U64(1))
        t += 1
        b += bit_a + bit_c - 1
        fav_a = bit_a == color
        fav_c = bit_c == color
        new_m0 = m0 + (1 if fav_a else -1) + (1 if fav_c else -1)
        a = (a - 1 if fav_a else a + 1) % n
        c = (c + 1 if fav_c else c - 1) % n
        if new_m0 >= n:
            return (BLUE if color == 1 else WHITE), t
        if new_m0 == 0:
            # run of two lost both endpoints: same span, opposite color
            a, c = c, a
            color = 1 - color
            m0 = 2
        elif new_m0 == 1:
            return BLINKING, t  # even cycle only: alternating pair reached
        else:
            m0 = new_m0
    return CAPPED, t


@njit(cache=True)
def _run_one(colors, seed, max_rounds):
    n = colors.shape[0]
    w = (n + 63) // 64
    x = np.empty(w, U64)
    _pack(colors, x)
    return _run_cycle(x, n, seed, max_rounds)


@njit(cache=True, parallel=True)
def _run_batch(colors2d, seeds, max_rounds, outcomes, rounds):
    for j in prange(colors2d.shape[0]):
        o, t = _run_one(colors2d[j], seeds[j], max_rounds)
        outcomes[j] = o
        rounds[j] = t


def rmm_cycle_outcomes(
    colors2d: np.ndarray, seeds: np.ndarray, max_rounds: int | None = None
) -> tuple[np.ndarray, np.ndarray]:
    """Run RMM on the standard cycle to absorption for every trial row.

    Returns (outcomes, rounds) with outcome codes WHITE/BLUE/BLINKING/CAPPED.
    Fair tie coins only; trial j is a pure function of seeds[j].
    """
    colors2d = np.ascontiguousarray(colors2d, dtype=np.uint8)
    trials, n = colors2d.shape
    if n < 3:
        raise ValueError("cycle kernel needs n >= 3")
    if max_rounds is None:
        max_rounds = 64 * n * n + 100
    seeds = np.ascontiguousarray(seeds, dtype=np.uint64)
    outcomes = np.empty(trials, dtype=np.int8)
    rounds = np.empty(trials, dtype=np.int64)
    _run_batch(colors2d, seeds, np.int64(max_rounds), outcomes, rounds)
    return outcomes, rounds


def rmm_cycle_outcome(
    colors: np.ndarray, seed: int, max_rounds: int | None = None
) -> tuple[int, int]:
    """Single-trial version of :func:`rmm_cycle_outcomes`."""
    colors = np.ascontiguousarray(colors, dtype=np.uint8)
    if max_rounds is None:
        max_rounds = 64 * colors.shape[0] ** 2 + 100
    o, t = _run_one(colors, U64(seed), np.int64(max_rounds))
    return int(o), int(t)


# --- plain reference twin (tests) ---------------------------------------------

_MASK64 = (1 << 64) - 1
_PYGOLDEN = 0x9E3779B97F4A7C15


def _pymix(x: int) -> int:
    x &= _MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK64
    return x ^ (x >> 31)


def _coin_bit(seed: int, t: int, v: int) -> int:
    at = _pymix((seed + t * _PYGOLDEN) & _MASK64)
    word = _pymix((at + (v >> 6) * _PYGOLDEN) & _MASK64)
    return (word >> (v & 63)) & 1


def rmm_cycle_reference(
    colors: np.ndarray, seed: int, max_rounds: int
) -> tuple[int, int, np.ndarray]:
    """Slow per-node implementation of the kernel's exact semantics."""
    c = np.array(colors, dtype=np.uint8)
    n = len(c)
    t = 0
    while True:
        if c.max() == c.min():
            return (BLUE if c[0] else WHITE), t, c
        if np.all(c != np.roll(c, 1)):
            return BLINKING, t, c
        if t >= max_rounds:
            return CAPPED, t, c
        new = np.empty_like(c)
        for v in range(n):
            left = c[v - 1] if v > 0 else c[n - 1]
            right = c[v + 1] if v + 1 < n else c[0]
            if left == right:
                new[v] = left
            else:
                new[v] = _coin_bit(seed, t, v)
        c = new
        t += 1
