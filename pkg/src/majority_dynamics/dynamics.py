"""Synchronous update engines for the majority model (MM) and its random
tie-breaking variant (RMM), with stabilization and periodicity detection.

Terminology for run outcomes:
  blue / white        monochromatic fixed point
  fixed-coloring      any other fixed point
  blinking            the pair of alternating colorings of an even cycle
  period-two-cycle    any other 2-cycle (MM on general graphs)
  undetermined        RMM on a non-cycle graph hit the round cap
  cap-exceeded        the cap bound a run that detection would have finished
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .colorings import Coloring, path_partition
from .errors import UndefinedPartitionError
from .graphs import Graph
from .rng import TieRng, tie_uniform_array, tie_uniform_matrix

__all__ = [
    "RunResult",
    "mm_step",
    "rmm_step",
    "tied_nodes",
    "lazy_rmm_pass",
    "run",
    "mm_cycle_step_bits",
    "mm_step_bits",
    "tied_bits",
]


# --- array-level primitives --------------------------------------------------


def _blue_neighbor_counts(g: Graph, colors: np.ndarray) -> np.ndarray:
    src, dst = g.arcs
    return np.bincount(src, weights=colors[dst], minlength=g.n)


def _mm_step_array(g: Graph, colors: np.ndarray) -> np.ndarray:
    nb = _blue_neighbor_counts(g, colors)
    twice = 2.0 * nb
    deg = g.degrees
    return np.where(twice > deg, 1, np.where(twice < deg, 0, colors)).astype(np.uint8)


def _rmm_step_array(
    g: Graph, colors: np.ndarray, seed: int, t: int, q: float
) -> np.ndarray:
    nb = _blue_neighbor_counts(g, colors)
    twice = 2.0 * nb
    deg = g.degrees
    new = np.where(twice > deg, 1, 0).astype(np.uint8)
    tied = twice == deg
    if tied.any():
        u = tie_uniform_array(seed, t, g.n)
        new[tied] = (u[tied] < q).astype(np.uint8)
    return new


def _is_proper_two_coloring(g: Graph, colors: np.ndarray) -> bool:
    src, dst = g.arcs
    return bool(np.all(colors[src] != colors[dst]))


# --- public single-step API ---------------------------------------------------


def mm_step(g: Graph, c: Coloring) -> Coloring:
    """One synchronous majority round; ties keep the node's own color."""
    return Coloring.from_array(_mm_step_array(g, c.to_array()))


def rmm_step(g: Graph, c: Coloring, rng: TieRng, t: int, q: float = 0.5) -> Coloring:
    """One synchronous majority round; tied nodes take the (t, node)-keyed coin."""
    return Coloring.from_array(_rmm_step_array(g, c.to_array(), rng.seed, t, q))


def tied_nodes(g: Graph, c: Coloring) -> frozenset[int]:
    """Nodes whose neighborhood splits evenly between the two colors."""
    colors = c.to_array()
    nb = _blue_neighbor_counts(g, colors)
    return frozenset(int(v) for v in np.nonzero(2.0 * nb == g.degrees)[0])


def lazy_rmm_pass(g: Graph, c: Coloring, rng: TieRng, t: int, q: float = 0.5) -> Coloring:
    """One RMM round on a cycle executed path by path.

    Builds the extended alternating paths (each maximal alternating stretch
    between monochromatic runs, including empty ones, plus the adjacent
    monochromatic endpoint on each side), updates every path into a buffer,
    and commits once all paths are processed.  With the counter-keyed tie
    source this reproduces ``rmm_step`` exactly.
    """
    if not g.is_standard_cycle:
        raise ValueError("lazy pass requires a cycle with standard labeling")
    part = path_partition(c)
    if part is None:
        raise UndefinedPartitionError("alternating coloring: no extended paths exist")
    n = g.n
    mono = part.mono_runs
    buffer: dict[int, int] = {}
    k = len(mono)
    for i in range(k):
        start_i, len_i, _ = mono[i]
        end_i = (start_i + len_i - 1) % n
        next_start = mono[(i + 1) % k][0]
        gap = (next_start - end_i - 1) % n
        if k == 1 and gap == 0:
            break  # single run covering the whole cycle: nothing to update
        path = [(end_i + j) % n for j in range(gap + 2)]
        for v in path:
            left = c.color((v - 1) % n)
            right = c.color((v + 1) % n)
            if left == right:
                buffer[v] = left
            else:
                buffer[v] = 1 if rng.uniform(t, v) < q else 0
    bits = c.bits
    for v, color in buffer.items():
        if color:
            bits |= 1 << v
        else:
            bits &= ~(1 << v)
    return Coloring(n, bits)


# --- run loop -----------------------------------------------------------------


@dataclass(frozen=True)
class RunResult:
    """Outcome of a dynamics run.

    ``rounds`` is the first round index whose configuration lies on the
    eventual cycle (period 1 or 2), or None when the cap was hit first.
    ``final`` is that configuration; for period-two outcomes ``partner``
    is the other configuration of the 2-cycle.
    """

    rounds: int | None
    outcome: str
    final: Coloring
    partner: Coloring | None = None
    trace_len: int = 0
    blue_counts: tuple[int, ...] | None = None

    def to_json(self) -> str:
        obj = {
            "rounds": self.rounds,
            "outcome": self.outcome,
            "final_blue": self.final.blue_count,
            "n": self.final.n,
            "trace_len": self.trace_len,
        }
        if self.blue_counts is not None:
            obj["blue_counts"] = list(self.blue_counts)
        return json.dumps(obj)


def _default_cap(model: str, g: Graph) -> int:
    if model == "rmm" and g.is_cycle:
        return 64 * g.n * g.n + 100
    return 4 * g.m + 8


def run(
    model: str,
    g: Graph,
    c0: Coloring,
    max_rounds: int | None = None,
    rng: TieRng | int | None = None,
    q: float = 0.5,
    record_blue_counts: bool = False,
    trace_path: str | None = None,
) -> RunResult:
    """Run the dynamics until the eventual cycle is entered or the cap binds.

    MM stops on a fixed point or 2-cycle.  RMM on a cycle stops on a
    monochromatic or alternating (blinking) configuration; RMM elsewhere
    runs to the cap unless a monochromatic fixed point is hit.
    """
    model = model.lower()
    if model not in ("mm", "rmm"):
        raise ValueError(f"unknown model {model!r}")
    if c0.n != g.n:
        raise ValueError("coloring size does not match graph")
    if model == "rmm":
        if rng is None:
            raise ValueError("rmm requires a tie-breaking seed")
        if isinstance(rng, int):
            rng = TieRng(rng)
    if max_rounds is None:
        max_rounds = _default_cap(model, g)

    on_cycle = g.is_cycle
    cur = c0.to_array()
    prev: np.ndarray | None = None
    blue_counts: list[int] = []
    trace = open(trace_path, "w") if trace_path else None

    def record(t: int, arr: np.ndarray) -> None:
        b = int(arr.sum())
        if record_blue_counts:
            blue_counts.append(b)
        if trace is not None:
            line = {"t": t, "blue": b, "coloring": Coloring.from_array(arr).to_string()}
            trace.write(json.dumps(line) + "\n")

    def finish(rounds, outcome, final_arr, partner_arr, t):
        if trace is not None:
            trace.close()
        return RunResult(
            rounds=rounds,
            outcome=outcome,
            final=Coloring.from_array(final_arr),
            partner=Coloring.from_array(partner_arr) if partner_arr is not None else None,
            trace_len=t,
            blue_counts=tuple(blue_counts) if record_blue_counts else None,
        )

    t = 0
    record(0, cur)
    while True:
        # classify the current configuration before stepping
        if cur.max() == cur.min():
            return finish(t, "blue" if cur[0] else "white", cur, None, t)
        if on_cycle and _is_proper_two_coloring(g, cur):
            return finish(t, "blinking", cur, 1 - cur, t)
        if t >= max_rounds:
            outcome = "undetermined" if (model == "rmm" and not on_cycle) else "cap-exceeded"
            return finish(None, outcome, cur, None, t)
        if model == "mm":
            new = _mm_step_array(g, cur)
        else:
            new = _rmm_step_array(g, cur, rng.seed, t, q)
        t += 1
        record(t, new)
        if model == "mm":
            if np.array_equal(new, cur):
                return finish(t - 1, "fixed-coloring", cur, None, t)
            if prev is not None and np.array_equal(new, prev):
                return finish(t - 2, "period-two-cycle", prev, cur, t)
        prev = cur
        cur = new


# --- integer-state fast paths (exhaustive analyses) ---------------------------


def mm_cycle_step_bits(bits: int, n: int) -> int:
    """One MM round on the standard cycle, coloring packed as an int."""
    mask = (1 << n) - 1
    left = ((bits << 1) | (bits >> (n - 1))) & mask
    right = ((bits >> 1) | ((bits & 1) << (n - 1))) & mask
    return (left & right) | ((left ^ right) & bits)


def mm_step_bits(g: Graph, bits: int) -> int:
    """One MM round on any graph, coloring packed as an int."""
    masks = g.neighbor_masks
    new = 0
    for v in range(g.n):
        nb = (bits & masks[v]).bit_count()
        d = len(g.adj[v])
        if 2 * nb > d:
            new |= 1 << v
        elif 2 * nb == d:
            new |= bits & (1 << v)
    return new


def tied_bits(g: Graph, bits: int) -> int:
    """Bitmask of tied nodes for a packed coloring."""
    masks = g.neighbor_masks
    out = 0
    for v in range(g.n):
        if 2 * (bits & masks[v]).bit_count() == len(g.adj[v]):
            out |= 1 << v
    return out


# --- batched cycle engines (experiment harness) --------------------------------


def mm_cycle_final_batch(
    colors: np.ndarray, max_rounds: int
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Run MM on the standard cycle for every row of ``colors`` (trials x n).

    Returns (finals, rounds, capped): per-trial final configuration, rounds
    until the eventual cycle, and a flag for trials that hit the cap.  A
    trial that reaches an alternating pair reports its first alternating
    round (the blinking configuration counts as stabilized).
    """
    cur = colors.astype(np.uint8).copy()
    trials, _ = cur.shape
    rounds = np.full(trials, -1, dtype=np.int64)
    idx = np.arange(trials)  # trials still running
    for t in range(max_rounds + 1):
        if idx.size == 0:
            break
        sub = cur[idx]
        left = np.roll(sub, 1, axis=1)
        right = np.roll(sub, -1, axis=1)
        new = (left & right) | ((left ^ right) & sub)
        # on the eventual cycle now: fixed point, or alternating (period two)
        fixed = (new == sub).all(axis=1)
        alt = (left != sub).all(axis=1)
        done = fixed | alt
        if done.any():
            rounds[idx[done]] = t
            idx = idx[~done]
            new = new[~done]
        if idx.size:
            cur[idx] = new
    capped = rounds < 0
    return cur, rounds, capped


def rmm_cycle_blue_series_batch(
    c0: np.ndarray, seeds: np.ndarray, t_max: int, q: float = 0.5
) -> np.ndarray:
    """Blue-count series b_0..b_{t_max} for many RMM cycle trials at once.

    Row j evolves with the tie stream of ``seeds[j]``, matching a sequential
    ``run`` with the same seed round for round.
    """
    cur = c0.astype(np.uint8).copy()
    trials, n = cur.shape
    out = np.empty((trials, t_max + 1), dtype=np.int64)
    out[:, 0] = cur.sum(axis=1)
    for t in range(t_max):
        left = np.roll(cur, 1, axis=1)
        right = np.roll(cur, -1, axis=1)
        agree = left == right
        u = tie_uniform_matrix(seeds, t, n)
        cur = np.where(agree, left, (u < q).astype(np.uint8)).astype(np.uint8)
        out[:, t + 1] = cur.sum(axis=1)
    return out
