"""Exhaustive analyses over all 2^n colorings of small graphs.

State indexing: a coloring is the integer with bit v set iff node v is blue
(node 0 in the least significant bit), matching ``Coloring.bits``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from itertools import combinations

import numpy as np
import scipy.sparse as sp
from scipy.linalg import solve_banded
from scipy.sparse.csgraph import connected_components
from scipy.sparse.linalg import spsolve

from .colorings import Coloring
from .dynamics import mm_step_bits, tied_bits
from .errors import SizeCapError
from .graphs import Graph

__all__ = [
    "MarkovAnalysis",
    "rmm_markov",
    "expected_stabilization_exact",
    "expected_hitting_time",
    "absorption_probabilities_exact",
    "birth_death_hitting_time",
    "birth_death_hitting_time_solve",
    "enumerate_stable_colorings",
    "is_resilient",
    "max_resilient_subset",
    "is_winning_set",
    "mm_winning_oracle",
    "rmm_winning_oracle",
    "min_winning_set",
]

MARKOV_CAP = 14
ENUM_LIST_CAP = 24
ENUM_COUNT_CAP = 28
WINNING_SHORTCUT_CAP = 30
WINNING_MM_ORACLE_CAP = 20
WINNING_RMM_ORACLE_CAP = 12
MIN_WINNING_CAP = 16


def _check_model(model: str) -> str:
    model = model.lower()
    if model not in ("mm", "rmm"):
        raise ValueError(f"unknown model {model!r}")
    return model


def _state_step(g: Graph, state: int) -> tuple[int, list[int]]:
    """Deterministic part of one RMM round plus the list of tied nodes."""
    det = 0
    tied = []
    masks = g.neighbor_masks
    for v in range(g.n):
        nb = (state & masks[v]).bit_count()
        d = len(g.adj[v])
        if 2 * nb > d:
            det |= 1 << v
        elif 2 * nb == d:
            tied.append(v)
    return det, tied


def _state_successors(g: Graph, state: int) -> list[int]:
    det, tied = _state_step(g, state)
    succs = [det]
    for v in tied:
        bit = 1 << v
        succs += [s | bit for s in succs]
    return succs


# --- full chain ----------------------------------------------------------------


@dataclass(frozen=True)
class MarkovAnalysis:
    """Exact transition structure of RMM over all 2^n colorings."""

    n: int
    transitions: sp.csr_matrix
    absorbing_components: tuple[frozenset[int], ...]
    hitting_time: np.ndarray  # expected rounds to reach any absorbing component

    def component_of(self, state: int) -> frozenset[int] | None:
        for comp in self.absorbing_components:
            if state in comp:
                return comp
        return None

    def to_json(self) -> str:
        return json.dumps(
            {
                "n": self.n,
                "absorbing": [sorted(comp) for comp in self.absorbing_components],
                "hitting": {
                    str(s): f"{self.hitting_time[s]:.12g}"
                    for s in range(1 << self.n)
                },
            }
        )


def rmm_markov(g: Graph, cap: int = MARKOV_CAP) -> MarkovAnalysis:
    """Build the exact RMM Markov chain: transition support with probabilities,
    absorbing strongly connected components, and expected hitting times."""
    n = g.n
    if n > cap:
        raise SizeCapError(f"rmm_markov needs n <= {cap}, got {n}")
    size = 1 << n
    total = 0
    per_state: list[tuple[int, list[int]]] = []
    for s in range(size):
        det, tied = _state_step(g, s)
        per_state.append((det, tied))
        total += 1 << len(tied)
    rows = np.empty(total, dtype=np.int64)
    cols = np.empty(total, dtype=np.int64)
    probs = np.empty(total, dtype=np.float64)
    k = 0
    for s in range(size):
        det, tied = per_state[s]
        p = 1.0 / (1 << len(tied))
        succs = [det]
        for v in tied:
            bit = 1 << v
            succs += [x | bit for x in succs]
        for succ in succs:
            rows[k] = s
            cols[k] = succ
            probs[k] = p
            k += 1
    mat = sp.csr_matrix((probs, (rows, cols)), shape=(size, size))
    mat.sum_duplicates()

    n_comp, labels = connected_components(mat, directed=True, connection="strong")
    has_exit = np.zeros(n_comp, dtype=bool)
    leaving = labels[rows] != labels[cols]
    has_exit[labels[rows[leaving]]] = True
    absorbing_labels = [c for c in range(n_comp) if not has_exit[c]]
    comps = tuple(
        frozenset(np.nonzero(labels == c)[0].tolist()) for c in absorbing_labels
    )

    absorbed = np.zeros(size, dtype=bool)
    for comp in comps:
        absorbed[list(comp)] = True
    hitting = np.zeros(size, dtype=np.float64)
    transient = np.nonzero(~absorbed)[0]
    if transient.size:
        q = mat[transient][:, transient].tocsc()
        ident = sp.identity(transient.size, format="csc")
        h = spsolve(ident - q, np.ones(transient.size))
        residual = np.abs((ident - q) @ h - 1.0).max()
        if residual > 1e-9:
            raise ArithmeticError(f"hitting-time solve residual {residual:.3e}")
        hitting[transient] = h
    return MarkovAnalysis(n, mat, comps, hitting)


def expected_stabilization_exact(g: Graph, c0: Coloring, cap: int = MARKOV_CAP) -> float:
    """Expected rounds from c0 until the process enters an absorbing component."""
    analysis = rmm_markov(g, cap)
    return float(analysis.hitting_time[c0.bits])


def expected_hitting_time(
    g: Graph, c0: Coloring, targets, cap: int = MARKOV_CAP
) -> float:
    """Expected rounds from c0 until a state satisfying ``targets`` is first hit.

    ``targets`` is a predicate on state integers (or a set of them).  Only the
    sub-chain reachable from c0 is built.  Returns ``inf`` when the target is
    not reached almost surely.
    """
    if g.n > cap:
        raise SizeCapError(f"expected_hitting_time needs n <= {cap}, got {g.n}")
    is_target = targets if callable(targets) else (lambda s: s in targets)
    start = c0.bits
    if is_target(start):
        return 0.0
    # forward BFS, truncated at target states
    succs_of: dict[int, list[int]] = {}
    frontier = [start]
    seen = {start}
    while frontier:
        nxt = []
        for s in frontier:
            succs = _state_successors(g, s)
            succs_of[s] = succs
            for u in succs:
                if u not in seen:
                    seen.add(u)
                    if not is_target(u):
                        nxt.append(u)
        frontier = nxt
    interior = sorted(succs_of)  # reachable non-target states
    # every interior state must reach a target for the expectation to be finite
    index = {s: i for i, s in enumerate(interior)}
    can_reach = set()
    rev: dict[int, list[int]] = {s: [] for s in interior}
    target_feeders = []
    for s in interior:
        for u in succs_of[s]:
            if is_target(u):
                target_feeders.append(s)
            elif u in rev:
                rev[u].append(s)
    stack = list(set(target_feeders))
    can_reach.update(stack)
    while stack:
        u = stack.pop()
        for w in rev[u]:
            if w not in can_reach:
                can_reach.add(w)
                stack.append(w)
    if len(can_reach) != len(interior):
        return float("inf")
    m = len(interior)
    mat = np.zeros((m, m))
    for s in interior:
        i = index[s]
        p = 1.0 / len(succs_of[s])
        for u in succs_of[s]:
            if u in index:
                mat[i, index[u]] += p
    h = np.linalg.solve(np.eye(m) - mat, np.ones(m))
    return float(h[index[start]])


def absorption_probabilities_exact(
    analysis: MarkovAnalysis, initial
) -> list[float]:
    """Probability of ending in each absorbing component of ``analysis``.

    ``initial`` is either a state integer or a distribution: a dict mapping
    state -> probability, or a dense array over all states.
    """
    size = 1 << analysis.n
    if isinstance(initial, (int, np.integer)):
        dist = np.zeros(size)
        dist[int(initial)] = 1.0
    elif isinstance(initial, dict):
        dist = np.zeros(size)
        for s, p in initial.items():
            dist[s] = p
    else:
        dist = np.asarray(initial, dtype=np.float64)
    comps = analysis.absorbing_components
    absorbed = np.zeros(size, dtype=bool)
    comp_index = np.full(size, -1, dtype=np.int64)
    for i, comp in enumerate(comps):
        members = list(comp)
        absorbed[members] = True
        comp_index[members] = i
    transient = np.nonzero(~absorbed)[0]
    out = np.zeros(len(comps))
    for i in range(len(comps)):
        out[i] = dist[comp_index == i].sum()
    if transient.size:
        mat = analysis.transitions
        q = mat[transient][:, transient].tocsc()
        r = mat[transient][:, absorbed].tocsc()
        # rhs: per component, probability of stepping straight into it
        cols = comp_index[absorbed]
        rhs = np.zeros((transient.size, len(comps)))
        rcoo = r.tocoo()
        abs_states = np.nonzero(absorbed)[0]
        for row, col, val in zip(rcoo.row, rcoo.col, rcoo.data):
            rhs[row, cols[col]] += val
        ident = sp.identity(transient.size, format="csc")
        sol = spsolve(ident - q, rhs)
        if sol.ndim == 1:
            sol = sol[:, None]
        out += dist[transient] @ sol
    return [float(x) for x in out]


# --- birth-death chain ----------------------------------------------------------


def birth_death_hitting_time(k: int, i: int) -> float:
    """Expected rounds for the lazy +/-1 walk (p=1/4 each way, absorbing ends)
    to reach 0 or k from i: the closed form 2*i*(k-i)."""
    if not (0 <= i <= k):
        raise ValueError(f"need 0 <= i <= k, got i={i}, k={k}")
    return float(2 * i * (k - i))


def birth_death_hitting_time_solve(k: int) -> np.ndarray:
    """Hitting times of the same chain for all states, by a banded linear solve."""
    if k < 1:
        raise ValueError("k must be >= 1")
    h = np.zeros(k + 1)
    m = k - 1
    if m == 0:
        return h
    # (1/2) h_i - (1/4) h_{i-1} - (1/4) h_{i+1} = 1 at interior states
    ab = np.zeros((3, m))
    ab[0, 1:] = -0.25
    ab[1, :] = 0.5
    ab[2, :-1] = -0.25
    h[1:k] = solve_banded((1, 1), ab, np.ones(m))
    return h


# --- stable colorings ------------------------------------------------------------


def enumerate_stable_colorings(
    g: Graph, model: str, return_list: bool = False
) -> int | tuple[int, list[Coloring]]:
    """Count (optionally list) colorings reproduced by one deterministic round."""
    model = _check_model(model)
    n = g.n
    cap = ENUM_LIST_CAP if return_list else ENUM_COUNT_CAP
    if n > cap:
        raise SizeCapError(f"enumeration needs n <= {cap}, got {n}")
    masks = np.array(g.neighbor_masks, dtype=np.uint64)
    degs = g.degrees
    count = 0
    found: list[Coloring] = []
    chunk = 1 << 20
    for lo in range(0, 1 << n, chunk):
        hi = min(lo + chunk, 1 << n)
        states = np.arange(lo, hi, dtype=np.uint64)
        ok = np.ones(states.shape, dtype=bool)
        for v in range(n):
            nb = np.bitwise_count(states & masks[v]).astype(np.int64)
            blue = ((states >> np.uint64(v)) & np.uint64(1)).astype(bool)
            twice = 2 * nb
            ok &= ~((twice > degs[v]) & ~blue)
            ok &= ~((twice < degs[v]) & blue)
            if model == "rmm":
                ok &= twice != degs[v]
        count += int(ok.sum())
        if return_list:
            found.extend(Coloring(n, int(s)) for s in states[ok])
    if return_list:
        return count, found
    return count


# --- resilient and winning sets ---------------------------------------------------


def _as_nodeset(g: Graph, s) -> frozenset[int]:
    nodes = frozenset(int(v) for v in s)
    for v in nodes:
        if not (0 <= v < g.n):
            raise ValueError(f"node {v} out of range")
    return nodes


def is_resilient(g: Graph, s, model: str) -> bool:
    """Degree test: every member keeps a (strict, for RMM) majority inside s."""
    model = _check_model(model)
    nodes = _as_nodeset(g, s)
    for v in nodes:
        inside = sum(1 for u in g.adj[v] if u in nodes)
        if model == "mm":
            if 2 * inside < g.degree(v):
                return False
        else:
            if 2 * inside <= g.degree(v):
                return False
    return True


def max_resilient_subset(g: Graph, s, model: str) -> frozenset[int]:
    """Largest resilient subset of s, by iteratively peeling violating nodes."""
    model = _check_model(model)
    nodes = set(_as_nodeset(g, s))
    changed = True
    while changed:
        changed = False
        for v in list(nodes):
            inside = sum(1 for u in g.adj[v] if u in nodes)
            bad = 2 * inside < g.degree(v) if model == "mm" else 2 * inside <= g.degree(v)
            if bad:
                nodes.discard(v)
                changed = True
    return frozenset(nodes)


def _shortcut_run(g: Graph, start_bits: int, model: str, target_blue: bool) -> bool:
    """Iterate the deterministic worst-case majority rule to its eventual
    cycle; True iff the target monochromatic coloring is reached.

    MM keeps the node's color on ties; for RMM every tie is resolved against
    the target color (the adversary's best move).  Either way the rule is a
    symmetric threshold automaton, so the trajectory ends in a fixed point or
    a 2-cycle.
    """
    n = g.n
    full = (1 << n) - 1
    masks = g.neighbor_masks
    degs = [len(nb) for nb in g.adj]
    target = full if target_blue else 0
    tie_bit_blue = model == "rmm" and not target_blue
    cur = start_bits
    prev = -1
    prev2 = -1
    for _ in range(1 << (n + 1)):
        if cur == target:
            return True
        if cur == prev or cur == prev2:
            return False
        new = 0
        for v in range(n):
            nb = (cur & masks[v]).bit_count()
            d = degs[v]
            if 2 * nb > d:
                new |= 1 << v
            elif 2 * nb == d:
                if model == "mm":
                    new |= cur & (1 << v)
                elif tie_bit_blue:
                    new |= 1 << v
        prev2 = prev
        prev = cur
        cur = new
    raise RuntimeError("majority iteration failed to enter a 1- or 2-cycle")


def is_winning_set(g: Graph, s, model: str, color: str = "blue") -> bool:
    """Decide whether seeding s with ``color`` forces the whole graph there.

    MM: by monotonicity it suffices to start from the worst completion (all
    other nodes the opposite color).  RMM: additionally every tie is resolved
    against the seed.  Both shortcuts are cross-validated against the
    exhaustive oracles in the test suite.
    """
    model = _check_model(model)
    if g.n > WINNING_SHORTCUT_CAP:
        raise SizeCapError(f"winning-set check needs n <= {WINNING_SHORTCUT_CAP}")
    if color not in ("blue", "white"):
        raise ValueError(f"color must be blue or white, got {color!r}")
    nodes = _as_nodeset(g, s)
    bits = 0
    for v in nodes:
        bits |= 1 << v
    if color == "blue":
        return _shortcut_run(g, bits, model, target_blue=True)
    return _shortcut_run(g, ((1 << g.n) - 1) ^ bits, model, target_blue=False)


def mm_winning_oracle(g: Graph, s) -> bool:
    """Exhaustive MM check over all colorings of the complement of s."""
    if g.n > WINNING_MM_ORACLE_CAP:
        raise SizeCapError(f"oracle needs n <= {WINNING_MM_ORACLE_CAP}")
    nodes = _as_nodeset(g, s)
    seed_bits = 0
    for v in nodes:
        seed_bits |= 1 << v
    rest = [v for v in range(g.n) if v not in nodes]
    full = (1 << g.n) - 1
    for assignment in range(1 << len(rest)):
        bits = seed_bits
        for i, v in enumerate(rest):
            if (assignment >> i) & 1:
                bits |= 1 << v
        cur = bits
        prev = -1
        prev2 = -1
        while True:
            if cur == full:
                break
            if cur == prev or cur == prev2:
                return False
            new = mm_step_bits(g, cur)
            prev2, prev, cur = prev, cur, new
    return True


def rmm_winning_oracle(g: Graph, s) -> bool:
    """Exhaustive RMM check: from every completion, every positive-probability
    path must reach the all-blue coloring."""
    if g.n > WINNING_RMM_ORACLE_CAP:
        raise SizeCapError(f"oracle needs n <= {WINNING_RMM_ORACLE_CAP}")
    nodes = _as_nodeset(g, s)
    seed_bits = 0
    for v in nodes:
        seed_bits |= 1 << v
    rest = [v for v in range(g.n) if v not in nodes]
    full = (1 << g.n) - 1
    succ_cache: dict[int, list[int]] = {}

    def succs(state: int) -> list[int]:
        if state not in succ_cache:
            succ_cache[state] = _state_successors(g, state)
        return succ_cache[state]

    for assignment in range(1 << len(rest)):
        bits = seed_bits
        for i, v in enumerate(rest):
            if (assignment >> i) & 1:
                bits |= 1 << v
        # reachable states, treating all-blue as a sink
        seen = {bits}
        stack = [bits]
        while stack:
            u = stack.pop()
            if u == full:
                continue
            for w in succs(u):
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        interior = [u for u in seen if u != full]
        # a path can avoid all-blue forever iff the interior has a cycle
        # (incl. self-loops) or a terminal state; peel by out-edges into
        # the interior (Kahn on the reverse graph)
        out_deg = {}
        preds: dict[int, list[int]] = {u: [] for u in interior}
        for u in interior:
            cnt = 0
            for w in succs(u):
                if w != full:
                    cnt += 1
                    preds[w].append(u)
            out_deg[u] = cnt
        queue = [u for u in interior if out_deg[u] == 0]
        peeled = 0
        while queue:
            u = queue.pop()
            peeled += 1
            for w in preds[u]:
                out_deg[w] -= 1
                if out_deg[w] == 0:
                    queue.append(w)
        if peeled != len(interior):
            return False
    return True


def min_winning_set(g: Graph, model: str) -> tuple[int, frozenset[int]]:
    """Smallest winning set by exhaustive search in increasing cardinality.

    Subsets whose complement still contains a (nonempty) resilient set are
    pruned without simulation: that set could be seeded the other color and
    never be recovered.
    """
    model = _check_model(model)
    if g.n > MIN_WINNING_CAP:
        raise SizeCapError(f"min_winning_set needs n <= {MIN_WINNING_CAP}, got {g.n}")
    all_nodes = list(range(g.n))
    for size in range(1, g.n + 1):
        for combo in combinations(all_nodes, size):
            s = frozenset(combo)
            complement = frozenset(all_nodes) - s
            if max_resilient_subset(g, complement, model):
                continue
            if is_winning_set(g, s, model):
                return size, s
    return g.n, frozenset(all_nodes)
