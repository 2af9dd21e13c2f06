"""Degree-preserving MCMC over graph spaces via edge swaps.

Three double-edge-swap chains are provided.  ``stub`` accepts every swap
that stays in the space and is uniform over stub-labeled spaces.  The two
vertex chains add rejection weights so that every graph-to-graph
transition has probability ``1/(M(M-1))``, making the walk uniform over
vertex-labeled spaces: ``vertex_basic`` down-weights by the chosen edges'
multiplicities, ``vertex_mh`` balances forward against reverse swap
counts and usually mixes faster on multiplicity-heavy sequences.

Loopy spaces without multiedges are not always connected under double
edge swaps alone (three self-loops and a triangle exchange no pair of
edges), so chains there mix in a three-edge move swapping three
self-loops against a triangle, with acceptance factors that keep the
walk uniform under either labeling.

A chain step is defined by a fixed draw order from the shared RNG, and
the pure-Python step functions here replay the compiled kernels
bit-for-bit; ``run_chain`` always drives the kernels.

The ``naive`` algorithm omits the vertex-labeled rejection weights.  It is
a deliberately biased negative control for tests and is not exposed on
the command line.
"""

from __future__ import annotations

import enum
import math
import sys
import warnings
from dataclasses import dataclass, replace
from typing import Callable, Sequence

import numpy as np

from . import kernels
from .graph import (
    GraphSpace,
    MultiGraph,
    NullnetError,
    SpaceViolationError,
    find_space_violation,
    is_graphical,
    validate_in_space,
)
from .rng import Xoshiro256

ALGORITHMS = ("stub", "vertex_basic", "vertex_mh", "naive")
_ALG_IDS = {
    "stub": kernels.ALG_STUB,
    "vertex_basic": kernels.ALG_VERTEX_BASIC,
    "vertex_mh": kernels.ALG_VERTEX_MH,
    "naive": kernels.ALG_NAIVE,
}
MAX_DENSE_VERTICES = 4096


class ChainConfigError(NullnetError):
    """Chain parameters are inconsistent with the space or graph."""


class SwapCase(enum.Enum):
    """Structural classification of one proposed double edge swap."""

    FOUR_DISTINCT = "four_distinct"
    THREE_DISTINCT_LOOP_CREATED = "three_distinct_loop_created"
    THREE_DISTINCT_LOOP_CONSUMED = "three_distinct_loop_consumed"
    TWO_LOOPS_MERGED = "two_loops_merged"
    MULTIEDGE_SPLIT = "multiedge_split"
    NO_OP = "no_op"
    LEAVES_SPACE = "leaves_space"


def _proposal(g: MultiGraph, e1: int, e2: int, direction: int):
    """Old and new edge pairs for swapping positions e1, e2."""
    a, b = g._edges[e1]
    o2 = g._edges[e2]
    c, e = o2
    if direction == 1:
        c, e = e, c
    n1 = (a, c) if a <= c else (c, a)
    n2 = (b, e) if b <= e else (e, b)
    return (a, b), o2, n1, n2


def _feasible(g: MultiGraph, n1, n2, s: GraphSpace) -> bool:
    if not s.loops and (n1[0] == n1[1] or n2[0] == n2[1]):
        return False
    if not s.multiedges:
        if n1 == n2:
            if n1[0] != n1[1]:
                return False
        else:
            if n1[0] != n1[1] and g.multiplicity(*n1) >= 1:
                return False
            if n2[0] != n2[1] and g.multiplicity(*n2) >= 1:
                return False
    return True


def classify_swap(g: MultiGraph, e1: int, e2: int, direction: int, s: GraphSpace) -> SwapCase:
    """Classify the swap of edge positions e1, e2 in the given direction.

    The classification is structural; LEAVES_SPACE is reported whenever
    the proposal would create a self-loop or multiedge the space forbids.
    """
    if e1 == e2:
        raise ValueError("e1 and e2 must be distinct edge positions")
    o1, o2, n1, n2 = _proposal(g, e1, e2, direction)
    if (n1 == o1 and n2 == o2) or (n1 == o2 and n2 == o1):
        return SwapCase.NO_OP
    if not _feasible(g, n1, n2, s):
        return SwapCase.LEAVES_SPACE
    loop1 = o1[0] == o1[1]
    loop2 = o2[0] == o2[1]
    if loop1 and loop2:
        return SwapCase.TWO_LOOPS_MERGED
    if o1 == o2:
        return SwapCase.MULTIEDGE_SPLIT
    if loop1 or loop2:
        return SwapCase.THREE_DISTINCT_LOOP_CONSUMED
    if n1[0] == n1[1] or n2[0] == n2[1]:
        return SwapCase.THREE_DISTINCT_LOOP_CREATED
    return SwapCase.FOUR_DISTINCT


def _apply(g: MultiGraph, e1, e2, o1, o2, n1, n2) -> None:
    mult = g._mult
    for o in (o1, o2):
        w = mult[o] - 1
        if w:
            mult[o] = w
        else:
            del mult[o]
    for n in (n1, n2):
        mult[n] = mult.get(n, 0) + 1
    g._edges[e1] = n1
    g._edges[e2] = n2


def _double_step(g: MultiGraph, s: GraphSpace, rng: Xoshiro256, alg: str):
    """One double-edge-swap attempt; returns (SwapCase, applied)."""
    M = g.M
    i = rng.randbelow(M)
    j = rng.randbelow(M - 1)
    if j >= i:
        j += 1
    d = rng.randbelow(2)
    o1, o2, n1, n2 = _proposal(g, i, j, d)
    if (n1 == o1 and n2 == o2) or (n1 == o2 and n2 == o1):
        return SwapCase.NO_OP, False
    if not _feasible(g, n1, n2, s):
        return SwapCase.LEAVES_SPACE, False

    case = classify_swap(g, i, j, d, s)
    if alg in ("stub", "naive"):
        _apply(g, i, j, o1, o2, n1, n2)
        return case, True

    w1 = g._mult[o1]
    w2 = g._mult[o2]
    loop_chosen = o1[0] == o1[1] or o2[0] == o2[1]
    if alg == "vertex_basic":
        if o1 == o2:
            p = 2.0 / (w1 * (w1 - 1.0))
        else:
            p = 1.0 / (w1 * w2)
        if loop_chosen:
            p *= 0.5
    else:  # vertex_mh
        if case is SwapCase.TWO_LOOPS_MERGED:
            wn = g.multiplicity(*n1)
            to = 2.0 * w1 * w2
            fr = 0.5 * (wn + 2.0) * (wn + 1.0)
        elif case is SwapCase.MULTIEDGE_SPLIT:
            to = 0.5 * w1 * (w1 - 1.0)
            fr = 2.0 * (g.multiplicity(*n1) + 1.0) * (g.multiplicity(*n2) + 1.0)
        elif case is SwapCase.THREE_DISTINCT_LOOP_CONSUMED:
            to = 2.0 * w1 * w2
            fr = (g.multiplicity(*n1) + 1.0) * (g.multiplicity(*n2) + 1.0)
        else:
            to = 1.0 * w1 * w2
            fr = (g.multiplicity(*n1) + 1.0) * (g.multiplicity(*n2) + 1.0)
            if case is SwapCase.THREE_DISTINCT_LOOP_CREATED:
                fr *= 2.0
        p = fr / to
    if rng.uniform() >= p:
        return case, False
    _apply(g, i, j, o1, o2, n1, n2)
    return case, True


def stub_step(g: MultiGraph, s: GraphSpace, rng: Xoshiro256):
    """One chain attempt of the stub-labeled sampler (swap-and-hold)."""
    if s.labeling != "stub":
        raise ChainConfigError("stub_step requires a stub-labeled space")
    return _double_step(g, s, rng, "stub")


def vertex_basic_step(g: MultiGraph, s: GraphSpace, rng: Xoshiro256):
    """One attempt of the multiplicity-weighted vertex-labeled sampler."""
    if s.labeling != "vertex":
        raise ChainConfigError("vertex_basic_step requires a vertex-labeled space")
    return _double_step(g, s, rng, "vertex_basic")


def vertex_mh_step(g: MultiGraph, s: GraphSpace, rng: Xoshiro256):
    """One attempt of the forward/reverse-balanced vertex-labeled sampler."""
    if s.labeling != "vertex":
        raise ChainConfigError("vertex_mh_step requires a vertex-labeled space")
    return _double_step(g, s, rng, "vertex_mh")


def naive_vertex_step(g: MultiGraph, s: GraphSpace, rng: Xoshiro256):
    """Unweighted walk on a vertex-labeled space (biased; test harness only)."""
    return _double_step(g, s, rng, "naive")


def triangle_loop_step(g: MultiGraph, s: GraphSpace, rng: Xoshiro256) -> tuple[str, bool]:
    """One attempt of the three-self-loops <-> triangle move.

    Only meaningful on loopy spaces without multiedges.  Acceptance keeps
    the walk uniform: under vertex labeling a loops-to-triangle move is
    accepted with probability ``1/(w_uu w_vv w_ww)`` (the reverse is
    unique); under stub labeling the forward move is always accepted and
    the reverse with probability 1/8, matching the 2 w_ii stub
    arrangements consumed per converted loop.
    """
    if g.M < 3:
        return "no_op", False
    M = g.M
    i = rng.randbelow(M)
    j = rng.randbelow(M - 1)
    if j >= i:
        j += 1
    k = rng.randbelow(M - 2)
    lo, hi = (i, j) if i < j else (j, i)
    if k >= lo:
        k += 1
    if k >= hi:
        k += 1
    edges = g._edges
    trio = [edges[i], edges[j], edges[k]]
    pos = sorted((i, j, k))
    nloops = sum(1 for (a, b) in trio if a == b)
    if nloops == 3:
        verts = sorted(a for (a, _) in trio)
        s0, s1, s2 = verts
        if s0 == s1 or s1 == s2:
            return "no_op", False
        if (
            g.multiplicity(s0, s1)
            or g.multiplicity(s1, s2)
            or g.multiplicity(s0, s2)
        ):
            return "leaves_space", False
        if s.labeling == "vertex":
            p = 1.0 / (
                g.multiplicity(s0, s0) * g.multiplicity(s1, s1) * g.multiplicity(s2, s2)
            )
        else:
            p = 1.0
        if rng.uniform() >= p:
            return "loops_to_triangle", False
        new = [(s0, s1), (s1, s2), (s0, s2)]
        _rewrite_triple(g, pos, [(s0, s0), (s1, s1), (s2, s2)], new)
        return "loops_to_triangle", True
    if nloops == 0:
        vset = sorted({v for e in trio for v in e})
        if len(vset) != 3 or len(set(trio)) != 3:
            return "no_op", False
        s0, s1, s2 = vset
        if s.labeling == "vertex":
            p = 1.0
        elif s.labeling == "stub":
            p = 0.125
        if rng.uniform() >= p:
            return "triangle_to_loops", False
        old = [(s0, s1), (s1, s2), (s0, s2)]
        _rewrite_triple(g, pos, old, [(s0, s0), (s1, s1), (s2, s2)])
        return "triangle_to_loops", True
    return "no_op", False


def _rewrite_triple(g, pos, old, new):
    mult = g._mult
    for o in old:
        w = mult[o] - 1
        if w:
            mult[o] = w
        else:
            del mult[o]
    for n in new:
        mult[n] = mult.get(n, 0) + 1
    for p, n in zip(pos, new):
        g._edges[p] = n


def chain_step(g: MultiGraph, s: GraphSpace, rng: Xoshiro256, algorithm: str,
               triangle_loop_prob: float = 0.0):
    """One full chain attempt: triangle move with the configured
    probability (loopy spaces), otherwise a double edge swap."""
    if triangle_loop_prob > 0.0 and rng.uniform() < triangle_loop_prob:
        if g.M >= 3:
            return triangle_loop_step(g, s, rng)
        return "no_op", False
    return _double_step(g, s, rng, algorithm)


# -- chain configuration and execution ---------------------------------------


def default_burn_in(M: int) -> int:
    """Heuristic default: 20 M ln(M+1) attempts (no general mixing bound
    is known; override for anything that matters)."""
    return int(math.ceil(20.0 * M * math.log(M + 1))) if M else 0


def default_spacing(M: int) -> int:
    """Heuristic default thinning of 2M attempts between samples."""
    return max(1, 2 * M)


@dataclass
class ChainConfig:
    """Parameters of one seeded MCMC run.

    ``burn_in`` and ``spacing`` are in swap attempts; ``None`` picks the
    documented heuristics.  ``algorithm`` must match the labeling:
    ``stub`` for stub-labeled spaces, ``vertex_basic``/``vertex_mh`` for
    vertex-labeled ones (``None`` picks stub or vertex_basic).
    ``triangle_loop_prob`` defaults to 0.1 on loopy no-multiedge spaces
    and must be 0 elsewhere.
    """

    space: GraphSpace
    n_samples: int
    spacing: int | None = None
    burn_in: int | None = None
    seed: int = 0
    stream: int = 0
    algorithm: str | None = None
    triangle_loop_prob: float | None = None
    progress: bool = False

    def resolved_algorithm(self) -> str:
        alg = self.algorithm
        if alg is None:
            alg = "stub" if self.space.labeling == "stub" else "vertex_basic"
        if alg not in ALGORITHMS:
            raise ChainConfigError(f"unknown algorithm {alg!r}")
        if alg == "stub" and self.space.labeling != "stub":
            raise ChainConfigError("algorithm 'stub' requires a stub-labeled space")
        if alg in ("vertex_basic", "vertex_mh", "naive") and self.space.labeling != "vertex":
            raise ChainConfigError(f"algorithm {alg!r} requires a vertex-labeled space")
        return alg

    def resolved_triangle_prob(self) -> float:
        loopy_only = self.space.loops and not self.space.multiedges
        p = self.triangle_loop_prob
        if p is None:
            p = 0.1 if loopy_only else 0.0
        if not 0.0 <= p <= 1.0:
            raise ChainConfigError("triangle_loop_prob must be in [0, 1]")
        if p > 0.0 and not loopy_only:
            raise ChainConfigError(
                "triangle-loop moves apply only to loopy spaces without multiedges"
            )
        return p

    def validate(self) -> None:
        if self.n_samples < 1:
            raise ChainConfigError("n_samples must be >= 1")
        if self.spacing is not None and self.spacing < 1:
            raise ChainConfigError("spacing must be >= 1")
        if self.burn_in is not None and self.burn_in < 0:
            raise ChainConfigError("burn_in must be >= 0")
        self.resolved_algorithm()
        self.resolved_triangle_prob()


@dataclass
class SampleStream:
    """Output of one chain run: snapshots or per-sample statistics."""

    config: ChainConfig
    sample_steps: np.ndarray
    graphs: list[MultiGraph] | None = None
    values: np.ndarray | None = None


def swap_connectivity_ok(degrees: Sequence[int]) -> bool:
    """Double-edge-swap connectivity condition for loopy no-multiedge
    spaces: graphical, and the non-isolated part is neither all 2s nor a
    clique sequence."""
    nz = [d for d in degrees if d > 0]
    if not nz:
        return True
    if not is_graphical(degrees):
        return False
    m = len(nz)
    if all(d == 2 for d in nz):
        return False
    if all(d == m - 1 for d in nz):
        return False
    return True


def graph_to_arrays(g: MultiGraph):
    """Chain-state arrays (ea, eb, W) for the kernels."""
    if g.n > MAX_DENSE_VERTICES:
        raise NullnetError(
            f"chain state uses a dense multiplicity matrix; n={g.n} exceeds "
            f"the supported {MAX_DENSE_VERTICES} vertices"
        )
    M = g.M
    ea = np.empty(M, dtype=np.int64)
    eb = np.empty(M, dtype=np.int64)
    for p, (u, v) in enumerate(g._edges):
        ea[p] = u
        eb[p] = v
    W = np.zeros((g.n, g.n), dtype=np.int64)
    for (u, v), w in g._mult.items():
        W[u, v] += w
        if u != v:
            W[v, u] += w
    return ea, eb, W


def graph_from_arrays(n: int, ea: np.ndarray, eb: np.ndarray, labels=None) -> MultiGraph:
    g = MultiGraph(n, labels=labels)
    for p in range(ea.shape[0]):
        g.add_edge(int(ea[p]), int(eb[p]))
    return g


def _prepare(g0: MultiGraph, cfg: ChainConfig):
    cfg.validate()
    if not validate_in_space(g0, cfg.space):
        bad = find_space_violation(g0, cfg.space)
        raise SpaceViolationError(
            f"initial graph is not in the {cfg.space.name} space "
            f"(offending edge {bad})"
        )
    alg = cfg.resolved_algorithm()
    tri = cfg.resolved_triangle_prob()
    if cfg.space.loops and not cfg.space.multiedges and tri == 0.0:
        if not swap_connectivity_ok(g0.degrees()):
            raise ChainConfigError(
                "this degree sequence is not covered by the double-edge-swap "
                "connectivity condition for loopy graphs; enable triangle-loop "
                "moves (triangle_loop_prob > 0)"
            )
    M = g0.M
    burn = cfg.burn_in if cfg.burn_in is not None else default_burn_in(M)
    spacing = cfg.spacing if cfg.spacing is not None else default_spacing(M)
    return alg, tri, burn, spacing


def run_chain(
    g0: MultiGraph,
    cfg: ChainConfig,
    stat: Callable[[MultiGraph], float] | None = None,
) -> SampleStream:
    """Run one seeded chain and collect samples.

    Returns graph snapshots, or per-sample values of ``stat`` when given.
    Bit-reproducible for fixed (g0, cfg).  Chains with fewer than two
    edges are stationary by definition; the initial graph is replicated
    with a warning.
    """
    alg, tri, burn, spacing = _prepare(g0, cfg)
    M = g0.M
    steps = burn + spacing * np.arange(1, cfg.n_samples + 1, dtype=np.int64)
    if M < 2:
        warnings.warn("chain on a graph with M < 2 is trivially stationary")
        graphs = [g0.copy() for _ in range(cfg.n_samples)]
        if stat is not None:
            vals = np.array([stat(g) for g in graphs], dtype=float)
            return SampleStream(cfg, steps, values=vals)
        return SampleStream(cfg, steps, graphs=graphs)

    ea, eb, W = graph_to_arrays(g0)
    state = Xoshiro256(cfg.seed, cfg.stream).state
    alg_id = _ALG_IDS[alg]
    loops_ok = cfg.space.loops
    multi_ok = cfg.space.multiedges
    kernels.advance(ea, eb, W, state, burn, alg_id, loops_ok, multi_ok, tri)

    report_every = max(1, cfg.n_samples // 20)
    graphs: list[MultiGraph] | None = [] if stat is None else None
    values = np.empty(cfg.n_samples, dtype=float) if stat is not None else None
    for s in range(cfg.n_samples):
        kernels.advance(ea, eb, W, state, spacing, alg_id, loops_ok, multi_ok, tri)
        snap = graph_from_arrays(g0.n, ea, eb, labels=g0.labels)
        if stat is not None:
            values[s] = stat(snap)
        else:
            graphs.append(snap)
        if cfg.progress and (s + 1) % report_every == 0:
            print(
                f"chain seed={cfg.seed} stream={cfg.stream}: "
                f"{s + 1}/{cfg.n_samples} samples",
                file=sys.stderr,
            )
    return SampleStream(cfg, steps, graphs=graphs, values=values)


def run_chain_keys(g0: MultiGraph, cfg: ChainConfig) -> np.ndarray:
    """Fast path: packed canonical keys of every sample (small graphs).

    Requires the packed key (sorted edge codes in base n^2) to fit in an
    int64; intended for the exhaustive-census comparisons.
    """
    alg, tri, burn, spacing = _prepare(g0, cfg)
    if g0.M < 2:
        warnings.warn("chain on a graph with M < 2 is trivially stationary")
        key = packed_key(g0.canonical_key(), g0.n)
        return np.full(cfg.n_samples, key, dtype=np.int64)
    if (g0.n * g0.n) ** g0.M >= 2 ** 63:
        raise NullnetError("graph too large for packed sample keys")
    ea, eb, W = graph_to_arrays(g0)
    state = Xoshiro256(cfg.seed, cfg.stream).state
    out = np.empty(cfg.n_samples, dtype=np.int64)
    kernels.advance_collect_keys(
        ea, eb, W, state, _ALG_IDS[alg], cfg.space.loops, cfg.space.multiedges,
        tri, burn, spacing, out, g0.n,
    )
    return out


def packed_key(edges: Sequence[tuple[int, int]], n: int) -> int:
    """Python mirror of the kernels' packed sample key."""
    codes = sorted(u * n + v for (u, v) in edges)
    key = 0
    for c in codes:
        key = key * (n * n) + c
    return key


def run_chains(g0: MultiGraph, cfg: ChainConfig, n_chains: int) -> list[SampleStream]:
    """Independent chains on streams ``cfg.stream + 0 .. n_chains-1``,
    merged deterministically by chain index."""
    from concurrent.futures import ThreadPoolExecutor

    configs = [replace(cfg, stream=cfg.stream + c) for c in range(n_chains)]
    if n_chains == 1:
        return [run_chain(g0, configs[0])]
    with ThreadPoolExecutor(max_workers=min(n_chains, 8)) as pool:
        futures = [pool.submit(run_chain, g0.copy(), c) for c in configs]
        return [f.result() for f in futures]
