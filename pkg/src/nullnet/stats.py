"""Statistics over graphs and sample streams.

Assortativity follows the stub-pair convention: moments of the degree
(or trait) distribution are taken across stubs, so vertex i enters with
weight k_i, and each edge instance contributes its endpoint product once.

Modularity uses ordered vertex pairs with ``A_ii = 2 w_ii``, which makes
the adjacency total equal 2M and one-community modularity exactly zero.
The generic variant replaces the ``k_i k_j / 2M`` null term with per
degree-class expected edge counts; the bundled closed form for the
stub-labeled loopy multigraph reduces it exactly to the standard formula.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .graph import MultiGraph, NullnetError, UndefinedStatisticError, check_degrees
from .swaps import ChainConfig, run_chain


# -- assortativity ------------------------------------------------------------


def _stub_pair_correlation(g: MultiGraph, value: np.ndarray) -> float:
    k = np.asarray(g.degrees(), dtype=float)
    two_m = k.sum()
    if two_m == 0:
        raise UndefinedStatisticError("graph has no edges")
    m = two_m / 2.0
    mu = float(k @ value) / two_m
    var = float(k @ (value * value)) / two_m - mu * mu
    if var <= 0.0:
        raise UndefinedStatisticError(
            "stub-weighted variance is zero; assortativity undefined"
        )
    pos = np.asarray(g.edge_positions(), dtype=np.int64)
    s = float(np.sum(value[pos[:, 0]] * value[pos[:, 1]]))
    return (s / m - mu * mu) / var


def degree_assortativity(g: MultiGraph) -> float:
    """Pearson correlation of endpoint degrees over the 2M stub pairs.

    Self-loops contribute k_u^2 per loop.  Raises
    :class:`UndefinedStatisticError` on regular graphs (zero variance).
    """
    return _stub_pair_correlation(g, np.asarray(g.degrees(), dtype=float))


def trait_assortativity(g: MultiGraph, traits: Sequence[float]) -> float:
    """Assortativity of a scalar vertex trait (stub-weighted moments)."""
    t = np.asarray(traits, dtype=float)
    if t.shape != (g.n,):
        raise ValueError(f"need one trait value per vertex; got {t.shape}")
    return _stub_pair_correlation(g, t)


# -- modularity ---------------------------------------------------------------


@dataclass
class Partition:
    """Dense assignment of vertices to communities 0..K-1."""

    assignment: np.ndarray
    K: int

    @classmethod
    def from_labels(cls, labels: Sequence[int]) -> "Partition":
        arr = np.asarray(labels)
        uniq, dense = np.unique(arr, return_inverse=True)
        return cls(dense.astype(np.int64), len(uniq))

    def __post_init__(self):
        self.assignment = np.asarray(self.assignment, dtype=np.int64)
        if self.K < 1 or len(self.assignment) == 0:
            raise ValueError("partition needs at least one vertex and community")
        if self.assignment.min() < 0 or self.assignment.max() >= self.K:
            raise ValueError("community ids must lie in 0..K-1")

    def sizes(self) -> np.ndarray:
        return np.bincount(self.assignment, minlength=self.K)

    def copy(self) -> "Partition":
        return Partition(self.assignment.copy(), self.K)


@dataclass
class DegreeClassMatrix:
    """Expected edge counts between degree classes under some null.

    ``C[a, b]`` is the expected number of edges between the classes of
    ``degree_values[a]`` and ``degree_values[b]``; the diagonal counts
    each within-class edge (and each self-loop) once, so the matrix total
    is M.  ``se`` carries per-cell standard errors for estimated
    matrices, zeros for closed forms.
    """

    degree_values: np.ndarray
    class_sizes: np.ndarray
    C: np.ndarray
    se: np.ndarray
    n_samples: int = 0

    def pair_expectation(self) -> np.ndarray:
        """Per-ordered-vertex-pair expectations E_pair[a, b].

        Off-diagonal cells spread C over n_a * n_b ordered pairs; the
        diagonal uses 2 C / n_a^2 so that summing over all ordered pairs
        (including i = j) returns 2M.
        """
        n = self.class_sizes.astype(float)
        out = self.C / np.outer(n, n)
        np.fill_diagonal(out, 2.0 * np.diag(self.C) / (n * n))
        return out

    def index_of(self, degree: int) -> int:
        idx = np.searchsorted(self.degree_values, degree)
        if idx >= len(self.degree_values) or self.degree_values[idx] != degree:
            raise NullnetError(f"degree class {degree} missing from the null matrix")
        return idx


def stub_loopy_multi_null(degrees: Sequence[int]) -> DegreeClassMatrix:
    """Closed-form null matrix with per-pair expectation k k' / 2M.

    This is the large-M stub-labeled loopy-multigraph form underlying the
    standard modularity null term.
    """
    k = np.asarray(check_degrees(degrees), dtype=np.int64)
    two_m = int(k.sum())
    if two_m == 0:
        raise UndefinedStatisticError("empty degree sequence")
    values, counts = np.unique(k, return_counts=True)
    kk = values.astype(float)
    nk = counts.astype(float)
    stub_mass = nk * kk
    C = np.outer(stub_mass, stub_mass) / two_m
    # within-class edges are counted once, not per ordered pair
    np.fill_diagonal(C, stub_mass ** 2 / (2.0 * two_m))
    return DegreeClassMatrix(values, counts, C, np.zeros_like(C))


def _class_index(g: MultiGraph, matrix: DegreeClassMatrix) -> np.ndarray:
    deg = g.degrees()
    return np.array([matrix.index_of(d) for d in deg], dtype=np.int64)


def modularity(g: MultiGraph, p: Partition) -> float:
    """Standard modularity with the k_i k_j / 2M null term."""
    if len(p.assignment) != g.n:
        raise ValueError("partition does not cover the graph's vertices")
    k = np.asarray(g.degrees(), dtype=float)
    two_m = k.sum()
    if two_m == 0:
        raise UndefinedStatisticError("modularity undefined without edges")
    a = p.assignment
    pos = np.asarray(g.edge_positions(), dtype=np.int64)
    within = float(np.sum(a[pos[:, 0]] == a[pos[:, 1]]))
    comm_deg = np.zeros(p.K)
    np.add.at(comm_deg, a, k)
    return within / (two_m / 2.0) - float((comm_deg / two_m) @ (comm_deg / two_m))


def modularity_generic(g: MultiGraph, p: Partition, matrix: DegreeClassMatrix) -> float:
    """Modularity with an arbitrary degree-class null matrix."""
    if len(p.assignment) != g.n:
        raise ValueError("partition does not cover the graph's vertices")
    k = np.asarray(g.degrees(), dtype=float)
    two_m = k.sum()
    if two_m == 0:
        raise UndefinedStatisticError("modularity undefined without edges")
    cls = _class_index(g, matrix)
    epair = matrix.pair_expectation()
    a = p.assignment
    pos = np.asarray(g.edge_positions(), dtype=np.int64)
    within = float(np.sum(a[pos[:, 0]] == a[pos[:, 1]]))
    s = len(matrix.degree_values)
    counts = np.zeros((p.K, s))
    np.add.at(counts, (a, cls), 1.0)
    null_term = float(np.einsum("ca,ab,cb->", counts, epair, counts))
    return (2.0 * within - null_term) / two_m


def expected_degree_matrix(g0: MultiGraph, cfg: ChainConfig) -> DegreeClassMatrix:
    """Monte Carlo estimate of expected degree-class edge counts.

    Runs the configured chain from ``g0`` and tallies, per sample, the
    number of edges between each pair of degree classes (each edge
    instance once; self-loops on the diagonal).  Cell standard errors are
    sample standard deviations divided by sqrt(n_samples).
    """
    deg = np.asarray(g0.degrees(), dtype=np.int64)
    values, counts = np.unique(deg, return_counts=True)
    pos = {int(d): i for i, d in enumerate(values)}
    cls = np.array([pos[int(d)] for d in deg], dtype=np.int64)
    s = len(values)
    tally = np.zeros((s, s))
    tally_sq = np.zeros((s, s))

    def _tally(graph: MultiGraph) -> float:
        cur = np.zeros((s, s))
        pos = np.asarray(graph.edge_positions(), dtype=np.int64)
        a = cls[pos[:, 0]]
        b = cls[pos[:, 1]]
        np.add.at(cur, (np.minimum(a, b), np.maximum(a, b)), 1.0)
        tally[:] += cur
        tally_sq[:] += cur * cur
        return 0.0

    run_chain(g0, cfg, stat=_tally)
    n = cfg.n_samples
    mean = tally / n
    var = np.maximum(tally_sq / n - mean * mean, 0.0)
    se = np.sqrt(var / n)
    mean = mean + np.triu(mean, 1).T
    se = se + np.triu(se, 1).T
    return DegreeClassMatrix(values, counts, mean, se, n_samples=n)


# -- modularity maximization --------------------------------------------------


class _Objective:
    """Incremental modularity evaluation against a degree-class null."""

    def __init__(self, g: MultiGraph, matrix: DegreeClassMatrix):
        self.g = g
        self.two_m = float(sum(g.degrees()))
        self.cls = _class_index(g, matrix)
        self.epair = matrix.pair_expectation()
        self.s = len(matrix.degree_values)
        # per-vertex neighbor lists with multiplicities (loops separate)
        self.nbrs: list[list[tuple[int, int]]] = [[] for _ in range(g.n)]
        self.loops = np.zeros(g.n)
        for (u, v), w in g.multiplicities().items():
            if u == v:
                self.loops[u] += w
            else:
                self.nbrs[u].append((v, w))
                self.nbrs[v].append((u, w))

    def init_state(self, p: Partition):
        self.K = p.K
        self.assign = p.assignment.copy()
        self.class_counts = np.zeros((p.K, self.s))
        np.add.at(self.class_counts, (self.assign, self.cls), 1.0)
        self.within = 0.0
        for (u, v) in self.g.edge_positions():
            if self.assign[u] == self.assign[v]:
                self.within += 1.0

    def score(self) -> float:
        null_term = float(
            np.einsum("ca,ab,cb->", self.class_counts, self.epair, self.class_counts)
        )
        return (2.0 * self.within - null_term) / self.two_m

    def gain(self, v: int, target: int) -> float:
        """Change in Q if vertex v moves from its community to target."""
        src = self.assign[v]
        if target == src:
            return 0.0
        w_src = 0.0
        w_tgt = 0.0
        for (u, w) in self.nbrs[v]:
            if self.assign[u] == src:
                w_src += w
            elif self.assign[u] == target:
                w_tgt += w
        c = self.cls[v]
        row = self.epair[c]
        null_src = float(row @ self.class_counts[src]) - row[c]  # excludes v itself
        null_tgt = float(row @ self.class_counts[target])
        d_within = w_tgt - w_src
        d_null = 2.0 * (null_tgt - null_src)
        return (2.0 * d_within - d_null) / self.two_m

    def move(self, v: int, target: int) -> None:
        src = self.assign[v]
        for (u, w) in self.nbrs[v]:
            if self.assign[u] == src:
                self.within -= w
            elif self.assign[u] == target:
                self.within += w
        self.class_counts[src, self.cls[v]] -= 1.0
        self.class_counts[target, self.cls[v]] += 1.0
        self.assign[v] = target


def _resolve_objective(g: MultiGraph, objective) -> _Objective:
    if objective is None:
        objective = stub_loopy_multi_null(g.degrees())
    if not isinstance(objective, DegreeClassMatrix):
        raise TypeError("objective must be a DegreeClassMatrix or None")
    return _Objective(g, objective)


def kl_local_search(
    g: MultiGraph,
    K: int,
    init: Partition,
    objective: DegreeClassMatrix | None = None,
) -> Partition:
    """Deterministic local search over K-way partitions.

    Each iteration forces every vertex to move exactly once, always
    taking the (vertex, community) proposal with the largest gain (least
    loss); ties break on the smallest vertex index, then community id.
    Moves that would empty a community are not proposed.  The best
    partition seen during an iteration seeds the next; the search stops
    when an iteration brings no improvement.
    """
    if K < 2:
        raise ValueError("K must be at least 2")
    if K > g.n:
        raise ValueError("K cannot exceed the number of vertices")
    if init.K != K or np.any(init.sizes() == 0):
        raise ValueError("init must have exactly K non-empty communities")
    obj = _resolve_objective(g, objective)
    obj.init_state(init)
    best_assign = obj.assign.copy()
    best_q = obj.score()

    while True:
        moved = np.zeros(g.n, dtype=bool)
        sizes = np.bincount(obj.assign, minlength=K).astype(float)
        iter_best_q = -math.inf
        iter_best_assign = None
        for _ in range(g.n):
            top_gain = -math.inf
            top_move = None
            for v in range(g.n):
                if moved[v]:
                    continue
                if sizes[obj.assign[v]] <= 1:
                    continue
                for c in range(K):
                    if c == obj.assign[v]:
                        continue
                    gain = obj.gain(v, c)
                    if gain > top_gain + 1e-15:
                        top_gain = gain
                        top_move = (v, c)
            if top_move is None:
                break
            v, c = top_move
            sizes[obj.assign[v]] -= 1
            sizes[c] += 1
            obj.move(v, c)
            moved[v] = True
            q = obj.score()
            if q > iter_best_q:
                iter_best_q = q
                iter_best_assign = obj.assign.copy()
        if iter_best_assign is None or iter_best_q <= best_q + 1e-12:
            break
        best_q = iter_best_q
        best_assign = iter_best_assign
        obj.init_state(Partition(best_assign.copy(), K))
    return Partition(best_assign, K)


def greedy_agglomeration(
    g: MultiGraph,
    objective: DegreeClassMatrix | None = None,
) -> list[tuple[Partition, float]]:
    """Greedy merge trajectory from n singletons down to one community.

    At each step the merger with the largest modularity gain is applied
    (ties: lowest community-id pair).  Returns the n partitions of the
    trajectory with their modularity values.
    """
    n = g.n
    obj = _resolve_objective(g, objective)
    obj.init_state(Partition(np.arange(n, dtype=np.int64), n))
    # between-community edge weights
    between: dict[tuple[int, int], float] = {}
    for (u, v), w in g.multiplicities().items():
        if u != v:
            key = (min(u, v), max(u, v))
            between[key] = between.get(key, 0.0) + w
    counts = obj.class_counts.copy()
    epair = obj.epair
    two_m = obj.two_m
    live = list(range(n))
    assign = np.arange(n, dtype=np.int64)
    within = float(obj.within)

    def q_of() -> float:
        cc = counts[live]
        return (2.0 * within - float(np.einsum("ca,ab,cb->", cc, epair, cc))) / two_m

    trajectory = [(Partition.from_labels(assign.copy()), q_of())]
    while len(live) > 1:
        best = None
        best_gain = -math.inf
        for ia in range(len(live)):
            for ib in range(ia + 1, len(live)):
                c1, c2 = live[ia], live[ib]
                w_between = between.get((min(c1, c2), max(c1, c2)), 0.0)
                null = float(counts[c1] @ (epair @ counts[c2]))
                gain = (2.0 * w_between - 2.0 * null) / two_m
                if gain > best_gain + 1e-15:
                    best_gain = gain
                    best = (c1, c2)
        c1, c2 = best
        # merge c2 into c1
        for c in live:
            if c in (c1, c2):
                continue
            k2 = (min(c2, c), max(c2, c))
            if k2 in between:
                k1 = (min(c1, c), max(c1, c))
                between[k1] = between.get(k1, 0.0) + between.pop(k2)
        within += between.pop((min(c1, c2), max(c1, c2)), 0.0)
        counts[c1] += counts[c2]
        assign[assign == c2] = c1
        live.remove(c2)
        trajectory.append((Partition.from_labels(assign.copy()), q_of()))
    return trajectory


def nmi(p1: Partition, p2: Partition) -> float:
    """Normalized mutual information of two partitions.

    Normalization is the arithmetic mean of the two label entropies.  A
    partition with a single community has zero entropy; by convention the
    result is 0 whenever either entropy vanishes.
    """
    if len(p1.assignment) != len(p2.assignment):
        raise ValueError("partitions cover different vertex sets")
    n = len(p1.assignment)
    joint = np.zeros((p1.K, p2.K))
    np.add.at(joint, (p1.assignment, p2.assignment), 1.0)
    joint /= n
    pa = joint.sum(axis=1)
    pb = joint.sum(axis=0)
    ha = -sum(p * math.log(p) for p in pa if p > 0)
    hb = -sum(p * math.log(p) for p in pb if p > 0)
    if ha + hb == 0.0:
        return 0.0
    mi = 0.0
    for i in range(p1.K):
        for j in range(p2.K):
            if joint[i, j] > 0:
                mi += joint[i, j] * math.log(joint[i, j] / (pa[i] * pb[j]))
    return 2.0 * mi / (ha + hb)


# -- null-model hypothesis testing -------------------------------------------


@dataclass
class NullTestReport:
    """Result of comparing an observed statistic to null-model samples."""

    observed: float
    null_values: np.ndarray
    tail: str
    p_value: float
    n_samples: int
    config: ChainConfig

    def to_dict(self) -> dict:
        return {
            "observed": self.observed,
            "tail": self.tail,
            "p_value": self.p_value,
            "n_samples": self.n_samples,
            "null_mean": float(np.mean(self.null_values)),
            "null_sd": float(np.std(self.null_values)),
            "space": self.config.space.name,
            "algorithm": self.config.resolved_algorithm(),
            "seed": self.config.seed,
            "burn_in": self.config.burn_in,
            "spacing": self.config.spacing,
        }


def add_one_p_value(observed: float, null_values: np.ndarray, tail: str) -> float:
    """Add-one estimator: never 0, exactly 1/(N+1) at the extreme.

    upper: fraction of null values >= observed; lower: <=; two: twice
    the smaller one-sided value, capped at 1.
    """
    if tail not in ("upper", "lower", "two"):
        raise ValueError("tail must be 'upper', 'lower' or 'two'")
    nulls = np.asarray(null_values, dtype=float)
    n = len(nulls)
    p_up = (np.sum(nulls >= observed) + 1.0) / (n + 1.0)
    p_lo = (np.sum(nulls <= observed) + 1.0) / (n + 1.0)
    if tail == "upper":
        return float(p_up)
    if tail == "lower":
        return float(p_lo)
    return float(min(1.0, 2.0 * min(p_up, p_lo)))


def null_test(
    g0: MultiGraph,
    cfg: ChainConfig,
    stat: Callable[[MultiGraph], float],
    tail: str = "upper",
) -> NullTestReport:
    """Null-model hypothesis test of a graph statistic.

    Computes ``stat`` on the observed graph and on every chain sample,
    then reports the add-one p-value for the requested tail.
    """
    observed = float(stat(g0))
    stream = run_chain(g0, cfg, stat=stat)
    null_values = stream.values
    p = add_one_p_value(observed, null_values, tail)
    return NullTestReport(observed, null_values, tail, p, len(null_values), cfg)


# -- convergence diagnostics --------------------------------------------------


@dataclass
class DiagnosticsReport:
    """Autocorrelation, effective sample size and trace summary."""

    n: int
    mean: float
    sd: float
    acf: np.ndarray
    ess: float
    zero_variance: bool
    quantiles: dict = field(default_factory=dict)
    rhat: float | None = None


def autocorrelation(values: np.ndarray, max_lag: int | None = None) -> np.ndarray:
    """Normalized autocorrelation function (unbiased estimator, via FFT)."""
    x = np.asarray(values, dtype=float)
    n = len(x)
    if max_lag is None:
        max_lag = n - 1
    max_lag = min(max_lag, n - 1)
    x = x - x.mean()
    var = float(x @ x) / n
    if var == 0.0:
        out = np.zeros(max_lag + 1)
        out[0] = 1.0
        return out
    nfft = 1 << (2 * n - 1).bit_length()
    f = np.fft.rfft(x, nfft)
    acov = np.fft.irfft(f * np.conj(f), nfft)[: max_lag + 1]
    acov /= np.arange(n, n - max_lag - 1, -1)
    return acov / var


def effective_sample_size(values: np.ndarray) -> tuple[float, bool]:
    """ESS via paired autocorrelation sums, truncated at the first
    non-positive pair (initial-positive-sequence rule).  Returns
    (ess, zero_variance_flag); constant sequences report ess = n."""
    x = np.asarray(values, dtype=float)
    n = len(x)
    if np.var(x) == 0.0:
        return float(n), True
    acf = autocorrelation(x)
    tau = 0.0
    m = 0
    while 2 * m + 1 < len(acf):
        pair = acf[2 * m] + acf[2 * m + 1]
        if pair <= 0.0:
            break
        tau += pair
        m += 1
    denom = max(2.0 * tau - 1.0, 1e-12)
    return float(n / denom), False


def potential_scale_reduction(sequences: Sequence[np.ndarray]) -> float:
    """Multi-chain variance ratio (between/within, split-free form)."""
    chains = [np.asarray(s, dtype=float) for s in sequences]
    if len(chains) < 2:
        raise ValueError("need at least two sequences")
    n = min(len(c) for c in chains)
    chains = np.stack([c[:n] for c in chains])
    means = chains.mean(axis=1)
    w = float(np.mean(chains.var(axis=1, ddof=1)))
    b = float(n * means.var(ddof=1))
    if w == 0.0:
        return 1.0
    var_plus = (n - 1) / n * w + b / n
    return math.sqrt(var_plus / w)


def diagnostics(values, max_lag: int | None = None) -> DiagnosticsReport:
    """Convergence diagnostics on one sequence, or several.

    Accepts one sequence of >= 10 sample statistics, or a list of
    sequences; with several, the autocorrelation and ESS describe the
    concatenation chain-by-chain (ESS summed) and ``rhat`` carries the
    multi-chain variance ratio.
    """
    multi = isinstance(values, (list, tuple)) and len(values) > 0 and np.ndim(values[0]) == 1
    seqs = [np.asarray(v, dtype=float) for v in values] if multi else [np.asarray(values, dtype=float)]
    for s in seqs:
        if len(s) < 10:
            raise ValueError("need at least 10 values per sequence")
    first = seqs[0]
    if max_lag is None:
        max_lag = min(len(first) - 1, 200)
    acf = autocorrelation(first, max_lag=max_lag)
    ess_total = 0.0
    zero_var = True
    for s in seqs:
        e, z = effective_sample_size(s)
        ess_total += e
        zero_var = zero_var and z
    allv = np.concatenate(seqs)
    qs = {q: float(np.quantile(allv, q)) for q in (0.025, 0.25, 0.5, 0.75, 0.975)}
    rep = DiagnosticsReport(
        n=int(sum(len(s) for s in seqs)),
        mean=float(allv.mean()),
        sd=float(allv.std()),
        acf=acf,
        ess=float(ess_total),
        zero_variance=zero_var,
        quantiles=qs,
        rhat=potential_scale_reduction(seqs) if len(seqs) >= 2 else None,
    )
    return rep
