"""Assortativity, modularity, community detection, NMI, diagnostics."""

import itertools

import numpy as np
import pytest

from nullnet.census import enumerate_space, exact_expectation
from nullnet.direct import stub_match
from nullnet.graph import GraphSpace, MultiGraph, UndefinedStatisticError
from nullnet.rng import Xoshiro256
from nullnet.stats import (
    DegreeClassMatrix,
    Partition,
    add_one_p_value,
    autocorrelation,
    degree_assortativity,
    diagnostics,
    effective_sample_size,
    expected_degree_matrix,
    greedy_agglomeration,
    kl_local_search,
    modularity,
    modularity_generic,
    nmi,
    null_test,
    potential_scale_reduction,
    stub_loopy_multi_null,
    trait_assortativity,
)
from nullnet.swaps import ChainConfig


def stub_pair_pearson(g, values):
    """Independent oracle: Pearson correlation over the 2M ordered stub pairs."""
    xs, ys = [], []
    for (u, v) in g.edge_positions():
        xs.extend([values[u], values[v]])
        ys.extend([values[v], values[u]])
    return float(np.corrcoef(xs, ys)[0, 1])


# -- assortativity --------------------------------------------------------------


def test_four_path_assortativity():
    g = MultiGraph(4, [(0, 1), (1, 2), (2, 3)])
    assert abs(degree_assortativity(g) - (-0.5)) < 1e-12


def test_star_assortativity():
    g = MultiGraph(4, [(0, 1), (0, 2), (0, 3)])
    assert abs(degree_assortativity(g) - (-1.0)) < 1e-12


def test_regular_graph_assortativity_undefined():
    g = MultiGraph(3, [(0, 1), (1, 2), (0, 2)])
    with pytest.raises(UndefinedStatisticError):
        degree_assortativity(g)


def test_assortativity_matches_stub_pair_oracle():
    rng = Xoshiro256(42)
    checked = 0
    for _ in range(100):
        g = stub_match([4, 3, 3, 2, 2, 2, 1, 1, 1, 1, 2, 4], rng)
        r = degree_assortativity(g)
        oracle = stub_pair_pearson(g, g.degrees())
        assert abs(r - oracle) <= 1e-12 * max(1.0, abs(oracle))
        checked += 1
    assert checked == 100


def test_assortativity_invariant_under_relabeling():
    g = MultiGraph(5, [(0, 1), (1, 2), (2, 3), (3, 4), (0, 4), (1, 3), (0, 0)])
    perm = [3, 0, 4, 1, 2]
    h = MultiGraph(5, [(perm[u], perm[v]) for (u, v) in g.edge_positions()])
    assert abs(degree_assortativity(g) - degree_assortativity(h)) < 1e-12


def test_trait_assortativity_examples():
    e = MultiGraph(2, [(0, 1)])
    assert abs(trait_assortativity(e, [1.0, -1.0]) - (-1.0)) < 1e-12
    two = MultiGraph(4, [(0, 1), (2, 3)])
    assert abs(trait_assortativity(two, [1, 1, -1, -1]) - 1.0) < 1e-12
    g = MultiGraph(4, [(0, 1), (1, 2), (2, 3)])
    assert trait_assortativity(g, g.degrees()) == degree_assortativity(g)
    with pytest.raises(UndefinedStatisticError):
        trait_assortativity(g, [2, 2, 2, 2])


def test_trait_assortativity_matches_oracle_on_random_traits():
    rng = Xoshiro256(43)
    npr = np.random.default_rng(7)
    for _ in range(20):
        g = stub_match([3, 3, 2, 2, 2, 1, 1, 2], rng)
        traits = npr.normal(size=g.n)
        r = trait_assortativity(g, traits)
        assert abs(r - stub_pair_pearson(g, traits)) <= 1e-10


# -- modularity -------------------------------------------------------------------


def two_triangles():
    return MultiGraph(6, [(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)])


def test_one_community_modularity_zero():
    g = two_triangles()
    assert abs(modularity(g, Partition(np.zeros(6, dtype=int), 1))) < 1e-12


def test_two_triangles_modularity_half():
    g = two_triangles()
    p = Partition(np.array([0, 0, 0, 1, 1, 1]), 2)
    assert abs(modularity(g, p) - 0.5) < 1e-12


def test_two_disjoint_edges_modularity_half():
    g = MultiGraph(4, [(0, 1), (2, 3)])
    p = Partition(np.array([0, 0, 1, 1]), 2)
    assert abs(modularity(g, p) - 0.5) < 1e-12


def test_modularity_self_loop_convention():
    # brute-force ordered-pair sum with A_ii = 2 w_ii
    g = MultiGraph(3, [(0, 0), (0, 1), (1, 2), (2, 2)])
    p = Partition(np.array([0, 0, 1]), 2)
    k = g.degrees()
    two_m = sum(k)
    A = np.zeros((3, 3))
    for (u, v), w in g.multiplicities().items():
        if u == v:
            A[u, u] = 2 * w
        else:
            A[u, v] = A[v, u] = w
    q = sum(
        A[i, j] - k[i] * k[j] / two_m
        for i in range(3)
        for j in range(3)
        if p.assignment[i] == p.assignment[j]
    ) / two_m
    assert abs(modularity(g, p) - q) < 1e-12


def test_modularity_bounds_on_random_graphs():
    rng = Xoshiro256(9)
    npr = np.random.default_rng(3)
    for _ in range(30):
        g = stub_match([4, 3, 3, 2, 2, 2, 2, 2], rng)
        labels = npr.integers(0, 3, size=g.n)
        q = modularity(g, Partition.from_labels(labels))
        assert -1.0 - 1e-12 <= q <= 1.0 + 1e-12


def test_generic_equals_standard_under_closed_form():
    rng = Xoshiro256(10)
    npr = np.random.default_rng(4)
    for _ in range(30):
        g = stub_match([5, 4, 3, 3, 2, 2, 2, 1, 1, 1], rng)
        matrix = stub_loopy_multi_null(g.degrees())
        labels = npr.integers(0, 4, size=g.n)
        p = Partition.from_labels(labels)
        assert abs(modularity_generic(g, p, matrix) - modularity(g, p)) < 1e-12


def test_generic_modularity_missing_degree_class():
    g = MultiGraph(3, [(0, 1), (1, 2)])
    matrix = stub_loopy_multi_null([1, 1])  # only degree 1 present
    with pytest.raises(Exception, match="degree class"):
        modularity_generic(g, Partition(np.zeros(3, dtype=int), 1), matrix)


def test_closed_form_conservation():
    m = stub_loopy_multi_null([5, 4, 3, 3, 2, 2, 2, 1])
    assert abs(np.triu(m.C).sum() - sum([5, 4, 3, 3, 2, 2, 2, 1]) / 2) < 1e-12


# -- expected degree-class matrix --------------------------------------------------


def census_expected_matrix(degrees, space):
    """Exact E[C] over a small census (oracle for the estimator)."""
    census = enumerate_space(degrees, space)
    values = sorted(set(degrees))
    pos = {d: i for i, d in enumerate(values)}
    out = np.zeros((len(values), len(values)))
    probs = census.probabilities()
    for g, p in zip(census.graphs, probs):
        deg = g.degrees()
        for (u, v), w in g.multiplicities().items():
            a, b = pos[deg[u]], pos[deg[v]]
            lo, hi = min(a, b), max(a, b)
            out[lo, hi] += w * float(p)
    return out + np.triu(out, 1).T


def test_exact_expected_matrix_211():
    got = census_expected_matrix([2, 1, 1], GraphSpace(True, True, "vertex"))
    # classes [1, 2]: E[C_11] = 1/2, E[C_12] = 1, E[C_22] = 1/2
    assert np.allclose(got, [[0.5, 1.0], [1.0, 0.5]])


def test_estimator_matches_census_within_three_se():
    degrees = [2, 1, 1]
    space = GraphSpace(True, True, "vertex")
    exact = census_expected_matrix(degrees, space)
    g0 = MultiGraph(3, [(0, 1), (0, 2)])
    cfg = ChainConfig(space, n_samples=20_000, spacing=8, burn_in=100, seed=3,
                      algorithm="vertex_basic")
    est = expected_degree_matrix(g0, cfg)
    bad = np.abs(est.C - exact) > 3 * np.maximum(est.se, 1e-12)
    assert not bad.any()


def test_estimator_per_sample_conservation():
    g0 = MultiGraph(4, [(0, 1), (1, 2), (2, 3)])
    cfg = ChainConfig(GraphSpace(True, True, "stub"), n_samples=500, spacing=5,
                      burn_in=50, seed=5, algorithm="stub")
    est = expected_degree_matrix(g0, cfg)
    assert abs(np.triu(est.C).sum() - g0.M) < 1e-9


def test_stub_offdiagonal_converges_to_closed_form():
    # E[C_{k,k'}] = n_k n_k' k k' / (2M - 1) exactly on the census
    degrees = [2, 2, 1, 1]
    exact = census_expected_matrix(degrees, GraphSpace(True, True, "stub"))
    two_m = sum(degrees)
    # classes [1, 2]: n_1 = 2, n_2 = 2
    assert abs(exact[0, 1] - 2 * 2 * 1 * 2 / (two_m - 1)) < 1e-12


# -- community detection ------------------------------------------------------------


def test_kl_two_triangles_finds_optimum():
    g = two_triangles()
    best = 0.5
    for labels in [(0, 1, 0, 1, 0, 1), (0, 0, 1, 1, 0, 1), (1, 0, 0, 0, 1, 1)]:
        final = kl_local_search(g, 2, Partition(np.array(labels), 2))
        assert abs(modularity(g, final) - best) < 1e-12


def test_kl_exhaustive_optimum_check():
    g = two_triangles()
    best = max(
        modularity(g, Partition.from_labels(lab))
        for lab in itertools.product([0, 1], repeat=6)
        if len(set(lab)) == 2
    )
    assert abs(best - 0.5) < 1e-12


def test_kl_fixed_point_returns_optimal_init():
    g = two_triangles()
    opt = Partition(np.array([0, 0, 0, 1, 1, 1]), 2)
    final = kl_local_search(g, 2, opt)
    assert nmi(final, opt) == 1.0


def test_kl_never_empties_a_community():
    g = MultiGraph(5, [(0, 1), (1, 2), (2, 3), (3, 4), (0, 4)])
    init = Partition(np.array([0, 0, 1, 1, 2]), 3)
    final = kl_local_search(g, 3, init)
    assert final.K == 3 and (final.sizes() > 0).all()


def test_kl_validation():
    g = two_triangles()
    with pytest.raises(ValueError):
        kl_local_search(g, 1, Partition(np.zeros(6, dtype=int), 1))
    with pytest.raises(ValueError):
        kl_local_search(g, 7, Partition(np.zeros(6, dtype=int), 7))
    with pytest.raises(ValueError):
        kl_local_search(g, 3, Partition(np.array([0, 0, 0, 1, 1, 1]), 3))


def test_greedy_two_disjoint_edges():
    g = MultiGraph(4, [(0, 1), (2, 3)])
    traj = greedy_agglomeration(g)
    assert len(traj) == 4
    assert max(q for _, q in traj) == pytest.approx(0.5)
    # first merge joins an edge's endpoints
    first = traj[1][0]
    a = first.assignment
    assert a[0] == a[1] or a[2] == a[3]


def test_greedy_single_edge_trajectory():
    traj = greedy_agglomeration(MultiGraph(2, [(0, 1)]))
    assert [p.K for p, _ in traj] == [2, 1]
    assert traj[0][1] == pytest.approx(-0.5)
    assert traj[1][1] == pytest.approx(0.0)


def test_greedy_trajectory_length_is_n():
    g = two_triangles()
    traj = greedy_agglomeration(g)
    assert len(traj) == g.n
    assert traj[-1][0].K == 1
    assert abs(traj[-1][1]) < 1e-12


# -- NMI ------------------------------------------------------------------------------


def test_nmi_identical():
    p = Partition(np.array([0, 0, 1, 1, 2]), 3)
    q = Partition(np.array([2, 2, 0, 0, 1]), 3)
    assert nmi(p, q) == pytest.approx(1.0)


def test_nmi_single_community_is_zero():
    p = Partition(np.array([0, 0, 1, 1]), 2)
    assert nmi(p, Partition(np.zeros(4, dtype=int), 1)) == 0.0


def test_nmi_independent_labels_near_zero():
    npr = np.random.default_rng(11)
    a = Partition.from_labels(npr.integers(0, 4, size=1000))
    b = Partition.from_labels(npr.integers(0, 4, size=1000))
    assert nmi(a, b) < 0.05


# -- p-values ---------------------------------------------------------------------------


def test_add_one_p_value_boundaries():
    nulls = np.arange(99, dtype=float)
    assert add_one_p_value(1000.0, nulls, "upper") == pytest.approx(1 / 100)
    assert add_one_p_value(-5.0, nulls, "lower") == pytest.approx(1 / 100)
    assert add_one_p_value(-5.0, nulls, "upper") == pytest.approx(1.0)
    assert add_one_p_value(50.0, nulls, "two") <= 1.0


def test_null_test_constant_statistic_gives_p_one():
    g0 = MultiGraph(4, [(0, 1), (1, 2), (2, 3)])
    cfg = ChainConfig(GraphSpace(True, True, "stub"), n_samples=50, spacing=3,
                      burn_in=20, seed=1, algorithm="stub")
    report = null_test(g0, cfg, stat=lambda g: float(g.M), tail="upper")
    assert report.p_value == pytest.approx(1.0)


def test_null_test_report_fields():
    g0 = MultiGraph(4, [(0, 1), (1, 2), (2, 3)])
    cfg = ChainConfig(GraphSpace(True, True, "vertex"), n_samples=30, spacing=4,
                      burn_in=20, seed=2, algorithm="vertex_mh")
    rep = null_test(g0, cfg, stat=degree_assortativity, tail="two")
    assert rep.n_samples == 30 and 0 < rep.p_value <= 1.0
    d = rep.to_dict()
    assert d["space"] == "vertex-labeled loopy multigraph"


# -- diagnostics ---------------------------------------------------------------------------


def test_alternating_sequence_rho1():
    acf = autocorrelation(np.array([1.0, -1.0] * 50))
    assert acf[0] == pytest.approx(1.0)
    assert acf[1] == pytest.approx(-1.0)


def test_iid_ess_close_to_n():
    npr = np.random.default_rng(12)
    x = npr.normal(size=10_000)
    ess, flag = effective_sample_size(x)
    assert not flag
    assert abs(ess - 10_000) < 1_000


def test_ar1_ess_ratio():
    npr = np.random.default_rng(13)
    n = 100_000
    rho = 0.5
    x = np.empty(n)
    x[0] = 0.0
    noise = npr.normal(size=n) * np.sqrt(1 - rho ** 2)
    for t in range(1, n):
        x[t] = rho * x[t - 1] + noise[t]
    ess, _ = effective_sample_size(x)
    assert abs(ess / n - 1 / 3) < 0.05


def test_constant_sequence_flagged():
    rep = diagnostics(np.ones(50))
    assert rep.zero_variance and rep.ess == 50


def test_diagnostics_requires_ten_values():
    with pytest.raises(ValueError):
        diagnostics(np.ones(5))


def test_rhat_detects_disagreeing_chains():
    npr = np.random.default_rng(14)
    same = [npr.normal(size=500) for _ in range(4)]
    assert potential_scale_reduction(same) < 1.05
    shifted = [npr.normal(size=500), npr.normal(size=500) + 3.0]
    assert potential_scale_reduction(shifted) > 1.5
    rep = diagnostics(same)
    assert rep.rhat is not None and rep.n == 2000
