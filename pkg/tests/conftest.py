"""Shared fixtures and helpers for the test suite."""

from __future__ import annotations

from collections import Counter

import numpy as np
import pytest
from scipy.stats import chisquare

from nullnet.census import SpaceCensus, enumerate_space
from nullnet.graph import GraphSpace
from nullnet.swaps import ChainConfig, packed_key, run_chain_keys

# Degree sequences with at most 12 stubs used throughout the statistical
# tests; the catalog mixes odd/even degrees, forced loops, forced
# multiedges, and multi-self-loop states.
CATALOG = [
    (2, 1, 1),
    (1, 1, 1, 1),
    (2, 2, 1, 1),
    (3, 1, 1, 1),
    (2, 2, 2),
    (3, 3, 2),
    (4, 2, 2),
    (2, 2, 2, 2),
    (3, 2, 2, 1),
    (3, 3, 3, 3),
]


def census_probs(census: SpaceCensus) -> dict[int, float]:
    """Packed key -> exact stationary probability for the census's space."""
    n = len(census.degrees)
    return {
        packed_key(g.canonical_key(), n): float(p)
        for g, p in zip(census.graphs, census.probabilities())
    }


def chain_counts(census: SpaceCensus, algorithm: str, n_samples: int, seed: int,
                 spacing_mult: int | None = None, tri: float | None = None) -> Counter:
    """Sample the census's space by MCMC and count visits per graph key.

    Starts from the first census graph.  Loopy no-multiedge spaces use a
    higher triangle-move rate and wider spacing because only triangle
    moves connect parts of those spaces.
    """
    space = census.space
    g0 = census.graphs[0].copy()
    loopy_only = space.loops and not space.multiedges
    if spacing_mult is None:
        spacing_mult = 30 if loopy_only else 4
    if tri is None:
        tri = 0.3 if loopy_only else 0.0
    cfg = ChainConfig(
        space=space,
        n_samples=n_samples,
        spacing=spacing_mult * g0.M,
        burn_in=200 * g0.M,
        seed=seed,
        algorithm=algorithm,
        triangle_loop_prob=tri,
    )
    keys = run_chain_keys(g0, cfg)
    return Counter(keys.tolist())


def gof_pvalue(counts: Counter, probs: dict[int, float]) -> float:
    """Chi-square goodness of fit of observed counts vs exact probabilities."""
    assert set(counts) <= set(probs), "sampler visited a graph outside the census"
    n = sum(counts.values())
    keys = sorted(probs)
    obs = np.array([counts.get(k, 0) for k in keys], dtype=float)
    exp = np.array([probs[k] * n for k in keys])
    if len(keys) == 1:
        return 1.0
    return float(chisquare(obs, exp).pvalue)


def two_sample_pvalue(c1: Counter, c2: Counter) -> float:
    """Two-sample chi-square homogeneity test on graph-key counts."""
    keys = sorted(set(c1) | set(c2))
    if len(keys) == 1:
        return 1.0
    a = np.array([c1.get(k, 0) for k in keys], dtype=float)
    b = np.array([c2.get(k, 0) for k in keys], dtype=float)
    tot = a + b
    na, nb = a.sum(), b.sum()
    stat = 0.0
    for i in range(len(keys)):
        for obs, n in ((a[i], na), (b[i], nb)):
            e = tot[i] * n / (na + nb)
            stat += (obs - e) ** 2 / e
    from scipy.stats import chi2

    return float(chi2.sf(stat, df=len(keys) - 1))


@pytest.fixture(scope="session")
def small_censuses() -> dict[tuple, SpaceCensus]:
    """All non-empty censuses for the catalog sequences and eight spaces."""
    out = {}
    for degs in CATALOG:
        for loops in (False, True):
            for multi in (False, True):
                for lab in ("stub", "vertex"):
                    space = GraphSpace(loops, multi, lab)
                    census = enumerate_space(degs, space)
                    if census.graphs:
                        out[(degs, loops, multi, lab)] = census
    return out
