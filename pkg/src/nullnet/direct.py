"""Direct (non-MCMC) samplers: stub matching and rejection sampling.

Stub matching pairs the 2M stubs of a degree sequence uniformly at
random, which samples stub-labeled loopy multigraphs uniformly.
Restricting to a smaller space is done by rejection: resample until the
graph is admissible, which preserves uniformity over the stub-labeled
target space but can need exponentially many attempts on unfavorable
degree sequences, hence the explicit attempt budget.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

from . import kernels
from .graph import (
    GraphSpace,
    MultiGraph,
    RejectionSamplingError,
    check_degrees,
    validate_in_space,
)
from .rng import Xoshiro256


def stub_match(degrees: Sequence[int], rng: Xoshiro256) -> MultiGraph:
    """One uniform stub matching of the degree sequence.

    Builds the length-2M stub array, shuffles it uniformly, and pairs
    consecutive entries; equivalent to iteratively joining uniformly
    chosen stub pairs, in O(M).
    """
    k = check_degrees(degrees)
    if sum(k) % 2 == 1:
        raise ValueError("odd degree sum: stubs cannot be perfectly matched")
    stubs = [v for v, d in enumerate(k) for _ in range(d)]
    rng.shuffle(stubs)
    g = MultiGraph(len(k))
    for t in range(0, len(stubs), 2):
        g.add_edge(stubs[t], stubs[t + 1])
    return g


def stub_match_keys(degrees: Sequence[int], n_samples: int, rng: Xoshiro256) -> np.ndarray:
    """Packed canonical keys of repeated stub matchings (compiled path).

    Draw-for-draw identical to calling :func:`stub_match` n_samples
    times with the same generator.
    """
    k = check_degrees(degrees)
    if sum(k) % 2 == 1:
        raise ValueError("odd degree sum: stubs cannot be perfectly matched")
    n = len(k)
    if n and (n * n) ** (sum(k) // 2) >= 2 ** 63:
        raise ValueError("degree sequence too large for packed sample keys")
    out = np.empty(n_samples, dtype=np.int64)
    deg = np.asarray(k, dtype=np.int64)
    kernels.stub_match_keys(deg, rng.state, out)
    return out


def rejection_sample(
    degrees: Sequence[int],
    space: GraphSpace,
    rng: Xoshiro256,
    max_attempts: int = 10 ** 6,
) -> MultiGraph:
    """Stub-match until the draw lands in ``space``.

    Accepted outputs are uniform over the stub-labeled target space.
    Raises :class:`RejectionSamplingError` (carrying the attempt count)
    once the budget is exhausted, which usually signals a degree sequence
    for which rejection is impractical.
    """
    for _ in range(max_attempts):
        g = stub_match(degrees, rng)
        if validate_in_space(g, space):
            return g
    raise RejectionSamplingError(max_attempts, space)
