"""Exact small-space oracles: exhaustive censuses and stub-count factors.

A census of a graph space is built by enumerating every perfect matching
of the degree sequence's stubs (all ``(2M-1)!!`` of them), collapsing
matchings to adjacency matrices, and filtering by space membership.  The
number of matchings landing on one adjacency matrix is exactly the size
of its stub-isomorphism class, which :func:`q_factor` also computes in
closed form; the two routes are independent and cross-checked in tests.

Everything here is exact integer/rational arithmetic; sub-second up to
the default cap of 14 stubs (135,135 matchings).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import factorial
from typing import Callable, Sequence

from .graph import (
    EnumerationCapError,
    GraphSpace,
    MultiGraph,
    SpaceViolationError,
    check_degrees,
    validate_in_space,
)

DEFAULT_STUB_CAP = 14

EdgeKey = tuple[tuple[int, int], ...]


def q_factor(g: MultiGraph, s: GraphSpace) -> int:
    """Number of stub-labeled graphs sharing this adjacency matrix.

    ``prod(k_i!)`` for simple graphs, divided by ``w_ii! * 2**w_ii`` per
    vertex when loops are allowed and by ``w_ij!`` per pair when
    multiedges are allowed.  The corrections are identities (factor 1)
    whenever the structure is absent, so the value depends only on the
    graph; the space argument is a membership assertion.
    """
    if not validate_in_space(g, s):
        raise SpaceViolationError(f"graph is not a member of the {s.name} space")
    num = 1
    for k in g.degrees():
        num *= factorial(k)
    den = 1
    for (u, v), w in g.multiplicities().items():
        if u == v:
            den *= factorial(w) * (2 ** w)
        else:
            den *= factorial(w)
    q, rem = divmod(num, den)
    assert rem == 0, "stub-class size must be integral"
    return q


@dataclass
class SpaceCensus:
    """Complete list of vertex-labeled graphs in a space, with q-factors."""

    space: GraphSpace
    degrees: tuple[int, ...]
    graphs: list[MultiGraph]
    stub_weights: list[int]
    matching_counts: list[int] = field(repr=False, default_factory=list)

    @property
    def size_vertex(self) -> int:
        return len(self.graphs)

    @property
    def size_stub(self) -> int:
        return sum(self.stub_weights)

    def index(self) -> dict[EdgeKey, int]:
        return {g.canonical_key(): i for i, g in enumerate(self.graphs)}

    def probabilities(self) -> list[Fraction]:
        """Uniform-over-space probability of each graph, by labeling."""
        if self.space.labeling == "stub":
            total = self.size_stub
            return [Fraction(q, total) for q in self.stub_weights]
        n = self.size_vertex
        return [Fraction(1, n) for _ in self.graphs]


def _all_matchings(degrees: Sequence[int]):
    """Yield every perfect matching of the stub multiset as edge tuples.

    Stubs of vertex i are k_i anonymous tokens; the first open stub is
    paired with each later open stub, recursively.  Yields sorted edge
    tuples, one per matching, (2M-1)!! in total.
    """
    stubs = []
    for v, k in enumerate(degrees):
        stubs.extend([v] * k)
    m = len(stubs)
    open_ = [True] * m
    edges: list[tuple[int, int]] = []

    def rec(start: int):
        while start < m and not open_[start]:
            start += 1
        if start == m:
            yield tuple(sorted(edges))
            return
        open_[start] = False
        u = stubs[start]
        for j in range(start + 1, m):
            if not open_[j]:
                continue
            open_[j] = False
            v = stubs[j]
            edges.append((u, v) if u <= v else (v, u))
            yield from rec(start + 1)
            edges.pop()
            open_[j] = True
        open_[start] = True

    yield from rec(0)


def enumerate_space(
    degrees: Sequence[int],
    space: GraphSpace,
    stub_cap: int = DEFAULT_STUB_CAP,
) -> SpaceCensus:
    """Exhaustively enumerate the vertex-labeled graphs of a space.

    Raises :class:`EnumerationCapError` when the stub count exceeds
    ``stub_cap`` (combinatorial explosion), and ValueError on an odd stub
    count (no graph exists in any space).
    """
    k = check_degrees(degrees)
    stubs = sum(k)
    if stubs % 2 == 1:
        raise ValueError("odd degree sum: no graph exists in any space")
    if stubs > stub_cap:
        raise EnumerationCapError(
            f"{stubs} stubs exceeds the enumeration cap of {stub_cap}"
        )

    counts: dict[EdgeKey, int] = {}
    for key in _all_matchings(k):
        counts[key] = counts.get(key, 0) + 1

    graphs: list[MultiGraph] = []
    weights: list[int] = []
    matchings: list[int] = []
    for key in sorted(counts):
        g = MultiGraph(len(k), key)
        if not validate_in_space(g, space):
            continue
        graphs.append(g)
        weights.append(q_factor(g, space))
        matchings.append(counts[key])
    return SpaceCensus(space, k, graphs, weights, matchings)


def exact_expectation(census: SpaceCensus, stat: Callable[[MultiGraph], object]):
    """Exact mean of a graph statistic over the census's space.

    Vertex-labeled spaces average uniformly; stub-labeled spaces weight
    each graph by its q-factor.  Returns a Fraction when every statistic
    value is exact (bool/int/Fraction), else a float.
    """
    if not census.graphs:
        raise ValueError("census is empty; expectation undefined")
    values = [stat(g) for g in census.graphs]
    exact = all(isinstance(v, (bool, int, Fraction)) for v in values)
    if census.space.labeling == "stub":
        weights = census.stub_weights
    else:
        weights = [1] * len(values)
    total_w = sum(weights)
    if exact:
        acc = sum(Fraction(v) * w for v, w in zip(values, weights))
        return acc / total_w
    return float(sum(float(v) * w for v, w in zip(values, weights)) / total_w)
