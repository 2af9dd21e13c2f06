"""Graph data model, degree-sequence utilities and space membership.

The central object is :class:`MultiGraph`, an undirected multigraph with
integer edge multiplicities and self-loop support.  Degree convention: a
self-loop contributes 2 to its vertex's degree and counts as one edge, so
the stub identity ``sum(degrees) == 2 * M`` always holds.

A :class:`GraphSpace` declares which structures are legal (self-loops,
multiedges) and whether the space is stub- or vertex-labeled.  Membership
is purely structural: the labeling only changes which distribution is
"uniform" over the space, never which graphs belong to it.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence


class NullnetError(Exception):
    """Base class for errors raised by this package."""


class EdgeListParseError(NullnetError):
    """Malformed edge-list input; message carries the line number."""


class NotGraphicalError(NullnetError):
    """Degree sequence cannot be realized by a simple graph."""


class SpaceViolationError(NullnetError):
    """Graph contains a structure its declared space forbids."""


class UndefinedStatisticError(NullnetError):
    """Statistic is undefined for this input (e.g. zero variance)."""


class EnumerationCapError(NullnetError):
    """Exhaustive enumeration refused: stub count above the cap."""


class RejectionSamplingError(NullnetError):
    """Rejection sampler exhausted its attempt budget."""

    def __init__(self, attempts: int, space: "GraphSpace"):
        self.attempts = attempts
        super().__init__(
            f"no admissible graph for {space.name} after {attempts} attempts"
        )


@dataclass(frozen=True)
class GraphSpace:
    """One of the eight graph spaces: structure flags plus labeling."""

    loops: bool
    multiedges: bool
    labeling: str  # "stub" or "vertex"

    def __post_init__(self):
        if self.labeling not in ("stub", "vertex"):
            raise ValueError(f"labeling must be 'stub' or 'vertex', got {self.labeling!r}")

    @property
    def name(self) -> str:
        if self.loops and self.multiedges:
            kind = "loopy multigraph"
        elif self.loops:
            kind = "loopy graph"
        elif self.multiedges:
            kind = "multigraph"
        else:
            kind = "simple graph"
        return f"{self.labeling}-labeled {kind}"

    @property
    def is_simple(self) -> bool:
        return not self.loops and not self.multiedges


ALL_SPACES = tuple(
    GraphSpace(loops, multi, labeling)
    for loops in (False, True)
    for multi in (False, True)
    for labeling in ("stub", "vertex")
)


def check_degrees(degrees: Sequence[int]) -> tuple[int, ...]:
    """Validate a degree sequence: integral and non-negative."""
    out = []
    for i, d in enumerate(degrees):
        if d != int(d) or d < 0:
            raise ValueError(f"degree #{i} is {d!r}; degrees must be non-negative integers")
        out.append(int(d))
    return tuple(out)


class MultiGraph:
    """Mutable undirected multigraph over dense vertex ids ``0..n-1``.

    Two mutually consistent views are maintained: a multiplicity map
    ``(i, j) -> w`` with ``i <= j``, and a position list with one entry per
    edge instance (a multiplicity-w edge appears w times, a self-loop once
    per loop).  The position list makes uniform edge sampling O(1).
    """

    __slots__ = ("n", "_mult", "_edges", "labels")

    def __init__(self, n: int, edges: Iterable[tuple[int, int]] = (), labels=None):
        if n < 0:
            raise ValueError("vertex count must be non-negative")
        self.n = n
        self._mult: dict[tuple[int, int], int] = {}
        self._edges: list[tuple[int, int]] = []
        self.labels: list[str] | None = list(labels) if labels is not None else None
        for u, v in edges:
            self.add_edge(u, v)

    # -- construction / mutation ------------------------------------------

    def add_edge(self, u: int, v: int, w: int = 1) -> None:
        if not (0 <= u < self.n and 0 <= v < self.n):
            raise ValueError(f"edge ({u},{v}) references a vertex outside 0..{self.n - 1}")
        if w < 1:
            raise ValueError(f"multiplicity must be >= 1, got {w}")
        key = (u, v) if u <= v else (v, u)
        self._mult[key] = self._mult.get(key, 0) + w
        self._edges.extend([key] * w)

    def copy(self) -> "MultiGraph":
        g = MultiGraph(self.n)
        g._mult = dict(self._mult)
        g._edges = list(self._edges)
        g.labels = list(self.labels) if self.labels is not None else None
        return g

    # -- views -------------------------------------------------------------

    @property
    def M(self) -> int:
        """Total number of edge instances."""
        return len(self._edges)

    def multiplicity(self, u: int, v: int) -> int:
        key = (u, v) if u <= v else (v, u)
        return self._mult.get(key, 0)

    def multiplicities(self) -> dict[tuple[int, int], int]:
        return dict(self._mult)

    def edge_positions(self) -> list[tuple[int, int]]:
        return list(self._edges)

    def degrees(self) -> list[int]:
        deg = [0] * self.n
        for (u, v), w in self._mult.items():
            if u == v:
                deg[u] += 2 * w
            else:
                deg[u] += w
                deg[v] += w
        return deg

    def canonical_key(self) -> tuple[tuple[int, int], ...]:
        """Sorted edge multiset; identifies the vertex-labeled graph."""
        return tuple(sorted(self._edges))

    def has_self_loop(self) -> bool:
        return any(u == v for (u, v) in self._mult)

    def has_multiedge(self) -> bool:
        """True if some vertex pair (i != j) carries multiplicity >= 2."""
        return any(w >= 2 for (u, v), w in self._mult.items() if u != v)

    def __eq__(self, other) -> bool:
        if not isinstance(other, MultiGraph):
            return NotImplemented
        return self.n == other.n and self._mult == other._mult

    def __hash__(self):
        return hash((self.n, self.canonical_key()))

    def __repr__(self) -> str:
        return f"MultiGraph(n={self.n}, M={self.M})"

    def check_consistent(self) -> None:
        """Assert the multiplicity map and position list agree."""
        from collections import Counter

        counted = Counter(self._edges)
        mult = {k: w for k, w in self._mult.items() if w != 0}
        if counted != Counter(mult):
            raise AssertionError("edge positions and multiplicity map disagree")
        if any(not (u <= v) for (u, v) in self._edges):
            raise AssertionError("edge positions are not normalized")


def validate_in_space(g: MultiGraph, s: GraphSpace) -> bool:
    """True iff ``g`` contains no structure the space forbids.

    Multiedge legality constrains distinct endpoints only; the number of
    self-loops at a single vertex is governed by the loops flag alone.
    """
    if not s.loops and g.has_self_loop():
        return False
    if not s.multiedges and g.has_multiedge():
        return False
    return True


def find_space_violation(g: MultiGraph, s: GraphSpace) -> tuple[int, int] | None:
    """Return one offending edge (for error messages), or None."""
    for (u, v), w in sorted(g.multiplicities().items()):
        if not s.loops and u == v and w >= 1:
            return (u, v)
        if not s.multiedges and u != v and w >= 2:
            return (u, v)
    return None


# -- edge-list text I/O -----------------------------------------------------


_MAX_NUMERIC_ID = 50_000_000


def from_edge_list(lines: Iterable[str], n_hint: int | None = None) -> MultiGraph:
    """Parse a whitespace-separated edge list into a MultiGraph.

    Each non-comment line is ``u v`` or ``u v w`` with integer ``w >= 1``.
    When every vertex token is a non-negative integer, tokens are used as
    vertex indices directly (so serialization round-trips exactly);
    otherwise tokens are mapped to dense indices in first-seen order.
    The token-to-index mapping is retained in ``labels``.
    """
    tokens: list[tuple[str, str, int, int]] = []
    for lineno, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) not in (2, 3):
            raise EdgeListParseError(
                f"line {lineno}: expected 'u v' or 'u v w', got {raw.strip()!r}"
            )
        w = 1
        if len(parts) == 3:
            try:
                w = int(parts[2])
            except ValueError:
                raise EdgeListParseError(
                    f"line {lineno}: multiplicity {parts[2]!r} is not an integer"
                ) from None
            if w < 1:
                raise EdgeListParseError(
                    f"line {lineno}: multiplicity must be >= 1, got {w}"
                )
        tokens.append((parts[0], parts[1], w, lineno))

    all_numeric = all(
        u.isdigit() and v.isdigit() for (u, v, _, _) in tokens
    ) and tokens
    index: dict[str, int] = {}
    if all_numeric:
        top = max(max(int(u), int(v)) for (u, v, _, _) in tokens)
        if top > _MAX_NUMERIC_ID:
            raise EdgeListParseError(f"numeric vertex id {top} is implausibly large")
        for i in range(top + 1):
            index[str(i)] = i
    else:
        for (u, v, _, _) in tokens:
            for tok in (u, v):
                if tok not in index:
                    index[tok] = len(index)

    n = len(index)
    if n_hint is not None:
        if n_hint < n:
            raise EdgeListParseError(f"n_hint={n_hint} but {n} vertices required")
        for extra in range(n, n_hint):
            index[str(extra)] = extra
        n = n_hint

    labels = [None] * n
    for tok, i in index.items():
        labels[i] = tok
    g = MultiGraph(n, labels=labels)
    for u, v, w, _ in tokens:
        g.add_edge(index[u], index[v], w)
    return g


def to_edge_list(g: MultiGraph, use_labels: bool = False) -> list[str]:
    """Serialize as one 'u v w' line per distinct vertex pair."""
    out = []
    for (u, v), w in sorted(g.multiplicities().items()):
        if use_labels and g.labels is not None:
            out.append(f"{g.labels[u]} {g.labels[v]} {w}")
        else:
            out.append(f"{u} {v} {w}")
    return out


# -- degree-sequence utilities ----------------------------------------------


def is_graphical(degrees: Sequence[int]) -> bool:
    """Erdos-Gallai test: can a simple graph realize this sequence?"""
    k = sorted(check_degrees(degrees), reverse=True)
    n = len(k)
    if sum(k) % 2 == 1:
        return False
    if n and k[0] >= n:
        return False
    prefix = 0
    for j in range(1, n + 1):
        prefix += k[j - 1]
        tail = sum(min(d, j) for d in k[j:])
        if prefix > j * (j - 1) + tail:
            return False
    return True


def havel_hakimi(degrees: Sequence[int]) -> MultiGraph:
    """Build one simple graph with the given degree sequence.

    Deterministic: at every step the highest-residual vertex (smallest
    index on ties) is wired to the next-highest residual vertices.  Raises
    :class:`NotGraphicalError` naming the failed condition otherwise.
    """
    k = check_degrees(degrees)
    n = len(k)
    if sum(k) % 2 == 1:
        raise NotGraphicalError("degree sum is odd")
    g = MultiGraph(n)
    residual = list(k)
    while True:
        order = sorted(range(n), key=lambda i: (-residual[i], i))
        u = order[0]
        d = residual[u]
        if d == 0:
            break
        targets = [i for i in order[1:] if residual[i] > 0][:d]
        if len(targets) < d:
            raise NotGraphicalError(
                f"vertex with residual degree {d} has only {len(targets)} "
                "available partners (Erdos-Gallai condition fails)"
            )
        residual[u] = 0
        for v in targets:
            residual[v] -= 1
            if residual[v] < 0:
                raise NotGraphicalError("residual degree went negative")
            g.add_edge(u, v)
    return g


def simplify(g: MultiGraph, drop_loops: bool = True, cap_multiedges: bool = True) -> MultiGraph:
    """Copy with self-loops removed and/or multiplicities capped at one."""
    out = MultiGraph(g.n, labels=g.labels)
    for (u, v), w in sorted(g.multiplicities().items()):
        if u == v:
            if not drop_loops:
                out.add_edge(u, v, w)
        else:
            out.add_edge(u, v, 1 if cap_multiedges else w)
    return out


def is_connected(g: MultiGraph) -> bool:
    """Single connected component covering all n vertices.

    Degree-zero vertices count as their own components, so any graph with
    an isolated vertex (and n > 1) is disconnected.
    """
    if g.n <= 1:
        return True
    parent = list(range(g.n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for (u, v) in g.multiplicities():
        ru, rv = find(u), find(v)
        if ru != rv:
            parent[ru] = rv
    root = find(0)
    return all(find(i) == root for i in range(g.n))
