"""Uniform samplers, exact censuses and null-model statistics for graphs
with a fixed degree sequence, over the eight spaces spanned by
self-loops x multiedges x (stub | vertex) labeling."""

__version__ = "0.1.0"

from .graph import (
    GraphSpace,
    MultiGraph,
    NullnetError,
    EdgeListParseError,
    NotGraphicalError,
    SpaceViolationError,
    UndefinedStatisticError,
    EnumerationCapError,
    RejectionSamplingError,
    from_edge_list,
    to_edge_list,
    validate_in_space,
    is_graphical,
    havel_hakimi,
    simplify,
    is_connected,
    ALL_SPACES,
)
from .rng import Xoshiro256
from .census import SpaceCensus, enumerate_space, exact_expectation, q_factor
from .direct import rejection_sample, stub_match
from .swaps import (
    ChainConfig,
    ChainConfigError,
    SampleStream,
    SwapCase,
    classify_swap,
    run_chain,
    run_chains,
    stub_step,
    triangle_loop_step,
    vertex_basic_step,
    vertex_mh_step,
)
from .stats import (
    DegreeClassMatrix,
    DiagnosticsReport,
    NullTestReport,
    Partition,
    degree_assortativity,
    diagnostics,
    expected_degree_matrix,
    greedy_agglomeration,
    kl_local_search,
    modularity,
    modularity_generic,
    nmi,
    null_test,
    stub_loopy_multi_null,
    trait_assortativity,
)
