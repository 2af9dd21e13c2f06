"""Command-line surface: sampling, enumeration, null tests, modularity,
and chain diagnostics.

The graph space is always declared explicitly (``--loops/--no-loops``,
``--multiedges/--no-multiedges``, ``--labeling``); it is a modeling
judgment about the system that produced the data, and the tool refuses
to infer it.  See the README for the three questions that guide the
choice.

Every run with an output directory writes a ``manifest.json`` recording
the resolved arguments, input digest and output digests; re-running with
``--from-manifest`` reproduces the outputs bit for bit.

Exit codes: 0 success; 2 input or space violation; 3 statistic
undefined; 4 enumeration cap exceeded.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .census import enumerate_space, exact_expectation
from .direct import rejection_sample, stub_match
from .graph import (
    EdgeListParseError,
    EnumerationCapError,
    GraphSpace,
    MultiGraph,
    NotGraphicalError,
    NullnetError,
    RejectionSamplingError,
    SpaceViolationError,
    UndefinedStatisticError,
    find_space_violation,
    from_edge_list,
    havel_hakimi,
    is_connected,
    is_graphical,
    to_edge_list,
    validate_in_space,
)
from .rng import Xoshiro256
from .stats import (
    DegreeClassMatrix,
    Partition,
    degree_assortativity,
    diagnostics,
    expected_degree_matrix,
    greedy_agglomeration,
    kl_local_search,
    modularity,
    modularity_generic,
    null_test,
    nmi,
    stub_loopy_multi_null,
    trait_assortativity,
)
from .swaps import ChainConfig, ChainConfigError, run_chain, run_chains

_ALG_BY_FLAG = {"alg1": "stub", "alg2": "vertex_basic", "alg3": "vertex_mh"}


def _add_space_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--loops", action=argparse.BooleanOptionalAction, required=True,
                   help="whether the space admits self-loops")
    p.add_argument("--multiedges", action=argparse.BooleanOptionalAction, required=True,
                   help="whether the space admits multiedges")
    p.add_argument("--labeling", choices=("stub", "vertex"), required=True,
                   help="stub- or vertex-labeled space")


def _add_input_args(p: argparse.ArgumentParser, need_graph: bool) -> None:
    grp = p.add_mutually_exclusive_group(required=True)
    if not need_graph:
        grp.add_argument("--degrees", type=str, help="comma-separated degree sequence")
    grp.add_argument("--input", type=Path, help="edge-list file (u v [w] per line)")


def _add_chain_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--algorithm", choices=sorted(_ALG_BY_FLAG), default=None,
                   help="alg1: stub chain; alg2/alg3: vertex chains (default by labeling)")
    p.add_argument("--samples", type=int, default=1000)
    p.add_argument("--spacing", type=int, default=None,
                   help="swap attempts between samples (default 2M)")
    p.add_argument("--burnin", type=int, default=None,
                   help="initial swap attempts to discard (default 20 M ln(M+1))")
    p.add_argument("--seed", type=int, default=0, help="64-bit RNG seed")
    p.add_argument("--chains", type=int, default=1,
                   help="independent chains on RNG streams 0..C-1")
    p.add_argument("--triangle-loop-prob", type=float, default=None,
                   help="triangle-loop move probability (loopy spaces only)")
    p.add_argument("--progress", action="store_true",
                   help="progress lines on standard error")


def _space_from(args) -> GraphSpace:
    return GraphSpace(loops=args.loops, multiedges=args.multiedges, labeling=args.labeling)


def _parse_degrees(text: str) -> list[int]:
    try:
        return [int(tok) for tok in text.replace(",", " ").split()]
    except ValueError:
        raise NullnetError(f"could not parse degree list {text!r}") from None


def _load_graph(args, space: GraphSpace | None) -> MultiGraph:
    g = from_edge_list(args.input.read_text().splitlines())
    if space is not None and not validate_in_space(g, space):
        u, v = find_space_violation(g, space)
        lab = g.labels
        name = f"{lab[u]} {lab[v]}" if lab else f"{u} {v}"
        raise SpaceViolationError(
            f"input edge ({name}) violates the declared {space.name} space"
        )
    return g


def _initial_graph(degrees, space: GraphSpace, seed: int) -> MultiGraph:
    """Deterministic member of the space with the given degree sequence."""
    if sum(degrees) % 2 == 1:
        raise NotGraphicalError("odd degree sum: no graph exists in any space")
    if is_graphical(degrees):
        return havel_hakimi(degrees)  # simple graphs lie in every space
    rng = Xoshiro256(seed, stream=2 ** 32)  # separate from chain streams
    return rejection_sample(degrees, space, rng, max_attempts=10 ** 5)


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _digest_of_inputs(args) -> str:
    if getattr(args, "input", None):
        return _sha256(args.input)
    return hashlib.sha256(str(getattr(args, "degrees", "")).encode()).hexdigest()


def _json_dump(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def _write_manifest(outdir: Path, argv: list[str], args, outputs: list[Path]) -> None:
    manifest = {
        "tool": "nullnet",
        "version": __version__,
        "argv": argv,
        "input_digest": _digest_of_inputs(args),
        "outputs": {
            str(p.relative_to(outdir)): _sha256(p) for p in sorted(outputs)
        },
    }
    (outdir / "manifest.json").write_text(_json_dump(manifest))


_STATS = {
    "degree-assortativity": lambda g, traits: degree_assortativity(g),
    "trait-assortativity": lambda g, traits: trait_assortativity(g, traits),
}


def _load_traits(path: Path, g: MultiGraph) -> np.ndarray:
    table = {}
    for lineno, raw in enumerate(path.read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2:
            raise EdgeListParseError(f"traits line {lineno}: expected 'vertex value'")
        table[parts[0]] = float(parts[1])
    labels = g.labels if g.labels is not None else [str(i) for i in range(g.n)]
    try:
        return np.array([table[lab] for lab in labels], dtype=float)
    except KeyError as missing:
        raise NullnetError(f"traits file is missing vertex {missing}") from None


# -- subcommands ---------------------------------------------------------------


def cmd_sample(args, argv) -> int:
    space = _space_from(args)
    if args.input:
        g0 = _load_graph(args, space)
        degrees = g0.degrees()
    else:
        degrees = _parse_degrees(args.degrees)
        g0 = _initial_graph(degrees, space, args.seed)

    outdir: Path = args.out
    outdir.mkdir(parents=True, exist_ok=True)
    outputs: list[Path] = []

    if args.method in ("stub-match", "rejection"):
        if space.labeling != "stub" and not space.is_simple:
            raise ChainConfigError(
                f"--method {args.method} samples the stub-labeled space; "
                "use --labeling stub (or an MCMC chain for vertex-labeled spaces)"
            )
        if args.method == "stub-match" and not (space.loops and space.multiedges):
            raise ChainConfigError(
                "--method stub-match samples loopy multigraphs; "
                "use --method rejection for restricted spaces"
            )
        rng = Xoshiro256(args.seed)
        for s in range(args.samples):
            if args.method == "stub-match":
                g = stub_match(degrees, rng)
            else:
                g = rejection_sample(degrees, space, rng)
            path = outdir / f"sample_{s:06d}.edges"
            path.write_text("\n".join(to_edge_list(g)) + "\n")
            outputs.append(path)
        _write_manifest(outdir, argv, args, outputs)
        return 0

    cfg = ChainConfig(
        space=space,
        n_samples=args.samples,
        spacing=args.spacing,
        burn_in=args.burnin,
        seed=args.seed,
        algorithm=_ALG_BY_FLAG[args.algorithm] if args.algorithm else None,
        triangle_loop_prob=args.triangle_loop_prob,
        progress=args.progress,
    )
    traits = _load_traits(args.traits, g0) if args.traits else None
    if args.stat:
        stat = lambda g: _STATS[args.stat](g, traits)  # noqa: E731
        streams = []
        for c in range(args.chains):
            from dataclasses import replace

            sub = replace(cfg, stream=c)
            streams.append(run_chain(g0.copy(), sub, stat=stat))
        path = outdir / "stats.csv"
        with path.open("w") as fh:
            fh.write("chain,sample_index,step_count,value\n")
            for c, st in enumerate(streams):
                for i, (steps, v) in enumerate(zip(st.sample_steps, st.values)):
                    fh.write(f"{c},{i},{steps},{v!r}\n")
        outputs.append(path)
    else:
        streams = run_chains(g0, cfg, args.chains)
        for c, st in enumerate(streams):
            for i, g in enumerate(st.graphs):
                path = outdir / f"sample_c{c:02d}_{i:06d}.edges"
                path.write_text("\n".join(to_edge_list(g)) + "\n")
                outputs.append(path)
    _write_manifest(outdir, argv, args, outputs)
    return 0


def cmd_enumerate(args, argv) -> int:
    space = _space_from(args)
    degrees = _parse_degrees(args.degrees)
    census = enumerate_space(degrees, space, stub_cap=args.stub_cap)
    probs = census.probabilities()
    report = {
        "space": space.name,
        "degrees": list(census.degrees),
        "vertex_labeled_count": census.size_vertex,
        "stub_labeled_count": census.size_stub,
        "connected_fraction": str(exact_expectation(census, is_connected))
        if census.graphs else None,
        "graphs": [
            {
                "edges": [list(e) for e in g.canonical_key()],
                "stub_class_size": q,
                "probability": str(p),
            }
            for g, q, p in zip(census.graphs, census.stub_weights, probs)
        ],
    }
    text = _json_dump(report)
    if args.out:
        args.out.mkdir(parents=True, exist_ok=True)
        path = args.out / "census.json"
        path.write_text(text)
        _write_manifest(args.out, argv, args, [path])
    else:
        sys.stdout.write(text)
    return 0


def cmd_nulltest(args, argv) -> int:
    space = _space_from(args)
    g0 = _load_graph(args, space)
    traits = _load_traits(args.traits, g0) if args.traits else None
    if args.stat == "trait-assortativity" and traits is None:
        raise NullnetError("--stat trait-assortativity requires --traits FILE")
    cfg = ChainConfig(
        space=space,
        n_samples=args.samples,
        spacing=args.spacing,
        burn_in=args.burnin,
        seed=args.seed,
        algorithm=_ALG_BY_FLAG[args.algorithm] if args.algorithm else None,
        triangle_loop_prob=args.triangle_loop_prob,
        progress=args.progress,
    )
    stat = lambda g: _STATS[args.stat](g, traits)  # noqa: E731
    report = null_test(g0, cfg, stat, tail=args.tail)
    payload = report.to_dict()
    text = _json_dump(payload)
    if args.out:
        args.out.mkdir(parents=True, exist_ok=True)
        rpath = args.out / "nulltest.json"
        rpath.write_text(text)
        cpath = args.out / "null_values.csv"
        with cpath.open("w") as fh:
            fh.write("sample_index,value\n")
            for i, v in enumerate(report.null_values):
                fh.write(f"{i},{v!r}\n")
        _write_manifest(args.out, argv, args, [rpath, cpath])
    else:
        sys.stdout.write(text)
    return 0


def cmd_modularity(args, argv) -> int:
    g = _load_graph(args, None)
    if args.null == "stub-loopy-multi":
        matrix = stub_loopy_multi_null(g.degrees())
    else:
        space = _space_from(args)
        cfg = ChainConfig(
            space=space,
            n_samples=args.null_samples,
            spacing=args.spacing,
            burn_in=args.burnin,
            seed=args.seed,
            algorithm=_ALG_BY_FLAG[args.algorithm] if args.algorithm else None,
            triangle_loop_prob=args.triangle_loop_prob,
        )
        if not validate_in_space(g, space):
            u, v = find_space_violation(g, space)
            raise SpaceViolationError(
                f"input edge ({u},{v}) violates the declared {space.name} space"
            )
        matrix = expected_degree_matrix(g, cfg)

    payload: dict = {"null": args.null, "M": g.M}
    if args.partition:
        assign = _load_partition(args.partition, g)
        part = Partition.from_labels(assign)
        payload["K"] = part.K
        payload["Q"] = modularity(g, part)
        payload["Q_generic"] = modularity_generic(g, part, matrix)
    elif args.maximize == "greedy":
        traj = greedy_agglomeration(g, matrix)
        best = max(traj, key=lambda t: t[1])
        payload["method"] = "greedy"
        payload["best_Q"] = best[1]
        payload["best_K"] = best[0].K
        payload["trajectory_Q"] = [q for _, q in traj]
        payload["best_partition"] = best[0].assignment.tolist()
    else:  # kl:K
        k_comm = int(args.maximize.split(":", 1)[1])
        rng = np.random.default_rng(args.seed)
        init = _random_partition(g.n, k_comm, rng)
        final = kl_local_search(g, k_comm, init, matrix)
        payload["method"] = f"kl:{k_comm}"
        payload["Q_generic"] = modularity_generic(g, final, matrix)
        payload["Q"] = modularity(g, final)
        payload["partition"] = final.assignment.tolist()
    text = _json_dump(payload)
    if args.out:
        args.out.mkdir(parents=True, exist_ok=True)
        path = args.out / "modularity.json"
        path.write_text(text)
        _write_manifest(args.out, argv, args, [path])
    else:
        sys.stdout.write(text)
    return 0


def _load_partition(path: Path, g: MultiGraph) -> list[int]:
    table = {}
    for lineno, raw in enumerate(path.read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2:
            raise EdgeListParseError(f"partition line {lineno}: expected 'vertex community'")
        table[parts[0]] = int(parts[1])
    labels = g.labels if g.labels is not None else [str(i) for i in range(g.n)]
    try:
        return [table[lab] for lab in labels]
    except KeyError as missing:
        raise NullnetError(f"partition file is missing vertex {missing}") from None


def _random_partition(n: int, k: int, rng: np.random.Generator) -> Partition:
    """Random K-way partition with no empty community."""
    while True:
        assign = rng.integers(0, k, size=n)
        if len(np.unique(assign)) == k:
            return Partition(assign.astype(np.int64), k)


def cmd_diagnose(args, argv) -> int:
    rows = args.input.read_text().splitlines()
    header = rows[0].split(",")
    try:
        col = header.index(args.column)
    except ValueError:
        raise NullnetError(f"column {args.column!r} not found in {header}") from None
    chain_col = header.index("chain") if "chain" in header else None
    series: dict[int, list[float]] = {}
    for row in rows[1:]:
        if not row.strip():
            continue
        parts = row.split(",")
        c = int(parts[chain_col]) if chain_col is not None else 0
        series.setdefault(c, []).append(float(parts[col]))
    seqs = [np.array(series[c]) for c in sorted(series)]
    rep = diagnostics(seqs if len(seqs) > 1 else seqs[0], max_lag=args.max_lag)
    payload = {
        "n": rep.n,
        "chains": len(seqs),
        "mean": rep.mean,
        "sd": rep.sd,
        "ess": rep.ess,
        "zero_variance": rep.zero_variance,
        "quantiles": {str(k): v for k, v in rep.quantiles.items()},
        "rhat": rep.rhat,
    }
    text = _json_dump(payload)
    if args.out:
        args.out.mkdir(parents=True, exist_ok=True)
        rpath = args.out / "diagnostics.json"
        rpath.write_text(text)
        apath = args.out / "autocorrelation.csv"
        with apath.open("w") as fh:
            fh.write("lag,rho\n")
            for lag, rho in enumerate(rep.acf):
                fh.write(f"{lag},{rho!r}\n")
        _write_manifest(args.out, argv, args, [rpath, apath])
    else:
        sys.stdout.write(text)
    return 0


# -- parser --------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nullnet",
        description="Uniform degree-preserving graph sampling and null-model analysis",
    )
    parser.add_argument("--version", action="version", version=f"nullnet {__version__}")
    parser.add_argument("--from-manifest", type=Path, default=None,
                        help="re-run the command recorded in a manifest.json")
    sub = parser.add_subparsers(dest="command")

    p = sub.add_parser("sample", help="draw graphs or statistics from a configuration model")
    _add_input_args(p, need_graph=False)
    _add_space_args(p)
    _add_chain_args(p)
    p.add_argument("--method", choices=("mcmc", "stub-match", "rejection"), default="mcmc")
    p.add_argument("--stat", choices=sorted(_STATS), default=None,
                   help="stream this statistic to CSV instead of writing samples")
    p.add_argument("--traits", type=Path, default=None, help="'vertex value' per line")
    p.add_argument("--out", type=Path, required=True)
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("enumerate", help="exhaustively enumerate a small graph space")
    p.add_argument("--degrees", type=str, required=True)
    _add_space_args(p)
    p.add_argument("--stub-cap", type=int, default=14)
    p.add_argument("--out", type=Path, default=None)
    p.set_defaults(func=cmd_enumerate)

    p = sub.add_parser("nulltest", help="null-model hypothesis test of a graph statistic")
    _add_input_args(p, need_graph=True)
    _add_space_args(p)
    _add_chain_args(p)
    p.add_argument("--stat", choices=sorted(_STATS), default="degree-assortativity")
    p.add_argument("--traits", type=Path, default=None)
    p.add_argument("--tail", choices=("upper", "lower", "two"), default="upper")
    p.add_argument("--out", type=Path, default=None)
    p.set_defaults(func=cmd_nulltest)

    p = sub.add_parser("modularity", help="modularity scoring and maximization")
    _add_input_args(p, need_graph=True)
    p.add_argument("--partition", type=Path, default=None, help="'vertex community' per line")
    p.add_argument("--maximize", type=str, default=None,
                   help="'greedy' or 'kl:K' for K communities")
    p.add_argument("--null", choices=("stub-loopy-multi", "estimated"),
                   default="stub-loopy-multi")
    p.add_argument("--null-samples", type=int, default=1000)
    _add_space_args_optional(p)
    _add_chain_args(p)
    p.add_argument("--out", type=Path, default=None)
    p.set_defaults(func=cmd_modularity)

    p = sub.add_parser("diagnose", help="convergence diagnostics on a statistics CSV")
    p.add_argument("--input", type=Path, required=True)
    p.add_argument("--column", type=str, default="value")
    p.add_argument("--max-lag", type=int, default=200)
    p.add_argument("--out", type=Path, default=None)
    p.set_defaults(func=cmd_diagnose)
    return parser


def _add_space_args_optional(p: argparse.ArgumentParser) -> None:
    # --null estimated needs a declared space; stub-loopy-multi does not
    p.add_argument("--loops", action=argparse.BooleanOptionalAction, default=None)
    p.add_argument("--multiedges", action=argparse.BooleanOptionalAction, default=None)
    p.add_argument("--labeling", choices=("stub", "vertex"), default=None)


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.from_manifest:
        manifest = json.loads(args.from_manifest.read_text())
        argv = manifest["argv"]
        args = parser.parse_args(argv)
    if args.command is None:
        parser.print_help()
        return 0
    if args.command == "modularity" and args.null == "estimated":
        if args.loops is None or args.multiedges is None or args.labeling is None:
            parser.error("--null estimated requires --loops/--no-loops, "
                         "--multiedges/--no-multiedges and --labeling")
    if args.command == "modularity" and not args.partition and not args.maximize:
        parser.error("modularity needs --partition FILE or --maximize greedy|kl:K")
    try:
        return args.func(args, argv)
    except (EdgeListParseError, SpaceViolationError, NotGraphicalError,
            ChainConfigError, RejectionSamplingError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except UndefinedStatisticError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except EnumerationCapError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4
    except NullnetError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
