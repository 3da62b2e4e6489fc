"""Command-line front end.

Subcommands: ``core`` (analyse an edge-list file), ``conjecture`` (run the
digraph grid and write CSV), ``simulate`` (experiment campaigns),
``recommend`` (ring-size recommendation), ``entropy`` (anonymity in nats).

Results go to stdout (or the --out file), diagnostics to stderr.  Exit
codes: 0 success, 2 usage or parse error, 3 invalid input graph.  Every
run is a deterministic function of its flags and seed; the worker count
never changes any output byte.
"""
from __future__ import annotations

import argparse
import os
import sys
from math import ceil

from . import conjecture as conj
from . import entropy as ent
from .recommend import recommend as make_recommendation
from .adversary import BlackMarbleConfig, run_campaign
from .core import BRUTE_FORCE_USER_CAP, core_report
from .errors import (
    DomainError,
    EmptyRing,
    IndexOutOfRange,
    InvalidBeta,
    NoFeasibleK,
    NotATransactionGraph,
    RinglabError,
)
from .graph import Partition, TransactionGraph, validate
from .samplers import Binomial, RandomSource, Regular, SamplerConfig

__all__ = ["main", "entrypoint", "parse_edge_list"]

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_BAD_GRAPH = 3

THREADS_ENV_VAR = "RING_LAB_THREADS"


class _ParseError(Exception):
    def __init__(self, path: str, line_no: int, message: str):
        super().__init__(f"{path}:{line_no}: {message}")


def parse_edge_list(path: str) -> TransactionGraph:
    """Read the edge-list format: header ``n_users n_rings``, then one
    ``user ring`` pair per line; ``#`` comments and blank lines ignored."""
    header: tuple[int, int] | None = None
    edges: list[tuple[int, int]] = []
    with open(path, "r", encoding="utf-8", newline=None) as fh:
        for line_no, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) != 2:
                raise _ParseError(path, line_no, f"expected two integers, got {line!r}")
            try:
                a, b = int(parts[0]), int(parts[1])
            except ValueError:
                raise _ParseError(
                    path, line_no, f"expected two integers, got {line!r}"
                ) from None
            if header is None:
                if a < 0 or b < 0:
                    raise _ParseError(path, line_no, "negative counts in header")
                header = (a, b)
            else:
                edges.append((a, b))
    if header is None:
        raise _ParseError(path, 1, "missing 'n_users n_rings' header")
    try:
        return TransactionGraph(header[0], header[1], edges)
    except (IndexOutOfRange, ValueError) as exc:
        raise _ParseError(path, 1, str(exc)) from exc
    except NotATransactionGraph:
        raise


def _fmt(value: float) -> str:
    return f"{value:.12g}"


def _resolve_threads(flag_value: int | None) -> int:
    env = os.environ.get(THREADS_ENV_VAR)
    if env is not None:
        try:
            value = int(env)
        except ValueError:
            value = 0
        if value >= 1:
            return value
    if flag_value is not None and flag_value >= 1:
        return flag_value
    return os.cpu_count() or 1


# -- core ----------------------------------------------------------------------


def _cmd_core(args: argparse.Namespace, out) -> int:
    try:
        graph = parse_edge_list(args.input)
    except _ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NotATransactionGraph as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_BAD_GRAPH
    except OSError as exc:
        print(f"cannot read {args.input}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        validate(graph)
    except (EmptyRing, NotATransactionGraph, IndexOutOfRange) as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_BAD_GRAPH
    report = core_report(graph)
    if args.format == "csv":
        out.write("ring_index,core_degree,deanonymised\n")
        deanon = {r for r, _ in report.deanonymised_rings}
        for r, degree in enumerate(report.per_ring_core_degree):
            flag = "true" if r in deanon else "false"
            out.write(f"{r},{degree},{flag}\n")
        return EXIT_OK
    out.write(f"# seed {args.seed}\n")
    out.write(
        f"graph users={graph.n_users} rings={graph.n_rings} edges={graph.edge_count}\n"
    )
    out.write(
        f"core edges={len(report.core_edges)} removed={len(report.removed_edges)}\n"
    )
    for u, r in sorted(report.removed_edges):
        out.write(f"removed_edge user={u} ring={r}\n")
    deanon = dict(report.deanonymised_rings)
    for r, degree in enumerate(report.per_ring_core_degree):
        line = f"ring index={r} core_degree={degree}"
        if r in deanon:
            line += f" deanonymised=true sole_user={deanon[r]}"
        else:
            line += " deanonymised=false"
        out.write(line + "\n")
    out.write(f"deanonymised_rings count={len(report.deanonymised_rings)}\n")
    return EXIT_OK


# -- conjecture ------------------------------------------------------------------


def _cmd_conjecture(args: argparse.Namespace, out) -> int:
    if args.trials < 1:
        print("--trials must be >= 1", file=sys.stderr)
        return EXIT_USAGE
    if args.k_min < 1 or args.k_min > args.k_max:
        print("need 1 <= --k-min <= --k-max", file=sys.stderr)
        return EXIT_USAGE
    if args.n_min < 2 or args.n_min > args.n_max:
        print("need 2 <= --n-min <= --n-max", file=sys.stderr)
        return EXIT_USAGE
    n_values = []
    n = args.n_min
    while n <= args.n_max:
        n_values.append(n)
        n *= 2
    spec = conj.GridSpec(
        k_values=tuple(range(args.k_min, args.k_max + 1)),
        n_values=tuple(n_values),
        trials=args.trials,
        seed=args.seed,
    )
    workers = _resolve_threads(args.threads)
    cells = conj.check_conjectures_grid(spec, workers=workers)
    with open(args.out, "w", encoding="utf-8", newline="") as fh:
        conj.write_grid_csv(cells, fh)
    out.write(f"# seed {args.seed}\n")
    out.write(
        f"grid k={args.k_min}..{args.k_max} n={n_values[0]}..{n_values[-1]} "
        f"trials={args.trials} cells={len(cells)}\n"
    )
    bad1 = [c for c in cells if not c.conj1_ok]
    bad2 = [c for c in cells if not c.conj2_ok]
    for c in bad1:
        out.write(f"conj1_violation k={c.k} n={c.n}\n")
    for c in bad2:
        out.write(f"conj2_violation k={c.k} n={c.n}\n")
    out.write(f"conj1_violations {len(bad1)}\n")
    out.write(f"conj2_violations {len(bad2)}\n")
    out.write(f"wrote {args.out}\n")
    return EXIT_OK


# -- simulate --------------------------------------------------------------------


def _cmd_simulate(args: argparse.Namespace, out) -> int:
    if args.trials < 1:
        print("--trials must be >= 1", file=sys.stderr)
        return EXIT_USAGE
    if (args.k is None) == (args.p is None):
        print("exactly one of --k / --p is required", file=sys.stderr)
        return EXIT_USAGE
    if args.users < 1 or args.chunk_size < 1 or args.users % args.chunk_size != 0:
        print("--chunk-size must divide --users", file=sys.stderr)
        return EXIT_USAGE
    if args.k is not None and not 0 <= args.k < args.chunk_size:
        print("need 0 <= --k < --chunk-size", file=sys.stderr)
        return EXIT_USAGE
    if args.p is not None and not 0.0 <= args.p <= 1.0:
        print("need 0 <= --p <= 1", file=sys.stderr)
        return EXIT_USAGE
    if args.adversary == "matching_count" and args.users > BRUTE_FORCE_USER_CAP:
        print(
            f"matching_count is exhaustive; --users must be <= {BRUTE_FORCE_USER_CAP}",
            file=sys.stderr,
        )
        return EXIT_USAGE
    beta = args.beta or 0.0
    try:
        marble = BlackMarbleConfig(beta) if beta > 0.0 else None
    except InvalidBeta as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_USAGE
    if not 0.0 <= beta < 1.0:
        print("need 0 <= --beta < 1", file=sys.stderr)
        return EXIT_USAGE
    partition = Partition.equal_chunks(args.users, args.chunk_size)
    kind = Regular(args.k) if args.k is not None else Binomial(args.p)
    config = SamplerConfig(partition, kind)
    result = run_campaign(
        config,
        args.users,
        args.adversary,
        args.trials,
        RandomSource(args.seed),
        marble=marble,
    )
    kind_txt = (
        f"sampler=regular k={args.k}" if args.k is not None else f"sampler=binomial p={_fmt(args.p)}"
    )
    out.write(f"# seed {args.seed}\n")
    out.write(
        f"simulate users={args.users} chunk_size={args.chunk_size} {kind_txt} "
        f"adversary={args.adversary} trials={args.trials} beta={_fmt(beta)}\n"
    )
    s = result.success
    out.write(
        f"success trials={s.trials} successes={s.failures} estimate={_fmt(s.estimate)} "
        f"ci_low={_fmt(s.ci_low)} ci_high={_fmt(s.ci_high)}\n"
    )
    c = result.core_mismatch
    out.write(
        f"core_mismatch trials={c.trials} mismatches={c.failures} estimate={_fmt(c.estimate)} "
        f"ci_low={_fmt(c.ci_low)} ci_high={_fmt(c.ci_high)}\n"
    )
    return EXIT_OK


# -- recommend -------------------------------------------------------------------


def _cmd_recommend(args: argparse.Namespace, out) -> int:
    if (args.chunks is None) != (args.chunk_size is None):
        print("--chunks and --chunk-size must be given together", file=sys.stderr)
        return EXIT_USAGE
    beta = args.beta or 0.0
    try:
        result = make_recommendation(
            args.users, beta=beta, n_chunks=args.chunks, chunk_size=args.chunk_size
        )
        k_numeric: int | str | None = result.k_numeric
    except NoFeasibleK:
        result = None
        k_numeric = "infeasible"
    except (DomainError, InvalidBeta) as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_USAGE
    if result is None:
        # chunk geometry admits no feasible k; still report the closed form
        try:
            base = make_recommendation(args.users, beta=beta)
        except (DomainError, InvalidBeta) as exc:
            print(str(exc), file=sys.stderr)
            return EXIT_USAGE
        result = base
    k = result.k_closed_form
    if args.csv:
        out.write("users,beta,n_chunks,chunk_size,k_closed_form,k_numeric,security\n")
        row = [
            str(args.users),
            _fmt(beta),
            "" if args.chunks is None else str(args.chunks),
            "" if args.chunk_size is None else str(args.chunk_size),
            str(k),
            "" if k_numeric is None else str(k_numeric),
            _fmt(result.target_security),
        ]
        out.write(",".join(row) + "\n")
        return EXIT_OK
    out.write(f"# seed {args.seed}\n")
    out.write(f"recommend users={args.users} beta={_fmt(beta)}\n")
    if beta > 0.0:
        out.write(f"k_closed_form {k} (heuristic corrupted-user adjustment)\n")
    else:
        out.write(f"k_closed_form {k}\n")
    out.write(f"security 2/{k + 1} = {_fmt(result.target_security)}\n")
    if args.chunks is not None:
        out.write(
            f"chunks n_chunks={args.chunks} chunk_size={args.chunk_size}\n"
        )
        out.write(f"k_numeric {k_numeric}\n")
    return EXIT_OK


# -- entropy ---------------------------------------------------------------------


def _parse_weights_file(path: str, expected: int) -> ent.SignerDistribution:
    weights: list[float] = []
    with open(path, "r", encoding="utf-8", newline=None) as fh:
        for line_no, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            try:
                weights.append(float(line))
            except ValueError:
                raise _ParseError(path, line_no, f"expected a number, got {line!r}") from None
    if len(weights) != expected:
        raise _ParseError(path, 1, f"expected {expected} weights, got {len(weights)}")
    try:
        return ent.SignerDistribution(weights)
    except RinglabError as exc:
        raise _ParseError(path, 1, str(exc)) from exc


def _cmd_entropy(args: argparse.Namespace, out) -> int:
    if (args.k is None) == (args.p is None):
        print("exactly one of --k / --p is required", file=sys.stderr)
        return EXIT_USAGE
    if args.chunk_size < 1:
        print("--chunk-size must be >= 1", file=sys.stderr)
        return EXIT_USAGE
    if args.k is not None and not 1 <= args.k < args.chunk_size:
        print("need 1 <= --k < --chunk-size", file=sys.stderr)
        return EXIT_USAGE
    if args.p is not None and not 0.0 <= args.p <= 1.0:
        print("need 0 <= --p <= 1", file=sys.stderr)
        return EXIT_USAGE
    partition = Partition.single(args.chunk_size)
    kind = Regular(args.k) if args.k is not None else Binomial(args.p)
    config = SamplerConfig(partition, kind)
    if args.weights is not None:
        try:
            dist = _parse_weights_file(args.weights, args.chunk_size)
        except _ParseError as exc:
            print(f"parse error: {exc}", file=sys.stderr)
            return EXIT_USAGE
        except OSError as exc:
            print(f"cannot read {args.weights}: {exc}", file=sys.stderr)
            return EXIT_USAGE
        weights_txt = args.weights
    else:
        dist = ent.SignerDistribution.uniform(args.chunk_size)
        weights_txt = "uniform"
    deviation = ent.DistributionDeviation.from_distribution(partition, dist)
    kind_txt = f"sampler=regular k={args.k}" if args.k is not None else f"sampler=binomial p={_fmt(args.p)}"
    out.write(f"# seed {args.seed}\n")
    out.write(f"entropy chunk_size={args.chunk_size} {kind_txt} weights={weights_txt}\n")
    if args.k is not None:
        bound = ent.anonymity_bound_regular(args.k, deviation)
        out.write(f"alpha_bound_nats {_fmt(bound)} (k={args.k})\n")
    else:
        # largest integer k with k < p * chunk_size
        k_bound = ceil(args.p * args.chunk_size) - 1
        if k_bound >= 1:
            bound = ent.anonymity_bound_binomial(k_bound, deviation, config)
            out.write(f"alpha_bound_nats {_fmt(bound)} (k={k_bound})\n")
        else:
            out.write("alpha_bound_nats unavailable (p*chunk_size <= 1)\n")
    if args.exact:
        try:
            alpha = ent.anonymity_exact(config, dist)
        except RinglabError as exc:
            print(str(exc), file=sys.stderr)
            return EXIT_USAGE
        out.write(f"alpha_exact_nats {_fmt(alpha)}\n")
    return EXIT_OK


# -- parser ----------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ringlab",
        description="Graph-analysis resistance of ring samplers: cores, experiments, "
        "digraph Monte Carlo, recommendations, and anonymity entropy.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_core = sub.add_parser("core", help="core analysis of an edge-list file")
    p_core.add_argument("input", help="edge-list file (header 'n_users n_rings')")
    p_core.add_argument("--format", choices=("text", "csv"), default="text")
    p_core.add_argument("--seed", type=int, default=0)
    p_core.add_argument("--out", default=None, help="write output here instead of stdout")

    p_conj = sub.add_parser("conjecture", help="digraph connectivity grid -> CSV")
    p_conj.add_argument("--k-min", type=int, default=1)
    p_conj.add_argument("--k-max", type=int, default=16)
    p_conj.add_argument("--n-min", type=int, default=4)
    p_conj.add_argument("--n-max", type=int, default=4096)
    p_conj.add_argument("--trials", type=int, default=8000)
    p_conj.add_argument("--seed", type=int, default=0)
    p_conj.add_argument("--out", default="conjecture.csv")
    p_conj.add_argument("--threads", type=int, default=None)

    p_sim = sub.add_parser("simulate", help="adversary success experiment campaign")
    p_sim.add_argument("--users", type=int, required=True)
    p_sim.add_argument("--chunk-size", type=int, required=True)
    p_sim.add_argument("--k", type=int, default=None)
    p_sim.add_argument("--p", type=float, default=None)
    p_sim.add_argument(
        "--adversary", choices=("trivial", "core", "matching_count"), default="trivial"
    )
    p_sim.add_argument("--trials", type=int, default=10000)
    p_sim.add_argument("--beta", type=float, default=None)
    p_sim.add_argument("--seed", type=int, default=0)
    p_sim.add_argument("--out", default=None)

    p_rec = sub.add_parser("recommend", help="ring-size recommendation")
    p_rec.add_argument("--users", type=int, required=True)
    p_rec.add_argument("--beta", type=float, default=None)
    p_rec.add_argument("--chunks", type=int, default=None)
    p_rec.add_argument("--chunk-size", type=int, default=None)
    p_rec.add_argument("--csv", action="store_true")
    p_rec.add_argument("--seed", type=int, default=0)
    p_rec.add_argument("--out", default=None)

    p_ent = sub.add_parser("entropy", help="anonymity of one chunk in nats")
    p_ent.add_argument("--chunk-size", type=int, required=True)
    p_ent.add_argument("--k", type=int, default=None)
    p_ent.add_argument("--p", type=float, default=None)
    p_ent.add_argument("--weights", default=None, help="file with one weight per line")
    p_ent.add_argument("--exact", action="store_true")
    p_ent.add_argument("--seed", type=int, default=0)
    p_ent.add_argument("--out", default=None)

    return parser


_COMMANDS = {
    "core": _cmd_core,
    "conjecture": _cmd_conjecture,
    "simulate": _cmd_simulate,
    "recommend": _cmd_recommend,
    "entropy": _cmd_entropy,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code else EXIT_OK
    handler = _COMMANDS[args.command]
    out_path = getattr(args, "out", None) if args.command != "conjecture" else None
    try:
        if out_path:
            with open(out_path, "w", encoding="utf-8", newline="") as fh:
                return handler(args, fh)
        return handler(args, sys.stdout)
    except RinglabError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_USAGE


def entrypoint() -> None:
    sys.exit(main())
