"""Command-line interface.

Exit codes: 0 success, 1 validation/usage failure, 2 numerical failure.
Output files always start with a header row, reruns with identical flags
produce identical bytes, and nothing is written when validation fails.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import experiments, graphs, qpe, ranking
from .errors import NumericalError, ValidationError


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise _UsageError(message)


def build_parser():
    parser = _Parser(prog="netqalign", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    rank = sub.add_parser("rank", parents=[], description="Rank nodes of one graph.")
    rank.add_argument("method", choices=["pagerank", "hits", "shits"])
    rank.add_argument("--graph", required=True, help="edge list file")
    rank.add_argument("--alpha", type=float, default=0.85)
    rank.add_argument("--tol", type=float, default=ranking.DEFAULT_TOL)
    rank.add_argument("--max-iter", type=int, default=ranking.DEFAULT_MAX_ITER)
    rank.add_argument("--undirected", action="store_true",
                      help="read the edge list as undirected")
    rank.add_argument("--out", default=None, help="output CSV (default: <method>.csv)")
    rank.add_argument("--plot", action="store_true", help="render a PNG next to the CSV")
    rank.set_defaults(func=cmd_rank)

    align = sub.add_parser("align", description="Align two or more undirected graphs.")
    align.add_argument("method", choices=["isorank", "blondel", "qpe"])
    align.add_argument("--graphs", required=True, nargs="+", help="edge list files")
    align.add_argument("--alpha", type=float, default=None,
                       help="flow weight (default 0.8; 1.0 for the qpe method)")
    align.add_argument("--prior", default=None, help="prior matrix file")
    align.add_argument("--kappa", type=int, default=qpe.DEFAULT_KAPPA)
    align.add_argument("--top", type=int, default=None, help="number of pairs to emit")
    align.add_argument("--iterations", type=int, default=20,
                       help="even iteration count for the blondel method")
    align.add_argument("--mode", choices=["strict", "idealized"], default="strict",
                       help="propagator route for the qpe method")
    align.add_argument("--tol", type=float, default=ranking.DEFAULT_TOL)
    align.add_argument("--max-iter", type=int, default=ranking.DEFAULT_MAX_ITER)
    align.add_argument("--out", default="alignment.csv")
    align.add_argument("--plot", action="store_true")
    align.set_defaults(func=cmd_align)

    qpe_cmd = sub.add_parser("qpe", description="Phase estimation on one matrix.")
    qpe_cmd.add_argument("--matrix", required=True, help="matrix file")
    qpe_cmd.add_argument("--kappa", type=int, default=qpe.DEFAULT_KAPPA)
    qpe_cmd.add_argument("--init", default="uniform",
                         help="'uniform' or a matrix file holding the initial vector")
    qpe_cmd.add_argument("--mode", choices=["strict", "idealized"], default="strict")
    qpe_cmd.add_argument("--out", default="qpe_phases.csv")
    qpe_cmd.add_argument("--plot", action="store_true")
    qpe_cmd.set_defaults(func=cmd_qpe)

    exp = sub.add_parser("experiment", description="Seeded reproduction studies.")
    exp.add_argument("kind", choices=["wishart", "gap"])
    exp.add_argument("--sizes", type=int, nargs="+", default=[32])
    exp.add_argument("--trials", type=int, default=100)
    exp.add_argument("--kappa", type=int, default=qpe.DEFAULT_KAPPA)
    exp.add_argument("--kappas", type=int, nargs="+", default=[4, 6, 8],
                     help="register widths for the gap study")
    exp.add_argument("--gaps", type=float, nargs="+",
                     default=[0.25, 0.0625, 0.015625, 0.00390625],
                     help="spectral gaps for the gap study")
    exp.add_argument("--seed", type=int, default=0)
    exp.add_argument("--out", default=None, help="output CSV (default: <kind>.csv)")
    exp.add_argument("--plot", action="store_true")
    exp.set_defaults(func=cmd_experiment)

    return parser


def _read_text(path):
    return Path(path).read_text(encoding="utf-8")


def _load_graph(path, directed):
    return graphs.load_edge_list(_read_text(path), directed=directed)


def _write(path, text):
    path = Path(path)
    if path.parent != Path(""):
        path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")


def _require(cond, message):
    if not cond:
        raise ValidationError(message)


def cmd_rank(args):
    _require(0.0 <= args.alpha <= 1.0, f"--alpha must lie in [0, 1], got {args.alpha}")
    _require(args.tol > 0, "--tol must be positive")
    _require(args.max_iter >= 1, "--max-iter must be at least 1")
    g = _load_graph(args.graph, directed=not args.undirected)
    a = graphs.adjacency(g)

    if args.method == "pagerank":
        n = g.node_count
        p_hat = graphs.normalize(a, "row", dangling="redistribute")
        p_tilde = graphs.google_matrix(p_hat, args.alpha, np.full(n, 1.0 / n))
        vec = ranking.pagerank(p_tilde, tol=args.tol, max_iter=args.max_iter)
        columns = {"score": vec.values}
    elif args.method == "hits":
        auth, hub = ranking.hits(a, tol=args.tol, max_iter=args.max_iter)
        columns = {"authority": auth.values, "hub": hub.values}
    else:
        auth, hub = ranking.stochastic_hits(a, tol=args.tol, max_iter=args.max_iter)
        columns = {"authority": auth.values, "hub": hub.values}

    out = Path(args.out if args.out else f"{args.method}.csv")
    lines = ["node," + ",".join(columns)]
    for node in range(g.node_count):
        lines.append(f"{node}," + ",".join(repr(float(columns[c][node])) for c in columns))
    _write(out, "\n".join(lines) + "\n")
    if args.plot:
        from . import plots

        plots.render_scores(columns, out.with_suffix(".png"), f"{args.method} scores")
    print(f"wrote {out}")
    return 0


def cmd_align(args):
    alpha = args.alpha
    if alpha is None:
        alpha = 1.0 if args.method == "qpe" else 0.8
    _require(0.0 <= alpha <= 1.0, f"--alpha must lie in [0, 1], got {alpha}")
    _require(args.kappa >= 1, "--kappa must be at least 1")
    _require(args.top is None or args.top >= 1, "--top must be at least 1")
    _require(args.tol > 0, "--tol must be positive")
    _require(args.max_iter >= 1, "--max-iter must be at least 1")
    _require(len(args.graphs) >= 2, "at least two graphs are required")
    graph_list = [_load_graph(p, directed=False) for p in args.graphs]
    dims = [g.node_count for g in graph_list]
    prior = graphs.parse_matrix(_read_text(args.prior)) if args.prior else None

    check = None
    if args.method == "isorank":
        vec, report = ranking.isorank(
            graph_list, alpha, prior, tol=args.tol, max_iter=args.max_iter
        )
        pairs = ranking.extract_alignment(vec, dims, top=args.top)
        score_matrix = vec.values.reshape(dims) if len(dims) == 2 else None
    elif args.method == "blondel":
        _require(len(graph_list) == 2, "the blondel method aligns exactly two graphs")
        x = ranking.blondel_similarity(graph_list[0], graph_list[1], args.iterations)
        pairs = ranking.extract_alignment(x.ravel() / x.sum(), dims, top=args.top)
        score_matrix = x
    else:
        pairs, check = experiments.align_pipeline(
            graph_list, alpha, prior, kappa=args.kappa,
            symmetrize=args.mode == "strict",
            tol=args.tol, max_iter=args.max_iter, top=args.top,
        )
        score_matrix = (
            np.abs(check.quantum).reshape(dims) if len(dims) == 2 else None
        )

    out = Path(args.out)
    _write(out, ranking.alignment_csv(pairs, len(dims)))
    if check is not None:
        print(
            f"cosine={check.cosine:.6f} success_probability="
            f"{check.success_probability:.6f} flagged={check.flagged}"
        )
    if args.plot and score_matrix is not None:
        from . import plots

        plots.render_score_matrix(
            score_matrix, out.with_suffix(".png"), f"{args.method} score matrix"
        )
    print(f"wrote {out}")
    return 0


def cmd_qpe(args):
    _require(args.kappa >= 1, "--kappa must be at least 1")
    matrix = graphs.parse_matrix(_read_text(args.matrix))
    init = "uniform"
    if args.init != "uniform":
        init = graphs.parse_matrix(_read_text(args.init)).ravel()
    result = qpe.phase_estimate(matrix, args.kappa, init, mode=args.mode)
    phases = qpe.phases_csv(result)
    conditional = qpe.conditional_csv(result, 0)

    out = Path(args.out)
    vec_out = out.with_name(out.stem + "_conditional.csv")
    _write(out, phases)
    _write(vec_out, conditional)
    if args.plot:
        from . import plots

        plots.render_phase_distribution(result, out.with_suffix(".png"))
    print(
        f"wrote {out} and {vec_out} "
        f"(success_probability={result.success_probability:.6f}, "
        f"propagator_defect={result.propagator_defect:.3e})"
    )
    return 0


def cmd_experiment(args):
    _require(args.seed >= 0, "--seed must be nonnegative")
    if args.kind == "wishart":
        records = experiments.success_experiment(
            args.sizes, args.trials, kappa=args.kappa, seed=args.seed
        )
        params = {
            "kind": "wishart", "sizes": args.sizes, "trials": args.trials,
            "kappa": args.kappa, "seed": args.seed,
        }
    else:
        _require(len(args.sizes) == 1, "the gap study takes exactly one --sizes value")
        records = experiments.gap_precision_experiment(
            args.gaps, args.kappas, seed=args.seed, size=args.sizes[0]
        )
        params = {
            "kind": "gap", "gaps": args.gaps, "kappas": args.kappas,
            "size": args.sizes[0], "seed": args.seed,
        }

    out = Path(args.out if args.out else f"{args.kind}.csv")
    _write(out, experiments.records_csv(records))
    _write(out.with_suffix(".meta.jsonl"), experiments.metadata_json(**params))
    if args.plot:
        from . import plots

        if args.kind == "wishart":
            plots.render_success_records(records, out.with_name(out.stem + "_trials.png"))
            if len(args.sizes) > 1:
                plots.render_size_trend(records, out.with_name(out.stem + "_trend.png"))
        else:
            plots.render_gap_fidelity(records, out.with_name(out.stem + "_fidelity.png"))
    print(f"wrote {out} ({len(records)} records)")
    return 0


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError:
        return 1
    except SystemExit as exc:  # argparse --help
        return int(exc.code or 0)
    try:
        return args.func(args)
    except FileNotFoundError as exc:
        print(f"netqalign: error: file not found: {exc.filename}", file=sys.stderr)
        return 1
    except ValidationError as exc:
        print(f"netqalign: error: {exc}", file=sys.stderr)
        return 1
    except NumericalError as exc:
        print(f"netqalign: numerical error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
