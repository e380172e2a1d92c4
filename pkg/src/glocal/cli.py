"""Command-line entry points.

    glocal bench    discovery-curve benchmark over datasets x methods x seeds
    glocal toy      2-D demo artifacts: grids before/after priming and feedback
    glocal explain  offline explanation for one instance of a saved session
    glocal serve    HTTP session service for the analyst UI
"""

import argparse
import json
import logging
import sys
from pathlib import Path

from . import relevance
from .bench import BenchConfig, METHODS, format_summary, run_bench
from .datasets import make_toy, standardize
from .explain import describe_regions, fit_rule_tree, relevance_assignment
from .grids import evaluate_grid, grid_axes, write_grid_csv
from .loda import build_ensemble
from .objective import LossConfig
from .service import explanation_payload
from .session import OracleAnalyst, run_session, start_session, write_trace
from .snapshots import load_session, save_session

logger = logging.getLogger(__name__)


def _parse_seeds(text):
    """'0,3,7' lists seeds explicitly; a single integer N means 0..N-1."""
    parts = [p.strip() for p in str(text).split(",") if p.strip()]
    if not parts:
        raise argparse.ArgumentTypeError("empty seed list")
    values = []
    for p in parts:
        try:
            values.append(int(p))
        except ValueError:
            raise argparse.ArgumentTypeError("bad seed %r" % p)
    if len(values) == 1 and "," not in str(text):
        n = values[0]
        if n <= 0:
            raise argparse.ArgumentTypeError("seed count must be positive")
        return tuple(range(n))
    return tuple(values)


def _parse_methods(text):
    methods = tuple(p.strip() for p in text.split(",") if p.strip())
    for m in methods:
        if m not in METHODS:
            raise argparse.ArgumentTypeError(
                "unknown method %r (choose from %s)" % (m, ", ".join(METHODS)))
    return methods


def build_parser():
    parser = argparse.ArgumentParser(
        prog="glocal",
        description="Glocalized anomaly detection with analyst feedback.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("bench", help="run the discovery-curve benchmark")
    p.add_argument("--dataset", action="append", required=True,
                   help="built-in name (toy, abalone, yeast) or CSV path; repeatable")
    p.add_argument("--methods", type=_parse_methods, default=METHODS,
                   help="comma list from: %s" % ", ".join(METHODS))
    p.add_argument("--projections", type=int, default=15,
                   help="ensemble members M (default 15)")
    p.add_argument("--budget", type=int, default=60)
    p.add_argument("--tau", type=float, default=0.03)
    p.add_argument("--bias", type=float, default=0.5)
    p.add_argument("--lambda", dest="lambda_prior", type=float, default=1.0)
    p.add_argument("--seeds", type=_parse_seeds, default=tuple(range(10)),
                   help="comma list of seeds, or a count N for 0..N-1")
    p.add_argument("--out", default="bench_out")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("toy", help="emit 2-D demo grids, rules, and a snapshot")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--budget", type=int, default=30)
    p.add_argument("--projections", type=int, default=4)
    p.add_argument("--tau", type=float, default=0.03)
    p.add_argument("--bias", type=float, default=0.5)
    p.add_argument("--lambda", dest="lambda_prior", type=float, default=1.0)
    p.add_argument("--out", default="toy_out")
    p.set_defaults(func=cmd_toy)

    p = sub.add_parser("explain", help="explain one instance of a saved session")
    p.add_argument("snapshot", help="session snapshot JSON")
    p.add_argument("index", type=int, help="instance index")
    p.add_argument("--k", type=int, default=2, help="surrogate terms to keep")
    p.add_argument("--json", action="store_true", dest="as_json")
    p.set_defaults(func=cmd_explain)

    p = sub.add_parser("serve", help="run the HTTP session service")
    p.add_argument("--serve-addr", default="127.0.0.1:8765", help="host:port")
    p.add_argument("--snapshot-dir", default="snapshots")
    p.add_argument("--dataset-dir", default=None,
                   help="directory of extra CSV datasets")
    p.set_defaults(func=cmd_serve)
    return parser


def cmd_bench(args):
    datasets = []
    for entry in args.dataset:
        datasets.extend(p.strip() for p in entry.split(",") if p.strip())
    cfg = BenchConfig(datasets=datasets, methods=args.methods,
                      n_members=args.projections, budget=args.budget,
                      tau=args.tau, bias=args.bias,
                      lambda_prior=args.lambda_prior, seeds=args.seeds,
                      out_dir=args.out)
    result = run_bench(cfg)
    print(format_summary(result))
    return 1 if result.failures else 0


def cmd_toy(args):
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    dataset = make_toy(seed=args.seed)
    loss_cfg = LossConfig(lambda_prior=args.lambda_prior, tau=args.tau,
                          bias=args.bias)
    xs, ys = grid_axes(dataset.X)

    # pre-priming view: raw network, same init the session will redo
    ds_std, stats = standardize(dataset)
    ensemble = build_ensemble(ds_std, args.projections, args.seed)
    raw = relevance.init_params(dataset.d, args.projections, args.seed + 1)
    score, rel = evaluate_grid(ensemble, raw, xs, ys, stats=stats)
    write_grid_csv(out / "grid_init.csv", xs, ys, score, rel)

    state = start_session(dataset, n_members=args.projections,
                          budget=args.budget, seed=args.seed,
                          loss_cfg=loss_cfg)
    score, rel = evaluate_grid(state.ensemble, state.params, xs, ys,
                               stats=state.stats)
    write_grid_csv(out / "grid_primed.csv", xs, ys, score, rel)

    state = run_session(state, OracleAnalyst(dataset))
    score, rel = evaluate_grid(state.ensemble, state.params, xs, ys,
                               stats=state.stats)
    write_grid_csv(out / "grid_feedback.csv", xs, ys, score, rel)

    assignment = relevance_assignment(state.params, state.X)
    rules = {}
    for m in range(args.projections):
        tree = fit_rule_tree(dataset.X, assignment.positives(m))
        rules["member_%d" % m] = describe_regions(tree, dataset.feature_names)
    with open(out / "rules.json", "w") as fh:
        json.dump(rules, fh, indent=2)

    write_trace(state.trace, out / "trace.csv")
    save_session(state, out / "session.json")
    print("toy session: %d/%d anomalies found in %d queries"
          % (state.anomalies_found, dataset.n_anomalies, state.t))
    print("artifacts in %s" % out)
    return 0


def cmd_explain(args):
    state = load_session(args.snapshot)
    if not 0 <= args.index < state.n:
        print("index %d outside [0, %d)" % (args.index, state.n),
              file=sys.stderr)
        return 2
    payload = explanation_payload(state, args.index, k=args.k)
    if args.as_json:
        print(json.dumps(payload, indent=2))
        return 0
    print("instance %d: member %d is most relevant (score %.4f)"
          % (payload["index"], payload["member"], payload["score"]))
    print("member region:")
    for rule in payload["rules"] or ["(no positive region)"]:
        print("  %s" % rule)
    print("local surrogate terms:")
    for text, weight in payload["terms"]:
        print("  ('%s', %.4f)" % (text, weight))
    return 0


def cmd_serve(args):
    import uvicorn

    from .service import create_app

    host, _, port = args.serve_addr.rpartition(":")
    if not host or not port.isdigit():
        print("bad --serve-addr %r, expected host:port" % args.serve_addr,
              file=sys.stderr)
        return 2
    app = create_app(snapshot_dir=args.snapshot_dir,
                     dataset_dir=args.dataset_dir)
    uvicorn.run(app, host=host, port=int(port))
    return 0


def main(argv=None):
    logging.basicConfig(level=logging.INFO,
                        format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except FileNotFoundError as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 1
    except (ValueError, RuntimeError) as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
