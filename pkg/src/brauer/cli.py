"""Command line entry point: ``brauer <subcommand> ...``."""

import argparse
import json
import sys

import numpy as np

from . import bench, diagrams, fileio, norms
from .amplify import AmplifierKind, amplify
from .decompose import CPModel, amplified_init, cp_als
from .tensor3 import random_unit_tensor

INITS = ("random", "qr1", "sigma4", "sharp")


def _dims(text):
    try:
        dims = tuple(int(x) for x in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad dims {text!r}; expected e.g. 30,30,30")
    if len(dims) != 3 or min(dims) < 1:
        raise argparse.ArgumentTypeError("dims must be three positive integers")
    return dims


def _methods(text):
    methods = tuple(m.strip() for m in text.split(",") if m.strip())
    unknown = [m for m in methods if m not in bench.METHODS]
    if unknown or not methods:
        raise argparse.ArgumentTypeError(f"methods must be a subset of {','.join(bench.METHODS)}")
    return methods


def _print_json(obj):
    json.dump(obj, sys.stdout, indent=2)
    sys.stdout.write("\n")


def cmd_census(args):
    print("d\tmatchings\tconnected_classes")
    for d in range(2, args.max_d + 1, 2):
        classes = diagrams.count_connected_classes(d) if d <= diagrams.MAX_CENSUS_D else "-"
        print(f"{d}\t{len(diagrams.enumerate_matchings(d))}\t{classes}")
    return 0


def cmd_evaluate(args):
    D = fileio.read_diagrams(args.diagram)
    T = fileio.read_tensor(args.tensor)
    _print_json({"value": diagrams.evaluate(D, T, budget=args.budget)})
    return 0


def cmd_invariants(args):
    T = fileio.read_tensor(args.tensor)
    inv = norms.invariants(T)
    out = inv.as_dict()
    out["sigma4"], out["sharp"] = norms.norms_from_invariants(inv)
    out["frobenius"] = float(np.linalg.norm(T.ravel()))
    _print_json(out)
    return 0


def cmd_amplify(args):
    T = fileio.read_tensor(args.tensor)
    U = amplify(T, AmplifierKind.parse(args.kind))
    if args.out:
        fileio.write_tensor(args.out, U, binary=args.binary)
    else:
        sys.stdout.write(fileio.format_tensor(U))
    return 0


def cmd_decompose(args):
    T = fileio.read_tensor(args.tensor)
    if args.init == "random":
        init = CPModel.random(T.shape, args.rank, np.random.default_rng(args.seed))
    else:
        kind = {"qr1": "identity"}.get(args.init, args.init)
        init = amplified_init(T, args.rank, kind)
    model, report = cp_als(T, args.rank, init, tol=args.tol, max_iter=args.max_iter)
    _print_json({"model": model.as_dict(), "report": report.as_dict()})
    return 0


def cmd_random(args):
    T = random_unit_tensor(args.dims, np.random.default_rng(args.seed)) * args.scale
    if args.out:
        fileio.write_tensor(args.out, T, binary=args.binary)
    else:
        sys.stdout.write(fileio.format_tensor(T))
    return 0


def cmd_bench(args):
    cfg = bench.ExperimentConfig(dims=args.dims, rank=args.rank, noise=args.noise,
                                 trials=args.trials, restarts=args.restarts, tol=args.tol,
                                 max_iter=args.max_iter, seed=args.seed, methods=args.methods)

    def progress(done, total):
        if args.verbose:
            print(f"\r{done}/{total} trials", end="", file=sys.stderr, flush=True)

    try:
        records, stats = bench.run_experiment(cfg, jobs=args.jobs, progress=progress)
    except Exception as exc:  # any trial failure fails the run
        print(f"bench: trial failed: {exc}", file=sys.stderr)
        return 1
    if args.verbose:
        print(file=sys.stderr)
    bench.write_csv(records, args.out)
    json_path = args.json or args.out.rsplit(".", 1)[0] + ".json"
    bench.write_json(stats, cfg, json_path)
    print("method\tfit_mean\tfit_std\titer_mean\titer_std\ttime_mean")
    for m, s in stats.per_method.items():
        print(f"{m}\t{s['fit'][0]:.4f}\t{s['fit'][1]:.4f}\t{s['iterations'][0]:.3f}"
              f"\t{s['iterations'][1]:.3f}\t{s['time_sec'][0]:.4f}")
    return 0


def build_parser():
    parser = argparse.ArgumentParser(prog="brauer", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("census", help="matching counts and connected colored diagram classes")
    p.add_argument("--max-d", type=int, default=8)
    p.set_defaults(func=cmd_census)

    p = sub.add_parser("evaluate", help="evaluate a diagram file on a tensor file")
    p.add_argument("diagram")
    p.add_argument("tensor")
    p.add_argument("--budget", type=int, default=diagrams.DEFAULT_BUDGET)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("invariants", help="degree-4 invariants and both norms as JSON")
    p.add_argument("tensor")
    p.set_defaults(func=cmd_invariants)

    p = sub.add_parser("amplify", help="apply an amplification map")
    p.add_argument("tensor")
    p.add_argument("--kind", choices=[k.value for k in AmplifierKind], default="sharp")
    p.add_argument("-o", "--out")
    p.add_argument("--binary", action="store_true")
    p.set_defaults(func=cmd_amplify)

    p = sub.add_parser("decompose", help="CP-ALS with a chosen initialization")
    p.add_argument("tensor")
    p.add_argument("--rank", type=int, default=1)
    p.add_argument("--init", choices=INITS, default="sharp")
    p.add_argument("--tol", type=float, default=1e-4)
    p.add_argument("--max-iter", type=int, default=50)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_decompose)

    p = sub.add_parser("random", help="write a random tensor (uniform on a sphere)")
    p.add_argument("--dims", type=_dims, required=True)
    p.add_argument("--scale", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-o", "--out")
    p.add_argument("--binary", action="store_true")
    p.set_defaults(func=cmd_random)

    p = sub.add_parser("bench", help="noisy low-rank recovery experiment")
    p.add_argument("--dims", type=_dims, default=(30, 30, 30))
    p.add_argument("--rank", type=int, default=1)
    p.add_argument("--noise", type=float, default=10.0)
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--restarts", type=int, default=10)
    p.add_argument("--tol", type=float, default=1e-4)
    p.add_argument("--max-iter", type=int, default=50)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--methods", type=_methods, default=bench.METHODS)
    p.add_argument("--out", default="results.csv")
    p.add_argument("--json", help="aggregate JSON path (default: next to --out)")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("-v", "--verbose", action="store_true")
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError, MemoryError) as exc:
        print(f"brauer {args.command}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
