"""Command line: ``qbnb <subcommand> ...`` (also ``python -m qbnb``)."""
from __future__ import annotations

import argparse
import sys

from . import bench
from .classical import classical_bnb, explore_all
from .heuristics import HEURISTICS, LocalHcost, by_name, total_order
from .primitives import ChargePolicy, EstimatorMode
from .problems import (InstanceError, MisInstance, build_tree, gen_instance, load_instance,
                       save_instance, triangle_cuts)
from .solvers import iqbb, iqbc, prepare
from .subtree import qsubtree, verify_certificate
from .tree import BnBConditionError, load_tree, random_tree

EXIT_OK, EXIT_USAGE, EXIT_FAIL = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        sys.exit(EXIT_USAGE)


def _estimator(text):
    try:
        return EstimatorMode.parse(text)
    except ValueError as e:
        raise argparse.ArgumentTypeError(str(e)) from None


def _solver_flags(p, quantum=True):
    p.add_argument("instance", nargs="?", help="instance file written by 'gen'")
    p.add_argument("--problem", help="instance file (alternative to the positional argument)")
    p.add_argument("--heuristic", choices=sorted(HEURISTICS), default="cost")
    p.add_argument("--eps", type=float, default=0.0, help="stop once incumbent - bound <= eps")
    if quantum:
        p.add_argument("--delta", type=float, default=0.1, help="overall failure probability")
        p.add_argument("--estimator", type=_estimator, default=EstimatorMode(),
                       help="exact | adversarial:<seed>")
        p.add_argument("--charge-polylog", choices=["on", "off"], default="on")
        p.add_argument("--bound", choices=["frontier", "paper"], default="frontier")


def build_parser():
    ap = _Parser(prog="qbnb", description="Branch and bound with emulated quantum tree primitives.")
    sub = ap.add_subparsers(dest="cmd", required=True, parser_class=_Parser)

    p = sub.add_parser("gen", help="write a random instance file")
    p.add_argument("--kind", choices=["sk", "mis", "portfolio"], required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)

    _solver_flags(sub.add_parser("solve-classical", help="best-first classical branch and bound"),
                  quantum=False)
    _solver_flags(sub.add_parser("solve-iqbb", help="incremental quantum branch and bound"))
    p = sub.add_parser("solve-iqbc", help="incremental quantum branch and cut (MIS triangle cuts)")
    _solver_flags(p)
    p.add_argument("--cuts", type=int, default=1, help="global cut budget p")

    p = sub.add_parser("subtree-check", help="check certificates on a tree file or random trees")
    p.add_argument("--tree", help="tree file (path cost hcost nchildren per line)")
    p.add_argument("--m", type=int, help="certify the first 2^m pops (default: every m with 2^m <= 2T)")
    p.add_argument("--trees", type=int, default=50, help="random trees when no --tree is given")
    p.add_argument("--seed", type=int, default=0, help="first tree seed")
    p.add_argument("--estimator", "--mode", dest="estimator", type=_estimator, default=EstimatorMode(),
                   help="exact | adversarial:<seed>")

    p = sub.add_parser("bench", help="run a sweep and write CSV")
    p.add_argument("--config", help="flat 'key = value' config file")
    for key in ("kind", "heuristic", "solver", "estimator", "bound"):
        p.add_argument(f"--{key}")
    for key in ("n-min", "n-max", "n-step", "seeds", "jobs"):
        p.add_argument(f"--{key}", type=int)
    p.add_argument("--eps", type=float)
    p.add_argument("--delta", type=float)
    p.add_argument("--out", help="CSV path (default stdout)")

    p = sub.add_parser("fit", help="exponential fit of median Q against n")
    p.add_argument("csv")
    p = sub.add_parser("report", help="depth ratio, spread and fit tables")
    p.add_argument("csv")
    return ap


def _policy(args):
    return ChargePolicy(include_polylog=args.charge_polylog == "on")


def _instance(args):
    path = args.problem or args.instance
    if not path:
        raise UsageError("an instance file is required")
    return load_instance(path)


def _csv(v):
    return "" if v is None else v


def _print_result(res):
    print(f"value: {res.tree.value(res.leaf)}")
    print(f"cost: {res.cost}")
    print(f"leaf: {list(res.leaf)}")
    print(f"iterations: {len(res.iterations)}  m_final: {res.m_final}")
    print(f"charged_quantum: {res.ledger.charged_quantum:.6g}")
    print("m,incumbent,bound1,bound2,best_bound,gap,cuts,charge")
    for r in res.iterations:
        print(",".join(str(_csv(v)) for v in (r.m, r.incumbent, r.bound1, r.bound2, r.best_bound,
                                               r.gap, r.cuts, f"{r.charge:.6g}")))


def cmd_gen(args):
    inst = gen_instance(args.kind, args.n, args.seed)
    save_instance(inst, args.out)
    print(f"wrote {args.kind} n={args.n} seed={args.seed} to {args.out}")


def cmd_solve_classical(args):
    tree = build_tree(_instance(args))
    leaf, trace = classical_bnb(*prepare(tree, by_name(args.heuristic)), eps=args.eps)
    print(f"value: {tree.value(leaf.node)}")
    print(f"cost: {tree.cost(leaf.node)}")
    print(f"leaf: {list(leaf.node)}")
    print(f"Q: {trace.Q}  d_max: {trace.d_max_seen}")
    print("step,incumbent,best_bound,gap")
    for i, (inc, bb, gap) in enumerate(zip(trace.incumbent, trace.best_bound, trace.gap), 1):
        print(f"{i},{_csv(inc)},{_csv(bb)},{_csv(gap)}")


def cmd_solve_iqbb(args):
    tree = build_tree(_instance(args))
    res = iqbb(tree, by_name(args.heuristic), eps=args.eps, delta=args.delta, policy=_policy(args),
               mode=args.estimator, bound=args.bound)
    _print_result(res)


def cmd_solve_iqbc(args):
    inst = _instance(args)
    if args.cuts < 0:
        raise UsageError("--cuts must be non-negative")
    if args.cuts and not isinstance(inst, MisInstance):
        raise UsageError("global cuts are only available for mis instances")
    tree = build_tree(inst)
    cuts = triangle_cuts(inst, p=args.cuts) if args.cuts else None
    res = iqbc(tree, cuts, by_name(args.heuristic), eps=args.eps, delta=args.delta,
               policy=_policy(args), mode=args.estimator, bound=args.bound)
    _print_result(res)


def _check_tree(t, hc, m, mode):
    full = explore_all(t, hc)
    cert = qsubtree(t, hc, m, t.depth_bound, hc.h_max, 0.1, mode=mode)
    r = verify_certificate(cert.oracle(t, hc), full, m)
    r["ok"] = r["contains_first"] and r["node_count"] <= 4 * 2 ** m
    return r


def _ms(T, m):
    if m is not None:
        return [m]
    out, k = [], 0
    while 2 ** k <= 2 * T:
        out.append(k)
        k += 1
    return out


def cmd_subtree_check(args):
    if args.m is not None and args.m < 0:
        raise UsageError("--m must be non-negative")
    if args.tree:
        with open(args.tree) as fh:
            t = load_tree(fh)
        hc = total_order(LocalHcost(t.hcost, t.c_max), t)
        print("m,contains_first,node_count,bound,valid_fraction,ok")
        fails = 0
        for m in _ms(len(t), args.m):
            r = _check_tree(t, hc, m, args.estimator)
            fails += not r["ok"]
            print(f"{m},{r['contains_first']},{r['node_count']},{4 * 2 ** m},"
                  f"{r['valid_fraction']:.6f},{r['ok']}")
        return EXIT_OK if fails == 0 else EXIT_FAIL
    certs = fails = 0
    for seed in range(args.seed, args.seed + args.trees):
        t = random_tree(seed)
        hc = total_order(LocalHcost(t.hcost, t.c_max), t)
        for m in _ms(len(t), args.m):
            mode = args.estimator
            if not mode.exact:
                mode = EstimatorMode("adversarial", mode.seed * 1_000_003 + seed * 100 + m)
            r = _check_tree(t, hc, m, mode)
            certs += 1
            if not r["ok"]:
                fails += 1
                print(f"FAIL tree seed={seed} m={m}: {r}")
    print(f"trees {args.trees}  certificates {certs}  failures {fails}")
    return EXIT_OK if fails == 0 else EXIT_FAIL


def cmd_bench(args):
    cfg = bench.BenchConfig()
    if args.config:
        with open(args.config) as fh:
            try:
                cfg = bench.parse_config(fh.read())
            except ValueError as e:
                raise UsageError(str(e)) from None
    for key in ("kind", "heuristic", "solver", "estimator", "bound", "n_min", "n_max", "n_step",
                "seeds", "jobs", "eps", "delta", "out"):
        v = getattr(args, key)
        if v is not None:
            setattr(cfg, key, v)
    if cfg.solver not in ("classical", "iqbb"):
        raise UsageError("solver must be classical or iqbb")
    if cfg.heuristic not in HEURISTICS:
        raise UsageError(f"unknown heuristic {cfg.heuristic!r}")
    if cfg.out:
        with open(cfg.out, "w", newline="") as fh:
            recs = bench.run_experiment(cfg, fh)
    else:
        recs = bench.run_experiment(cfg, sys.stdout)
    bad = [r for r in recs if r.failed]
    for r in bad:
        print(f"instance {r.kind} n={r.n} seed={r.seed}: {r.value}", file=sys.stderr)
    print(f"{len(recs)} records, {len(bad)} failures", file=sys.stderr)


def _read(path):
    with open(path, newline="") as fh:
        return bench.read_csv(fh)


def cmd_fit(args):
    fit = bench.fit_scaling(_read(args.csv))
    print(f"alpha: {fit.alpha:.6f}")
    print(f"r2: {fit.r2:.6f}")
    print(f"projected alpha/2: {fit.projected:.6f}")
    print(f"n range: {fit.n_range[0]}..{fit.n_range[1]}")
    for n, med in fit.medians.items():
        print(f"  n={n} median Q={med:g} mean Q={fit.means.get(n, float('nan')):g}")


def cmd_report(args):
    print(bench.format_report(bench.report(_read(args.csv))))


COMMANDS = {"gen": cmd_gen, "solve-classical": cmd_solve_classical, "solve-iqbb": cmd_solve_iqbb,
            "solve-iqbc": cmd_solve_iqbc, "subtree-check": cmd_subtree_check, "bench": cmd_bench,
            "fit": cmd_fit, "report": cmd_report}


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        code = COMMANDS[args.cmd](args)
    except UsageError as e:
        print(f"qbnb: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (InstanceError, BnBConditionError, OverflowError, RuntimeError, ValueError, OSError) as e:
        print(f"qbnb: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_FAIL
    return EXIT_OK if code is None else code


if __name__ == "__main__":
    sys.exit(main())
