"""Command-line front end: ``rparity <subcommand> ...``."""

from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

from . import bench, dratgen, graphs
from .cnf import parse_dimacs, write_dimacs
from .errors import RParityError
from .parity import (favorable_sigma_c, gen_raddpar, gen_rpar, instance_from_metadata,
                     instance_metadata, parse_metadata, random_order, random_raddpar,
                     write_metadata, RParInstance)
from .permute import (RNG_VERSION, adjacent_swaps, bounded_displacement, identity, make_rng,
                      mallows_process, uniform_permutation)
from .proofkit import check_drat, parse_drat, write_drat
from .treewidth import DEFAULT_CUTOFF

log = logging.getLogger("rparity")


class UsageError(Exception):
    """Conflicting or incomplete options; reported with exit status 2."""


def _ints(text):
    return tuple(int(t) for t in text.replace(",", " ").split())


def _write_instance(inst, outdir, name, **meta):
    out = Path(outdir)
    out.mkdir(parents=True, exist_ok=True)
    cnf, side = out / f"{name}.cnf", out / f"{name}.meta"
    cnf.write_text(write_dimacs(inst.formula))
    side.write_text(write_metadata(instance_metadata(inst, rng=RNG_VERSION, **meta)))
    print(f"wrote {cnf} {side}")


def _load(args):
    meta = parse_metadata(Path(args.meta).read_text())
    inst = instance_from_metadata(meta)
    if getattr(args, "cnf", None):
        f = parse_dimacs(Path(args.cnf).read_text())
        if f != inst.formula:
            raise RParityError(f"{args.cnf} does not match the instance described by {args.meta}")
    return inst


def cmd_gen_rpar(args):
    rng = make_rng(args.seed)
    n = args.n
    if args.sigma:
        sigma = _ints(args.sigma)
    elif args.perm in (None, "uniform"):
        sigma = uniform_permutation(n, rng)
    elif args.perm == "mallows":
        sigma = mallows_process(n, args.q, rng)
    elif args.perm == "swaps":
        sigma = adjacent_swaps(n, args.swaps, rng)
    elif args.perm == "displacement":
        sigma = bounded_displacement(n, args.disp, rng)
    else:
        sigma = identity(n)
    print(f"seed={args.seed}")
    inst = gen_rpar(n, sigma)
    perm = "explicit" if args.sigma else args.perm or "uniform"
    param = {"mallows": args.q, "swaps": args.swaps, "displacement": args.disp}.get(perm, "")
    _write_instance(inst, args.output, args.name or f"rpar-n{n}-{perm}-s{args.seed}",
                    distribution=perm, param=param,
                    seed=args.seed)
    return 0


def cmd_gen_raddpar(args):
    rng = make_rng(args.seed)
    if args.sigma_c and args.favorable:
        raise UsageError("--sigma-c and --favorable conflict")
    if (args.sigma_a or args.sigma_b or args.sigma_c) and not args.A:
        raise UsageError("--sigma-a/--sigma-b/--sigma-c need --A and --B")
    print(f"seed={args.seed}")
    if args.A or args.B:
        if not (args.A and args.B):
            raise UsageError("--A and --B go together")
        A, B = set(_ints(args.A)), set(_ints(args.B))
        sa = _ints(args.sigma_a) if args.sigma_a else random_order(A, rng)
        sb = _ints(args.sigma_b) if args.sigma_b else random_order(B, rng)
        if args.sigma_c:
            sc = _ints(args.sigma_c)
        elif args.favorable and A ^ B:
            sc = favorable_sigma_c(A, B, sa, sb)
        else:
            sc = None
        inst = gen_raddpar(A, B, sa, sb, sc, n=args.n)
    else:
        inst = random_raddpar(args.n, args.p, rng, favorable=args.favorable)
    _write_instance(inst, args.output, args.name or f"raddpar-n{args.n}-s{args.seed}",
                    p=args.p, favorable=int(args.favorable), seed=args.seed)
    return 0


def cmd_prove(args):
    inst = _load(args)
    deletions = not args.no_deletions
    if isinstance(inst, RParInstance):
        ref = dratgen.refute_rpar(inst, deletions=deletions)
    else:
        ref = dratgen.refute_raddpar(inst, deletions=deletions)
    Path(args.output).write_text(write_drat(ref.proof))
    stats = args.stats or str(Path(args.output).with_suffix(".stats"))
    Path(stats).write_text(dratgen.write_stats(ref.stats))
    print(f"lines={ref.stats.lines} adds={ref.stats.adds} deletes={ref.stats.deletes} "
          f"max_width={ref.stats.max_add_width} K={ref.stats.ratio:.3f}")
    return 0


def cmd_verify(args):
    f = parse_dimacs(Path(args.cnf).read_text())
    proof = parse_drat(Path(args.proof).read_text())
    rep = check_drat(f, proof, forbid_new_vars=args.no_new_vars)
    if rep.verified:
        print(f"VERIFIED lines_checked={rep.lines_checked}")
        return 0
    print(f"FAILED at line {rep.failing_line}: {rep.reason} "
          f"(new vars: {sorted(rep.new_vars_used)})")
    return 1


def cmd_graph(args):
    inst = _load(args)
    charge = None
    if args.kind == "tseitin":
        cg = graphs.tseitin_graph(inst)
        g, charge = cg.graph, cg.charge
    elif isinstance(inst, RParInstance):
        if args.kind not in ("gsigma", "gstar"):
            raise RParityError(f"graph kind {args.kind!r} needs an rAddPar instance")
        g = graphs.build_g_sigma(inst.n, inst.sigma)
        if args.kind == "gstar":
            g = graphs.contract_matching(g)
    else:
        if args.kind not in ("h", "mh"):
            raise RParityError(f"graph kind {args.kind!r} needs an rPar instance")
        g = graphs.build_h(inst.A, inst.B, inst.sigma_a, inst.sigma_b, inst.sigma_c)
        if args.kind == "mh":
            g = graphs.minor_m(g)
    text = graphs.write_edgelist(g, charge, name=args.kind)
    if args.output:
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


def cmd_treewidth(args):
    inst = _load(args)
    b = bench.instance_tw_bounds(inst, args.cutoff)
    print(f"{b.lower} {b.upper}")
    return 0


def cmd_bench_gen(args):
    presets = {"problem1": bench.problem1_config, "problem2": lambda n, seed: bench.problem2_config(seed),
               "trend": bench.trend_config}
    cfg = presets[args.preset](n=args.n, seed=args.seed)
    print(f"seed={args.seed}")
    entries = bench.gen_suite(cfg, args.output)
    print(f"wrote {len(entries)} instances to {args.output}")
    return 0


def cmd_bench_run(args):
    solver = args.solver or os.environ.get("SOLVER")
    if not solver:
        raise RParityError("no solver: pass --solver or set SOLVER")
    entries = bench.read_manifest(Path(args.dir) / "manifest.txt")
    bench.annotate_treewidth(entries, args.dir, args.cutoff)
    records = bench.run_suite(entries, args.dir, solver, args.timeout, args.jobs)
    text = bench.emit_csv(records)
    Path(args.output).write_text(text)
    sat = [r.instance_id for r in records if r.status == bench.SAT]
    print(f"wrote {len(records)} records to {args.output}")
    if sat:
        print(f"error: solver reported SAT on {sat}", file=sys.stderr)
        return 1
    return 0


def cmd_bench_report(args):
    records = bench.read_csv(Path(args.csv).read_text())
    res = bench.regression(records)
    print(f"points={res.count} slope={res.slope:.4f} intercept={res.intercept:.4f} "
          f"spearman={res.spearman:.4f}" + ("" if res.spearman_defined else " (undefined)"))
    if args.output:
        Path(args.output).write_text(bench.regression_csv(res))
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="rparity", description=__doc__)
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-rpar", help="generate rPar(n, sigma)")
    p.add_argument("-n", type=int, required=True)
    src = p.add_mutually_exclusive_group()
    src.add_argument("--perm", choices=["uniform", "mallows", "swaps", "displacement", "identity"])
    src.add_argument("--sigma", help="explicit permutation, e.g. '3 1 5 4 2'")
    p.add_argument("--q", type=float, default=0.8)
    p.add_argument("--swaps", type=int, default=0)
    p.add_argument("--disp", type=int, default=2)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--name")
    p.add_argument("-o", "--output", default=".")
    p.set_defaults(func=cmd_gen_rpar)

    p = sub.add_parser("gen-raddpar", help="generate rAddPar(a, b, sigma_c)")
    p.add_argument("-n", type=int, required=True)
    p.add_argument("-p", type=float, default=0.5)
    p.add_argument("--A")
    p.add_argument("--B")
    p.add_argument("--sigma-a")
    p.add_argument("--sigma-b")
    p.add_argument("--sigma-c")
    p.add_argument("--favorable", action="store_true")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--name")
    p.add_argument("-o", "--output", default=".")
    p.set_defaults(func=cmd_gen_raddpar)

    p = sub.add_parser("prove", help="emit a DRAT-minus refutation")
    p.add_argument("cnf")
    p.add_argument("--meta", required=True)
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--stats")
    p.add_argument("--no-deletions", action="store_true")
    p.set_defaults(func=cmd_prove)

    p = sub.add_parser("verify", help="check a DRAT proof")
    p.add_argument("cnf")
    p.add_argument("proof")
    p.add_argument("--no-new-vars", action="store_true")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("graph", help="write a graph as an edge list")
    p.add_argument("--meta", required=True)
    p.add_argument("--cnf")
    p.add_argument("--kind", choices=["tseitin", "gsigma", "gstar", "h", "mh"], default="tseitin")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_graph)

    p = sub.add_parser("treewidth", help="print treewidth bounds 'lb ub'")
    p.add_argument("cnf", nargs="?")
    p.add_argument("--meta", required=True)
    p.add_argument("--cutoff", type=int, default=DEFAULT_CUTOFF)
    p.set_defaults(func=cmd_treewidth)

    p = sub.add_parser("bench-gen", help="generate a benchmark suite")
    p.add_argument("--preset", choices=["problem1", "problem2", "trend"], default="trend")
    p.add_argument("-n", type=int, default=40)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_bench_gen)

    p = sub.add_parser("bench-run", help="annotate treewidth and time a solver")
    p.add_argument("dir")
    p.add_argument("--solver")
    p.add_argument("--timeout", type=float, default=60.0)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--cutoff", type=int, default=DEFAULT_CUTOFF)
    p.add_argument("-o", "--output", default="results.csv")
    p.set_defaults(func=cmd_bench_run)

    p = sub.add_parser("bench-report", help="fit log2(time) against treewidth")
    p.add_argument("csv")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_bench_report)
    return ap


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        parser.error(str(exc))
    except (RParityError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
