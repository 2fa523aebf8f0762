"""xor3 command line.

Exit codes: 0 answered, 2 usage or input error, 3 internal disagreement.
"""

from __future__ import annotations

import argparse
import json
import random
import sys
from typing import Optional

from . import packed
from .core import (MAX_WIDTH, InstanceError, XorInstance, brute_force_solve, default_seed,
                   derive_seed, format_instance, generate_instance, parse_instance)

EXIT_OK, EXIT_USAGE, EXIT_DISAGREE = 0, 2, 3
ALGOS = ("brute", "trie", "rand", "via-disjointness", "via-intersection")


class UsageError(Exception):
    pass


# -- helpers ------------------------------------------------------------------

def _parse_word(tok: str) -> int:
    tok = tok.strip()
    if tok.lower().startswith("0b"):
        return int(tok[2:], 2)
    return int(tok[2:] if tok.lower().startswith("0x") else tok, 16)


def _from_list(text: str, w: Optional[int]) -> XorInstance:
    toks = [t for t in text.replace(",", " ").split() if t]
    if not toks:
        raise UsageError("--from-list is empty")
    if w is not None and all(len(t) == w and set(t) <= {"0", "1"} for t in toks):
        return XorInstance.from_words([int(t, 2) for t in toks], w)
    words = [_parse_word(t) for t in toks]
    if w is None:
        if all(t.lower().startswith("0b") for t in toks):
            w = max(len(t) - 2 for t in toks)
        else:
            w = max(4 * len(t.lower().removeprefix("0x")) for t in toks)
    return XorInstance.from_words(words, w)


def _load(args) -> XorInstance:
    if getattr(args, "from_list", None):
        return _from_list(args.from_list, args.w)
    path = getattr(args, "instance", None)
    if not path:
        raise UsageError("no instance given (file argument or --from-list)")
    text = sys.stdin.read() if path == "-" else open(path).read()
    inst = parse_instance(text)
    if args.w is not None and args.w != inst.w:
        raise UsageError(f"--w {args.w} conflicts with the file's width {inst.w}")
    return inst


def _emit(text: str, out: Optional[str]) -> None:
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _hex(x: int, w: int) -> str:
    return f"{x:0{max(1, (w + 3) // 4)}x}"


def run_algo(algo: str, inst: XorInstance, args, stats_out: Optional[dict] = None):
    distinct = args.distinct
    if algo == "brute":
        return brute_force_solve(inst, distinct)
    if algo == "trie":
        from .xortrie import solve_quadratic
        return solve_quadratic(inst, distinct, backend=args.backend)
    if algo == "rand":
        from .randomized import solve_randomized
        res, st = solve_randomized(inst, seed=args.seed, plan_override=args.regime or "auto",
                                   W=args.simwidth, distinct=distinct, backend=args.backend)
        if stats_out is not None:
            stats_out.update(st.as_dict())
        return res
    if algo == "via-disjointness":
        from .reductions import solve_via_disjointness
        return solve_via_disjointness(inst, 0.5 if args.gamma is None else args.gamma, args.seed,
                                      distinct=distinct)
    if algo == "via-intersection":
        from .reductions import solve_via_intersection
        gamma = 0.5 if args.gamma is None else args.gamma
        return solve_via_intersection(inst, gamma, args.delta or 0.5, args.seed, distinct=distinct)
    raise UsageError(f"unknown algo {algo!r}")


# -- subcommands ----------------------------------------------------------------

def cmd_gen(args) -> int:
    if args.from_list:
        inst = _from_list(args.from_list, args.w)
    else:
        if args.n is None:
            raise UsageError("gen needs --n or --from-list")
        inst = generate_instance(args.n, args.w or 32, args.seed, args.mode, args.distinct)
    _emit(format_instance(inst), args.out)
    return EXIT_OK


def cmd_solve(args) -> int:
    if args.regime and args.algo != "rand":
        raise UsageError("--regime only applies to --algo rand")
    if args.gamma is not None and not args.algo.startswith("via-"):
        raise UsageError("--gamma only applies to the reduction solvers")
    if args.delta is not None and args.algo != "via-intersection":
        raise UsageError("--delta only applies to --algo via-intersection")
    inst = _load(args)
    stats: dict = {}
    res = run_algo(args.algo, inst, args, stats)
    if res is not None and not res.check(inst, args.distinct):
        print(f"internal error: invalid witness {res}", file=sys.stderr)
        return EXIT_DISAGREE
    if args.format == "json":
        body = {"solution": None if res is None else [_hex(v, inst.w) for v in res]}
        if args.emit_stats:
            body["stats"] = stats
        _emit(json.dumps(body) + "\n", args.out)
        return EXIT_OK
    line = "NONE" if res is None else "SOLUTION " + " ".join(_hex(v, inst.w) for v in res)
    text = line + "\n"
    if args.emit_stats:
        text += json.dumps(stats or {"algo": args.algo}) + "\n"
    _emit(text, args.out)
    return EXIT_OK


def _check(name: str, ok: bool, report: list, seed=None) -> bool:
    report.append({"check": name, "ok": bool(ok), "seed": seed})
    return ok


def cmd_verify(args) -> int:
    """Cross-solver agreement plus spot checks of every module's oracle."""
    from .hashing import eval_batch, eval_columnwise, eval_rowwise, overfull_statistic, sample_linear_hash
    from .packed import bitonic_sort, intersect_listing, pack, unpack
    from .reductions import solve_via_disjointness, solve_via_intersection
    from .randomized import solve_randomized
    from .xortrie import make_tree, solve_quadratic, traverse_list

    packed.inject_fault(args.inject_fault)
    report: list = []
    trials = args.trials or (24 if args.quick else 120)
    rng = random.Random(derive_seed(args.seed, "verify"))
    try:
        # packed primitives against scalar oracles
        for t in range(trials):
            s = derive_seed(args.seed, "packed", t)
            r = random.Random(s)
            k = r.choice([2, 4, 8, 16])
            ell = r.choice([4, 8])
            a = [r.randrange(1 << (ell - 1)) for _ in range(k)]
            b = [r.randrange(1 << (ell - 1)) for _ in range(k)]
            pa, pb = pack(a, ell=ell), pack(b, ell=ell)
            ok = unpack(bitonic_sort(pa)) == sorted(a)
            exp = sorted((i, j) for i in range(k) for j in range(k) if a[i] == b[j])
            ok = ok and intersect_listing(pa, pb) == exp
            if not _check("packed", ok, report, s):
                break
        # hashing strategies
        for t in range(trials):
            s = derive_seed(args.seed, "hash", t)
            r = random.Random(s)
            ell = r.choice([8, 33, 64, 130])
            h = sample_linear_hash(ell, r.randint(1, min(ell, 16)), s)
            xs = [r.getrandbits(ell) for _ in range(8)]
            ok = [eval_rowwise(h, x) for x in xs] == [eval_columnwise(h, x) for x in xs] == eval_batch(h, xs)
            if not _check("hashing", ok, report, s):
                break
        m = 16
        _check("overfull", overfull_statistic(1024, 32, m, 20 if args.quick else 100, args.seed) < 1.2 * m,
               report, args.seed)
        # solver sweep
        for t in range(trials):
            s = derive_seed(args.seed, "sweep", t)
            n = rng.choice([3, 8, 16, 40, 100] if args.quick else [3, 8, 16, 40, 100, 256])
            w = rng.choice([8, 16, 32, 64, 128])
            mode = "planted" if t % 2 else "random"
            distinct = args.distinct
            inst = generate_instance(n, w, s, mode)
            truth = brute_force_solve(inst, distinct) is not None
            tree = make_tree(inst)
            a = rng.getrandbits(w)
            ys, visits = traverse_list(tree, a)
            ok_tree = ys == sorted(a ^ x for x in inst.words) and visits == 2 * n - 1
            answers = {
                "trie": solve_quadratic(inst, distinct, backend=args.backend),
                "rand-long": solve_randomized(inst, s, "long", W=args.simwidth, distinct=distinct,
                                              backend=args.backend)[0],
                "rand-short": solve_randomized(inst, s, "short", W=args.simwidth, distinct=distinct,
                                               backend=args.backend)[0],
                "via-disjointness": solve_via_disjointness(inst, 0.5, s, distinct=distinct),
                "via-intersection": solve_via_intersection(inst, 0.25, 0.5, s, distinct=distinct),
            }
            ok = ok_tree and all((res is not None) == truth and (res is None or res.check(inst, distinct))
                                 for res in answers.values())
            if not _check("solvers", ok, report, s):
                break
    finally:
        packed.inject_fault(None)

    failed = [r for r in report if not r["ok"]]
    summary = {"checks": len(report), "failed": len(failed),
               "failures": [{"check": r["check"], "seed": r["seed"]} for r in failed]}
    if args.format == "json":
        _emit(json.dumps(summary) + "\n", args.out)
    else:
        groups = {}
        for r in report:
            groups.setdefault(r["check"], []).append(r["ok"])
        lines = [f"{'PASS' if all(v) else 'FAIL'} {k} ({sum(v)}/{len(v)})" for k, v in groups.items()]
        lines += [f"reproduce: xor3 verify --seed {args.seed}  # failing {r['check']} seed={r['seed']}"
                  for r in failed]
        lines.append("OK" if not failed else "DISAGREEMENT")
        _emit("\n".join(lines) + "\n", args.out)
    return EXIT_OK if not failed else EXIT_DISAGREE


def _parse_ns(spec: str) -> list:
    if ".." in spec:
        lo, hi = spec.split("..")
        return [1 << k for k in range(int(lo), int(hi) + 1)]
    return [int(x) for x in spec.split(",") if x]


def cmd_bench(args) -> int:
    from .bench import run_series, to_csv
    algos = ["trie", "rand"] if args.algo == "both" else [args.algo]
    rows = run_series(algos, _parse_ns(args.ns), w=args.w or 64, W=args.simwidth,
                      seed=args.seed, repeats=args.repeats, regime=args.regime or "auto",
                      backend=args.backend)
    if args.format == "json":
        _emit(json.dumps(rows) + "\n", args.out)
    else:
        _emit(to_csv(rows), args.out)
    return EXIT_OK


def cmd_reduce(args) -> int:
    from .reductions import ReductionParams, encode, instance_shape_report
    if args.target == "disjointness" and args.delta is not None:
        raise UsageError("--delta only applies to --target intersection")
    params = ReductionParams(args.target, args.gamma,
                             (args.delta if args.delta is not None else 0.5)
                             if args.target == "intersection" else None)
    try:
        params.check()
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    inst = _load(args)
    if args.report:
        _emit(json.dumps(instance_shape_report(inst, params, args.seed), indent=1) + "\n", args.out)
        return EXIT_OK
    _, offline, _ = encode(inst, params, args.seed)
    _emit(offline.to_json() + "\n", args.out)
    return EXIT_OK


def cmd_stats(args) -> int:
    import csv
    import io
    buf = io.StringIO()
    buf.write("# schema=1\n")
    wr = csv.writer(buf, lineterminator="\n")
    if args.subject == "hashing":
        from .hashing import overfull_statistic
        wr.writerow(["n", "m", "trials", "mean_overfull", "bound_m"])
        for n, m in ((1024, 16), (4096, 64)):
            mean = overfull_statistic(n, args.w or 32, m, args.trials, args.seed)
            wr.writerow([n, m, args.trials, f"{mean:.4f}", m])
    else:
        from .hashing import sample_linear_hash
        from .randomized import choose_plan, count_colliding_triples
        wr.writerow(["n", "regime", "R", "P", "trials", "mean_colliding", "bound"])
        n, w = args.n or 256, args.w or 32
        inst = generate_instance(n, w, derive_seed(args.seed, "stats-X"), "solution_free")
        for regime in ("long_word", "short_word"):
            plan = choose_plan(n, args.simwidth, w, regime)
            total = 0
            for t in range(args.trials):
                h1 = sample_linear_hash(w, plan.r, derive_seed(args.seed, "c-h1", regime, t))
                h2 = sample_linear_hash(w, plan.p, derive_seed(args.seed, "c-h2", regime, t))
                total += count_colliding_triples(inst, h1, h2)
            wr.writerow([n, regime, plan.R, plan.P, args.trials, f"{total / args.trials:.4f}",
                         f"{2 * n ** 3 / (plan.R * plan.P):.4f}"])
    _emit(buf.getvalue(), args.out)
    return EXIT_OK


def cmd_dump_tree(args) -> int:
    from .xortrie import make_tree
    _emit(make_tree(_load(args)).dump(), args.out)
    return EXIT_OK


# -- parser -------------------------------------------------------------------

def _add_common(p, suppress: bool):
    d = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    p.add_argument("--seed", type=lambda s: int(s, 0), default=d(default_seed()),
                   help="RNG seed (default: $XOR3_SEED or 0)")
    p.add_argument("--w", type=int, default=d(None), help="key width in bits")
    p.add_argument("--simwidth", type=int, default=d(packed.DEFAULT_W),
                   help="simulated machine word width W (8..512)")
    p.add_argument("--distinct", action="store_true", default=d(False),
                   help="require a, b, c pairwise distinct")
    p.add_argument("--out", default=d(None), help="output file (default stdout)")
    p.add_argument("--format", choices=("text", "csv", "json"), default=d("text"))
    p.add_argument("--backend", choices=("auto", "native", "python"), default=d(None),
                   help="kernel backend (default: $XOR3_BACKEND or auto)")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="xor3", description="3XOR solvers and experiments")
    _add_common(ap, suppress=False)
    sub = ap.add_subparsers(dest="cmd", required=True)
    common = argparse.ArgumentParser(add_help=False)
    _add_common(common, suppress=True)

    p = sub.add_parser("gen", parents=[common], help="write an instance file")
    p.add_argument("--n", type=int)
    p.add_argument("--mode", choices=("random", "planted", "solution_free"), default="random")
    p.add_argument("--from-list", dest="from_list",
                   help="comma-separated words: hex, 0b-prefixed binary, or bare 0/1 strings of length --w")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("solve", parents=[common], help="solve one instance")
    p.add_argument("instance", nargs="?", help="instance file, '-' for stdin")
    p.add_argument("--from-list", dest="from_list")
    p.add_argument("--algo", choices=ALGOS, default="trie")
    p.add_argument("--regime", choices=("auto", "long", "short"))
    p.add_argument("--gamma", type=float)
    p.add_argument("--delta", type=float)
    p.add_argument("--emit-stats", dest="emit_stats", action="store_true")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("verify", parents=[common], help="cross-solver agreement sweep")
    p.add_argument("--quick", action="store_true")
    p.add_argument("--trials", type=int)
    p.add_argument("--inject-fault", dest="inject_fault", choices=("bitonic",))
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("bench", parents=[common], help="doubling-n timing series (CSV)")
    p.add_argument("--algo", choices=("trie", "rand", "both"), default="both")
    p.add_argument("--ns", default="9..14", help="'lo..hi' exponents or comma-separated sizes")
    p.add_argument("--repeats", type=int, default=3)
    p.add_argument("--regime", choices=("auto", "long", "short"))
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("reduce", parents=[common], help="emit an offline set instance as JSON")
    p.add_argument("instance", nargs="?")
    p.add_argument("--from-list", dest="from_list")
    p.add_argument("--target", choices=("disjointness", "intersection"), required=True)
    p.add_argument("--gamma", type=float, required=True)
    p.add_argument("--delta", type=float)
    p.add_argument("--report", action="store_true", help="print the shape report instead")
    p.set_defaults(func=cmd_reduce)

    p = sub.add_parser("stats", parents=[common], help="statistical harnesses (CSV)")
    p.add_argument("subject", choices=("hashing", "collisions"))
    p.add_argument("--trials", type=int, default=200)
    p.add_argument("--n", type=int)
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("dump-tree", parents=[common], help="print the XOR trie as indented text")
    p.add_argument("instance", nargs="?")
    p.add_argument("--from-list", dest="from_list")
    p.set_defaults(func=cmd_dump_tree)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    if not 8 <= args.simwidth <= packed.MAX_W:
        ap.error(f"--simwidth must be in 8..{packed.MAX_W}")
    if args.w is not None and not 1 <= args.w <= MAX_WIDTH:
        ap.error(f"--w must be in 1..{MAX_WIDTH}")
    try:
        return args.func(args)
    except (UsageError, InstanceError, ValueError, OSError) as exc:
        print(f"xor3: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
