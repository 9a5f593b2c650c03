"""Command-line entry point.

Subcommands: esf, crp-sample, wf simulate, genealogy, fv transition, bounds,
verify all. Structured output is JSON (reports) or CSV (replicate streams),
written to stdout or --out; stderr carries diagnostics only. Exit codes:
0 success, 1 invalid input, 2 internal/resource error.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import bounds as bd
from . import esf_crp, experiments, fleming_viot, genealogy, wright_fisher
from .errors import DomainError, NumericalError, ResourceError, ValidationError
from .rng import spawn_rngs

CHUNK = 256  # replicate chunk size; fixed so --threads cannot change output


class _ArgumentParser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise ValidationError(message)


def _env_int(name: str, fallback: int) -> int:
    val = os.environ.get(name)
    return int(val) if val else fallback


def _emit(text: str, out: str | None) -> None:
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _chunked_replicates(worker, reps: int, seed: int, threads: int) -> list:
    """Run replicate chunks with per-chunk child seeds; merge in chunk order."""
    sizes = [min(CHUNK, reps - lo) for lo in range(0, reps, CHUNK)]
    rngs = spawn_rngs(seed, len(sizes))
    if threads <= 1:
        parts = [worker(sz, rng) for sz, rng in zip(sizes, rngs)]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(worker, sizes, rngs))
    return [item for part in parts for item in part]


def _add_common(parser, leaf: bool) -> None:
    # the common flags are accepted both before and after the subcommand;
    # leaf copies use SUPPRESS so an absent flag never clobbers the value
    # parsed at the top level
    default = argparse.SUPPRESS if leaf else None
    parser.add_argument("--seed", type=int, default=default,
                        help="root seed (default 0, or PDWF_SEED)")
    parser.add_argument("--threads", type=int, default=default,
                        help="worker threads (default 1, or PDWF_THREADS)")
    parser.add_argument("--out", type=str, default=default, help="output file")


def build_parser() -> _ArgumentParser:
    parser = _ArgumentParser(prog="pdwf")
    _add_common(parser, leaf=False)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("esf", help="exact partition distribution as JSON")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--theta", type=float, required=True)
    _add_common(p, leaf=True)

    p = sub.add_parser("crp-sample", help="stream sampled partitions, one per line")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--theta", type=float, required=True)
    p.add_argument("--reps", type=int, default=1)
    _add_common(p, leaf=True)

    p = sub.add_parser("wf", help="Wright-Fisher forward simulation")
    wf_sub = p.add_subparsers(dest="wf_command", required=True)
    ps = wf_sub.add_parser("simulate", help="stationary replicates as JSON lines")
    ps.add_argument("--N", type=int, required=True)
    ps.add_argument("--theta", type=float, required=True)
    ps.add_argument("--burn-in", type=int, default=None)
    ps.add_argument("--reps", type=int, default=1)
    ps.add_argument("--sample-n", type=int, default=0)
    _add_common(ps, leaf=True)

    p = sub.add_parser("genealogy", help="ancestral traces reduced to interval stats (CSV)")
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--reps", type=int, default=1)
    p.add_argument("--intervals", type=str, required=True,
                   help="comma-separated x:y pairs, e.g. 5:20,10:40")
    _add_common(p, leaf=True)

    p = sub.add_parser("fv", help="measure-valued transition sampler")
    fv_sub = p.add_subparsers(dest="fv_command", required=True)
    pt = fv_sub.add_parser("transition", help="match-statistic summary as JSON")
    pt.add_argument("--theta", type=float, required=True)
    pt.add_argument("--t", type=float, required=True)
    pt.add_argument("--reps", type=int, default=1000)
    _add_common(pt, leaf=True)

    p = sub.add_parser("bounds", help="evaluate the explicit bound report")
    p.add_argument("--preset", choices=["pim"], default="pim")
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--theta", type=float, required=True)
    p.add_argument("--n", type=int, default=None,
                   help="also report the sampling TV bound for this sample size")
    p.add_argument("--k32-mode", choices=["mc", "bound", "value"], default="bound")
    p.add_argument("--k32-value", type=float, default=None)
    p.add_argument("--k", type=int, default=2, help="product-moment order")
    p.add_argument("--phi-sup", type=float, default=1.0)
    p.add_argument("--mc-reps", type=int, default=2000)
    _add_common(p, leaf=True)

    p = sub.add_parser("verify", help="run verification experiments")
    verify_sub = p.add_subparsers(dest="verify_command", required=True)
    pv = verify_sub.add_parser("all", help="full desk-scale verification report")
    _add_common(pv, leaf=True)

    return parser


def _cmd_esf(args, seed, threads) -> str:
    dist = esf_crp.esf_distribution(args.n, args.theta)
    return json.dumps({p.to_string(): prob for p, prob in sorted(
        dist.items(), key=lambda kv: kv[0].assignment)}, indent=2) + "\n"


def _cmd_crp_sample(args, seed, threads) -> str:
    def worker(size, rng):
        return [esf_crp.crp_sample(args.n, args.theta, rng).to_string()
                for _ in range(size)]
    lines = _chunked_replicates(worker, args.reps, seed, threads)
    return "\n".join(lines) + "\n"


def _cmd_wf_simulate(args, seed, threads) -> str:
    model = wright_fisher.pim_model(args.N, args.theta)

    def worker(size, rng):
        recs = []
        for _ in range(size):
            pop = wright_fisher.wf_stationary_sample(args.N, model, rng,
                                                     burn_in=args.burn_in)
            rec = {"K": pop.k}
            if args.sample_n:
                rec["partition"] = wright_fisher.sample_partition(
                    pop, args.sample_n, rng).to_string()
            trace = np.asarray(pop.k_trace, dtype=float)
            rec["k_trace"] = {"first": float(trace[0]), "last": float(trace[-1]),
                              "tail_mean": float(trace[-max(len(trace) // 10, 1):].mean())}
            recs.append(json.dumps(rec, sort_keys=True))
        return recs

    lines = _chunked_replicates(worker, args.reps, seed, threads)
    return "\n".join(lines) + "\n"


def _parse_intervals(text: str) -> list[tuple[int, int]]:
    out = []
    for tok in text.split(","):
        try:
            x, y = tok.split(":")
            out.append((int(x), int(y)))
        except ValueError as exc:
            raise ValidationError(f"bad interval {tok!r}; expected x:y") from exc
    return out


def _cmd_genealogy(args, seed, threads) -> str:
    intervals = _parse_intervals(args.intervals)

    def worker(size, rng):
        rows = []
        for _ in range(size):
            floor = min(x for x, _ in intervals)
            trace = genealogy.simulate_trace(args.N, args.N, floor, rng)
            rows.append([genealogy.interval_stats(trace, x, y) for x, y in intervals])
        return rows

    rows = _chunked_replicates(worker, args.reps, seed, threads)
    lines = ["replicate,x,y,gens,edges"]
    for i, stats in enumerate(rows):
        for st in stats:
            lines.append(f"{i},{st.x},{st.y},{st.gens},{st.edges}")
    return "\n".join(lines) + "\n"


def _cmd_fv_transition(args, seed, threads) -> str:
    (rng,) = spawn_rngs(seed, 1)
    stats = fleming_viot.transition_match_stats(args.theta, args.t, args.reps, rng)
    return json.dumps(stats, sort_keys=True, indent=2) + "\n"


def _cmd_bounds(args, seed, threads) -> str:
    rate = args.theta / (2.0 * args.N)
    if not 0 < rate < 1:
        raise ValidationError("preset pim needs 0 < theta/(2N) < 1")
    if args.k32_mode == "value":
        if args.k32_value is None:
            raise ValidationError("--k32-mode value requires --k32-value")
        k32 = args.k32_value
    elif args.k32_mode == "bound":
        k32 = bd.k32_from_types_sq_bound(args.N, rate)
    else:
        (rng,) = spawn_rngs(seed, 1)
        ks = wright_fisher.backward_k_batch(args.N, rate, args.mc_reps, rng)
        k32 = float((ks.astype(float) ** 1.5).mean())
    inp = bd.pim_inputs(args.N, args.theta, k32=k32, k32_mode=args.k32_mode)
    tf = bd.ProductMomentClass(k=args.k, phi_sup=args.phi_sup)
    report = bd.wf_dp_bound(tf, inp).to_dict()
    if args.n is not None:
        report["sampling_tv_bound"] = {
            "n": args.n, "bound": bd.wf_sampling_tv_bound(args.n, inp)}
    return json.dumps(report, sort_keys=True, indent=2) + "\n"


def _cmd_verify_all(args, seed, threads) -> str:
    return experiments.report_to_json(experiments.verify_all(seed))


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        seed = getattr(args, "seed", None)
        seed = seed if seed is not None else _env_int("PDWF_SEED", 0)
        threads = getattr(args, "threads", None)
        threads = threads if threads is not None else _env_int("PDWF_THREADS", 1)
        if args.command == "esf":
            text = _cmd_esf(args, seed, threads)
        elif args.command == "crp-sample":
            text = _cmd_crp_sample(args, seed, threads)
        elif args.command == "wf":
            text = _cmd_wf_simulate(args, seed, threads)
        elif args.command == "genealogy":
            text = _cmd_genealogy(args, seed, threads)
        elif args.command == "fv":
            text = _cmd_fv_transition(args, seed, threads)
        elif args.command == "bounds":
            text = _cmd_bounds(args, seed, threads)
        elif args.command == "verify":
            text = _cmd_verify_all(args, seed, threads)
        else:  # pragma: no cover
            raise ValidationError(f"unknown command {args.command!r}")
    except (ValidationError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (ResourceError, NumericalError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    _emit(text, getattr(args, "out", None))
    return 0


def main() -> None:  # console entry point
    sys.exit(run())


if __name__ == "__main__":
    main()
