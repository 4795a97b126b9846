"""Command-line front end.

    quicfec run     --campaign campaign.yaml --out results.csv [--jobs N]
    quicfec sample  --space space.yaml --n 120 --seed 7 [--out points.csv]
    quicfec report  --in results.csv --ecdf fraction_received --out ecdf.csv
    quicfec report  --in results.csv --ratio A:B --metric fraction_received --out ratio.csv
    quicfec oracle  {gf,prng,ge,burst,rs-subsets} ...

The oracle subcommands recompute the independently derived constants the
test suite freezes, so expected values can be audited from the shell.
"""

from __future__ import annotations

import argparse
import csv
import sys

import yaml

from .xdesign import CampaignSpec, ParamSpace, ecdf, ratio_table, read_results, run_campaign, wsp_sample


def _cmd_run(args) -> int:
    with open(args.campaign) as fh:
        spec = CampaignSpec.from_yaml(fh.read())
    run_campaign(spec, args.out, jobs=args.jobs, echo=print if args.verbose else None)
    print(f"campaign {spec.name}: results in {args.out}")
    return 0


def _cmd_sample(args) -> int:
    with open(args.space) as fh:
        raw = yaml.safe_load(fh.read()) or {}
    kind = raw.pop("kind", "ge")
    space = ParamSpace.make(kind, raw or None)
    points = wsp_sample(space, args.n, args.seed)
    out = open(args.out, "w", newline="") if args.out else sys.stdout
    writer = csv.writer(out)
    names = [d[0] for d in space.dims]
    writer.writerow(["point_id"] + names)
    for i, point in enumerate(points):
        writer.writerow([f"pt{i:03d}"] + [f"{point[n]:.6f}" for n in names])
    if args.out:
        out.close()
    return 0


def _cmd_report(args) -> int:
    rows = read_results(args.results)
    if args.ecdf:
        metric = args.ecdf
        with open(args.out, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["contender", "value", "cum_frac"])
            names = sorted({r["contender"] for r in rows})
            for name in names:
                values = [
                    float(r[metric]) for r in rows if r["contender"] == name and r["status"] == "ok"
                ]
                if not values:
                    continue
                for value, frac in ecdf(values):
                    writer.writerow([name, f"{value:.6f}", f"{frac:.6f}"])
        return 0
    if args.ratio:
        a, _, b = args.ratio.partition(":")
        if not a or not b:
            print("--ratio wants the form A:B", file=sys.stderr)
            return 2
        table = ratio_table(rows, a, b, args.metric)
        with open(args.out, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["point_id", "ratio"])
            for pid, ratio in table:
                writer.writerow([pid, f"{ratio:.6f}" if ratio != float("inf") else "inf"])
        return 0
    print("report wants --ecdf METRIC or --ratio A:B", file=sys.stderr)
    return 2


def _cmd_oracle(args) -> int:
    if args.which == "gf":
        from .gf256 import gf_inv, gf_mul

        def mul_oracle(a, b):
            res = 0
            while b:
                if b & 1:
                    res ^= a
                a <<= 1
                if a & 0x100:
                    a ^= 0x11D
                b >>= 1
            return res

        print(f"0x02*0x80 bitwise oracle = {mul_oracle(0x02, 0x80):#04x}; table = {gf_mul(2, 0x80):#04x}")
        brute = next(c for c in range(1, 256) if gf_mul(0x02, c) == 1)
        print(f"inv(0x02) brute force = {brute:#04x}; table = {gf_inv(2):#04x}")
        return 0
    if args.which == "prng":
        from .prng import MODULUS, MULTIPLIER, prng_next

        x, first = prng_next(1)
        _, second = prng_next(x)
        print(f"from state 1: {first}, {second}")
        _, wrap = prng_next(2**31 - 2)
        print(f"from state 2^31-2: {wrap}")
        print(f"10000th value from 1: {pow(MULTIPLIER, 10_000, MODULUS)}")
        return 0
    if args.which == "ge":
        from .netem import GEParams

        params = GEParams(args.p, args.r, args.k, args.h)
        print(f"stationary loss rate = {params.stationary_loss_rate():.6f}")
        print(f"mean bad sojourn = {params.mean_bad_sojourn():.3f} packets")
        return 0
    if args.which == "burst":
        from .codec import BlockCodeParams
        from .sched import burst_recovery_enumeration

        params = BlockCodeParams(n=args.n, k=args.k)
        for paths in (1, 2):
            frac = burst_recovery_enumeration(params, args.burst, paths)
            print(f"({args.n},{args.k}) burst={args.burst} paths={paths}: {frac} recoverable")
        return 0
    if args.which == "rs-subsets":
        import itertools

        import numpy as np

        from .codec import BlockCodeParams, rs_generator_matrix
        from .gf256 import Matrix, solve_linear_system

        g = rs_generator_matrix(BlockCodeParams(n=args.n, k=args.k))
        probe = [np.array([b], dtype=np.uint8) for b in range(1, args.k + 1)]
        singular = 0
        total = 0
        for rows in itertools.combinations(range(args.n), args.k):
            total += 1
            sub = Matrix.from_array(g.data[list(rows)])
            if not solve_linear_system(sub, sub.mat_vec(probe)).ok:
                singular += 1
        print(f"({args.n},{args.k}): {total} row subsets, {singular} singular")
        return 0
    raise AssertionError(args.which)


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="quicfec", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a campaign")
    p_run.add_argument("--campaign", required=True)
    p_run.add_argument("--out", required=True)
    p_run.add_argument("--jobs", type=int, default=1)
    p_run.add_argument("--verbose", action="store_true")
    p_run.set_defaults(fn=_cmd_run)

    p_sample = sub.add_parser("sample", help="sample a parameter space")
    p_sample.add_argument("--space", required=True)
    p_sample.add_argument("--n", type=int, default=120)
    p_sample.add_argument("--seed", type=int, default=0)
    p_sample.add_argument("--out")
    p_sample.set_defaults(fn=_cmd_sample)

    p_report = sub.add_parser("report", help="derive ecdf/ratio tables from results")
    p_report.add_argument("--in", dest="results", required=True)
    p_report.add_argument("--ecdf")
    p_report.add_argument("--ratio")
    p_report.add_argument("--metric", default="fraction_received")
    p_report.add_argument("--out", required=True)
    p_report.set_defaults(fn=_cmd_report)

    p_oracle = sub.add_parser("oracle", help="print independently derived test constants")
    o_sub = p_oracle.add_subparsers(dest="which", required=True)
    o_sub.add_parser("gf").set_defaults(fn=_cmd_oracle)
    o_sub.add_parser("prng").set_defaults(fn=_cmd_oracle)
    o_ge = o_sub.add_parser("ge")
    o_ge.add_argument("--p", type=float, default=0.005)
    o_ge.add_argument("--r", type=float, default=0.25)
    o_ge.add_argument("--k", type=float, default=0.98)
    o_ge.add_argument("--h", type=float, default=0.05)
    o_ge.set_defaults(fn=_cmd_oracle)
    o_burst = o_sub.add_parser("burst")
    o_burst.add_argument("--n", type=int, default=3)
    o_burst.add_argument("--k", type=int, default=2)
    o_burst.add_argument("--burst", type=int, default=3)
    o_burst.set_defaults(fn=_cmd_oracle)
    o_rs = o_sub.add_parser("rs-subsets")
    o_rs.add_argument("--n", type=int, default=6)
    o_rs.add_argument("--k", type=int, default=4)
    o_rs.set_defaults(fn=_cmd_oracle)

    args = parser.parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    raise SystemExit(main())
