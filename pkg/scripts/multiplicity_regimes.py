#!/usr/bin/env python3
"""Multiplicity distributions approaching the condensation point.

Sweeps the seed mean n0 as a fraction of the critical value nc and writes
one p_n table per fraction, plus a summary of means and combinant sums.

  python scripts/multiplicity_regimes.py --x 1.0 --fractions 0.5 0.8 0.95 0.99
"""

import argparse
from pathlib import Path

import numpy as np

from boseglow.io import params_header, write_csv
from boseglow.multiplicity import (auto_order, combinants,
                                   multiplicity_distribution)
from boseglow.params import ModelParams, derive


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--x", type=float, default=1.0, help="density parameter x")
    ap.add_argument("--sigma-t2", type=float, default=10000.0)
    ap.add_argument("--fractions", type=float, nargs="+",
                    default=[0.5, 0.8, 0.95, 0.99], help="n0 as fraction of nc")
    ap.add_argument("--outdir", default="out/multiplicity_regimes")
    args = ap.parse_args()

    outdir = Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)

    summary = {"fraction": [], "n0": [], "mean": [], "p0": [], "orders": []}
    for frac in args.fractions:
        probe = derive(ModelParams.from_natural(n0=1.0, x=args.x,
                                                sigma_t2=args.sigma_t2))
        n0 = frac * probe.nc
        params = ModelParams.from_natural(n0=n0, x=args.x, sigma_t2=args.sigma_t2)
        d = derive(params)
        series = combinants(d, n0, auto_order(d, n0))
        dist = multiplicity_distribution(series)
        n = np.arange(len(dist.p))
        write_csv(outdir / f"pn_frac{frac:.2f}.csv",
                  {"n": n, "p_n": dist.p, "cumulative": np.cumsum(dist.p)},
                  params_header(params, d, {"n0_over_nc": frac,
                                            "mean_multiplicity": dist.mean}))
        summary["fraction"].append(frac)
        summary["n0"].append(n0)
        summary["mean"].append(dist.mean)
        summary["p0"].append(dist.p[0])
        summary["orders"].append(len(dist.p) - 1)
        print(f"n0/nc = {frac:.2f}: n0 = {n0:.4f}, <n> = {dist.mean:.4f}, "
              f"p_0 = {dist.p[0]:.4f}, orders kept = {len(dist.p) - 1}")

    write_csv(outdir / "summary.csv", summary,
              [f"x = {args.x}", f"sigma_t2 = {args.sigma_t2}",
               f"nc = {probe.nc:.6f}",
               "mean multiplicity diverges as n0 -> nc (condensation)"])
    print(f"wrote {outdir}")


if __name__ == "__main__":
    main()
