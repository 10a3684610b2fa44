"""Sweep exact policy gains over a grid of discovery costs.

Evaluates each policy spec at each phi with the exact evaluator and
writes one CSV row per (phi, policy) cell, e.g.

    python scripts/run_phi_sweep.py --K 5 --N 9 --p 0.3 \
        --policies optimal,rule:2,route-break --out sweep.csv
"""

from __future__ import annotations

import argparse
import sys

from manet1d import Boundary, NetworkParams, SimConfig, sweep_phi


def parse_args(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--K", type=int, default=5, help="interior grid positions")
    ap.add_argument("--N", type=int, default=9, help="relay nodes")
    ap.add_argument("--p", type=float, default=0.3,
                    help="per-slot move probability, used for both directions")
    ap.add_argument("--p-r", type=float, default=None,
                    help="right-move probability if different from --p")
    ap.add_argument("--boundary", choices=("stuck", "wrap"), default="stuck")
    ap.add_argument("--phis", default=",".join(f"{0.1 * i:.1f}" for i in range(11)),
                    help="comma-separated discovery costs in [0, 1]")
    ap.add_argument("--policies", default="optimal,best-threshold,rule:2,route-break",
                    help="comma-separated policy specs")
    ap.add_argument("--out", default="-", help="CSV path, or - for stdout")
    return ap.parse_args(argv)


def main(argv=None) -> int:
    args = parse_args(argv)
    params = NetworkParams(
        K=args.K,
        N=args.N,
        p_l=args.p,
        p_r=args.p if args.p_r is None else args.p_r,
        boundary=Boundary.WRAP if args.boundary == "wrap" else Boundary.STUCK,
    )
    base = SimConfig(params=params)
    phis = [float(x) for x in args.phis.split(",") if x.strip()]
    policies = [x.strip() for x in args.policies.split(",") if x.strip()]
    result = sweep_phi(base, phis, policies)

    lines = ["phi,policy,gain,threshold,discovery_frequency"]
    for row in result.rows:
        theta = "" if row.threshold is None else f"{row.threshold:.10g}"
        lines.append(
            f"{row.phi:.10g},{row.policy},{row.gain:.10g},{theta},"
            f"{row.discovery_frequency:.10g}"
        )
    text = "\n".join(lines) + "\n"
    if args.out == "-":
        sys.stdout.write(text)
    else:
        with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        print(f"wrote {len(result.rows)} rows to {args.out}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
