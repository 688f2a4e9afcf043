"""Deterministic table of the shifted cross-integral ratio and its limit 1 - a."""

import argparse

from shotnoise import kernels, verify


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--rho", type=float, default=1.0)
    p.add_argument("--scaling", choices=("inverse", "remark3"), default="inverse")
    args = p.parse_args()

    kern = kernels.moderate(args.rho, 1.0 if args.rho == 1.0 else None)
    rows = verify.cov_ratio_report(kern, (1e3, 1e6, 1e9, 1e12, 1e15, 1e20), ((0.5, 0.0), (0.5, 0.2), (1.0, 0.0)), args.scaling)
    print("  a    b        t         ratio     |ratio-(1-a)|")
    for r in rows:
        print(f"{r['a']:4.1f} {r['b']:4.1f}  {r['t']:9.1e}  {r['ratio']:.6f}  {r['error']:.6f}")


if __name__ == "__main__":
    main()
