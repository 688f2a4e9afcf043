"""Exact Poisson covariance of Z_t against the limit covariance, far beyond simulation range.

Shows how slowly the finite-t law approaches the limit for index -1/2 kernels.
"""

import argparse

import numpy as np

from shotnoise import kernels, verify
from shotnoise.limit import cramer_wold_variance, limit_covariance_matrix


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--u", type=float, nargs="+", default=[0.2, 0.6])
    p.add_argument("--alphas", type=float, nargs="+", default=[1.0, 1.0])
    args = p.parse_args()

    kern = kernels.moderate(1.0, 1.0)
    u, a = np.array(args.u), np.array(args.alphas)
    lim = limit_covariance_matrix(u)
    print(f"limit projection variance {cramer_wold_variance(a, u):.4f}")
    print(" log t   max|C_t - C|   projection variance")
    for lt in (4, 7, 10, 15, 20, 40, 80, 160, 320, 640):
        c = verify.poisson_fdd_covariance(kern, float(np.exp(lt)), u)
        print(f"{lt:6d}   {np.abs(c - lim).max():.5f}        {a @ c @ a:.5f}")


if __name__ == "__main__":
    main()
