#!/usr/bin/env python3
"""Running average of |C0[n](F_p)| over good primes, printed at checkpoints.

For n = 2 on y^2 = x^3 - x + 1 (full S3 image on the 2-torsion) the limit is 2.
"""
import argparse
from dataclasses import dataclass

from ranktower.orbit_theory import orbit_average_estimate


@dataclass
class Config:
    A: str = "-1"
    B: str = "1"
    n: int = 2
    pmax: int = 10000
    every: int = 100


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--A", default="-1")
    ap.add_argument("--B", default="1")
    ap.add_argument("--n", type=int, default=2)
    ap.add_argument("--pmax", type=int, default=10000)
    ap.add_argument("--every", type=int, default=100)
    cfg = Config(**vars(ap.parse_args()))

    rep = orbit_average_estimate(cfg.A, cfg.B, cfg.n, cfg.pmax)
    for i, (p, h0, img, avg) in enumerate(rep.rows, 1):
        if i % cfg.every == 0 or i == rep.samples:
            print(f"{i:>6} primes, p = {p:>6}: average {avg:.6f}")


if __name__ == "__main__":
    main()
