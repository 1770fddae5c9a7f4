#!/usr/bin/env python3
"""Scan s_p over a prime range and report the largest normalized excess
of |A_p| over the geometric rank bound."""
import argparse
from dataclasses import dataclass

from ranktower.surface_model import conductor, load_surface
from ranktower.trace_engine import michel_bound_scan


@dataclass
class Config:
    spec: str
    pmin: int = 100
    pmax: int = 5000
    workers: int = 1
    top: int = 10


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("spec")
    ap.add_argument("--pmin", type=int, default=100)
    ap.add_argument("--pmax", type=int, default=5000)
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--top", type=int, default=10)
    cfg = Config(**vars(ap.parse_args()))

    s = load_surface(cfg.spec)
    out = michel_bound_scan(s, cfg.pmax, conductor(s), pmin=cfg.pmin, workers=cfg.workers)
    print(f"{s.name}: bound {out['bound']}, {len(out['rows'])} primes in [{cfg.pmin}, {cfg.pmax}]")
    print(f"max slack {out['max_slack']:.6f}")
    for p, sp, slack in sorted(out["rows"], key=lambda r: -r[2])[: cfg.top]:
        print(f"{p:>6} {sp:>8} {slack:>12.6f}")


if __name__ == "__main__":
    main()
