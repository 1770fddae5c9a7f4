#!/usr/bin/env python3
"""Tower bounds for n = 1..nmax on an elliptic-base surface, as CSV."""
import argparse
import sys
from dataclasses import dataclass

from ranktower.cli import TOWER_HEAD, render, tower_rows
from ranktower.surface_model import load_surface


@dataclass
class Config:
    spec: str
    nmax: int = 6
    pmax: int = 200
    orbit_pmax: int = 2000
    index_bound: int = 1


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("spec")
    ap.add_argument("--nmax", type=int, default=6)
    ap.add_argument("--pmax", type=int, default=200)
    ap.add_argument("--orbit-pmax", type=int, default=2000)
    ap.add_argument("--index-bound", type=int, default=1)
    cfg = Config(**vars(ap.parse_args()))

    s = load_surface(cfg.spec)
    if s.base.kind != "elliptic":
        sys.exit("tower_table needs an elliptic base")
    rows = tower_rows(s, range(1, cfg.nmax + 1), cfg.pmax, cfg.orbit_pmax, cfg.index_bound)
    print(render(TOWER_HEAD, rows, "csv"))


if __name__ == "__main__":
    main()
