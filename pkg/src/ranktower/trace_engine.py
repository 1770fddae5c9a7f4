"""Per-prime fiber-trace scans.

For a surface and a prime p the engine computes s_p, the exact sum of the
fiber traces a_p(E_R) over base points R mod p (singular fibers count 0),
and the same sum for the pullback along [n] on an elliptic base.
"""
from __future__ import annotations

import logging
import math
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Iterable, Optional

import numpy as np
from numba import njit

from .arith import eval_mod_p, primes_up_to
from .elliptic_core import (
    ENUMERATION_CAP,
    CurveFp,
    _mul,
    cube_table,
    enumerate_points,
    fiber_discriminant,
    legendre_table,
)
from .surface_model import ConductorReport, SpecError, SurfaceSpec, infinity_fiber_coefficients

log = logging.getLogger(__name__)

INFINITY = "inf"


@dataclass(frozen=True)
class TraceRecord:
    p: int
    s_p: int
    fibers_good: int
    fibers_singular: int
    fibers_skipped: int
    n: int = 1
    h0: int = 1
    image_size: int = 0

    @property
    def scanned(self) -> int:
        return self.fibers_good + self.fibers_singular + self.fibers_skipped

    def cache_line(self) -> str:
        vals = (self.p, self.n, self.s_p, self.fibers_good, self.fibers_singular,
                self.fibers_skipped, self.h0, self.image_size)
        return "\t".join(str(v) for v in vals)

    @classmethod
    def from_cache_line(cls, line: str) -> "TraceRecord":
        p, n, s, good, sing, skipped, h0, img = (int(v) for v in line.split("\t"))
        return cls(p, s, good, sing, skipped, n, h0, img)


# Tower records carry the same fields; the alias keeps the two roles apart in signatures.
TowerTraceRecord = TraceRecord


@njit(cache=True)
def _char_sums(p, a4, a6, cubes, chi, out):
    # out[i] = sum_x chi(x^3 + a4[i] x + a6[i]); a4*x is stepped without a multiply
    for i in range(a4.shape[0]):
        b4 = a4[i]
        b6 = a6[i]
        acc = 0
        ax = 0
        for x in range(p):
            v = cubes[x] + ax + b6
            if v >= p:
                v -= p
                if v >= p:
                    v -= p
            acc += chi[v]
            ax += b4
            if ax >= p:
                ax -= p
        out[i] = acc


def fiber_traces(p: int, a4, a6) -> np.ndarray:
    """a_p for a batch of fibers with coefficients a4[i], a6[i] mod p (0 when singular)."""
    a4 = np.ascontiguousarray(np.asarray(a4, dtype=np.int64) % p)
    a6 = np.ascontiguousarray(np.asarray(a6, dtype=np.int64) % p)
    sums = np.zeros(a4.shape[0], dtype=np.int64)
    if sums.size:
        _char_sums(p, a4, a6, cube_table(p), legendre_table(p).astype(np.int64), sums)
    out = -sums
    out[_singular_mask(p, a4, a6)] = 0
    return out


def _tally(traces: np.ndarray, singular: np.ndarray, weights=None) -> tuple[int, int, int]:
    if weights is None:
        weights = np.ones_like(traces)
    s = int((traces * weights).sum())
    sing = int(weights[singular].sum())
    good = int(weights[~singular].sum())
    return s, good, sing


def _singular_mask(p, a4, a6) -> np.ndarray:
    a4 = np.asarray(a4, dtype=np.int64) % p
    a6 = np.asarray(a6, dtype=np.int64) % p
    return (4 * a4 % p * a4 % p * a4 + 27 * (a6 * a6 % p)) % p == 0


def _base_curve(s: SurfaceSpec, p: int) -> CurveFp:
    b = s.base
    A = b.A.numerator * pow(b.A.denominator, -1, p)
    B = b.B.numerator * pow(b.B.denominator, -1, p)
    return CurveFp(p, A, B)


def _require_prime(s: SurfaceSpec, p: int, cap: int = ENUMERATION_CAP) -> None:
    if p in s.final_excluded_primes:
        raise SpecError(f"p = {p} is in the excluded set S")
    if p < 5:
        raise SpecError("primes below 5 are always excluded")
    if p > cap:
        raise SpecError(f"p = {p} exceeds the enumeration cap {cap}")


def fiber_trace(s: SurfaceSpec, p: int, R) -> int:
    """a_p of the fiber over R: an int t (or INFINITY) on P^1, an affine (x, y) on an elliptic base."""
    _require_prime(s, p)
    red = s.reduce_mod(p)
    if s.base.kind == "p1":
        if R == INFINITY:
            a4q, a6q = infinity_fiber_coefficients(s)
            a4 = a4q.numerator * pow(a4q.denominator, -1, p) % p
            a6 = a6q.numerator * pow(a6q.denominator, -1, p) % p
        else:
            a4, a6 = red.coefficients_at(int(R) % p)
    else:
        if R is None:
            raise SpecError("the fiber over the base origin O is not modelled")
        x, y = R
        if not _base_curve(s, p).contains((x % p, y % p)):
            raise SpecError(f"{R} is not a point of the base curve mod {p}")
        a4, a6 = red.coefficients_at(x % p, y % p)
    if fiber_discriminant(a4, a6, p) == 0:
        return 0
    return int(fiber_traces(p, [a4], [a6])[0])


def average_trace(s: SurfaceSpec, p: int) -> TraceRecord:
    """s_p = p * A_p, summed over all base points mod p (O skipped on an elliptic base)."""
    _require_prime(s, p)
    red = s.reduce_mod(p)
    if s.base.kind == "p1":
        t = np.arange(p, dtype=np.int64)
        a4, a6 = red.coefficients_at(t)
        a4i, a6i = infinity_fiber_coefficients(s)
        a4 = np.append(a4, a4i.numerator * pow(a4i.denominator, -1, p) % p)
        a6 = np.append(a6, a6i.numerator * pow(a6i.denominator, -1, p) % p)
        traces = fiber_traces(p, a4, a6)
        sval, good, sing = _tally(traces, _singular_mask(p, a4, a6))
        return TraceRecord(p, sval, good, sing, 0, 1, 1, p + 1)
    base = _base_curve(s, p)
    if s.y_dependent:
        pts = enumerate_points(base)[1:]
        xs = np.array([P[0] for P in pts], dtype=np.int64)
        ys = np.array([P[1] for P in pts], dtype=np.int64)
        a4, a6 = red.coefficients_at(xs, ys)
        traces = fiber_traces(p, a4, a6)
        sval, good, sing = _tally(traces, _singular_mask(p, a4, a6))
        return TraceRecord(p, sval, good, sing, 1, 1, 1, len(pts) + 1)
    # x-only coefficients: group the base points by x, weight 1 + chi(g(x))
    x = np.arange(p, dtype=np.int64)
    gx = (cube_table(p) + base.a4 * x + base.a6) % p
    weights = 1 + legendre_table(p)[gx].astype(np.int64)
    keep = weights > 0
    x, weights = x[keep], weights[keep]
    a4, a6 = red.coefficients_at(x)
    traces = fiber_traces(p, a4, a6)
    sval, good, sing = _tally(traces, _singular_mask(p, a4, a6), weights)
    total = int(weights.sum()) + 1
    return TraceRecord(p, sval, good, sing, 1, 1, 1, total)


def _images(base: CurveFp, n: int, pts):
    p, a4 = base.p, base.a4
    out = {}
    for P in pts:
        if P is None or P in out:
            continue
        Q = _mul(p, a4, P, n)
        out[P] = Q
        # [n](-P) = -[n]P
        negP = (P[0], (-P[1]) % p)
        if negP not in out:
            out[negP] = None if Q is None else (Q[0], (-Q[1]) % p)
    return out


def tower_average_trace(s: SurfaceSpec, n: int, p: int) -> TowerTraceRecord:
    """s_p of the pullback along [n], grouped by image point.

    Every image R != O of [n] on C0(F_p) has exactly h0 = |C0[n](F_p)|
    preimages, so s_p = h0 * sum over distinct images of a_p(E_R).  The
    multiplicities are counted, not assumed, and checked against h0.
    """
    if s.base.kind != "elliptic":
        raise SpecError("tower scans need an elliptic base")
    if n < 1:
        raise ValueError("n must be positive")
    _require_prime(s, p)
    base = _base_curve(s, p)
    pts = enumerate_points(base)
    img = _images(base, n, pts)
    counts = Counter(Q for Q in img.values() if Q is not None)
    h0 = 1 + sum(1 for Q in img.values() if Q is None)
    order = len(pts)
    image_size = len(counts) + 1
    if h0 * image_size != order:
        raise AssertionError(f"h0 * image size != #C0(F_p) at p={p}, n={n}")
    bad = {m for m in counts.values() if m != h0}
    if bad:
        raise AssertionError(f"image multiplicities {sorted(bad)} differ from h0={h0} at p={p}, n={n}")
    red = s.reduce_mod(p)
    keys = sorted(counts)
    xs = np.array([Q[0] for Q in keys], dtype=np.int64)
    ys = np.array([Q[1] for Q in keys], dtype=np.int64)
    mult = np.array([counts[Q] for Q in keys], dtype=np.int64)
    a4, a6 = red.coefficients_at(xs, ys)
    traces = fiber_traces(p, a4, a6)
    sval, good, sing = _tally(traces, _singular_mask(p, a4, a6), mult)
    return TowerTraceRecord(p, sval, good, sing, h0, n, h0, image_size)


def tower_direct(s: SurfaceSpec, n: int, p: int) -> int:
    """Oracle for tower_average_trace: one fiber evaluation per base point, no grouping."""
    base = _base_curve(s, p)
    total = 0
    for P in enumerate_points(base):
        if P is None:
            continue
        Q = _mul(base.p, base.a4, P, n)
        if Q is None:
            continue
        total += fiber_trace(s, p, Q)
    return total


def tower_preimage_counts(s: SurfaceSpec, n: int, p: int) -> Counter:
    base = _base_curve(s, p)
    return Counter(Q for Q in _images(base, n, enumerate_points(base)).values() if Q is not None)


# --- scans over many primes ----------------------------------------------------


def scan_primes(s: SurfaceSpec, pmax: int, pmin: int = 5) -> list[int]:
    return [p for p in primes_up_to(pmax) if p >= max(pmin, 5) and p not in s.final_excluded_primes]


def _task(args):
    s, n, p = args
    if n is None:
        return average_trace(s, p)
    return tower_average_trace(s, n, p)


def scan(s: SurfaceSpec, primes: Iterable[int], n: Optional[int] = None, workers: int = 1) -> list[TraceRecord]:
    """Records for each prime, sorted by p; the worker count never changes the result."""
    primes = sorted(set(primes))
    tasks = [(s, n, p) for p in primes]
    if workers <= 1 or len(tasks) <= 1:
        recs = [_task(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            recs = list(pool.map(_task, tasks, chunksize=max(1, len(tasks) // (4 * workers))))
    return sorted(recs, key=lambda r: r.p)


def michel_bound_scan(
    s: SurfaceSpec,
    pmax: int,
    report: ConductorReport,
    pmin: int = 5,
    workers: int = 1,
    records: Optional[list[TraceRecord]] = None,
) -> dict:
    """slack(p) = (|s_p|/p - (|N| + 4g - 4)) * sqrt(p), with its maximum."""
    bound = report.geometric_bound
    if records is None:
        records = scan(s, scan_primes(s, pmax, pmin), workers=workers)
    rows = []
    for r in records:
        if r.p < pmin or r.p > pmax:
            continue
        if abs(r.s_p) > 2 * math.sqrt(r.p) * r.fibers_good + 1e-9:
            raise AssertionError(f"|s_p| exceeds the per-fiber Hasse total at p={r.p}")
        slack = (abs(r.s_p) / r.p - bound) * math.sqrt(r.p)
        rows.append((r.p, r.s_p, slack))
    max_slack = max((row[2] for row in rows), default=None)
    return {"bound": bound, "rows": rows, "max_slack": max_slack}


def tower_bound_constant(rec: TowerTraceRecord, base_conductor: int, genus: int = 1) -> float:
    """Empirical c in |s_p|/p <= (h0/n^2)(n^2 |N| + 4g' - 4) + c/sqrt(p)."""
    n2 = rec.n * rec.n
    main = rec.h0 / n2 * (n2 * base_conductor + 4 * genus - 4)
    return (abs(rec.s_p) / rec.p - main) * math.sqrt(rec.p)


# --- scan cache -----------------------------------------------------------------


class CacheMiss(LookupError):
    pass


class ScanCache:
    """Append-only per-surface record file; one tab-separated record per line.

    The first line is a ``# surface=<digest>`` header so a cache is never
    read back against another surface.
    """

    def __init__(self, path, surface: SurfaceSpec):
        self.path = Path(path)
        self.digest = surface.digest()
        self.records: dict[tuple[int, int], TraceRecord] = {}
        if self.path.exists():
            self._load()

    def _load(self) -> None:
        lines = self.path.read_text(encoding="utf-8").splitlines()
        if lines and lines[0].startswith("# surface="):
            if lines[0].split("=", 1)[1].strip() != self.digest:
                raise SpecError(f"cache {self.path} belongs to a different surface")
            lines = lines[1:]
        for line in lines:
            if line.strip() and not line.startswith("#"):
                r = TraceRecord.from_cache_line(line)
                self.records[(r.n, r.p)] = r

    def get(self, n: int, p: int) -> Optional[TraceRecord]:
        return self.records.get((n, p))

    def missing(self, n: int, primes: Iterable[int]) -> list[int]:
        return [p for p in primes if (n, p) not in self.records]

    def add(self, recs: Iterable[TraceRecord]) -> None:
        new = [r for r in recs if (r.n, r.p) not in self.records]
        if not new:
            return
        fresh = not self.path.exists()
        self.path.parent.mkdir(parents=True, exist_ok=True)
        with self.path.open("a", encoding="utf-8") as fh:
            if fresh:
                fh.write(f"# surface={self.digest}\n")
            for r in new:
                fh.write(r.cache_line() + "\n")
                self.records[(r.n, r.p)] = r

    def finalize(self) -> None:
        """Rewrite the file sorted by (n, p)."""
        lines = [f"# surface={self.digest}"]
        lines += [self.records[k].cache_line() for k in sorted(self.records)]
        self.path.write_text("\n".join(lines) + "\n", encoding="utf-8")

    def fetch(self, n: int, primes: Iterable[int]) -> list[TraceRecord]:
        primes = list(primes)
        miss = self.missing(n, primes)
        if miss:
            raise CacheMiss(f"cache miss for n={n} at {len(miss)} primes (first {miss[0]})")
        return [self.records[(n, p)] for p in primes]


def cached_scan(
    s: SurfaceSpec,
    primes: Iterable[int],
    n: int = 1,
    cache: Optional[ScanCache] = None,
    workers: int = 1,
    allow_scan: bool = True,
) -> list[TraceRecord]:
    primes = sorted(set(primes))
    if cache is None:
        return scan(s, primes, None if n == 1 else n, workers)
    todo = cache.missing(n, primes)
    if todo:
        if not allow_scan:
            raise CacheMiss(f"cache miss for n={n} at {len(todo)} primes (first {todo[0]})")
        use_tower = s.base.kind == "elliptic" and n != 1
        cache.add(scan(s, todo, n if use_tower else None, workers))
        cache.finalize()
    return cache.fetch(n, primes)


def record_dict(r: TraceRecord) -> dict:
    return asdict(r)
