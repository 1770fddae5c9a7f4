"""Finite group actions: Burnside counts, the subgroup orbit inequality,
GL_r(Z/n) orbits on (Z/n)^r, and Frobenius fixed-point averages on C0[n].
"""
from __future__ import annotations

import csv
import io
import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .arith import as_rational, divisor_count, euler_phi, factorize, primes_up_to
from .elliptic_core import CurveFp, enumerate_points, kernel_and_image


class ActionError(ValueError):
    pass


def compose(g, h):
    """(g o h)(x) = g(h(x))."""
    return tuple(g[i] for i in h)


def inverse(g):
    out = [0] * len(g)
    for i, v in enumerate(g):
        out[v] = i
    return tuple(out)


@dataclass(frozen=True)
class FiniteAction:
    """A permutation group given by its full element list, acting on range(set_size)."""

    set_size: int
    elements: tuple
    closure_checked: bool = field(default=False, compare=False)

    def __init__(self, set_size: int, elements):
        elems = tuple(tuple(int(v) for v in g) for g in elements)
        object.__setattr__(self, "set_size", int(set_size))
        object.__setattr__(self, "elements", elems)
        _validate(self.set_size, elems)
        object.__setattr__(self, "closure_checked", True)

    @property
    def order(self) -> int:
        return len(self.elements)

    def fixed_points(self, g) -> int:
        return sum(1 for x, gx in enumerate(g) if x == gx)

    def stabilizer(self, x: int) -> frozenset:
        return frozenset(g for g in self.elements if g[x] == x)


def _validate(k: int, elems: tuple) -> None:
    if k < 1:
        raise ActionError("the set must be nonempty")
    ident = tuple(range(k))
    for g in elems:
        if len(g) != k or sorted(g) != list(ident):
            raise ActionError(f"{g} is not a permutation of range({k})")
    s = set(elems)
    if len(s) != len(elems):
        raise ActionError("duplicate group elements")
    if ident not in s:
        raise ActionError("element list lacks the identity")
    for g in elems:
        if inverse(g) not in s:
            raise ActionError(f"element list is not closed under inverses ({g})")
        for h in elems:
            if compose(g, h) not in s:
                raise ActionError(f"element list is not closed under composition ({g} o {h})")


def generate_group(gens, set_size: int, limit: int = 10**6) -> list:
    """Closure of a generator list, breadth first; raises past ``limit`` elements."""
    ident = tuple(range(set_size))
    gens = [tuple(g) for g in gens]
    seen = {ident}
    frontier = [ident]
    while frontier:
        nxt = []
        for a in frontier:
            for g in gens:
                b = compose(g, a)
                if b not in seen:
                    seen.add(b)
                    if len(seen) > limit:
                        raise ActionError(f"group exceeds {limit} elements")
                    nxt.append(b)
        frontier = nxt
    return sorted(seen)


def burnside_orbit_count(a: FiniteAction) -> int:
    total = sum(a.fixed_points(g) for g in a.elements)
    q, r = divmod(total, a.order)
    if r:
        raise AssertionError(f"fixed-point total {total} is not divisible by |G| = {a.order}")
    return q


class UnionFind:
    def __init__(self, n: int):
        self.parent = list(range(n))

    def find(self, x: int) -> int:
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, x: int, y: int) -> None:
        rx, ry = self.find(x), self.find(y)
        if rx != ry:
            self.parent[max(rx, ry)] = min(rx, ry)

    def count(self) -> int:
        return sum(1 for i in range(len(self.parent)) if self.find(i) == i)


def orbit_partition(a: FiniteAction) -> list:
    uf = UnionFind(a.set_size)
    for g in a.elements:
        for x, gx in enumerate(g):
            uf.union(x, gx)
    groups: dict = {}
    for x in range(a.set_size):
        groups.setdefault(uf.find(x), []).append(x)
    return sorted(groups.values())


def _orbit_count_of(elements, k: int) -> int:
    uf = UnionFind(k)
    for g in elements:
        for x, gx in enumerate(g):
            uf.union(x, gx)
    return uf.count()


@dataclass(frozen=True)
class SubgroupOrbitCheck:
    h_orbits: int
    g_orbits: int
    index: int
    equality_holds: bool
    stabilizers_match: bool


def subgroup_orbit_check(g: FiniteAction, h) -> SubgroupOrbitCheck:
    """H-orbits <= (G:H) * G-orbits, with equality iff every stabilizer H_x equals G_x."""
    h = FiniteAction(g.set_size, h) if not isinstance(h, FiniteAction) else h
    if not set(h.elements) <= set(g.elements):
        raise ActionError("H is not a subgroup of G")
    index, r = divmod(g.order, h.order)
    assert r == 0
    ho, go = burnside_orbit_count(h), burnside_orbit_count(g)
    if ho > index * go:
        raise AssertionError("subgroup orbit inequality violated")
    eq = ho == index * go
    match = all(h.stabilizer(x) == g.stabilizer(x) for x in range(g.set_size))
    if eq != match:
        raise AssertionError("equality and stabilizer agreement disagree")
    return SubgroupOrbitCheck(ho, go, index, eq, match)


# --- GL_r(Z/n) acting on (Z/n)^r ---------------------------------------------------

BRUTE_MAX_N = 12
BRUTE_MAX_R = 2


def _invertible_matrices(n: int, r: int) -> np.ndarray:
    if r == 1:
        units = [a for a in range(n) if math.gcd(a, n) == 1]
        return np.array(units, dtype=np.int64).reshape(-1, 1, 1)
    grid = np.array(list(itertools.product(range(n), repeat=4)), dtype=np.int64).reshape(-1, 2, 2)
    det = (grid[:, 0, 0] * grid[:, 1, 1] - grid[:, 0, 1] * grid[:, 1, 0]) % n
    unit = np.gcd(det, n) == 1
    return grid[unit]


def glr_orbit_count(n: int, r: int = 2, method: str = "formula") -> int:
    if n < 1 or r < 1:
        raise ValueError("n and r must be positive")
    if method == "formula":
        return divisor_count(n)
    if method != "brute":
        raise ValueError(f"unknown method {method!r}")
    if n > BRUTE_MAX_N or r > BRUTE_MAX_R:
        raise ValueError(f"brute enumeration is limited to n <= {BRUTE_MAX_N}, r <= {BRUTE_MAX_R}")
    if n == 1:
        return 1
    mats = _invertible_matrices(n, r)
    vecs = np.array(list(itertools.product(range(n), repeat=r)), dtype=np.int64)
    img = np.einsum("mij,vj->mvi", mats, vecs) % n
    weights = n ** np.arange(r - 1, -1, -1)
    idx = img @ weights  # (m, v) index of M v
    uf = UnionFind(len(vecs))
    for row in idx:
        for v, w in enumerate(row.tolist()):
            uf.union(v, w)
    return uf.count()


def _ord(v: int, q: int) -> int:
    k = 0
    while v % q == 0:
        v //= q
        k += 1
    return k


def orbit_invariant(v, n: int) -> dict:
    """For each prime power q^e || n: min(ord_q(v_1), ..., ord_q(v_r), e)."""
    out = {}
    for q, e in factorize(n).items() if n > 1 else []:
        m = e
        for c in v:
            c %= n
            if c:
                m = min(m, _ord(c, q))
        out[q] = m
    return out


def gcd_identity_check(n: int) -> tuple[int, int, bool]:
    """sum over units a mod n of gcd(a - 1, n), against d(n) * phi(n)."""
    if n < 1:
        raise ValueError("n must be positive")
    lhs = sum(math.gcd(a - 1, n) for a in range(n) if math.gcd(a, n) == 1)
    rhs = divisor_count(n) * euler_phi(n)
    return lhs, rhs, lhs == rhs


def gcd_identity_lhs_fast(n: int) -> int:
    a = np.arange(n, dtype=np.int64)
    units = np.gcd(a, n) == 1
    return int(np.gcd(a[units] - 1, n).sum())


def gcd_identity_scan(nmax: int) -> list[tuple[int, int, int, bool]]:
    rows = []
    for n in range(1, nmax + 1):
        lhs = gcd_identity_lhs_fast(n)
        rhs = divisor_count(n) * euler_phi(n)
        rows.append((n, lhs, rhs, lhs == rhs))
    return rows


# --- Frobenius fixed points on C0[n] -----------------------------------------------


@dataclass
class TorsionActionReport:
    n: int
    rows: list = field(default_factory=list)  # (p, h0, image_size, running_average)

    @property
    def samples(self) -> int:
        return len(self.rows)

    @property
    def running_average(self) -> float:
        return self.rows[-1][3] if self.rows else float("nan")

    @property
    def estimated_orbits(self) -> float:
        return self.running_average

    def b_sizes(self) -> list[tuple[int, int]]:
        """|B| = n^2 / h0 per prime, B the image of Frobenius - 1 on C0[n]."""
        n2 = self.n * self.n
        return [(p, n2 // h0) for p, h0, _, _ in self.rows]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["p", "h0", "image_size", "running_average"])
        for p, h0, img, avg in self.rows:
            w.writerow([p, h0, img, f"{avg:.6f}"])
        return buf.getvalue()


def good_torsion_primes(A, B, n: int, pmax: int, pmin: int = 5) -> list[int]:
    A, B = as_rational(A), as_rational(B)
    disc = 4 * A**3 + 27 * B**2
    if disc == 0:
        raise ValueError("singular base curve")
    bad = n * disc.numerator * disc.denominator * A.denominator * B.denominator
    return [p for p in primes_up_to(pmax) if p >= max(pmin, 5) and bad % p]


def orbit_average_estimate(A, B, n: int, pmax: int, pmin: int = 5) -> TorsionActionReport:
    """Average of h0 = |C0[n](F_p)| over good primes p <= pmax.

    By Burnside this average tends to the number of Galois orbits on C0[n]
    as the sampled Frobenius classes equidistribute.
    """
    if n < 1:
        raise ValueError("n must be positive")
    primes = good_torsion_primes(A, B, n, pmax, pmin)
    if not primes:
        raise ValueError("no good primes in range")
    A, B = as_rational(A), as_rational(B)
    rep = TorsionActionReport(n)
    total = 0
    n2 = n * n
    for i, p in enumerate(primes, 1):
        c = CurveFp(p, A.numerator * pow(A.denominator, -1, p), B.numerator * pow(B.denominator, -1, p))
        order = len(enumerate_points(c))
        h0, image = kernel_and_image(c, n)
        if n2 % h0 or h0 * image != order:
            raise AssertionError(f"h0 = {h0}, image = {image} inconsistent with #C0 = {order} at p = {p}")
        total += h0
        rep.rows.append((p, h0, image, total / i))
    return rep


def burnside_average(fixed_counts) -> Fraction:
    fixed_counts = list(fixed_counts)
    return Fraction(sum(fixed_counts), len(fixed_counts))
