"""Short Weierstrass curves y^2 = x^3 + a4 x + a6 over prime fields F_p, p >= 5."""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional

import numpy as np

from .arith import factorize, is_prime

ENUMERATION_CAP = 50021

# Affine points are (x, y) tuples; the point at infinity is None.
Point = Optional[tuple[int, int]]
O: Point = None


class SingularCurveError(ValueError):
    pass


@lru_cache(maxsize=64)
def legendre_table(p: int) -> np.ndarray:
    """chi[v] for v in [0, p): +1 on nonzero squares, -1 on non-squares, 0 at 0."""
    chi = np.full(p, -1, dtype=np.int8)
    sq = (np.arange(1, (p - 1) // 2 + 1, dtype=np.int64) ** 2) % p
    chi[sq] = 1
    chi[0] = 0
    chi.setflags(write=False)
    return chi


@lru_cache(maxsize=16)
def sqrt_table(p: int) -> dict[int, int]:
    """Smaller square root of each nonzero square mod p."""
    out: dict[int, int] = {}
    for y in range(1, (p - 1) // 2 + 1):
        out[y * y % p] = y
    return out


@lru_cache(maxsize=64)
def cube_table(p: int) -> np.ndarray:
    x = np.arange(p, dtype=np.int64)
    return (x * x % p) * x % p


def fiber_discriminant(a4: int, a6: int, p: int) -> int:
    """4 a4^3 + 27 a6^2 mod p (the discriminant up to the unit -16)."""
    return (4 * a4 * a4 * a4 + 27 * a6 * a6) % p


@dataclass(frozen=True)
class CurveFp:
    p: int
    a4: int
    a6: int

    def __post_init__(self):
        if self.p < 5 or not is_prime(self.p):
            raise ValueError(f"curve operations need a prime p >= 5, got {self.p}")
        object.__setattr__(self, "a4", self.a4 % self.p)
        object.__setattr__(self, "a6", self.a6 % self.p)
        if fiber_discriminant(self.a4, self.a6, self.p) == 0:
            raise SingularCurveError(f"singular curve y^2 = x^3 + {self.a4}x + {self.a6} mod {self.p}")

    def rhs(self, x: int) -> int:
        return (x * x * x + self.a4 * x + self.a6) % self.p

    def contains(self, P: Point) -> bool:
        if P is None:
            return True
        x, y = P
        return 0 <= x < self.p and 0 <= y < self.p and (y * y - self.rhs(x)) % self.p == 0

    def order(self) -> int:
        return self.p + 1 - trace_of_frobenius(self)


def trace_of_frobenius(c: CurveFp) -> int:
    """a_p = -sum_x chi(x^3 + a4 x + a6)."""
    p = c.p
    x = np.arange(p, dtype=np.int64)
    vals = (cube_table(p) + c.a4 * x + c.a6) % p
    return -int(legendre_table(p)[vals].sum(dtype=np.int64))


def _check(c: CurveFp, *pts: Point) -> None:
    for P in pts:
        if not c.contains(P):
            raise ValueError(f"point {P} is not on {c}")


def _add(p: int, a4: int, P: Point, Q: Point) -> Point:
    if P is None:
        return Q
    if Q is None:
        return P
    x1, y1 = P
    x2, y2 = Q
    if x1 == x2:
        if (y1 + y2) % p == 0:
            return None
        lam = (3 * x1 * x1 + a4) * pow(2 * y1, -1, p) % p
    else:
        lam = (y2 - y1) * pow(x2 - x1, -1, p) % p
    x3 = (lam * lam - x1 - x2) % p
    return x3, (lam * (x1 - x3) - y1) % p


def _mul(p: int, a4: int, P: Point, n: int) -> Point:
    if n < 0:
        P = None if P is None else (P[0], (-P[1]) % p)
        n = -n
    out: Point = None
    while n:
        if n & 1:
            out = _add(p, a4, out, P)
        n >>= 1
        if n:
            P = _add(p, a4, P, P)
    return out


def add(c: CurveFp, P: Point, Q: Point) -> Point:
    _check(c, P, Q)
    return _add(c.p, c.a4, P, Q)


def negate(c: CurveFp, P: Point) -> Point:
    _check(c, P)
    return None if P is None else (P[0], (-P[1]) % c.p)


def scalar_mul(c: CurveFp, P: Point, n: int) -> Point:
    _check(c, P)
    return _mul(c.p, c.a4, P, n)


def _cap(p: int, cap: int) -> None:
    if p > cap:
        raise ValueError(f"p = {p} exceeds the enumeration cap {cap}")


def enumerate_points(c: CurveFp, cap: int = ENUMERATION_CAP) -> list[Point]:
    """All points of E(F_p): O first, then affine points by (x, y)."""
    _cap(c.p, cap)
    p = c.p
    roots = sqrt_table(p)
    pts: list[Point] = [None]
    x = np.arange(p, dtype=np.int64)
    vals = ((cube_table(p) + c.a4 * x + c.a6) % p).tolist()
    for xi, v in enumerate(vals):
        if v == 0:
            pts.append((xi, 0))
        else:
            y = roots.get(v)
            if y is not None:
                pts.append((xi, y))
                pts.append((xi, p - y))
    return pts


def torsion_kernel_size(c: CurveFp, n: int, cap: int = ENUMERATION_CAP) -> int:
    """|E[n](F_p)|, by testing n*P = O on every point."""
    if n < 1:
        raise ValueError("n must be positive")
    if n == 1:
        return 1
    p, a4 = c.p, c.a4
    return sum(1 for P in enumerate_points(c, cap) if _mul(p, a4, P, n) is None)


def group_structure(c: CurveFp, cap: int = ENUMERATION_CAP) -> tuple[int, int]:
    """Invariant factors (d1, d2), d1 | d2, of E(F_p).

    For each prime power l^e || #E, |E[l^k]| = l^{min(k,a)+min(k,b)} with
    a <= b; a is read off as the largest k with |E[l^k]| = l^{2k}.
    """
    N = len(enumerate_points(c, cap))
    d1 = 1
    for l, e in factorize(N).items():
        a = 0
        for k in range(1, e // 2 + 1):
            if torsion_kernel_size(c, l**k, cap) == l ** (2 * k):
                a = k
            else:
                break
        d1 *= l**a
    return d1, N // d1


def naive_point_count(c: CurveFp) -> int:
    """O(p^2) double-loop count of E(F_p) including O; used as an oracle."""
    p = c.p
    count = 1
    for x in range(p):
        r = c.rhs(x)
        for y in range(p):
            if y * y % p == r:
                count += 1
    return count


def hasse_ok(a: int, p: int) -> bool:
    return a * a <= 4 * p


def sqrt_bound(p: int) -> float:
    return 2 * math.sqrt(p)


def kernel_and_image(c: CurveFp, n: int, cap: int = ENUMERATION_CAP) -> tuple[int, int]:
    """(|E[n](F_p)|, |[n]E(F_p)|) from one pass over the points; [n](-P) = -[n]P halves the work."""
    if n < 1:
        raise ValueError("n must be positive")
    p, a4 = c.p, c.a4
    kernel = 1
    images = {None}
    for P in enumerate_points(c, cap):
        if P is None or P[1] > p - P[1]:
            continue
        Q = _mul(p, a4, P, n)
        if Q is None:
            kernel += 1 if P[1] == 0 else 2
        else:
            images.add(Q)
            images.add((Q[0], (-Q[1]) % p))
    return kernel, len(images)
