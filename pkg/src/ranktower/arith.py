"""Exact arithmetic over Q and F_p: dense univariate polynomials, gcds,
squarefree splits and a few elementary arithmetic functions.

Rationals are ``fractions.Fraction`` throughout; nothing here touches floats.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

Rational = Fraction


def as_rational(v) -> Fraction:
    """Parse an int, Fraction or exact decimal/rational string."""
    if isinstance(v, Fraction):
        return v
    if isinstance(v, bool):
        raise TypeError("bool is not a coefficient")
    if isinstance(v, int):
        return Fraction(v)
    if isinstance(v, str):
        return Fraction(v.strip())
    raise TypeError(f"cannot interpret {v!r} as an exact rational")


@dataclass(frozen=True)
class PolyQ:
    """Dense polynomial over Q, constant term first, no trailing zeros."""

    coeffs: tuple[Fraction, ...] = ()

    def __init__(self, coeffs: Iterable = ()):
        cs = [as_rational(c) for c in coeffs]
        while cs and cs[-1] == 0:
            cs.pop()
        object.__setattr__(self, "coeffs", tuple(cs))

    @classmethod
    def const(cls, c) -> "PolyQ":
        return cls([c])

    @classmethod
    def monomial(cls, k: int, c=1) -> "PolyQ":
        return cls([0] * k + [c])

    @property
    def degree(self) -> int:
        # zero polynomial gets degree -1
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return not self.coeffs

    def is_constant(self) -> bool:
        return len(self.coeffs) <= 1

    @property
    def lc(self) -> Fraction:
        return self.coeffs[-1] if self.coeffs else Fraction(0)

    def coeff(self, k: int) -> Fraction:
        return self.coeffs[k] if 0 <= k < len(self.coeffs) else Fraction(0)

    def __add__(self, other: "PolyQ") -> "PolyQ":
        other = _coerce(other)
        n = max(len(self.coeffs), len(other.coeffs))
        return PolyQ(self.coeff(i) + other.coeff(i) for i in range(n))

    __radd__ = __add__

    def __neg__(self) -> "PolyQ":
        return PolyQ(-c for c in self.coeffs)

    def __sub__(self, other: "PolyQ") -> "PolyQ":
        return self + (-_coerce(other))

    def __rsub__(self, other) -> "PolyQ":
        return _coerce(other) - self

    def __mul__(self, other) -> "PolyQ":
        other = _coerce(other)
        if self.is_zero() or other.is_zero():
            return PolyQ()
        out = [Fraction(0)] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if a == 0:
                continue
            for j, b in enumerate(other.coeffs):
                out[i + j] += a * b
        return PolyQ(out)

    __rmul__ = __mul__

    def __pow__(self, k: int) -> "PolyQ":
        out = PolyQ([1])
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def scale(self, c) -> "PolyQ":
        c = as_rational(c)
        return PolyQ(c * a for a in self.coeffs)

    def derivative(self) -> "PolyQ":
        return PolyQ(i * c for i, c in enumerate(self.coeffs) if i > 0)

    def __call__(self, x):
        acc = Fraction(0) if not isinstance(x, PolyQ) else PolyQ()
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def monic(self) -> "PolyQ":
        if self.is_zero():
            return self
        return self.scale(1 / self.lc)

    def divmod(self, other: "PolyQ") -> tuple["PolyQ", "PolyQ"]:
        if other.is_zero():
            raise ZeroDivisionError("polynomial division by zero")
        rem = list(self.coeffs)
        dq = len(rem) - len(other.coeffs)
        if dq < 0:
            return PolyQ(), self
        quo = [Fraction(0)] * (dq + 1)
        lead = other.lc
        od = other.degree
        for k in range(dq, -1, -1):
            c = rem[k + od] / lead
            quo[k] = c
            if c:
                for j, b in enumerate(other.coeffs):
                    rem[k + j] -= c * b
        return PolyQ(quo), PolyQ(rem[:od])

    def __floordiv__(self, other: "PolyQ") -> "PolyQ":
        return self.divmod(other)[0]

    def __mod__(self, other: "PolyQ") -> "PolyQ":
        return self.divmod(other)[1]

    def divides(self, other: "PolyQ") -> bool:
        """True when ``self`` divides ``other`` exactly."""
        if self.is_zero():
            return other.is_zero()
        return (other % self).is_zero()

    def integer_coeffs(self) -> list[int]:
        """Primitive integer multiple with positive leading coefficient."""
        if self.is_zero():
            return []
        den = 1
        for c in self.coeffs:
            den = den * c.denominator // math.gcd(den, c.denominator)
        ints = [int(c * den) for c in self.coeffs]
        g = 0
        for v in ints:
            g = math.gcd(g, v)
        if ints[-1] < 0:
            g = -g
        return [v // g for v in ints]

    def primitive(self) -> "PolyQ":
        return PolyQ(self.integer_coeffs())

    def denominators(self) -> int:
        den = 1
        for c in self.coeffs:
            den = den * c.denominator // math.gcd(den, c.denominator)
        return den

    def mod_p(self, p: int) -> list[int]:
        """Coefficients reduced mod p; denominators must be prime to p."""
        return [c.numerator * pow(c.denominator, -1, p) % p for c in self.coeffs]

    def __repr__(self) -> str:
        if self.is_zero():
            return "PolyQ(0)"
        terms = []
        for i, c in enumerate(self.coeffs):
            if c == 0:
                continue
            terms.append(f"{c}" if i == 0 else f"{c}*t^{i}")
        return "PolyQ(" + " + ".join(terms) + ")"

    def __str__(self) -> str:
        if self.is_zero():
            return "0"
        terms = []
        for i in range(len(self.coeffs) - 1, -1, -1):
            c = self.coeffs[i]
            if c == 0:
                continue
            mono = "" if i == 0 else ("t" if i == 1 else f"t^{i}")
            mag = abs(c)
            body = str(mag) if (mag != 1 or not mono) else ""
            body = f"{body}*{mono}" if body and mono else body or mono
            sign = "-" if c < 0 else "+"
            terms.append((sign, body))
        out = ("-" if terms[0][0] == "-" else "") + terms[0][1]
        for sign, body in terms[1:]:
            out += f" {sign} {body}"
        return out

    def to_strings(self) -> list[str]:
        return [str(c) for c in self.coeffs]


def _coerce(v) -> PolyQ:
    return v if isinstance(v, PolyQ) else PolyQ([v])


T = PolyQ([0, 1])


def poly_gcd(a: PolyQ, b: PolyQ) -> PolyQ:
    """Monic gcd over Q. Remainders are made primitive each step."""
    a, b = a.primitive(), b.primitive()
    while not b.is_zero():
        a, b = b, (a % b).primitive()
    return a.monic()


def radical(a: PolyQ) -> PolyQ:
    """Monic squarefree part a / gcd(a, a')."""
    if a.is_zero():
        raise ValueError("radical of the zero polynomial")
    return (a // poly_gcd(a, a.derivative())).monic()


def multiplicity_split(a: PolyQ, k: int) -> PolyQ:
    """Monic product of the distinct irreducible factors of multiplicity >= k in a.

    Iterates g_{i+1} = gcd(g_i, g_i') starting from a; after k-1 steps
    the radical of what is left is exactly that product.
    """
    if a.is_zero():
        raise ValueError("multiplicity split of the zero polynomial")
    if k < 1:
        raise ValueError("k must be positive")
    g = a.monic()
    for _ in range(k - 1):
        if g.is_constant():
            break
        g = poly_gcd(g, g.derivative())
    if g.is_constant():
        return PolyQ([1])
    return radical(g)


def resultant(a: PolyQ, b: PolyQ) -> Fraction:
    """Resultant over Q via the Euclidean recursion."""
    if a.is_zero() or b.is_zero():
        return Fraction(0)
    da, db = a.degree, b.degree
    if da == 0:
        return a.lc ** db
    if db == 0:
        return b.lc ** da
    r = a % b
    if r.is_zero():
        return Fraction(0)
    sign = -1 if (da * db) % 2 else 1
    return sign * b.lc ** (da - r.degree) * resultant(b, r)


def discriminant(a: PolyQ) -> Fraction:
    n = a.degree
    if n < 1:
        raise ValueError("discriminant needs degree >= 1")
    sign = -1 if (n * (n - 1) // 2) % 2 else 1
    return sign * resultant(a, a.derivative()) / a.lc


def eval_mod_p(coeffs_mod_p: Sequence[int], x, p: int):
    """Horner evaluation of reduced coefficients; x may be an int or int64 array."""
    acc = 0 * x
    for c in reversed(coeffs_mod_p):
        acc = (acc * x + c) % p
    return acc


# --- elementary arithmetic functions -------------------------------------------


def factorize(n: int) -> dict[int, int]:
    """Trial-division factorization; fine for n up to ~10^12."""
    if n < 1:
        raise ValueError("factorize needs n >= 1")
    out: dict[int, int] = {}
    d = 2
    while d * d <= n:
        while n % d == 0:
            out[d] = out.get(d, 0) + 1
            n //= d
        d += 1 if d == 2 else 2
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


def divisor_count(n: int) -> int:
    if n < 1:
        raise ValueError("d(n) needs n >= 1")
    return math.prod(e + 1 for e in factorize(n).values())


def euler_phi(n: int) -> int:
    if n < 1:
        raise ValueError("phi(n) needs n >= 1")
    out = n
    for q in factorize(n):
        out = out // q * (q - 1)
    return out


@dataclass(frozen=True)
class ArithFn:
    n: int
    d_n: int
    phi_n: int

    @classmethod
    def of(cls, n: int) -> "ArithFn":
        return cls(n, divisor_count(n), euler_phi(n))


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    r = math.isqrt(n)
    for d in range(3, r + 1, 2):
        if n % d == 0:
            return False
    return True


@lru_cache(maxsize=8)
def _sieve(limit: int) -> tuple[int, ...]:
    if limit < 2:
        return ()
    flags = np.ones(limit + 1, dtype=bool)
    flags[:2] = False
    for q in range(2, math.isqrt(limit) + 1):
        if flags[q]:
            flags[q * q :: q] = False
    return tuple(int(v) for v in np.flatnonzero(flags))


def primes_up_to(limit: int) -> list[int]:
    return list(_sieve(int(limit)))


def prime_divisors(n: int) -> set[int]:
    """Prime divisors of a nonzero integer; sympy handles the big ones."""
    n = abs(int(n))
    if n == 0:
        raise ValueError("zero has every prime as divisor")
    if n < 10**12:
        return set(factorize(n))
    from sympy import factorint

    return {int(q) for q in factorint(n)}
