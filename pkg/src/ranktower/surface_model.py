"""Elliptic surfaces y^2 = x^3 + a4 x + a6 over P^1 or over an elliptic base curve,
with exact conductor degrees computed from gcd splits of c4 and the discriminant.
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from pathlib import Path
from typing import Optional

from .arith import (
    PolyQ,
    as_rational,
    discriminant,
    eval_mod_p,
    multiplicity_split,
    poly_gcd,
    prime_divisors,
    radical,
    resultant,
)


class SpecError(ValueError):
    """Invalid surface description or an unsupported request for it."""


MULTIPLICATIVE = "multiplicative"
ADDITIVE = "additive"
_EXPONENT = {MULTIPLICATIVE: 1, ADDITIVE: 2}


@dataclass(frozen=True)
class BaseDescriptor:
    kind: str = "p1"
    A: Fraction = Fraction(0)
    B: Fraction = Fraction(0)

    def __post_init__(self):
        if self.kind not in ("p1", "elliptic"):
            raise SpecError(f"unknown base kind {self.kind!r}")
        object.__setattr__(self, "A", as_rational(self.A))
        object.__setattr__(self, "B", as_rational(self.B))
        if self.kind == "elliptic" and self.disc_factor == 0:
            raise SpecError("elliptic base y^2 = x^3 + Ax + B is singular")

    @property
    def genus(self) -> int:
        return 0 if self.kind == "p1" else 1

    @property
    def disc_factor(self) -> Fraction:
        return 4 * self.A**3 + 27 * self.B**2

    @property
    def cubic(self) -> PolyQ:
        """g(x) = x^3 + Ax + B (elliptic base only)."""
        return PolyQ([self.B, self.A, 0, 1])


# Functions on an elliptic base are u(x) + v(x) y with y^2 = g(x); pairs (u, v).
def _fmul(f, h, g):
    u1, v1 = f
    u2, v2 = h
    return (u1 * u2 + v1 * v2 * g, u1 * v2 + u2 * v1)


def _fadd(f, h):
    return (f[0] + h[0], f[1] + h[1])


def _fscale(f, c):
    return (f[0].scale(c), f[1].scale(c))


def _fzero(f) -> bool:
    return f[0].is_zero() and f[1].is_zero()


def _proportional(f, h) -> bool:
    """True when f = lambda * h for a rational lambda (h nonzero)."""
    for hp, fp in zip(h, f):
        if not hp.is_zero():
            lam = fp.lc / hp.lc if fp.degree == hp.degree else None
            if lam is None:
                return False
            return _fzero(_fadd(f, _fscale(h, -lam)))
    return False


@dataclass(frozen=True)
class SurfaceSpec:
    name: str
    base: BaseDescriptor
    a4: PolyQ
    a6: PolyQ
    excluded_primes: frozenset = frozenset()
    a4_y: PolyQ = field(default_factory=PolyQ)
    a6_y: PolyQ = field(default_factory=PolyQ)
    sections: tuple = ()
    check_j: bool = True

    def __post_init__(self):
        object.__setattr__(self, "excluded_primes", frozenset(int(q) for q in self.excluded_primes))
        if self.base.kind == "p1" and not (self.a4_y.is_zero() and self.a6_y.is_zero()):
            raise SpecError("y-dependent coefficients need an elliptic base")
        g = self._ring_modulus
        a4, a6 = (self.a4, self.a4_y), (self.a6, self.a6_y)
        a4c = _fmul(_fmul(a4, a4, g), a4, g)
        a6s = _fmul(a6, a6, g)
        delta = _fscale(_fadd(_fscale(a4c, 4), _fscale(a6s, 27)), -16)
        if _fzero(delta):
            raise SpecError("singular surface: discriminant vanishes identically")
        if self.check_j:
            c4c = _fscale(a4c, Fraction(-48) ** 3)
            if _fzero(a4) or _proportional(c4c, delta):
                raise SpecError("j-invariant is constant; a nonconstant surface is required")
        for sec in self.sections:
            if self.base.kind != "p1":
                raise SpecError("declared sections are supported on a P^1 base only")
            x, y = sec
            if not (y * y - (x**3 + self.a4 * x + self.a6)).is_zero():
                raise SpecError(f"declared section ({x}, {y}) does not satisfy the Weierstrass equation")

    @property
    def _ring_modulus(self) -> PolyQ:
        return self.base.cubic if self.base.kind == "elliptic" else PolyQ()

    @property
    def genus(self) -> int:
        return self.base.genus

    @property
    def y_dependent(self) -> bool:
        return not (self.a4_y.is_zero() and self.a6_y.is_zero())

    def to_dict(self) -> dict:
        if self.base.kind == "p1":
            base = {"kind": "p1"}
        else:
            base = {"kind": "elliptic", "A": str(self.base.A), "B": str(self.base.B)}

        def coeff(u, v):
            if v.is_zero():
                return u.to_strings()
            return {"u": u.to_strings(), "v": v.to_strings()}

        d = {
            "name": self.name,
            "base": base,
            "a4": coeff(self.a4, self.a4_y),
            "a6": coeff(self.a6, self.a6_y),
            "excluded_primes": sorted(self.excluded_primes),
        }
        if self.sections:
            d["sections"] = [{"x": x.to_strings(), "y": y.to_strings()} for x, y in self.sections]
        return d

    def digest(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:16]

    @cached_property
    def final_excluded_primes(self) -> frozenset:
        """The set S used by scans: user primes plus primes where the model breaks."""
        return frozenset(_auto_excluded(self))

    @cached_property
    def degenerate_primes(self) -> frozenset:
        """Primes outside S where the reduced place list may differ from the one over Q."""
        return frozenset(_split_degenerate(self) - self.final_excluded_primes)

    def reduce_mod(self, p: int) -> "ReducedSurface":
        if p in self.final_excluded_primes:
            raise SpecError(f"p = {p} is in the excluded set S")
        return ReducedSurface(
            p,
            self.a4.mod_p(p),
            self.a6.mod_p(p),
            self.a4_y.mod_p(p),
            self.a6_y.mod_p(p),
        )


@dataclass(frozen=True)
class ReducedSurface:
    """Coefficient functions reduced mod p (u + v y parts)."""

    p: int
    a4: list
    a6: list
    a4_y: list
    a6_y: list

    def coefficients_at(self, x, y=0):
        p = self.p
        a4 = eval_mod_p(self.a4, x, p)
        a6 = eval_mod_p(self.a6, x, p)
        if self.a4_y:
            a4 = (a4 + eval_mod_p(self.a4_y, x, p) * y) % p
        if self.a6_y:
            a6 = (a6 + eval_mod_p(self.a6_y, x, p) * y) % p
        return a4, a6


def _parse_poly(v) -> tuple[PolyQ, PolyQ]:
    if isinstance(v, dict):
        unknown = set(v) - {"u", "v"}
        if unknown:
            raise SpecError(f"unknown coefficient keys {sorted(unknown)}")
        return PolyQ(v.get("u", [])), PolyQ(v.get("v", []))
    if not isinstance(v, list):
        raise SpecError(f"coefficients must be a list of exact strings, got {v!r}")
    return PolyQ(v), PolyQ()


def surface_from_dict(d: dict, check_j: bool = True) -> SurfaceSpec:
    try:
        b = d.get("base", {"kind": "p1"})
        if b.get("kind") == "elliptic":
            base = BaseDescriptor("elliptic", as_rational(b["A"]), as_rational(b["B"]))
        elif b.get("kind") == "p1":
            base = BaseDescriptor("p1")
        else:
            raise SpecError(f"unknown base {b!r}")
        a4, a4_y = _parse_poly(d["a4"])
        a6, a6_y = _parse_poly(d["a6"])
        sections = tuple((PolyQ(s["x"]), PolyQ(s["y"])) for s in d.get("sections", []))
        return SurfaceSpec(
            name=str(d.get("name", "surface")),
            base=base,
            a4=a4,
            a6=a6,
            a4_y=a4_y,
            a6_y=a6_y,
            excluded_primes=frozenset(d.get("excluded_primes", [2, 3])),
            sections=sections,
            check_j=check_j,
        )
    except SpecError:
        raise
    except (KeyError, TypeError, ValueError, ZeroDivisionError) as exc:
        raise SpecError(f"bad surface spec: {exc}") from exc


def load_surface(path) -> SurfaceSpec:
    try:
        d = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise SpecError(f"cannot read surface spec {path}: {exc}") from exc
    return surface_from_dict(d)


def weierstrass_invariants(s: SurfaceSpec) -> tuple[PolyQ, PolyQ, PolyQ]:
    """(c4, c6, Delta) as polynomials in the base parameter (x-only models)."""
    if s.y_dependent:
        raise SpecError("exact invariants unsupported for y-dependent coefficients")
    c4 = s.a4.scale(-48)
    c6 = s.a6.scale(-864)
    delta = (s.a4**3).scale(4) + (s.a6**2).scale(27)
    delta = delta.scale(-16)
    if delta.is_zero():
        raise SpecError("singular surface")
    return c4, c6, delta


@dataclass(frozen=True)
class Place:
    """A bad-reduction locus: a squarefree polynomial whose closed points share one type.

    ``degree`` is the total residue degree of the closed points of the base
    lying over it, so the locus may bundle several places.
    """

    degree: int
    kind: str
    locus: Optional[PolyQ] = None
    where: str = "affine"

    @property
    def exponent(self) -> int:
        return _EXPONENT[self.kind]

    @property
    def contribution(self) -> int:
        return self.exponent * self.degree


@dataclass(frozen=True)
class ConductorReport:
    affine_places: tuple
    infinity_place: Optional[Place]
    total_degree: int
    genus: int
    excluded_primes: tuple = ()
    degenerate_primes: tuple = ()

    @property
    def geometric_bound(self) -> int:
        return self.total_degree + 4 * self.genus - 4

    @property
    def places(self) -> list:
        out = list(self.affine_places)
        if self.infinity_place is not None:
            out.append(self.infinity_place)
        return out

    def recomputed_total(self) -> int:
        return sum(pl.contribution for pl in self.places)

    def to_dict(self) -> dict:
        def pl(x: Place):
            return {
                "degree": x.degree,
                "type": x.kind,
                "where": x.where,
                "locus": None if x.locus is None else x.locus.to_strings(),
            }

        return {
            "affine_places": [pl(x) for x in self.affine_places],
            "infinity_place": None if self.infinity_place is None else pl(self.infinity_place),
            "total_degree": self.total_degree,
            "genus": self.genus,
            "geometric_bound": self.geometric_bound,
            "excluded_primes": list(self.excluded_primes),
            "degenerate_primes": list(self.degenerate_primes),
        }


def _split_by_c4(r: PolyQ, c4: PolyQ) -> tuple[PolyQ, PolyQ]:
    """(multiplicative part, additive part) of a squarefree locus r."""
    additive = r.monic() if c4.is_zero() else poly_gcd(r, radical(c4))
    return r // additive, additive


def _msplit(a: PolyQ, k: int) -> Optional[PolyQ]:
    # None stands for the zero function (vanishes to every order).
    return None if a.is_zero() else multiplicity_split(a, k)


def _common(*polys: Optional[PolyQ]) -> PolyQ:
    acc: Optional[PolyQ] = None
    for f in polys:
        if f is None:
            continue
        acc = f if acc is None else poly_gcd(acc, f)
    return PolyQ([1]) if acc is None else acc


def _check_minimal(c4: PolyQ, c6: PolyQ, ramified: Optional[PolyQ] = None) -> None:
    bad = _common(_msplit(c4, 4), _msplit(c6, 6))
    if ramified is not None:
        # at points with y = 0 the uniformizer is y and x - x0 vanishes to order 2
        bad_r = _common(_msplit(c4, 2), _msplit(c6, 3), ramified)
        if not bad_r.is_constant():
            raise SpecError(
                f"model is not minimal at the places over {bad_r}; supply a minimal model"
            )
    if not bad.is_constant():
        raise SpecError(f"model is not minimal at the places over {bad}; supply a minimal model")


def _valuation_at_infinity(f: PolyQ, weight: int, k: int) -> Optional[int]:
    return None if f.is_zero() else weight * k - f.degree


def infinity_model(s: SurfaceSpec) -> tuple[int, dict]:
    """Scaling exponent k of the model at t = infinity and its valuations.

    In the parameter u = 1/t the model is a4 -> u^{4k} a4(1/u), a6 -> u^{6k} a6(1/u).
    """
    c4, c6, delta = weierstrass_invariants(s)
    k = 0
    while True:
        vals = [
            _valuation_at_infinity(c4, 4, k),
            _valuation_at_infinity(c6, 6, k),
            _valuation_at_infinity(delta, 12, k),
        ]
        if all(v is None or v >= 0 for v in vals):
            break
        k += 1

    def reducible(k):
        v4 = _valuation_at_infinity(c4, 4, k)
        v6 = _valuation_at_infinity(c6, 6, k)
        v12 = _valuation_at_infinity(delta, 12, k)
        return (v4 is None or v4 >= 4) and (v6 is None or v6 >= 6) and v12 >= 12

    while k > 0 and reducible(k):
        k -= 1
    v4 = _valuation_at_infinity(c4, 4, k)
    v6 = _valuation_at_infinity(c6, 6, k)
    v12 = _valuation_at_infinity(delta, 12, k)
    return k, {"c4": v4, "c6": v6, "delta": v12}


def infinity_fiber_coefficients(s: SurfaceSpec) -> tuple[Fraction, Fraction]:
    """(a4, a6) of the fiber at t = infinity in the rescaled model."""
    k, _ = infinity_model(s)
    return s.a4.coeff(4 * k), s.a6.coeff(6 * k)


def conductor_p1(s: SurfaceSpec) -> ConductorReport:
    if s.base.kind != "p1":
        raise SpecError("conductor_p1 needs a P^1 base")
    c4, c6, delta = weierstrass_invariants(s)
    _check_minimal(c4, c6)
    places = []
    if not delta.is_constant():
        mult, addv = _split_by_c4(radical(delta), c4)
        if mult.degree > 0:
            places.append(Place(mult.degree, MULTIPLICATIVE, mult))
        if addv.degree > 0:
            places.append(Place(addv.degree, ADDITIVE, addv))
    _, v = infinity_model(s)
    inf = None
    if v["delta"] > 0:
        kind = MULTIPLICATIVE if v["c4"] == 0 else ADDITIVE
        inf = Place(1, kind, None, "infinity")
    total = sum(pl.contribution for pl in places) + (inf.contribution if inf else 0)
    return ConductorReport(
        tuple(places), inf, total, 0, tuple(sorted(s.final_excluded_primes)), tuple(sorted(s.degenerate_primes))
    )


def conductor_elliptic_base(s: SurfaceSpec) -> ConductorReport:
    """Conductor degree over an elliptic base, excluding the fiber over the origin O."""
    if s.base.kind != "elliptic":
        raise SpecError("conductor_elliptic_base needs an elliptic base")
    if s.y_dependent:
        raise SpecError("exact conductor unsupported for y-dependent coefficients")
    c4, c6, delta = weierstrass_invariants(s)
    g = s.base.cubic
    _check_minimal(c4, c6, ramified=g)
    places = []
    if not delta.is_constant():
        w = radical(delta)
        w_g = poly_gcd(w, g)
        w_ng = w // w_g
        for part, factor, where in ((w_g, 1, "y=0"), (w_ng, 2, "y!=0")):
            if part.degree <= 0:
                continue
            mult, addv = _split_by_c4(part, c4)
            if mult.degree > 0:
                places.append(Place(factor * mult.degree, MULTIPLICATIVE, mult, where))
            if addv.degree > 0:
                places.append(Place(factor * addv.degree, ADDITIVE, addv, where))
    total = sum(pl.contribution for pl in places)
    return ConductorReport(
        tuple(places), None, total, 1, tuple(sorted(s.final_excluded_primes)), tuple(sorted(s.degenerate_primes))
    )


def conductor(s: SurfaceSpec) -> ConductorReport:
    return conductor_p1(s) if s.base.kind == "p1" else conductor_elliptic_base(s)


def pullback_conductor(report: ConductorReport, n: int) -> tuple[int, int]:
    """Conductor degree and geometric bound of the pullback by [n] on an elliptic base."""
    if n < 1:
        raise ValueError("n must be positive")
    if report.genus != 1:
        raise SpecError("P^1 has no unramified covers; the pullback needs an elliptic base")
    total = n * n * report.total_degree
    return total, total + 4 * report.genus - 4


# --- the excluded set S -----------------------------------------------------------


def _primes_of(q: Fraction) -> set:
    q = Fraction(q)
    out = set()
    for v in (q.numerator, q.denominator):
        if v not in (0, 1, -1):
            out |= prime_divisors(v)
    return out


def _auto_excluded(s: SurfaceSpec) -> set:
    """User S plus primes dividing denominators, leading terms or the base discriminant."""
    S = set(s.excluded_primes) | {2, 3}
    for f in (s.a4, s.a6, s.a4_y, s.a6_y):
        S |= _primes_of(f.denominators())
    if s.base.kind == "elliptic":
        S |= _primes_of(s.base.A.denominator) | _primes_of(s.base.B.denominator)
        S |= _primes_of(s.base.disc_factor)
    for f in (s.a4, s.a6):
        if not f.is_zero():
            S |= _primes_of(f.lc)
    if not s.y_dependent:
        S |= _primes_of(weierstrass_invariants(s)[2].lc)
    return S


def _split_degenerate(s: SurfaceSpec) -> set:
    """Primes dividing the discriminants and resultants behind the gcd splits."""
    out: set = set()
    if s.y_dependent:
        return out
    c4, _, delta = weierstrass_invariants(s)
    if delta.is_constant():
        return out
    r = radical(delta)
    if r.degree >= 2:
        out |= _primes_of(discriminant(r))
    mult, _ = _split_by_c4(r, c4)
    if not c4.is_zero() and mult.degree >= 1 and c4.degree >= 1:
        out |= _primes_of(resultant(mult, radical(c4)))
    if s.base.kind == "elliptic":
        g = s.base.cubic
        w_ng = r // poly_gcd(r, g)
        if w_ng.degree >= 1:
            out |= _primes_of(resultant(w_ng, g))
    return out


# --- numeric cross-check of the place list ------------------------------------


def bad_fiber_counts(s: SurfaceSpec, p: int, report: Optional[ConductorReport] = None) -> dict:
    """Predicted vs observed singular affine fibers mod p, split by reduction type.

    Predicted counts come from the F_p-roots of the loci in the report; observed
    counts classify each affine base point by (Delta = 0, c4 != 0) vs (both 0).
    """
    report = report or conductor(s)
    c4, _, delta = weierstrass_invariants(s)
    c4p, dp = c4.mod_p(p), delta.mod_p(p)
    pred = {MULTIPLICATIVE: 0, ADDITIVE: 0}
    obs = {MULTIPLICATIVE: 0, ADDITIVE: 0}
    if s.base.kind == "p1":
        pts = [(t, 1) for t in range(p)]
    else:
        g = s.base.cubic.mod_p(p)
        pts = []
        for x in range(p):
            r = eval_mod_p(g, x, p)
            # number of affine points of the base over x
            m = 1 if r == 0 else (2 if pow(r, (p - 1) // 2, p) == 1 else 0)
            if m:
                pts.append((x, m))
    loci = [(pl.locus.mod_p(p), pl.kind) for pl in report.affine_places]
    for x, mult in pts:
        for lp, kind in loci:
            if eval_mod_p(lp, x, p) == 0:
                pred[kind] += mult
        if eval_mod_p(dp, x, p) == 0:
            kind = ADDITIVE if eval_mod_p(c4p, x, p) == 0 else MULTIPLICATIVE
            obs[kind] += mult
    return {"p": p, "predicted": pred, "observed": obs, "consistent": pred == obs}
