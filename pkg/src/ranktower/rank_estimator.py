"""Truncated Nagao sums and the rank bounds they are compared against.

The estimates are conditional on the Tate conjecture for the surface; they
estimate the rank, they do not prove it.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Optional, Sequence

import mpmath

from .arith import divisor_count
from .surface_model import ConductorReport

PRECISION_BITS = 80
LABEL = "conditional estimate"
FORMS = ("N", "M")


def _pairs(records) -> list[tuple[int, int]]:
    out = []
    for r in records:
        if isinstance(r, tuple):
            out.append((int(r[0]), int(r[1])))
        else:
            out.append((r.p, r.s_p))
    return out


def nagao_estimate(records, X: int, form: str = "N", excluded: Iterable[int] = ()) -> float:
    """R_N(X) = (1/X) sum -(s_p/p) log p, or R_M(X) = (1/log X) sum -(s_p/p^2) log p, over p <= X.

    ``records`` holds TraceRecords or (p, s_p) pairs.  The weights -s_p/p^k are
    kept as exact fractions; only the final log-weighted fold is done in
    80-bit floating point.
    """
    if form not in FORMS:
        raise ValueError(f"form must be one of {FORMS}")
    skip = set(excluded)
    terms = [(p, Fraction(-s, p if form == "N" else p * p)) for p, s in _pairs(records) if p <= X and p not in skip]
    if not terms:
        raise ValueError("no primes in range")
    with mpmath.workprec(PRECISION_BITS):
        acc = mpmath.mpf(0)
        for p, w in sorted(terms):
            if w:
                acc += mpmath.mpf(w.numerator) / w.denominator * mpmath.log(p)
        norm = mpmath.mpf(X) if form == "N" else mpmath.log(X)
        return float(acc / norm)


def geometric_bound(report: ConductorReport) -> int:
    return report.total_degree + 4 * report.genus - 4


def tower_rank_bound(
    base_conductor: int,
    n: int,
    orbit_count=None,
    mode: str = "measured",
    index_bound=None,
    genus: int = 1,
):
    """Rank bound for the pullback along [n] on an elliptic base.

    measured: (orbits / n^2) * (n^2 |N| + 4g - 4)
    serre:    I * d(n) / n^2 * |N(E_n)|
    """
    if n < 1:
        raise ValueError("n must be positive")
    if genus != 1:
        raise ValueError("tower bounds need an elliptic base (genus 1)")
    n2 = n * n
    pulled = n2 * base_conductor + 4 * genus - 4
    if mode == "measured":
        if orbit_count is None or orbit_count < 1:
            raise ValueError("orbit count must be at least 1")
        if orbit_count > n2:
            raise ValueError(f"orbit count {orbit_count} exceeds |A| = {n2}")
        bound = Fraction(orbit_count) / n2 * pulled if isinstance(orbit_count, int) else orbit_count / n2 * pulled
        assert bound <= pulled
        return bound
    if mode == "serre":
        if index_bound is None or index_bound < 1:
            raise ValueError("serre mode needs an index bound I >= 1")
        return Fraction(index_bound) * divisor_count(n) / n2 * n2 * base_conductor
    raise ValueError(f"unknown mode {mode!r}")


def fmt(v) -> str:
    """Exact integers print exactly; everything else gets six decimals."""
    if v is None:
        return "-"
    if isinstance(v, Fraction) and v.denominator == 1:
        v = v.numerator
    if isinstance(v, int):
        return str(v)
    return f"{float(v):.6f}"


@dataclass
class RankReport:
    cutoffs: list
    rows: list = field(default_factory=list)  # (X, R_N, R_M)
    geometric_bound: int = 0
    tower_bound: Optional[float] = None
    section_lower_bound: Optional[int] = None
    label: str = LABEL

    def __post_init__(self):
        if any(b <= a for a, b in zip(self.cutoffs, self.cutoffs[1:])):
            raise ValueError("cutoffs must be strictly increasing")

    @property
    def section_check(self) -> Optional[bool]:
        """Soft check: the last estimates should exceed (known sections - 0.6)."""
        if self.section_lower_bound is None or not self.rows:
            return None
        _, rn, rm = self.rows[-1]
        return min(rn, rm) > self.section_lower_bound - 0.6

    def to_dict(self) -> dict:
        return {
            "label": self.label,
            "cutoffs": list(self.cutoffs),
            "rows": [{"X": X, "R_N": fmt(rn), "R_M": fmt(rm)} for X, rn, rm in self.rows],
            "geometric_bound": self.geometric_bound,
            "tower_bound": None if self.tower_bound is None else fmt(self.tower_bound),
            "section_lower_bound": self.section_lower_bound,
            "section_check": self.section_check,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def to_table(self) -> str:
        head = ["X", "R_N", "R_M", "geometric", "tower"]
        body = [[str(X), fmt(rn), fmt(rm), str(self.geometric_bound), fmt(self.tower_bound)] for X, rn, rm in self.rows]
        lines = [f"# {self.label}"]
        if self.section_lower_bound is not None:
            lines.append(f"# known sections: {self.section_lower_bound}, check: {self.section_check}")
        lines.append(align([head] + body))
        return "\n".join(lines)


def align(rows: Sequence[Sequence[str]]) -> str:
    widths = [max(len(r[i]) for r in rows) for i in range(len(rows[0]))]
    return "\n".join("  ".join(c.rjust(w) for c, w in zip(r, widths)).rstrip() for r in rows)


def rank_report(records, cutoffs, report: ConductorReport, excluded=(), sections: Optional[int] = None,
                tower_bound=None) -> RankReport:
    """Nagao estimates at each cutoff from a fixed set of records."""
    rr = RankReport(list(cutoffs), geometric_bound=geometric_bound(report), tower_bound=tower_bound,
                    section_lower_bound=sections)
    for X in rr.cutoffs:
        rr.rows.append((X, nagao_estimate(records, X, "N", excluded), nagao_estimate(records, X, "M", excluded)))
    return rr
