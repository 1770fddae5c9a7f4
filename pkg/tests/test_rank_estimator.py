import json
import math
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ranktower.arith import divisor_count, primes_up_to
from ranktower.rank_estimator import (
    LABEL,
    RankReport,
    fmt,
    geometric_bound,
    nagao_estimate,
    rank_report,
    tower_rank_bound,
)
from ranktower.surface_model import conductor
from ranktower.trace_engine import scan, scan_primes


def float_oracle(pairs, X, form):
    acc = 0.0
    for p, s in pairs:
        if p <= X:
            acc += -s / (p if form == "N" else p * p) * math.log(p)
    return acc / (X if form == "N" else math.log(X))


def test_single_prime_example():
    assert nagao_estimate([(5, -5)], 5, "N") == pytest.approx(math.log(5) / 5, rel=1e-12)
    assert nagao_estimate([(5, -5)], 5, "M") == pytest.approx(0.2, rel=1e-12)


def test_excluded_and_cutoff():
    pairs = [(5, -5), (7, 3), (11, -2)]
    assert nagao_estimate(pairs, 7, "M", excluded=[7]) == pytest.approx(0.2 * math.log(5) / math.log(7), rel=1e-12)
    with pytest.raises(ValueError, match="no primes"):
        nagao_estimate(pairs, 4)
    with pytest.raises(ValueError):
        nagao_estimate(pairs, 11, "Q")


@settings(max_examples=60, deadline=None)
@given(st.lists(st.integers(-500, 500), min_size=1, max_size=40), st.sampled_from(["N", "M"]))
def test_matches_float_oracle(svals, form):
    primes = [p for p in primes_up_to(400) if p >= 5][: len(svals)]
    pairs = list(zip(primes, svals))
    X = primes[-1]
    got = nagao_estimate(pairs, X, form)
    want = float_oracle(pairs, X, form)
    assert got == pytest.approx(want, rel=1e-9, abs=1e-12)


@settings(max_examples=30, deadline=None)
@given(st.lists(st.integers(-50, 50), min_size=2, max_size=20))
def test_order_independent(svals):
    primes = [p for p in primes_up_to(200) if p >= 5][: len(svals)]
    pairs = list(zip(primes, svals))
    X = primes[-1]
    assert nagao_estimate(pairs, X) == nagao_estimate(list(reversed(pairs)), X)


def test_e1_end_to_end(e1):
    recs = scan(e1, scan_primes(e1, 5))
    assert nagao_estimate(recs, 5, "M") == pytest.approx(0.16, rel=1e-9)
    assert nagao_estimate(recs, 5, "N") == pytest.approx(4 * math.log(5) / 25, rel=1e-9)


def test_geometric_bounds(e1, tx1, ebase):
    assert geometric_bound(conductor(e1)) == 3
    assert geometric_bound(conductor(tx1)) == 1
    assert geometric_bound(conductor(ebase)) == 6


def test_tower_bound_examples():
    assert tower_rank_bound(6, 2, orbit_count=2) == 12
    assert tower_rank_bound(6, 2, orbit_count=4) == 24
    assert tower_rank_bound(6, 1, orbit_count=1) == 6
    assert tower_rank_bound(6, 2, mode="serre", index_bound=1) == 2 * 6
    assert tower_rank_bound(6, 6, mode="serre", index_bound=3) == 3 * 4 * 6
    with pytest.raises(ValueError):
        tower_rank_bound(6, 2, orbit_count=5)
    with pytest.raises(ValueError):
        tower_rank_bound(6, 2, mode="serre")
    with pytest.raises(ValueError):
        tower_rank_bound(6, 0, orbit_count=1)
    with pytest.raises(ValueError):
        tower_rank_bound(6, 2, orbit_count=1, genus=0)


@given(st.integers(1, 40), st.integers(1, 30), st.data())
def test_measured_never_exceeds_geometric(N, n, data):
    k = data.draw(st.integers(1, n * n))
    b = tower_rank_bound(N, n, orbit_count=k)
    assert isinstance(b, Fraction)
    assert b <= n * n * N
    assert tower_rank_bound(N, n, mode="serre", index_bound=1) == divisor_count(n) * N


def test_fmt():
    assert fmt(12) == "12"
    assert fmt(Fraction(24, 2)) == "12"
    assert fmt(Fraction(1, 3)) == "0.333333"
    assert fmt(None) == "-"


def test_report(e1):
    recs = scan(e1, scan_primes(e1, 200))
    rr = rank_report(recs, [50, 100, 200], conductor(e1), sections=1)
    assert rr.label == LABEL == "conditional estimate"
    assert [r[0] for r in rr.rows] == [50, 100, 200]
    d = json.loads(rr.to_json())
    assert d["label"] == LABEL and d["geometric_bound"] == 3
    assert rr.to_table().splitlines()[0] == "# conditional estimate"
    with pytest.raises(ValueError):
        RankReport([100, 50])
