import math
import random

import pytest
from hypothesis import given, strategies as st

from tensor_denoise.bounds import (calibrate_mu, coverage_t, divisor_dimensions,
                                   empirical_rank1_bound, evaluate_bounds, net_log_cardinality,
                                   rank_bound, rank_bound_value, scaled_theorem1_bound,
                                   theorem1_bound, theorem1_tail_probability)
from tensor_denoise.experiments import ExperimentRecord


def test_theorem1_example():
    assert theorem1_bound(2, 24, 1.0, 0.0) == pytest.approx(math.sqrt(2 * 576 * math.log(2)),
                                                            rel=1e-14)
    assert theorem1_bound(2, 24, 1.0, 0.0) == pytest.approx(28.2578, abs=1e-4)


def test_theorem1_structure():
    assert theorem1_bound(4, 3, 1.0, 5.0) - theorem1_bound(4, 3, 1.0, 0.0) == pytest.approx(5)
    assert theorem1_bound(4, 3, 3.0, 0.0) == pytest.approx(3 * theorem1_bound(4, 3, 1.0, 0.0))
    with pytest.raises(ValueError):
        theorem1_bound(1, 3, 1.0, 0.0)


def test_tail_probability():
    assert theorem1_tail_probability(0, 2, 24) == 1.0
    assert theorem1_tail_probability(0, 2, 4, clamp=False) == pytest.approx(1 + 2 * math.exp(-0.5))
    assert theorem1_tail_probability(10, 2, 24) < 1e-10
    values = [theorem1_tail_probability(t, 4, 6) for t in (0, 1, 2, 4, 8)]
    assert values == sorted(values, reverse=True)


def test_empirical_examples():
    assert empirical_rank1_bound(2, 2**24, 1.0) == pytest.approx(math.sqrt(2 * 2**12 / 2**24))
    assert empirical_rank1_bound(2, 2**24, 1.0) == pytest.approx(0.02210, abs=1e-5)
    assert empirical_rank1_bound(24, 2**24, 1.0) == pytest.approx(1.691e-3, abs=1e-6)
    with pytest.raises(ValueError):
        empirical_rank1_bound(5, 2**12, 1.0)


@pytest.mark.parametrize("d", [2, 3, 4, 6, 12])
def test_scaled_theorem1_exceeds_empirical_by_sqrt_log_m(d):
    M = 2**12
    ratio = scaled_theorem1_bound(d, M, 1.0) / empirical_rank1_bound(d, M, 1.0)
    assert ratio == pytest.approx(math.sqrt(math.log(M)), rel=1e-12)


@pytest.mark.parametrize("exponent", [12, 24])
def test_formula_bounds_non_increasing_in_d(exponent):
    M = 2**exponent
    dims = [d for d in divisor_dimensions(exponent)]
    emp = [empirical_rank1_bound(d, M, 1.0) for d in dims]
    thm = [scaled_theorem1_bound(d, M, 1.0) for d in dims]
    for seq in (emp, thm):
        assert all(b <= a * (1 + 1e-12) for a, b in zip(seq, seq[1:]))
        assert seq[-1] < seq[0]


def test_rank_bounds():
    for kind in ("cp", "tt", "tucker"):
        assert rank_bound(kind, 4, 4096, 1, 1.0) == pytest.approx(rank_bound("cp", 4, 4096, 1, 1.0))
    assert rank_bound("cp", 3, 4096, 4, 1.0) / rank_bound("cp", 3, 4096, 1, 1.0) == pytest.approx(2)
    assert rank_bound("tucker", 4, 4096, 2, 1.0) / rank_bound("tucker", 4, 4096, 1, 1.0) == pytest.approx(4)


@given(st.integers(1, 50), st.integers(2, 30))
def test_rank_bound_ordering(R, d):
    M = 2**30
    cp, tt, tk = (rank_bound(k, d, M, R, 1.0) for k in ("cp", "tt", "tucker"))
    assert cp <= tt * (1 + 1e-12) and tt <= tk * (1 + 1e-12)


def test_tucker_overflow_flag():
    v = rank_bound_value("tucker", 400, 2**400, 10**6, 1.0)
    assert v.overflow and v.value == math.inf


def test_net_log_cardinality():
    assert net_log_cardinality(2, 2, 2, 1) == pytest.approx(8 * math.log(24))
    assert net_log_cardinality(2, 3, 4, 0.5) - net_log_cardinality(2, 3, 4, 1) == pytest.approx(12 * math.log(2))
    assert net_log_cardinality(2, 3, 8, 1) > net_log_cardinality(2, 3, 4, 1)
    with pytest.raises(ValueError):
        net_log_cardinality(2, 3, 2, 1)


def _planted(mu, t, dims=(2, 3, 4, 6, 12), per=3):
    recs = []
    for d in dims:
        m = 2 ** (12 // d)
        for k in range(per):
            sigma = 0.01 * (k + 1)
            sup = theorem1_bound(m, d, mu, t) * (1.0 if k == 0 else 0.8)
            recs.append(ExperimentRecord("cp", (m,) * d, 1, k, 0.1, 0.0, sigma * 64, 0.0, False,
                                         0.0, knorm_estimate=sup * sigma))
    return recs


def test_calibrate_recovers_planted_mu():
    cal = calibrate_mu(_planted(2.0, coverage_t(0.95)))
    assert cal.mu == pytest.approx(2.0, abs=1e-6)
    assert cal.coverage == 1.0 and cal.lower_estimate


def test_calibrate_order_invariant():
    recs = _planted(1.5, coverage_t(0.95))
    shuffled = recs[:]
    random.Random(0).shuffle(shuffled)
    assert calibrate_mu(recs).mu == calibrate_mu(shuffled).mu


def test_calibrate_insufficient_data():
    with pytest.raises(ValueError):
        calibrate_mu(_planted(1.0, 3.0)[:9])
    with pytest.raises(ValueError):
        calibrate_mu(_planted(1.0, 3.0, dims=(2, 3), per=6))


def test_coverage_t():
    assert math.exp(-coverage_t(0.95) ** 2 / 4) == pytest.approx(0.05)


def test_evaluate_bounds_all_finite():
    vals = evaluate_bounds(4, 4096, 1.0, ranks=(1, 2))
    assert all(math.isfinite(v.value) and v.value >= 0 for v in vals)
