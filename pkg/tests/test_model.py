import math

import numpy as np
import pytest

from oscturnpike import beam
from oscturnpike.model import (OscillatorSystem, StateVector, WeightIndex,
                               check_assumptions, free_flow, min_control_time,
                               weighted_norm)

from conftest import toy_system


def test_system_validation():
    with pytest.raises(ValueError):
        OscillatorSystem([0.0, 1.0], [1.0, 1.0])
    with pytest.raises(ValueError):
        OscillatorSystem([2.0, 1.0], [1.0, 1.0])
    with pytest.raises(ValueError):
        OscillatorSystem([1.0, 2.0], [1.0])
    sys_ = OscillatorSystem([1.0, 3.0, 4.0], [1.0, -0.5, 0.25])
    assert sys_.gap_floor == 1.0
    assert OscillatorSystem([2.0], [1.0]).gap_floor == math.inf


def test_weighted_norm_is_euclidean_at_zero_exponents():
    sys_ = toy_system(5)
    rng = np.random.default_rng(0)
    x = StateVector(rng.standard_normal(5), rng.standard_normal(5))
    assert weighted_norm(x, (0.0, 0.0), sys_) == pytest.approx(
        np.linalg.norm(x.stacked), rel=1e-14)


def test_weighted_norm_hand_value():
    sys_ = OscillatorSystem([2.0], [0.5])
    x = StateVector([1.0], [0.0])
    # omega^2 / |b|^2 = 4 / 0.25 = 16, sqrt = 4
    assert weighted_norm(x, (1.0, 1.0), sys_) == pytest.approx(4.0, abs=1e-14)
    assert weighted_norm(x, WeightIndex(1.0, 1.0), sys_) == pytest.approx(4.0, abs=1e-14)


def test_weighted_norm_zero_vector():
    sys_ = toy_system(4)
    zero = StateVector.zeros(4)
    for pq in [(0.0, 0.0), (1.0, -0.5), (-0.3, 2.0)]:
        assert weighted_norm(zero, pq, sys_) == 0.0


def test_weighted_norm_errors():
    sys_ = toy_system(3)
    with pytest.raises(ValueError):
        weighted_norm(StateVector.zeros(2), (0.0, 0.0), sys_)
    degenerate = OscillatorSystem([1.0, 2.0], [1.0, 0.0])
    x = StateVector([1.0, 1.0], [0.0, 0.0])
    with pytest.raises(ValueError):
        weighted_norm(x, (0.0, 1.0), degenerate)
    # q = 0 never touches the gains
    assert weighted_norm(x, (1.0, 0.0), degenerate) > 0.0


def test_norm_nesting_under_gain_decay():
    # ||x||_(0,1) <= C ||x||_(alpha,0) with C = max |b_k|^-1 omega_k^-alpha
    sys_ = toy_system(12)
    alpha = 1.0
    c_const = float(np.max(1.0 / (np.abs(sys_.b) * sys_.omega**alpha)))
    rng = np.random.default_rng(3)
    for _ in range(20):
        x = StateVector(rng.standard_normal(12), rng.standard_normal(12))
        lhs = weighted_norm(x, (0.0, 1.0), sys_)
        rhs = c_const * weighted_norm(x, (alpha, 0.0), sys_)
        assert lhs <= rhs * (1.0 + 1e-12)


def test_free_flow_identity_at_zero():
    sys_ = toy_system(6)
    rng = np.random.default_rng(1)
    x = StateVector(rng.standard_normal(6), rng.standard_normal(6))
    y = free_flow(x, 0.0, sys_)
    assert np.allclose(y.stacked, x.stacked, atol=0.0)


def test_free_flow_half_turn():
    sys_ = OscillatorSystem([np.pi], [1.0])
    y = free_flow(StateVector([1.0], [0.0]), 1.0, sys_)
    assert abs(y.xi[0] + 1.0) < 1e-12 and abs(y.eta[0]) < 1e-12


def test_free_flow_solves_the_mode_equations():
    sys_ = toy_system(4)
    rng = np.random.default_rng(7)
    x = StateVector(rng.standard_normal(4), rng.standard_normal(4))
    t, h = 0.7, 1e-6
    fwd = free_flow(x, t + h, sys_)
    bwd = free_flow(x, t - h, sys_)
    mid = free_flow(x, t, sys_)
    dxi = (fwd.xi - bwd.xi) / (2 * h)
    deta = (fwd.eta - bwd.eta) / (2 * h)
    assert np.allclose(dxi, sys_.omega * mid.eta, atol=1e-6)
    assert np.allclose(deta, -sys_.omega * mid.xi, atol=1e-6)


def test_free_flow_isometry_every_weight():
    sys_ = toy_system(8)
    rng = np.random.default_rng(2)
    x = StateVector(rng.standard_normal(8), rng.standard_normal(8))
    for t in (0.3, 2.0, -17.5):
        y = free_flow(x, t, sys_)
        for pq in [(0.0, 0.0), (1.0, 1.0), (0.0, -1.4)]:
            assert weighted_norm(y, pq, sys_) == pytest.approx(
                weighted_norm(x, pq, sys_), rel=1e-12)


def test_free_flow_group_action():
    sys_ = toy_system(8)
    rng = np.random.default_rng(4)
    x = StateVector(rng.standard_normal(8), rng.standard_normal(8))
    for s, t in [(0.5, 0.25), (3.0, -1.2), (10.0, 7.7)]:
        two_step = free_flow(free_flow(x, s, sys_), t, sys_)
        one_step = free_flow(x, s + t, sys_)
        assert np.allclose(two_step.stacked, one_step.stacked, atol=1e-10)


@pytest.mark.parametrize("gap, expected", [(2 * np.pi, 1.0), (np.pi, 2.0)])
def test_min_control_time_formula(gap, expected):
    sys_ = OscillatorSystem([1.0, 1.0 + gap, 1.0 + 2.5 * gap], [1.0, 1.0, 1.0])
    assert min_control_time(sys_) == pytest.approx(expected, rel=1e-14)


def test_min_control_time_beam():
    sys_ = beam.build_system(5)
    d1, d2 = beam.solve_delta(1), beam.solve_delta(2)
    assert min_control_time(sys_) == pytest.approx(2 * np.pi / (d2**2 - d1**2), rel=1e-12)


def test_assumption_report_zero_gain_fails_a1():
    b = np.ones(5)
    b[2] = 0.0
    sys_ = OscillatorSystem(np.arange(1.0, 6.0), b)
    report = check_assumptions(sys_, rho=1.4, alpha=0.5, truncations=[2, 3, 5])
    assert report.verdict("A1") == "fail"
    assert "3" in report.checks["A1"].note


def test_assumption_report_beam_a5_passes(beam_sys_200):
    report = check_assumptions(beam_sys_200, rho=1.4, alpha=0.5)
    assert report.verdict("A5") == "pass"
    assert math.isfinite(report.checks["A5"].tail)
    assert report.decay_criterion_ok  # 2 alpha rho = 1.4 < 2 - 1/p ~ 1.5


def test_assumption_report_constant_product_passes_a6():
    sys_ = toy_system(40)
    report = check_assumptions(sys_, rho=1.4, alpha=1.0)
    assert report.verdict("A6") == "pass"
    assert report.checks["A6"].values[-1] == pytest.approx(1.0, rel=1e-12)


def test_assumption_partial_sums_nondecreasing(beam_sys_200):
    report = check_assumptions(beam_sys_200, rho=1.4, alpha=0.5)
    for name in ("A3", "A4", "A5"):
        vals = report.checks[name].values
        assert np.all(np.diff(vals) >= -1e-15 * np.abs(vals[:-1]))


def test_assumption_divergent_sum_fails():
    # constant gains with growing k: the weighted double sum diverges for rho > 1
    sys_ = toy_system(160)
    report = check_assumptions(sys_, rho=1.4, alpha=1.0)
    assert report.verdict("A5") in ("fail", "inconclusive")


def test_truncation_validation():
    sys_ = toy_system(10)
    with pytest.raises(ValueError):
        check_assumptions(sys_, 1.4, 0.5, truncations=[4, 4, 10])
    with pytest.raises(ValueError):
        check_assumptions(sys_, 1.4, 0.5, truncations=[5, 20])
