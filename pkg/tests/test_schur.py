import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tubeops.classifier import Status, classify
from tubeops.configs import FINITE_THEOREMS, bounded_params, infinite_target_params, perturbed_params, regime_exponents
from tubeops.geometry import TubePoint
from tubeops.operators import OperatorParams
from tubeops.schur import (
    InfeasibleCertificateError,
    build_certificate,
    certificate_exists,
    certificate_for_bounded,
    feasibility_intervals,
    kernel_slice_norm,
    slot_sup,
    verify_infinity_condition,
    verify_schur_conditions,
    with_exponents,
)
from tubeops.integration import QuadratureConfig

from oracles import second_identity_oracle

BERGMAN = OperatorParams((0, 0), (0, 0), (2, 2))
INF = math.inf
seeds = st.integers(min_value=0, max_value=2**32 - 1)


def test_bergman_type_certificate():
    cert = build_certificate(1, (2, 2), (2, 2), BERGMAN)
    assert cert.regime == "6.1"
    assert cert.tau == (2.0, 2.0)
    assert cert.r == pytest.approx((-0.25, -0.25))
    assert cert.s == pytest.approx((-0.25, -0.25))
    assert cert.gamma == pytest.approx((0.5, 0.5))
    assert cert.delta == pytest.approx((0.5, 0.5))
    for interval in cert.r_interval + cert.s_interval:
        assert interval == pytest.approx((-0.5, 0.0))


def test_certificate_json_round_trip():
    data = json.loads(build_certificate(1, (2, 2), (2, 2), BERGMAN).to_json())
    assert data["regime"] == "6.1"
    assert data["r"] == pytest.approx([-0.25, -0.25])
    assert data["h2"].startswith("rho(z)^-0.25")


def test_off_critical_certificate_infeasible():
    params = BERGMAN.with_c((2.5, 2.0))
    with pytest.raises(InfeasibleCertificateError):
        build_certificate(1, (2, 2), (2, 2), params)
    assert feasibility_intervals(1, (2, 2), (2, 2), params) is None


def test_infinite_target_has_no_finite_certificate():
    with pytest.raises(InfeasibleCertificateError):
        build_certificate(1, (2, 2), (INF, INF), OperatorParams((1, 1), (0, 0), (2, 2)))


def test_certificate_for_bounded_checks_classifier():
    with pytest.raises(InfeasibleCertificateError):
        certificate_for_bounded(1, (2, 2), (2, 2), BERGMAN.with_c((2.3, 2)))
    assert certificate_for_bounded(1, (2, 2), (2, 2), BERGMAN).regime == "6.1"


@given(seeds, st.sampled_from(FINITE_THEOREMS))
def test_split_exponents_sum_to_one(seed, theorem):
    rng = np.random.default_rng(seed)
    p, q = regime_exponents(theorem, rng)
    cert = build_certificate(1, p, q, bounded_params(1, p, q, rng))
    for g, d in zip(cert.gamma, cert.delta):
        assert g + d == 1.0


@given(seeds, st.sampled_from(FINITE_THEOREMS))
def test_canonical_point_is_box_center(seed, theorem):
    rng = np.random.default_rng(seed)
    p, q = regime_exponents(theorem, rng)
    cert = build_certificate(1, p, q, bounded_params(1, p, q, rng))
    assert cert.margins == pytest.approx((0.5, 0.5))
    for i in range(2):
        lo, hi = cert.r_interval[i]
        assert lo < cert.r[i] < hi
        lo, hi = cert.s_interval[i]
        assert lo < cert.s[i] < hi


@given(seeds, st.sampled_from(FINITE_THEOREMS), st.integers(min_value=1, max_value=3))
def test_certificate_exists_iff_bounded(seed, theorem, n):
    rng = np.random.default_rng(seed)
    p, q = regime_exponents(theorem, rng)
    params = perturbed_params(n, p, q, rng)
    assert certificate_exists(n, p, q, params) == (classify(n, p, q, params).status is Status.BOUNDED)


def test_bergman_certificate_verifies():
    report = verify_schur_conditions(build_certificate(1, (2, 2), (2, 2), BERGMAN), 10)
    assert report.passed
    assert report.worst_spread < 1e-8
    assert [c.name for c in report.checks] == ["first", "second"]


def test_corrupted_certificate_fails():
    cert = with_exponents(build_certificate(1, (2, 2), (2, 2), BERGMAN), r=(0.25, -0.25))
    assert min(cert.margins) < 0
    report = verify_schur_conditions(cert, 10)
    assert not report.passed


def test_with_exponents_recomputes_split():
    cert = with_exponents(build_certificate(1, (2, 2), (2, 2), BERGMAN), s=(0.0, -0.25))
    assert cert.gamma[0] == pytest.approx((1 + 0.0 + 0.25) / 2)
    assert cert.gamma[0] + cert.delta[0] == 1.0


def test_unit_source_certificate_verifies():
    rng = np.random.default_rng(2)
    p, q = regime_exponents("6.2", rng)
    cert = build_certificate(1, p, q, bounded_params(1, p, q, rng))
    assert verify_schur_conditions(cert, 6, seed=9).passed


@settings(max_examples=8)
@given(seeds, st.sampled_from(FINITE_THEOREMS))
def test_generated_certificates_verify(seed, theorem):
    rng = np.random.default_rng(seed)
    p, q = regime_exponents(theorem, rng)
    cert = build_certificate(1, p, q, bounded_params(1, p, q, rng))
    assert verify_schur_conditions(cert, 4, seed=seed % 1000).passed


@pytest.mark.parametrize("c, t", [(3.0, 1.0), (2.0, 0.5), (4.0, 3.0)])
def test_slot_sup_matches_calculus(c, t):
    # sup_y y^t ((1+y)/2)^{-c} is attained at y = t/(c-t)
    y = t / (c - t)
    expected = y**t * (2 / (1 + y)) ** c
    value, finite = slot_sup(TubePoint.from_complex(1j), c, t)
    assert finite
    assert value == pytest.approx(expected, rel=1e-6)


@pytest.mark.parametrize("c, t", [(2.0, 3.0), (2.0, -0.5)])
def test_slot_sup_detects_infinite(c, t):
    _, finite = slot_sup(TubePoint.from_complex(1j), c, t)
    assert not finite


def test_slot_sup_dilation():
    base, _ = slot_sup(TubePoint.from_complex(1j), 3.0, 1.0)
    scaled, _ = slot_sup(TubePoint.from_complex(0.7 + 4j), 3.0, 1.0)
    assert scaled == pytest.approx(base * 4.0 ** (1.0 - 3.0), rel=1e-6)


def test_infinity_condition_constant():
    params = OperatorParams((1, 1), (0, 0), (2, 2))
    report = verify_infinity_condition(1, (2, 2), params, 10)
    assert report.passed
    # each slot is (int |rho(z,u)|^{-4} dV)^{1/2} rho(z) with the half-plane constant
    assert report.values[0] == pytest.approx(second_identity_oracle(4.0, 0.0), rel=1e-6)
    assert report.slopes == pytest.approx((0.0, 0.0), abs=1e-6)


def test_infinity_condition_fails_without_a():
    report = verify_infinity_condition(1, (2, 2), OperatorParams((0, 0), (0, 0), (1, 1)), 10)
    assert not report.passed


def test_kernel_slice_norm_unit_source():
    # p = 1: the sup of rho(u)^{b-alpha} / |rho(z,u)|^c, times rho(z)^a
    params = OperatorParams((2, 2), (1, 1), (3, 3))
    value, divergent, _ = kernel_slice_norm(params, 0, 1.0, TubePoint.from_complex(1j), QuadratureConfig())
    assert not divergent
    assert value == pytest.approx(32 / 27, rel=1e-6)


@settings(max_examples=5)
@given(seeds)
def test_infinite_target_configurations_constant(seed):
    p, params = infinite_target_params(1, np.random.default_rng(seed))
    assert verify_infinity_condition(1, p, params, 5, seed=seed % 1000).passed


@settings(max_examples=20)
@given(seeds, st.sampled_from(FINITE_THEOREMS))
def test_canonical_exponents_strictly_interior(seed, theorem):
    rng = np.random.default_rng(seed)
    p, q = regime_exponents(theorem, rng, strict=True)
    cert = build_certificate(1, p, q, bounded_params(1, p, q, rng))
    assert min(cert.margins) >= 1e-6


@settings(max_examples=20)
@given(seeds, st.sampled_from(FINITE_THEOREMS), st.sampled_from((0, 1)), st.sampled_from((0, 1)))
def test_margin_shrinks_toward_interval_endpoint(seed, theorem, slot, end):
    rng = np.random.default_rng(seed)
    p, q = regime_exponents(theorem, rng, strict=True)
    cert = build_certificate(1, p, q, bounded_params(1, p, q, rng))
    start, target = cert.r[slot], cert.r_interval[slot][end]
    margins = []
    for frac in np.linspace(0.0, 1.0, 9):
        r = list(cert.r)
        r[slot] = start + frac * (target - start)
        margins.append(with_exponents(cert, r=tuple(r)).margins[slot])
    assert all(b <= a + 1e-12 for a, b in zip(margins, margins[1:]))
    assert margins[-1] < margins[0]
