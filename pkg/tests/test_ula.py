import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import D
from xlarray import (ArrayGeometry, LinkBudget, UserPose, constant_span_pose, snr_closed_form,
                     ula_angles, ula_constant_span_circle, ula_critical_point, ula_nusw_snr,
                     ula_rho_factors, ula_snr, ula_snr_limit)
from xlarray.ula import snr_ratio

LAM = 2 * D
AREA = LAM**2 / (4 * math.pi)


@pytest.fixture
def budget():
    return LinkBudget(1e9, LAM)


def test_angles_normal_incidence():
    ang = ula_angles(64, D, UserPose(25, math.pi / 2, 0))
    assert ang.alpha_1 == ang.alpha_2 == pytest.approx(math.atan2(64 * D / 2, 25), rel=1e-15)
    assert ang.alpha_1 == pytest.approx(0.080212, abs=1e-6)
    assert ang.delta_span == pytest.approx(0.160423, abs=1e-6)
    assert ang.delta_diff == 0.0


def test_angles_limits_and_errors():
    ang = ula_angles(10**12, D, UserPose(3, 1.0, 0.4))
    assert ang.delta_span == pytest.approx(math.pi, rel=1e-9)
    with pytest.raises(ValueError):
        ula_angles(8, D, UserPose(3, 0, 0))
    with pytest.raises(ValueError):
        ula_angles(0, D, UserPose(3, 1, 0))


@settings(max_examples=100)
@given(st.integers(1, 10**6), st.floats(0.01, 1e4), st.floats(0.01, math.pi - 0.01),
       st.floats(-1.5, 1.5))
def test_angle_invariants(m, r, theta, phi):
    ang = ula_angles(m, D, UserPose(r, theta, phi))
    assert -math.pi / 2 < ang.alpha_1 < math.pi / 2 and -math.pi / 2 < ang.alpha_2 < math.pi / 2
    assert 0 < ang.delta_span < math.pi
    assert abs(ang.delta_diff) < math.pi


def test_ula_snr_matches_planar_reduction(budget):
    pose = UserPose(25, math.pi / 2, 0)
    g = ArrayGeometry(1, 64, D, AREA)
    planar = snr_closed_form(g, pose, budget).gamma
    assert abs(ula_snr(64, D, AREA, pose, budget).gamma / planar - 1) < 1e-6


def test_ula_snr_span_form(budget):
    pose = UserPose(9, 1.1, 0.3)
    ang = ula_angles(500, D, pose)
    span_form = (budget.p_bar * AREA * math.cos(0.3) / (2 * math.pi * D * 9 * math.sin(1.1))
                 * math.sin(ang.delta_span / 2) * math.cos(ang.delta_diff / 2))
    assert ula_snr(500, D, AREA, pose, budget).gamma == pytest.approx(span_form, rel=1e-13)
    bore = UserPose(9, math.pi / 2, 0)
    expected = budget.p_bar * AREA / (2 * math.pi * D * 9) * math.sin(ula_angles(500, D, bore).delta_span / 2)
    assert ula_snr(500, D, AREA, bore, budget).gamma == pytest.approx(expected, rel=1e-13)


def test_ula_snr_degenerate_is_zero(budget):
    assert ula_snr(8, D, AREA, UserPose(3, 0, 0), budget).gamma == 0
    assert ula_snr(8, D, AREA, UserPose(3, 1.0, math.pi / 2), budget).gamma == 0


def test_ula_snr_limit(budget):
    pose = UserPose(25, 1.2, 0.4)
    limit = ula_snr_limit(D, AREA, pose, budget).gamma
    assert limit == pytest.approx(budget.p_bar * AREA * math.cos(0.4) / (2 * math.pi * D * 25 * math.sin(1.2)))
    assert ula_snr(10**12, D, AREA, pose, budget).gamma == pytest.approx(limit, rel=1e-9)


@settings(max_examples=60, deadline=None)
@given(st.floats(0.5, 1e3), st.floats(0.05, math.pi - 0.05), st.floats(-1.4, 1.4))
def test_ula_snr_nondecreasing_and_bounded(r, theta, phi):
    budget = LinkBudget(1e9, LAM)
    pose = UserPose(r, theta, phi)
    limit = ula_snr_limit(D, AREA, pose, budget).gamma
    values = [ula_snr(int(m), D, AREA, pose, budget).gamma for m in np.unique(np.geomspace(1, 1e8, 80).astype(int))]
    assert all(b >= a * (1 - 1e-12) for a, b in zip(values, values[1:]))
    assert max(values) <= limit * (1 + 1e-12)


def test_nusw_ula(budget):
    pose = UserPose(25, math.pi / 2, 0)
    span = ula_angles(64, D, pose).delta_span
    expected = budget.p_bar * LAM**2 * span / ((4 * math.pi) ** 2 * D * 25)
    assert ula_nusw_snr(64, D, pose, budget).gamma == pytest.approx(expected, rel=1e-14)
    assert ula_nusw_snr(10**13, D, pose, budget).gamma == pytest.approx(
        budget.p_bar * LAM**2 / (16 * math.pi * D * 25), rel=1e-9)
    for m in (1, 64, 10**4, 10**7):
        assert ula_nusw_snr(m, D, pose, budget).gamma >= ula_snr(m, D, AREA, pose, budget).gamma


def test_nusw_ula_linear_in_span(budget):
    # At boresight the span of m elements at r equals twice the half span at 2r for 2m elements.
    a = ula_nusw_snr(100, D, UserPose(5, math.pi / 2, 0), budget).gamma
    b = ula_nusw_snr(200, D, UserPose(10, math.pi / 2, 0), budget).gamma
    assert a == pytest.approx(2 * b, rel=1e-13)


def test_critical_point_matches_linear_scan(budget):
    pose = UserPose(25, math.pi / 2, 0)
    crit = ula_critical_point(D, pose, budget, 0.95)
    scan = max(m for m in range(1, 3000) if snr_ratio(m, D, pose, budget) >= 0.95)
    assert crit.m == scan
    assert crit.monotone and not crit.capped and not crit.below_threshold
    assert snr_ratio(crit.m + 1, D, pose, budget) < 0.95


def test_critical_point_inclined_below_threshold(budget):
    pose = UserPose(25, math.pi / 6, 0)
    crit = ula_critical_point(D, pose, budget, 0.95)
    assert crit.m == 0 and crit.below_threshold
    assert all(snr_ratio(m, D, pose, budget) < 0.95 for m in (1, 2, 4, 16, 64))


def test_critical_point_capped(budget):
    crit = ula_critical_point(D, UserPose(25, math.pi / 2, 0), budget, 1e-6, m_cap=2**20)
    assert crit.capped and crit.m == 2**20


def test_critical_point_rejects_threshold(budget):
    with pytest.raises(ValueError):
        ula_critical_point(D, UserPose(25, math.pi / 2, 0), budget, 1.0)


def test_rho_factors_normal_incidence():
    r = 25
    for m in (3, 65, 1001):
        rho = ula_rho_factors(m, D, UserPose(r, math.pi / 2, 0))
        end = math.atan((m - 1) * D / 2 / r)
        assert rho.rho_pl == pytest.approx(math.cos(end) ** 2, rel=1e-13)
        assert rho.rho_aper == pytest.approx(math.cos(end), rel=1e-13)
        assert rho.rho == pytest.approx(rho.rho_pl * rho.rho_aper, rel=1e-12)
        assert rho.rho_pl <= rho.rho_aper <= 1


def test_rho_factors_decrease_with_span():
    pose = UserPose(25, math.pi / 2, 0)
    rhos = [ula_rho_factors(m, D, pose) for m in range(3, 20001, 200)]
    for a, b in zip(rhos, rhos[1:]):
        assert b.rho_pl < a.rho_pl and b.rho_aper < a.rho_aper


def test_rho_factors_errors():
    with pytest.raises(ValueError):
        ula_rho_factors(4, D, UserPose(25, 1, 0))
    with pytest.raises(ValueError):
        ula_rho_factors(5, D, UserPose(25, 0, 0))


def test_rho_factors_inclined_oracle():
    pose = UserPose(3, 1.0, 0.5)
    q = pose.position
    end = np.array([0, 0, 20 * D])
    v = q - end
    rho = ula_rho_factors(41, D, pose)
    assert rho.rho_pl == pytest.approx(3**2 / (v @ v), rel=1e-13)
    assert rho.rho_aper == pytest.approx((v[0] / np.linalg.norm(v)) / (q[0] / 3), rel=1e-13)


def test_constant_span_circle_right_angle():
    centre, radius = ula_constant_span_circle(64, D, 0.3, math.pi / 2)
    np.testing.assert_allclose(centre, 0, atol=1e-15)
    assert radius == pytest.approx(64 * D / 2)


def test_constant_span_arc():
    m, span, phi = 64, math.pi / 3, 0.0
    centre, radius = ula_constant_span_circle(m, D, phi, span)
    diffs = []
    for theta in np.linspace(0.05, math.pi / 2, 40):
        pose = constant_span_pose(m, D, phi, span, float(theta))
        assert np.linalg.norm(pose.position - centre) == pytest.approx(radius, rel=1e-12)
        ang = ula_angles(m, D, pose)
        assert abs(ang.delta_span - span) <= 1e-9
        diffs.append(math.cos(ang.delta_diff / 2))
    assert all(b > a for a, b in zip(diffs, diffs[1:]))
    assert diffs[-1] == 1.0


def test_constant_span_arc_off_azimuth():
    centre, radius = ula_constant_span_circle(30, D, 0.7, 2.0)
    pose = constant_span_pose(30, D, 0.7, 2.0, 1.1)
    assert np.linalg.norm(pose.position - centre) == pytest.approx(radius, rel=1e-12)
    assert ula_angles(30, D, pose).delta_span == pytest.approx(2.0, abs=1e-12)


def test_constant_span_rejects_span():
    with pytest.raises(ValueError):
        ula_constant_span_circle(8, D, 0, math.pi)
    with pytest.raises(ValueError):
        constant_span_pose(8, D, 0, 1.0, 0.0)


@pytest.mark.parametrize("r_over_d", [100, 400, 1000])
def test_line_reduction_error_is_second_order(budget, r_over_d):
    # The planar form spreads each element over a strip of width d; at normal
    # incidence that lowers it by a relative (d / r)^2 / 8 against the line form.
    pose = UserPose(r_over_d * D, math.pi / 2, 0)
    planar = snr_closed_form(ArrayGeometry(1, 2, D, AREA), pose, budget).gamma
    rel = ula_snr(2, D, AREA, pose, budget).gamma / planar - 1
    assert rel == pytest.approx((1 / r_over_d) ** 2 / 8, rel=1e-3)
