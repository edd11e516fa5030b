"""Gain patterns: aperture beams, sector pattern, terminal and UE gains.

Bessel-pattern expectations were frozen from an independent 40-digit
special-function evaluation, not from the scipy routine under test.
"""

import numpy as np
import pytest
from numpy.testing import assert_allclose

from fr3coex.antenna import (
    ApertureBeam,
    SectorPattern,
    aperture_radius_for_peak,
    gnb_sector_gain_dbi,
    sat_beam_gain_dbi,
    t1_pattern,
    t2_pattern,
    terminal_gain_dbi,
    ue_gain_dbi,
    wavenumber_per_m,
)

J1_FIRST_NULL = 3.8317059702075123


def unit_beam(ka: float, peak_dbi: float = 0.0) -> ApertureBeam:
    # k=1 so the off-axis variable x equals ka*sin(theta) directly
    return ApertureBeam(peak_gain_dbi=peak_dbi, aperture_radius_m=ka, wavenumber_per_m=1.0)


def test_sat_beam_peak_at_boresight():
    beam = ApertureBeam(38.3, 0.25, wavenumber_per_m(12e9))
    assert sat_beam_gain_dbi(beam, 0.0) == 38.3


def test_sat_beam_small_x_limit():
    beam = unit_beam(1e-6, peak_dbi=20.0)
    assert_allclose(sat_beam_gain_dbi(beam, 45.0), 20.0, atol=1e-9)


def test_sat_beam_frozen_relative_values():
    # x = 2 sin(30 deg) = 1, 2 sin(90) = 2; oracle values at 40 digits
    beam = unit_beam(2.0)
    assert_allclose(sat_beam_gain_dbi(beam, 30.0), -1.109348018491335, rtol=1e-12)
    assert_allclose(sat_beam_gain_dbi(beam, 90.0), -4.7806273411180443, rtol=1e-12)
    beam3 = unit_beam(3.0)
    assert_allclose(sat_beam_gain_dbi(beam3, 90.0), -12.916320707547289, rtol=1e-12)


def test_sat_beam_default_satellite_shape():
    beam = ApertureBeam(38.3, 0.25, wavenumber_per_m(12e9))
    assert_allclose(sat_beam_gain_dbi(beam, 1.0), 38.3 - 1.3400033339560589, rtol=1e-12)


def test_sat_beam_first_null_floored():
    beam = unit_beam(J1_FIRST_NULL, peak_dbi=10.0)
    # x = ka at 90 deg sits exactly on the first null
    assert sat_beam_gain_dbi(beam, 90.0) == 10.0 - 60.0
    assert sat_beam_gain_dbi(beam, 90.0, floor_rel_db=40.0) == 10.0 - 40.0


def test_sat_beam_pattern_independent_of_peak():
    b1 = unit_beam(2.0, peak_dbi=0.0)
    b2 = unit_beam(2.0, peak_dbi=38.3)
    thetas = np.linspace(0.0, 90.0, 19)
    assert_allclose(
        sat_beam_gain_dbi(b2, thetas) - sat_beam_gain_dbi(b1, thetas),
        np.full_like(thetas, 38.3),
        rtol=1e-12,
    )


def test_sat_beam_rejects_out_of_domain():
    beam = unit_beam(2.0)
    with pytest.raises(ValueError):
        sat_beam_gain_dbi(beam, -1.0)
    with pytest.raises(ValueError):
        sat_beam_gain_dbi(beam, 90.5)


def test_aperture_sizing_realizes_peak():
    # G = (ka)^2: 33 dBi -> ka = 10^(33/20)
    k = wavenumber_per_m(12e9)
    a = aperture_radius_for_peak(33.0, k)
    assert_allclose(k * a, 44.668359215096312, rtol=1e-12)
    a2 = aperture_radius_for_peak(17.0, k)
    assert_allclose(k * a2, 7.0794578438413791, rtol=1e-12)


def test_beam_carrier_consistency_check():
    beam = ApertureBeam(38.3, 0.25, wavenumber_per_m(12e9))
    beam.check_carrier(12e9)
    with pytest.raises(ValueError):
        beam.check_carrier(11e9)


def test_sector_gain_boresight():
    p = SectorPattern(azimuth_deg=0.0, downtilt_deg=6.0)
    assert gnb_sector_gain_dbi(p, 6.0, 0.0) == 8.0


def test_sector_gain_half_beamwidth_quadratic():
    p = SectorPattern(downtilt_deg=6.0)
    assert_allclose(gnb_sector_gain_dbi(p, 6.0, 32.5), 8.0 - 3.0, rtol=1e-12)
    assert_allclose(gnb_sector_gain_dbi(p, 6.0 + 32.5, 0.0), 8.0 - 3.0, rtol=1e-12)


def test_sector_gain_frozen_combined_case():
    p = SectorPattern(downtilt_deg=6.0)
    # 8 - 12(10/65)^2 - 12(14/65)^2, hand-evaluated
    assert_allclose(gnb_sector_gain_dbi(p, 20.0, 10.0), 7.1592899408284024, rtol=1e-12)


def test_sector_gain_front_back_cap():
    p = SectorPattern(downtilt_deg=0.0)
    assert gnb_sector_gain_dbi(p, 90.0, 180.0) == 8.0 - 30.0
    # vertical alone clamps at SLA_V, then the outer min caps the sum
    assert gnb_sector_gain_dbi(p, 180.0, 0.0) == 8.0 - 30.0


def test_sector_gain_even_symmetry():
    p = SectorPattern(downtilt_deg=6.0)
    rng = np.random.default_rng(9)
    for _ in range(25):
        dphi = rng.uniform(0.0, 179.0)
        dth = rng.uniform(0.0, 60.0)
        assert_allclose(
            gnb_sector_gain_dbi(p, 6.0 + dth, dphi),
            gnb_sector_gain_dbi(p, 6.0 - dth, -dphi),
            rtol=1e-12,
        )


def test_sector_gain_extremes_over_grid():
    p = SectorPattern(downtilt_deg=6.0)
    # integer-degree grids so the exact boresight (theta=6, phi=0) is sampled
    th, ph = np.meshgrid(np.arange(-90.0, 181.0), np.arange(-180.0, 181.0))
    g = gnb_sector_gain_dbi(p, th, ph)
    assert g.max() == 8.0
    assert g.min() == 8.0 - 30.0


def test_sector_gain_downtilt_override_matches_rebuilt_pattern():
    p6 = SectorPattern(downtilt_deg=6.0)
    p11 = SectorPattern(downtilt_deg=11.0)
    assert gnb_sector_gain_dbi(p6, 25.0, 12.0, downtilt_deg=11.0) == gnb_sector_gain_dbi(
        p11, 25.0, 12.0
    )


def test_sector_gain_tilt_mechanism():
    # target above boresight: tilting further down monotonically sheds gain
    p = SectorPattern(downtilt_deg=0.0)
    tilts = np.linspace(0.0, 15.0, 16)
    g = gnb_sector_gain_dbi(p, 0.0, 0.0, downtilt_deg=tilts)
    assert np.all(np.diff(g) < 0)


def test_sector_pattern_validation():
    with pytest.raises(ValueError):
        SectorPattern(hpbw_h_deg=0.0)
    with pytest.raises(ValueError):
        SectorPattern(sla_v_db=-1.0)
    with pytest.raises(ValueError):
        SectorPattern(downtilt_deg=20.0)
    SectorPattern(downtilt_deg=20.0, tilt_range_deg=(0.0, 25.0))


def test_terminal_peaks():
    assert terminal_gain_dbi(t1_pattern(12e9), 0.0) == 33.0
    assert terminal_gain_dbi(t2_pattern(12e9), 0.0) == 17.0


def test_terminal_t1_at_90_floored_regression():
    # relative pattern at x = ka(T1) evaluates below -60, so the floor holds
    assert terminal_gain_dbi(t1_pattern(12e9), 90.0) == 33.0 - 60.0


def test_terminal_t2_frozen_main_lobe_value():
    # x = ka(T2) sin(30); oracle at 40 digits
    assert_allclose(
        terminal_gain_dbi(t2_pattern(12e9), 30.0),
        17.0 - 23.323598046211852,
        rtol=1e-12,
    )


def test_terminal_back_hemisphere_floored():
    t = t1_pattern(12e9)
    assert terminal_gain_dbi(t, 135.0) == 33.0 - 60.0
    assert terminal_gain_dbi(t, 180.0) == 33.0 - 60.0


def test_terminal_main_lobe_monotone():
    t = t1_pattern(12e9)
    first_null_deg = np.degrees(np.arcsin(J1_FIRST_NULL / 44.668359215096312))
    thetas = np.linspace(0.0, first_null_deg * 0.999, 50)
    g = terminal_gain_dbi(t, thetas)
    assert np.all(np.diff(g) <= 0)
    assert np.all(g <= 33.0)


def test_terminal_t2_wider_than_t1():
    t1, t2 = t1_pattern(12e9), t2_pattern(12e9)
    # relative roll-off at the same small angle is much steeper for the dish
    drop1 = 33.0 - terminal_gain_dbi(t1, 3.0)
    drop2 = 17.0 - terminal_gain_dbi(t2, 3.0)
    assert drop1 > 10.0 * drop2


def test_terminal_rejects_bad_angle():
    with pytest.raises(ValueError):
        terminal_gain_dbi(t1_pattern(12e9), 181.0)


def test_ue_gain_constant():
    assert ue_gain_dbi(0.0) == 0.0
    assert ue_gain_dbi(90.0) == 0.0
    assert ue_gain_dbi(37.0, gain_dbi=3.0) == 3.0
    assert_allclose(ue_gain_dbi(np.zeros(4), gain_dbi=1.5), np.full(4, 1.5))
