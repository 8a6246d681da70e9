"""Effective DC densities for periodic bidirectional current."""

import pytest

from emstress import CurrentWaveform, WaveformInterval, effective_densities
from emstress.acem import directional_averages

from conftest import make_material


def _wave(period, *pairs):
    return CurrentWaveform(period=period, intervals=tuple(
        WaveformInterval(duration=d, density=j) for d, j in pairs))


def test_symmetric_square_wave_splits_evenly():
    j0 = 2e9
    w = _wave(2.0, (1.0, j0), (1.0, -j0))
    jp, jn = directional_averages(w)
    assert jp == j0 / 2 and jn == j0 / 2
    eff = effective_densities(w, make_material(recovery_r=0.0))
    assert eff.j_eff_left == j0 / 2
    assert eff.j_eff_right == j0 / 2


def test_pure_dc_damages_one_end():
    j0 = 1.5e9
    w = _wave(5.0, (5.0, j0))
    r = 0.7
    eff = effective_densities(w, make_material(recovery_r=r))
    assert eff.j_avg_pos == j0 and eff.j_avg_neg == 0.0
    assert eff.j_eff_left == j0
    assert eff.j_eff_right == 0.0
    assert eff.j_eff_right_raw == -r * j0


def test_duty_cycle_30_70():
    j0 = 1e9
    w = _wave(10.0, (3.0, j0), (7.0, -j0))
    jp, jn = directional_averages(w)
    assert jp == pytest.approx(0.3 * j0, rel=1e-12)
    assert jn == pytest.approx(0.7 * j0, rel=1e-12)


def test_full_recovery_symmetric_cancels():
    j0 = 2e9
    w = _wave(2.0, (1.0, j0), (1.0, -j0))
    eff = effective_densities(w, make_material(recovery_r=1.0))
    assert eff.j_eff_left == 0.0 and eff.j_eff_right == 0.0
    assert eff.j_eff_left_raw == 0.0 and eff.j_eff_right_raw == 0.0


def test_double_forward_full_recovery_leaves_difference():
    # J+ = 2 J-: with r = 1 the left end keeps exactly J-
    w = _wave(4.0, (2.0, 2e9), (1.0, -2e9), (1.0, 0.0))
    jp, jn = directional_averages(w)
    assert jp == 1e9 and jn == 0.5e9
    eff = effective_densities(w, make_material(recovery_r=1.0))
    assert eff.j_eff_left == jn
    assert eff.j_eff_right == 0.0
    assert eff.j_eff_right_raw == -0.5e9


def test_partial_recovery_formula():
    w = _wave(3.0, (1.0, 3e9), (2.0, -0.6e9))
    r = 0.5
    eff = effective_densities(w, make_material(recovery_r=r))
    jp, jn = 1e9, 0.4e9
    assert eff.j_avg_pos == pytest.approx(jp, rel=1e-12)
    assert eff.j_avg_neg == pytest.approx(jn, rel=1e-12)
    assert eff.j_eff_left == pytest.approx(jp - r * jn, rel=1e-12)
    # jn - r*jp < 0 here: recovery wins at the right end
    assert eff.j_eff_right == 0.0
    assert eff.j_eff_right_raw == pytest.approx(jn - r * jp, rel=1e-12)


def test_amplitude_scaling():
    w1 = _wave(2.0, (0.5, 4e9), (1.5, -1e9))
    w3 = _wave(2.0, (0.5, 12e9), (1.5, -3e9))
    p = make_material(recovery_r=0.3)
    a, b = effective_densities(w1, p), effective_densities(w3, p)
    assert b.j_eff_left == pytest.approx(3 * a.j_eff_left, rel=1e-12)
    assert b.j_eff_right_raw == pytest.approx(3 * a.j_eff_right_raw, rel=1e-12)
