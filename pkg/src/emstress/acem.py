"""Effective DC current densities for periodic bidirectional stressing.

A piecewise-constant periodic waveform damages the two ends of a wire
differently: each polarity pushes voids toward one end, and current of the
opposite polarity heals part of that damage (recovery factor r).  The
effective densities

    J_EM,left  = J_avg+ - r * J_avg-
    J_EM,right = J_avg- - r * J_avg+

feed the DC stress pipeline once per end; a negative effective density means
recovery dominates at that end and is clamped to zero for stress purposes
(the raw value is still reported).
"""

from __future__ import annotations

from dataclasses import dataclass

from .core import CurrentWaveform, MaterialParams


@dataclass(frozen=True)
class EffectiveDensities:
    """Directional averages and per-end effective densities [A/m^2]."""

    j_avg_pos: float
    j_avg_neg: float
    j_eff_left: float        # clamped at zero
    j_eff_right: float
    j_eff_left_raw: float    # before clamping
    j_eff_right_raw: float


def directional_averages(w: CurrentWaveform) -> tuple[float, float]:
    """Time averages of the positive and negative waveform lobes.

    Both are returned as non-negative magnitudes: J_avg+ averages the
    positive excursions over the full period, J_avg- the negative ones.
    """
    pos = 0.0
    neg = 0.0
    for iv in w.intervals:
        if iv.density >= 0:
            pos += iv.density * iv.duration
        else:
            neg += -iv.density * iv.duration
    return pos / w.period, neg / w.period


def effective_densities(w: CurrentWaveform, p: MaterialParams) -> EffectiveDensities:
    """Per-end effective DC densities with recovery factor p.recovery_r."""
    jp, jn = directional_averages(w)
    r = p.recovery_r
    left_raw = jp - r * jn
    right_raw = jn - r * jp
    return EffectiveDensities(
        j_avg_pos=jp, j_avg_neg=jn,
        j_eff_left=max(left_raw, 0.0),
        j_eff_right=max(right_raw, 0.0),
        j_eff_left_raw=left_raw,
        j_eff_right_raw=right_raw)
