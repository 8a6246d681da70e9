"""Reliability statistics: Black's equation, failure fractions, chip-level
weakest-link composition, and calibration of the jL-vs-lifetime curve.

Failure times are lognormal: ln t_f = ln t50 + sigma_ln * z with z the
standard normal quantile of the failure fraction.  The jL curve ties the
stress model to lifetime targets: a segment survives t_life when its jL
stays below (sigma_crit/beta) / bracket(kappa * t_life / L^2), where
bracket(u) is the cathode-stress series factor rising from 0 to 1/2; the
u -> infinity asymptote recovers the immortality threshold 2*sigma_crit/beta.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy.optimize import least_squares
from scipy.stats import norm

from .core import BOLTZMANN_EV, MaterialParams
from .transient import series_bracket

__all__ = [
    "black_mttf", "ff_to_z", "z_to_tf", "tf_to_ff", "translate_condition",
    "weakest_link", "jl_from_lifetime", "lifetime_from_jl", "JlFitResult",
    "fit_jl_curve",
]


def black_mttf(j: float, p: MaterialParams) -> float:
    """Median time to failure t50 = A * j^-n * exp(Ea/kT) [s].

    j is the current-density magnitude; black_A and black_n must be set on
    the material.
    """
    if p.black_A is None or p.black_n is None:
        raise ValueError("black_A and black_n must be set for Black's equation")
    if j <= 0:
        raise ValueError("current density must be positive for a finite t50")
    kt = BOLTZMANN_EV * p.temperature
    return p.black_A * j ** (-p.black_n) * math.exp(p.Ea / kt)


def ff_to_z(ff: float) -> float:
    """Standard normal quantile of a failure fraction in (0, 1)."""
    if not 0.0 < ff < 1.0:
        raise ValueError("failure fraction must lie strictly between 0 and 1")
    return float(norm.ppf(ff))


def z_to_tf(z: float, t50: float, sigma_ln: float) -> float:
    """Failure time at quantile z: t_f = t50 * exp(sigma_ln * z)."""
    if t50 <= 0 or sigma_ln <= 0:
        raise ValueError("t50 and sigma_ln must be positive")
    return t50 * math.exp(sigma_ln * z)


def tf_to_ff(t_f: float, t50: float, sigma_ln: float) -> float:
    """Failure fraction at time t_f under the lognormal model."""
    if t_f <= 0 or t50 <= 0 or sigma_ln <= 0:
        raise ValueError("t_f, t50 and sigma_ln must be positive")
    return float(norm.cdf(math.log(t_f / t50) / sigma_ln))


def translate_condition(t_f_a: float, j_a: float, temp_a: float,
                        j_b: float, temp_b: float, p: MaterialParams) -> float:
    """Translate a failure time between stress/temperature conditions.

    ln t_fb = ln t_fa + n*(ln j_a - ln j_b) - (Ea/k)(1/T_a - 1/T_b); the
    lognormal quantile is preserved, so any fixed failure fraction maps
    through unchanged.
    """
    if p.black_n is None:
        raise ValueError("black_n must be set to translate conditions")
    if min(t_f_a, j_a, j_b, temp_a, temp_b) <= 0:
        raise ValueError("translate_condition needs positive inputs")
    ln_t = (math.log(t_f_a)
            + p.black_n * (math.log(j_a) - math.log(j_b))
            - (p.Ea / BOLTZMANN_EV) * (1.0 / temp_a - 1.0 / temp_b))
    return math.exp(ln_t)


def weakest_link(failure_fractions: Sequence[float]) -> float:
    """Chip-level failure probability 1 - prod(1 - F_i).

    Evaluated in log space with exact summation so that many tiny per-wire
    fractions (e.g. 1e6 wires at 1e-9) keep full relative precision.
    """
    terms = []
    for f in failure_fractions:
        if not 0.0 <= f <= 1.0:
            raise ValueError("failure fractions must lie in [0, 1]")
        if f == 1.0:
            return 1.0
        terms.append(math.log1p(-f))
    return -math.expm1(math.fsum(terms))


# ----------------------------------------------------------------------------
# jL-vs-lifetime curve
# ----------------------------------------------------------------------------


def jl_from_lifetime(t_life_over_l2: float, sigma_over_beta: float,
                     kappa: float):
    """Largest jL surviving a lifetime target, from the cathode series.

    t_life_over_l2 is t_life/L^2 [s/m^2]; returns
    (sigma_crit/beta)/bracket(kappa*t_life/L^2) [A/m].  Falls to the
    immortality asymptote 2*sigma_crit/beta as the lifetime target grows.
    """
    u = kappa * np.asarray(t_life_over_l2, dtype=float)
    if np.any(u <= 0):
        raise ValueError("t_life/L^2 must be positive")
    return sigma_over_beta / series_bracket(u)


def lifetime_from_jl(jl: float, sigma_over_beta: float,
                     kappa: float) -> float:
    """Invert the jL curve: lifetime (over L^2) at which jL first fails.

    Only defined above the asymptote; jl <= 2*sigma_over_beta means the
    segment is immortal and no finite lifetime exists.
    """
    from scipy.optimize import brentq

    if jl <= 2.0 * sigma_over_beta:
        raise ValueError(
            f"jL = {jl:g} A/m is at or below the immortality asymptote "
            f"{2.0 * sigma_over_beta:g} A/m; no finite lifetime")
    target = sigma_over_beta / jl   # bracket value in (0, 0.5)

    def f(log_u):
        return float(series_bracket(math.exp(log_u))) - target

    lo, hi = math.log(1e-12), math.log(10.0)
    while f(lo) > 0:
        lo -= 5.0
        if lo < -80:
            raise RuntimeError("failed to bracket the lifetime solve")
    u = math.exp(brentq(f, lo, hi, rtol=1e-13, maxiter=200))
    return u / kappa


@dataclass(frozen=True)
class JlFitResult:
    """Calibrated jL-curve parameters."""

    sigma_over_beta: float  # sigma_crit/beta [Pa / (Pa/(A/m))] = [A/m] / 2 at asymptote
    kappa: float            # stress diffusivity [m^2/s]
    residual: float         # RMS residual in ln(jL)
    n_points: int


def fit_jl_curve(jl: Sequence[float], t_life_over_l2: Sequence[float]) -> JlFitResult:
    """Fit (sigma_crit/beta, kappa) to measured (jL, t_life/L^2) pairs.

    Least squares in ln(jL) over the log-parameters, so both scale
    parameters stay positive and the fit is insensitive to the decade span
    of the data.  Initial guesses: half the largest-lifetime jL for the
    asymptote level, and a series inversion at the shortest lifetime for
    kappa (sqrt regime below the plateau, one-term exponential near it).
    """
    jl = np.asarray(jl, dtype=float)
    y = np.asarray(t_life_over_l2, dtype=float)
    if jl.shape != y.shape or jl.ndim != 1:
        raise ValueError("jl and t_life_over_l2 must be 1-D arrays of equal length")
    if len(jl) < 3:
        raise ValueError("need at least 3 calibration points")
    if np.any(jl <= 0) or np.any(y <= 0):
        raise ValueError("calibration data must be positive")

    # initial guesses
    i_long = int(np.argmax(y))
    s0 = jl[i_long] / 2.0
    i_short = int(np.argmin(y))
    b_short = min(s0 / jl[i_short], 0.49)
    pi2 = math.pi ** 2
    if b_short < 0.35:
        # sqrt regime: bracket(u) ~ 2 sqrt(u/pi)
        u_short = math.pi * b_short ** 2 / 4.0
    else:
        # near the plateau: bracket(u) ~ 1/2 - (4/pi^2) exp(-pi^2 u)
        arg = (0.5 - b_short) * pi2 / 4.0
        u_short = max(-math.log(max(arg, 1e-12)) / pi2, 1e-6)
    kappa0 = u_short / y[i_short]

    ln_jl = np.log(jl)

    def resid(x):
        s, kap = math.exp(x[0]), math.exp(x[1])
        model = s / series_bracket(kap * y)
        return np.log(model) - ln_jl

    sol = least_squares(resid, x0=[math.log(s0), math.log(kappa0)],
                        method="lm", xtol=1e-14, ftol=1e-14, gtol=1e-14)
    if not sol.success:
        raise RuntimeError(f"jL-curve fit did not converge: {sol.message}")
    s_fit, k_fit = math.exp(sol.x[0]), math.exp(sol.x[1])
    rms = float(np.sqrt(np.mean(sol.fun ** 2)))
    return JlFitResult(sigma_over_beta=s_fit, kappa=k_fit,
                       residual=rms, n_points=len(jl))
