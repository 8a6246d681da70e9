"""Mortality screening pipeline: cheap filters first, transient last.

Stage order mirrors practical EM signoff flows:

1. Blech filter: for a single segment with non-tensile initial stress the
   classical |j|L <= 2*sigma_crit/beta criterion is exact, so such nets are
   dismissed immediately.  Multisegment trees skip this stage because stress
   accumulation across segments can kill a tree whose every segment passes
   its own Blech check.
2. Steady state: the full profile against sigma_crit.  Conclusive for
   immortal single segments (their cathode stress rises monotonically); for
   immortal multisegment trees a transient confirmation still runs because
   transients can overshoot the steady maximum.
3. Transient: nucleation detection.  Every mortal verdict is backed by an
   actual threshold crossing, so `check` never calls a net mortal that a
   transient run with the same settings finds safe.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

from .core import MaterialParams, Netlist, derived_params
from .dc import solve_dc
from .steady import blech_limit, immortality_check, steady_state
from .transient import discretize, nucleation_and_postvoid


@dataclass(frozen=True)
class CheckResult:
    """Verdict of the screening pipeline for one netlist."""

    verdict: str                  # e.g. "immortal (steady-state)"
    mortal: bool
    stage: str                    # deciding stage: blech | steady-state | transient
    steady_max: Optional[float]   # [Pa]
    margin: Optional[float]       # sigma_crit - steady max [Pa]
    nucleation_time: Optional[float]  # [s], first crossing when mortal
    nucleation_node: Optional[str]


def run_check(nl: Netlist, t_end: Optional[float] = None,
              dx_target: Optional[float] = None) -> CheckResult:
    """Classify one netlist as immortal or mortal.

    t_end bounds the transient stage; the default, ten diffusion times of
    the total line length, is long enough that any steady-mortal net crosses
    the threshold within it.
    """
    g = nl.graph
    p = nl.material
    dc = solve_dc(g, p)

    single = len(g.segments) == 1
    if single and p.sigma_T <= 0:
        seg = g.segments[0]
        jl = abs(dc.segment_densities[seg.id]) * seg.length
        if jl <= blech_limit(p):
            return CheckResult(
                verdict="immortal (blech)", mortal=False, stage="blech",
                steady_max=None, margin=None,
                nucleation_time=None, nucleation_node=None)

    profile = steady_state(g, dc, p)
    verdict_ss = immortality_check(profile, p)
    if verdict_ss.immortal and single:
        # single-segment stress grows monotonically toward steady state
        return CheckResult(
            verdict="immortal (steady-state)", mortal=False, stage="steady-state",
            steady_max=verdict_ss.max_tensile, margin=verdict_ss.margin,
            nucleation_time=None, nucleation_node=None)

    if t_end is None:
        d = derived_params(p)
        total = sum(s.length for s in g.segments)
        t_end = 10.0 * total ** 2 / d.kappa
    sys = discretize(g, dc, p, dx_target=dx_target)
    trace = nucleation_and_postvoid(sys, p, t_end, switch_bc=False,
                                    stop_after_first=True,
                                    sample_times=[t_end])

    if trace.events:
        ev = trace.events[0]
        if verdict_ss.immortal:
            verdict = "mortal (transient overshoot)"
        else:
            verdict = "mortal (steady-state)"
        return CheckResult(
            verdict=verdict, mortal=True, stage="transient",
            steady_max=verdict_ss.max_tensile, margin=verdict_ss.margin,
            nucleation_time=ev.time, nucleation_node=ev.node_id)

    return CheckResult(
        verdict="immortal (transient)", mortal=False, stage="transient",
        steady_max=verdict_ss.max_tensile, margin=verdict_ss.margin,
        nucleation_time=None, nucleation_node=None)
