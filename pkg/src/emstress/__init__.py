"""Electromigration stress and lifetime analysis for on-chip interconnect trees.

The package models hydrostatic stress evolution in multisegment metal lines
driven by the electron wind (Korhonen's equation), and layers reliability
statistics (Blech filtering, Black's equation, lognormal failure fractions)
on top of the stress solutions.  A FastAPI service exposes every engine;
the command-line interface is a thin client of that service.
"""

__version__ = "0.1.0"

from .core import (
    BOLTZMANN_EV,
    BOLTZMANN_J,
    ELEMENTARY_CHARGE,
    CurrentWaveform,
    DerivedParams,
    InterconnectGraph,
    MaterialParams,
    Netlist,
    NetlistError,
    Node,
    Segment,
    WaveformInterval,
    derived_params,
    parse_netlist,
    parse_netlist_dict,
    serialize_netlist,
)
from .dc import DcSolution, solve_dc, spanning_tree
from .steady import (
    ImmortalityResult,
    SteadyStressProfile,
    WorstCaseBounds,
    blech_check,
    blech_limit,
    emit_pdn_constraints,
    format_lp,
    immortality_check,
    steady_state,
    worst_case_bounds,
)
from .transient import (
    DiscretizedSystem,
    NucleationEvent,
    StressTrace,
    overshoot_search,
    discretize,
    korhonen_series,
    nucleation_and_postvoid,
    step_transient,
)
from .variation import (
    MomentSet,
    compute_lambda,
    mean_stress_shift,
    monte_carlo_oracle,
    nominal_moments,
    perturbation_moments,
)
from .acem import directional_averages, effective_densities
from .reliability import (
    JlFitResult,
    black_mttf,
    ff_to_z,
    fit_jl_curve,
    lifetime_from_jl,
    jl_from_lifetime,
    tf_to_ff,
    translate_condition,
    weakest_link,
    z_to_tf,
)
from .pipeline import CheckResult, run_check
