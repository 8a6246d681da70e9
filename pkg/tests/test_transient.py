"""Transient solver: discretization, stepping, nucleation, series oracle."""

import math

import numpy as np
import pytest

from emstress import (
    InterconnectGraph,
    Node,
    Segment,
    derived_params,
    discretize,
    korhonen_series,
    nucleation_and_postvoid,
    solve_dc,
    steady_state,
    step_transient,
)
from emstress.core import NetlistError
from emstress.transient import (
    korhonen_crossing_time,
    overshoot_search,
    series_bracket,
)

from conftest import make_material, random_tree_netlist, single_segment_netlist

# series_bracket(0.1) summed to convergence at 40-digit precision
BRACKET_AT_0P1 = 0.34894095311336343


@pytest.fixture
def copper():
    return make_material()


def _single(copper, j=2e9, L=20e-6, dx=None):
    nl = single_segment_netlist(copper, j=j, length=L)
    dc = solve_dc(nl.graph, copper)
    return discretize(nl.graph, dc, copper, dx_target=dx)


# ---------------------------------------------------------------------------
# Discretization
# ---------------------------------------------------------------------------


def test_mesh_single_segment_four_elements(copper):
    L = 20e-6
    sys = _single(copper, L=L, dx=L / 4)
    assert sys.mesh_count == 5
    G = sys.G.toarray()
    # tridiagonal in chain order: graph nodes (a, b) first, then interior
    chain = sys.seg_mesh["s0"]
    assert list(chain) == [0, 2, 3, 4, 1]
    for i in range(5):
        for k in range(5):
            pos_i = list(chain).index(i)
            pos_k = list(chain).index(k)
            if abs(pos_i - pos_k) > 1:
                assert G[i, k] == 0.0
    # wind sources only at the two segment ends, opposite signs
    assert sys.J[0] > 0 and sys.J[1] == -sys.J[0]
    assert np.all(sys.J[2:] == 0.0)
    d = derived_params(copper)
    area = 0.1e-6 * 0.2e-6
    assert sys.J[0] == pytest.approx(d.kappa * d.beta * 2e9 * area, rel=1e-9)
    # element conductance and half-volume capacitances
    assert G[0, 0] == pytest.approx(d.kappa * area / (L / 4), rel=1e-12)
    assert sys.C[0] == pytest.approx(0.5 * area * L / 4, rel=1e-12)
    assert sys.C[2] == pytest.approx(area * L / 4, rel=1e-12)
    assert np.allclose(G.sum(axis=1), 0.0, atol=1e-25)


def test_mesh_junction_source_is_incident_sum(copper):
    # three segments meeting at m; sources accumulate algebraically
    a = 0.1e-6 * 0.2e-6
    nodes = (
        Node("a", True, 3e9 * a), Node("b", True, 1e9 * a),
        Node("c", True, -4e9 * a), Node("m"),
    )
    segs = (
        Segment("s0", "a", "m", 10e-6, 0.1e-6, 0.2e-6),
        Segment("s1", "b", "m", 10e-6, 0.1e-6, 0.2e-6),
        Segment("s2", "m", "c", 10e-6, 0.1e-6, 0.2e-6),
    )
    g = InterconnectGraph(nodes, segs)
    dc = solve_dc(g, copper)
    sys = discretize(g, dc, copper, dx_target=5e-6)
    d = derived_params(copper)
    idx = {nid: i for i, nid in enumerate(sys.node_ids)}
    # every graph node's source equals kappa*beta*(net electron current in)
    for n in g.nodes:
        assert sys.J[idx[n.id]] == pytest.approx(
            d.kappa * d.beta * n.injected_current, rel=1e-9, abs=1e-30)
    assert abs(sys.J.sum()) <= 1e-12 * np.abs(sys.J).max()


def test_dx_validation(copper):
    nl = single_segment_netlist(copper)
    dc = solve_dc(nl.graph, copper)
    with pytest.raises(ValueError, match="smaller than"):
        discretize(nl.graph, dc, copper, dx_target=30e-6)
    with pytest.raises(ValueError, match="positive"):
        discretize(nl.graph, dc, copper, dx_target=0.0)


def test_dx_is_length_divisor(copper):
    sys = _single(copper, L=20e-6, dx=3.0e-6)
    # 20/3 -> 7 elements of 20/7 um each
    assert len(sys.seg_mesh["s0"]) == 8
    assert sys.seg_dx["s0"] == pytest.approx(20e-6 / 7, rel=1e-12)


# ---------------------------------------------------------------------------
# Stepping
# ---------------------------------------------------------------------------


def test_zero_horizon_returns_initial(copper):
    sys = _single(copper)
    trace = step_transient(sys, copper, 0.0)
    assert trace.times.tolist() == [0.0]
    assert np.all(trace.stress[0] == copper.sigma_T)


def test_initial_vector_is_respected(copper):
    sys = _single(copper)
    init = np.linspace(0.0, 1e6, sys.mesh_count)
    trace = step_transient(sys, copper, 0.0, initial=init)
    assert np.array_equal(trace.stress[0], init)
    with pytest.raises(ValueError, match="shape"):
        step_transient(sys, copper, 1.0, initial=np.zeros(3))


def test_step_grid_validation(copper):
    sys = _single(copper)
    with pytest.raises(ValueError, match="non-negative"):
        step_transient(sys, copper, -1.0)
    with pytest.raises(ValueError, match="positive"):
        step_transient(sys, copper, 1.0, dt=0.0)
    with pytest.raises(ValueError, match="outside"):
        step_transient(sys, copper, 1.0, sample_times=[2.0])
    with pytest.raises(ValueError, match="increasing"):
        step_transient(sys, copper, 1.0, step_times=[0.5, 0.5])


def test_long_time_matches_steady_state(copper):
    rng = np.random.default_rng(17)
    nl = random_tree_netlist(rng, copper, 6)
    dc = solve_dc(nl.graph, copper)
    prof = steady_state(nl.graph, dc, copper)
    d = derived_params(copper)
    total = sum(s.length for s in nl.graph.segments)
    t_end = 10.0 * total ** 2 / d.kappa
    min_len = min(s.length for s in nl.graph.segments)
    sys = discretize(nl.graph, dc, copper, dx_target=min_len / 3)
    trace = step_transient(sys, copper, t_end, sample_times=[t_end])
    scale = max(abs(v) for v in prof.node_stress.values())
    for i, nid in enumerate(sys.node_ids):
        assert abs(trace.final()[i] - prof.node_stress[nid]) <= 1e-3 * scale


def test_mass_conservation_during_march(copper):
    sys = _single(copper, dx=2e-6)
    d = derived_params(copper)
    t_end = (20e-6) ** 2 / d.kappa
    trace = step_transient(sys, copper, t_end)
    totals = trace.stress @ sys.C
    assert np.max(np.abs(totals - totals[0])) <= 1e-8 * max(
        abs(totals[0]), np.max(np.abs(trace.stress)) * sys.C.sum())


def test_cathode_monotone_single_segment(copper):
    sys = _single(copper)
    d = derived_params(copper)
    t_end = 5 * (20e-6) ** 2 / d.kappa
    trace = step_transient(sys, copper, t_end)
    cathode = trace.node_series("a")
    assert np.all(np.diff(cathode) >= -1e-9 * cathode.max())


def test_fd_matches_series_mid_transient(copper):
    j, L = 2e9, 20e-6
    sys = _single(copper, j=j, L=L, dx=L / 50)
    d = derived_params(copper)
    tau = L ** 2 / d.kappa
    times = [0.03 * tau, 0.1 * tau, 0.5 * tau, 2.0 * tau]
    trace = step_transient(sys, copper, times[-1], sample_times=times)
    scale = d.beta * j * L / 2
    ref = korhonen_series(j, L, copper, np.asarray(times))
    err = np.abs(trace.node_series("a") - ref) / scale
    assert err.max() < 5e-3


# ---------------------------------------------------------------------------
# Series solution
# ---------------------------------------------------------------------------


def test_series_bracket_limits():
    # t = 0: the tail of the truncated sum leaves ~3e-7
    assert abs(series_bracket(0.0)) < 5e-7
    assert series_bracket(50.0) == pytest.approx(0.5, rel=1e-14)
    assert series_bracket(0.1) == pytest.approx(BRACKET_AT_0P1, rel=1e-10)
    vals = series_bracket(np.array([0.0, 0.1, 50.0]))
    assert vals.shape == (3,)
    assert vals[1] == pytest.approx(BRACKET_AT_0P1, rel=1e-10)
    with pytest.raises(ValueError):
        series_bracket(-0.1)


def test_korhonen_series_endpoints(copper):
    j, L = 2e9, 20e-6
    d = derived_params(copper)
    scale = d.beta * j * L
    assert abs(korhonen_series(j, L, copper, 0.0) - copper.sigma_T) < 1e-5 * scale
    tau = L ** 2 / d.kappa
    assert korhonen_series(j, L, copper, 100 * tau) == pytest.approx(
        copper.sigma_T + scale / 2, rel=1e-12)
    # sigma_T enters as a pure shift
    p2 = make_material(sigma_T=-1e7)
    assert korhonen_series(j, L, p2, 0.1 * tau) - korhonen_series(
        j, L, copper, 0.1 * tau) == pytest.approx(-1e7, rel=1e-9)


def test_crossing_time_brackets(copper):
    j, L = 2e9, 20e-6
    d = derived_params(copper)
    steady = d.beta * j * L / 2
    assert korhonen_crossing_time(j, L, copper, target=steady) is None
    assert korhonen_crossing_time(j, L, copper, target=steady * 1.5) is None
    assert korhonen_crossing_time(j, L, copper, target=0.0) == 0.0
    t = korhonen_crossing_time(j, L, copper, target=0.5 * steady)
    assert t is not None and t > 0
    assert korhonen_series(j, L, copper, t) == pytest.approx(0.5 * steady,
                                                            rel=1e-9)


# ---------------------------------------------------------------------------
# Nucleation and post-void behavior
# ---------------------------------------------------------------------------


def test_infinite_threshold_disables_nucleation():
    p = make_material(sigma_crit=math.inf)
    nl = single_segment_netlist(p, j=2e9)
    dc = solve_dc(nl.graph, p)
    sys = discretize(nl.graph, dc, p)
    d = derived_params(p)
    t_end = (20e-6) ** 2 / d.kappa
    t1 = step_transient(sys, p, t_end)
    t2 = nucleation_and_postvoid(sys, p, t_end, switch_bc=False)
    assert not t2.events and not t2.interior_crossings
    assert np.array_equal(t1.stress, t2.stress)


def test_single_mortal_segment_event_and_series_time():
    j, L = 2e9, 20e-6
    beta = derived_params(make_material()).beta
    p = make_material(sigma_crit=0.6 * beta * j * L / 2, delta_void=1e-8)
    nl = single_segment_netlist(p, j=j, length=L)
    dc = solve_dc(nl.graph, p)
    sys = discretize(nl.graph, dc, p, dx_target=L / 50)
    d = derived_params(p)
    t_end = 3 * L ** 2 / d.kappa
    trace = nucleation_and_postvoid(sys, p, t_end, switch_bc=True)
    assert len(trace.events) >= 1
    ev = trace.events[0]
    assert ev.node_id == "a"  # cathode
    assert ev.stress == p.sigma_crit
    t_ref = korhonen_crossing_time(j, L, p)
    assert abs(ev.time - t_ref) <= 0.02 * t_ref
    # post-void: the void-node stress decays toward zero
    cathode = trace.node_series("a")
    after = cathode[trace.times > 2 * ev.time]
    assert abs(after[-1]) < 0.05 * p.sigma_crit
    assert np.all(np.diff(np.abs(after)) <= 1e-6 * p.sigma_crit)


def test_detection_only_mode_needs_no_delta():
    j, L = 2e9, 20e-6
    beta = derived_params(make_material()).beta
    p = make_material(sigma_crit=0.6 * beta * j * L / 2, delta_void=None)
    nl = single_segment_netlist(p, j=j, length=L)
    dc = solve_dc(nl.graph, p)
    sys = discretize(nl.graph, dc, p)
    d = derived_params(p)
    t_end = 3 * L ** 2 / d.kappa
    trace = nucleation_and_postvoid(sys, p, t_end, switch_bc=False)
    assert len(trace.events) == 1
    # but switching boundaries without delta is an error
    with pytest.raises(NetlistError, match="delta_void"):
        nucleation_and_postvoid(sys, p, t_end, switch_bc=True)
    # unless the line-width fallback is selected
    trace_w = nucleation_and_postvoid(sys, p, t_end, switch_bc=True,
                                      interface_scale="width")
    assert len(trace_w.events) == 1


def test_interior_crossings_flagged_not_switched():
    j, L = 2e9, 20e-6
    beta = derived_params(make_material()).beta
    p = make_material(sigma_crit=0.3 * beta * j * L / 2, delta_void=1e-8)
    nl = single_segment_netlist(p, j=j, length=L)
    dc = solve_dc(nl.graph, p)
    sys = discretize(nl.graph, dc, p, dx_target=L / 20)
    d = derived_params(p)
    trace = nucleation_and_postvoid(sys, p, 3 * L ** 2 / d.kappa,
                                    switch_bc=False)
    assert trace.interior_crossings
    desc, t, s = trace.interior_crossings[0]
    assert desc.startswith("s0@x=")
    assert s >= p.sigma_crit
    # only boundary nodes produced events
    assert all(ev.node_id in ("a", "b") for ev in trace.events)


def test_symmetric_double_cathode_two_events():
    a = 0.1e-6 * 0.2e-6
    j = 2e9
    beta = derived_params(make_material()).beta
    p = make_material(sigma_crit=0.5 * beta * j * 10e-6 / 2, delta_void=1e-8)
    nodes = (
        Node("a", True, j * a), Node("b", True, j * a),
        Node("m", True, -2 * j * a),
    )
    segs = (
        Segment("s0", "a", "m", 10e-6, 0.1e-6, 0.2e-6),
        Segment("s1", "b", "m", 10e-6, 0.1e-6, 0.2e-6),
    )
    g = InterconnectGraph(nodes, segs)
    dc = solve_dc(g, p)
    sys = discretize(g, dc, p)
    d = derived_params(p)
    trace = nucleation_and_postvoid(sys, p, 10 * (20e-6) ** 2 / d.kappa,
                                    switch_bc=True)
    by_node = {ev.node_id: ev for ev in trace.events}
    assert set(by_node) == {"a", "b"}
    assert by_node["a"].time == pytest.approx(by_node["b"].time, rel=1e-9)


def test_prestressed_start_fires_immediately():
    p = make_material(sigma_T=6e8, sigma_crit=5e8, delta_void=1e-8)
    nl = single_segment_netlist(p, j=1e8)
    dc = solve_dc(nl.graph, p)
    sys = discretize(nl.graph, dc, p)
    trace = nucleation_and_postvoid(sys, p, 1.0, switch_bc=True,
                                    stop_after_first=True)
    assert trace.stopped_at_event
    assert trace.events[0].time == 0.0
    assert trace.events[0].stress == 6e8


def test_stop_after_first_event():
    j, L = 2e9, 20e-6
    beta = derived_params(make_material()).beta
    p = make_material(sigma_crit=0.4 * beta * j * L / 2, delta_void=1e-8)
    nl = single_segment_netlist(p, j=j, length=L)
    dc = solve_dc(nl.graph, p)
    sys = discretize(nl.graph, dc, p)
    d = derived_params(p)
    trace = nucleation_and_postvoid(sys, p, 5 * L ** 2 / d.kappa,
                                    switch_bc=False, stop_after_first=True)
    assert trace.stopped_at_event
    assert len(trace.events) == 1
    assert trace.times[-1] <= 5 * L ** 2 / d.kappa


# ---------------------------------------------------------------------------
# Overshoot search
# ---------------------------------------------------------------------------


def test_overshoot_search_finds_and_verifies():
    res = overshoot_search(seed=1, budget=16)
    assert res.found
    g = res.netlist.graph
    assert 3 <= len(g.segments) <= 6  # never a single segment
    assert res.overshoot >= 0.05
    assert res.steady_max < res.netlist.material.sigma_crit < res.transient_max

    # replay: the transient really does overshoot the steady maximum
    p = res.netlist.material
    dc = solve_dc(g, p)
    prof = steady_state(g, dc, p)
    sys = discretize(g, dc, p)
    d = derived_params(p)
    total = sum(s.length for s in g.segments)
    trace = step_transient(sys, p, 10 * total ** 2 / d.kappa)
    assert trace.max_tensile >= 1.05 * prof.max_tensile[1]


def test_overshoot_search_budget_exhaustion():
    # a search over the unbiased family only would need luck; budget 0 must
    # report failure cleanly
    res = overshoot_search(seed=0, budget=0)
    assert not res.found
    assert res.netlist is None
    assert res.n_tried == 0
