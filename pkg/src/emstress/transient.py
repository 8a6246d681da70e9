"""Transient stress evolution via the stress-electrical equivalence.

Each wire segment is discretized into elements; stress plays the role of
voltage in an RC network where element conductance is kappa*A/dx, nodal
capacitance is the metal volume carried by the node, and the electron wind
injects a flux source +kappa*beta*j*A at the electron-entry end of every
segment (and the negative at the exit end).  Backward Euler marches the
network in time; the steady state of the network reproduces the analytic
steady-state profile exactly because the stress profile is piecewise linear.

Void nucleation is monitored at terminals and junctions.  Once a boundary
node reaches sigma_crit, the blocked condition there switches to an
absorbing interface d(sigma)/dx = sigma/delta, realized as a grounded
conductance kappa*A/delta at that node.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .core import InterconnectGraph, MaterialParams, Netlist, NetlistError, derived_params
from .dc import DcSolution, solve_dc

__all__ = [
    "DiscretizedSystem", "StressTrace", "NucleationEvent", "discretize",
    "step_transient", "nucleation_and_postvoid", "korhonen_series",
    "korhonen_crossing_time", "overshoot_search", "OvershootSearchResult",
]


@dataclass(frozen=True)
class DiscretizedSystem:
    """Finite-volume RC model of one interconnect graph.

    Mesh nodes 0..n_graph-1 are the graph nodes in id order; interior
    element nodes follow segment by segment.
    """

    node_ids: tuple[str, ...]          # graph node ids, sorted
    mesh_count: int
    G: sp.csr_matrix                   # conductance Laplacian [m^2/s * m^2 / m]
    C: np.ndarray                      # nodal volumes [m^3]
    J: np.ndarray                      # wind flux sources [Pa m^3/s]
    seg_mesh: dict[str, np.ndarray]    # segment id -> mesh indices a..b inclusive
    seg_dx: dict[str, float]           # element length per segment [m]
    seg_x: dict[str, np.ndarray]       # mesh-node positions along segment [m]
    node_area: dict[str, float]        # graph node -> sum of incident areas [m^2]
    node_wmax: dict[str, float]        # graph node -> widest incident width [m]
    kappa: float                       # stress diffusivity used in assembly
    beta: float
    sigma_T: float

    def index_of(self, node_id: str) -> int:
        return self.node_ids.index(node_id)

    @property
    def graph_count(self) -> int:
        return len(self.node_ids)


def discretize(g: InterconnectGraph, dc: DcSolution, p: MaterialParams,
               dx_target: Optional[float] = None) -> DiscretizedSystem:
    """Mesh a graph for transient analysis.

    Each segment uses dx equal to its length divided by the smallest element
    count that keeps dx <= dx_target, so dx is the nearest divisor of the
    length not exceeding the target.  The default target is one tenth of the
    shortest segment, capped at 1 um.
    """
    d = derived_params(p)
    min_len = min(s.length for s in g.segments)
    if dx_target is None:
        dx_target = min(min_len / 10.0, 1e-6)
    if dx_target <= 0:
        raise ValueError("dx_target must be positive")
    if dx_target >= min_len:
        raise ValueError(
            f"dx_target {dx_target:g} m must be smaller than the shortest "
            f"segment length {min_len:g} m")

    node_ids = g.node_ids()
    index = {nid: i for i, nid in enumerate(node_ids)}
    next_idx = len(node_ids)

    rows: list[int] = []
    cols: list[int] = []
    vals: list[float] = []
    cap: dict[int, float] = {}
    src: dict[int, float] = {}
    seg_mesh: dict[str, np.ndarray] = {}
    seg_dx: dict[str, float] = {}
    seg_x: dict[str, np.ndarray] = {}

    def add_cap(i, v):
        cap[i] = cap.get(i, 0.0) + v

    def add_src(i, v):
        src[i] = src.get(i, 0.0) + v

    for s in g.segments:
        n_el = int(math.ceil(s.length / dx_target - 1e-12))
        dx = s.length / n_el
        area = s.area
        interior = list(range(next_idx, next_idx + n_el - 1))
        next_idx += n_el - 1
        chain = [index[s.node_a]] + interior + [index[s.node_b]]
        seg_mesh[s.id] = np.asarray(chain, dtype=int)
        seg_dx[s.id] = dx
        seg_x[s.id] = dx * np.arange(n_el + 1)

        g_el = d.kappa * area / dx
        for u, v in zip(chain[:-1], chain[1:]):
            rows += [u, v, u, v]
            cols += [u, v, v, u]
            vals += [g_el, g_el, -g_el, -g_el]
            add_cap(u, 0.5 * area * dx)
            add_cap(v, 0.5 * area * dx)

        flux = d.kappa * d.beta * dc.segment_densities[s.id] * area
        add_src(chain[0], flux)    # electron entry for j > 0: tensile source
        add_src(chain[-1], -flux)

    n = next_idx
    G = sp.csr_matrix(sp.coo_matrix((vals, (rows, cols)), shape=(n, n)))
    C = np.zeros(n)
    for i, v in cap.items():
        C[i] = v
    J = np.zeros(n)
    for i, v in src.items():
        J[i] = v

    node_area = {nid: 0.0 for nid in node_ids}
    node_wmax = {nid: 0.0 for nid in node_ids}
    for s in g.segments:
        for nid in (s.node_a, s.node_b):
            node_area[nid] += s.area
            node_wmax[nid] = max(node_wmax[nid], s.width)

    return DiscretizedSystem(
        node_ids=tuple(node_ids), mesh_count=n, G=G, C=C, J=J,
        seg_mesh=seg_mesh, seg_dx=seg_dx, seg_x=seg_x,
        node_area=node_area, node_wmax=node_wmax,
        kappa=d.kappa, beta=d.beta, sigma_T=p.sigma_T)


@dataclass(frozen=True)
class NucleationEvent:
    """Void nucleation at a terminal or junction node."""

    node_id: str
    time: float    # [s], interpolated crossing time
    stress: float  # [Pa]; equals sigma_crit for threshold crossings


@dataclass
class StressTrace:
    """Sampled stress history of a transient run."""

    system: DiscretizedSystem
    times: np.ndarray                   # [s]
    stress: np.ndarray                  # [n_times, mesh_count], [Pa]
    events: list[NucleationEvent] = field(default_factory=list)
    interior_crossings: list[tuple[str, float, float]] = field(default_factory=list)
    max_tensile: float = -math.inf      # over all steps and mesh nodes
    max_tensile_time: float = 0.0
    stopped_at_event: bool = False

    def node_series(self, node_id: str) -> np.ndarray:
        return self.stress[:, self.system.index_of(node_id)]

    def final(self) -> np.ndarray:
        return self.stress[-1]

    def graph_node_stress(self) -> dict[str, np.ndarray]:
        return {nid: self.stress[:, i]
                for i, nid in enumerate(self.system.node_ids)}


def _build_step_grid(t_end: float, dt: Optional[float], ramp: Optional[float],
                     sample_times: Optional[Sequence[float]],
                     step_times: Optional[Sequence[float]]) -> np.ndarray:
    """Monotone array of step target times in (0, t_end]."""
    if t_end < 0:
        raise ValueError("t_end must be non-negative")
    if t_end == 0:
        if sample_times is not None and any(float(t) > 0 for t in sample_times):
            raise ValueError("sample times must be 0 when t_end is 0")
        return np.empty(0)
    if step_times is not None:
        ts = np.asarray(sorted(float(t) for t in step_times))
        if ts.size == 0 or ts[0] <= 0:
            raise ValueError("step_times must be positive and non-empty")
        if np.any(np.diff(ts) <= 0):
            raise ValueError("step_times must be strictly increasing")
        return ts

    samples = []
    if sample_times is not None:
        for t in sample_times:
            t = float(t)
            if t < 0 or t > t_end * (1 + 1e-12):
                raise ValueError(f"sample time {t:g} outside [0, t_end]")
            if t > 0:
                samples.append(min(t, t_end))
    samples = sorted(set(samples))

    if dt is not None:
        if dt <= 0:
            raise ValueError("dt must be positive")
        dt0, growth = float(dt), float(ramp) if ramp else 1.0
    else:
        # Geometric ramp in blocks of 8 equal steps.  The ~6% per-step growth
        # keeps backward-Euler errors a few tenths of a percent of the stress
        # scale through the mid-transient knee.
        blocks = 16
        growth_b = 1.6
        dt0 = t_end * (growth_b - 1.0) / (8.0 * (growth_b ** blocks - 1.0))
        if samples:
            dt0 = min(dt0, samples[0] / 4.0)
        growth = growth_b ** (1.0 / 8.0)

    times = []
    t = 0.0
    nominal = dt0
    pending = list(samples)
    k = 0
    while t < t_end * (1 - 1e-12):
        nxt = t + nominal
        if pending and nxt >= pending[0] * (1 - 1e-12):
            nxt = pending.pop(0)
        if nxt > t_end:
            nxt = t_end
        if nxt <= t:
            # sample coincides with current time within rounding
            if pending and pending[0] <= t:
                pending.pop(0)
                continue
            nxt = min(t + nominal, t_end)
        times.append(nxt)
        t = nxt
        k += 1
        nominal = dt0 * growth ** k
        if len(times) > 2_000_000:
            raise RuntimeError("transient step grid exceeds 2e6 steps")
    return np.asarray(times)


def _march(sys: DiscretizedSystem, p: MaterialParams, grid: np.ndarray,
           initial: Optional[np.ndarray], record_times: Optional[np.ndarray],
           detect: bool, switch_bc: bool, stop_on_event: bool,
           interface_scale: str) -> StressTrace:
    n = sys.mesh_count
    if initial is None:
        sigma = np.full(n, float(p.sigma_T))
    else:
        sigma = np.array(initial, dtype=float, copy=True)
        if sigma.shape != (n,):
            raise ValueError(f"initial state must have shape ({n},)")

    if switch_bc:
        if interface_scale not in ("delta", "width"):
            raise ValueError("interface_scale must be 'delta' or 'width'")
        if interface_scale == "delta" and p.delta_void is None:
            raise NetlistError(
                "delta_void is required for post-void analysis and has no default")

    G = sys.G.copy()
    C = sys.C
    J = sys.J
    n_graph = sys.graph_count
    sigma_c = p.sigma_crit

    record_all = record_times is None
    rec_pending = [] if record_all else sorted(float(t) for t in record_times)
    rec_times: list[float] = []
    rec_rows: list[np.ndarray] = []

    def maybe_record(t, state):
        if record_all:
            rec_times.append(t)
            rec_rows.append(state.copy())
            return
        # the step grid lands exactly on every requested sample time
        while rec_pending and rec_pending[0] <= t * (1 + 1e-12):
            rec_times.append(rec_pending.pop(0))
            rec_rows.append(state.copy())

    trace_events: list[NucleationEvent] = []
    interior: list[tuple[str, float, float]] = []
    interior_seen: set[int] = set()
    voided: set[int] = set()

    # map mesh index -> (segment id, x) for interior crossing reports
    def interior_desc(idx: int) -> str:
        for sid, chain in sys.seg_mesh.items():
            pos = np.where(chain == idx)[0]
            if pos.size:
                return f"{sid}@x={sys.seg_x[sid][pos[0]]:.9g}"
        return f"mesh{idx}"

    def add_void(idx: int):
        nonlocal G
        nid = sys.node_ids[idx]
        if interface_scale == "width":
            scale = sys.node_wmax[nid]
        else:
            scale = p.delta_void
        g_v = sys.kappa * sys.node_area[nid] / scale
        G = G + sp.csr_matrix(([g_v], ([idx], [idx])), shape=G.shape)

    stopped = False
    max_val = float(np.max(sigma))
    max_t = 0.0

    # initial state: record and, in detection mode, handle pre-stressed starts
    maybe_record(0.0, sigma)
    if detect:
        hot = [i for i in range(n_graph) if sigma[i] >= sigma_c]
        for i in hot:
            voided.add(i)
            trace_events.append(NucleationEvent(sys.node_ids[i], 0.0, float(sigma[i])))
            if switch_bc:
                add_void(i)
        if hot and stop_on_event:
            stopped = True

    lu = None
    lu_dt = None
    t_prev = 0.0
    for t in grid:
        if stopped:
            break
        dt_k = t - t_prev
        if lu is None or dt_k != lu_dt:
            M = (G + sp.diags(C / dt_k)).tocsc()
            lu = spla.splu(M)
            lu_dt = dt_k
        rhs = C / dt_k * sigma + J
        new = lu.solve(rhs)
        if not np.all(np.isfinite(new)):
            raise RuntimeError(
                f"transient solve diverged at t = {t:g} s (non-finite stress); "
                "reduce dt or check inputs")

        if detect:
            for i in range(n_graph):
                if i in voided or new[i] < sigma_c:
                    continue
                if new[i] == sigma[i]:
                    t_cross = t
                else:
                    frac = (sigma_c - sigma[i]) / (new[i] - sigma[i])
                    frac = min(max(frac, 0.0), 1.0)
                    t_cross = t_prev + frac * dt_k
                voided.add(i)
                trace_events.append(
                    NucleationEvent(sys.node_ids[i], float(t_cross), float(sigma_c)))
                if switch_bc:
                    add_void(i)
                    lu = None  # conductance changed; refactor next step
                if stop_on_event:
                    stopped = True
            # flag interior crossings without switching anything
            hot_int = np.where(new[n_graph:] >= sigma_c)[0] + n_graph
            for idx in hot_int:
                if idx not in interior_seen:
                    interior_seen.add(int(idx))
                    interior.append((interior_desc(int(idx)), float(t), float(new[idx])))

        sigma = new
        t_prev = t
        m = float(np.max(sigma))
        if m > max_val:
            max_val = m
            max_t = t
        maybe_record(t, sigma)

    if not rec_times or rec_times[-1] < t_prev:
        if record_all or not rec_times:
            rec_times.append(t_prev)
            rec_rows.append(sigma.copy())

    return StressTrace(
        system=sys,
        times=np.asarray(rec_times),
        stress=np.vstack(rec_rows) if rec_rows else np.empty((0, n)),
        events=sorted(trace_events, key=lambda e: (e.time, e.node_id)),
        interior_crossings=interior,
        max_tensile=max_val,
        max_tensile_time=max_t,
        stopped_at_event=stopped)


def step_transient(sys: DiscretizedSystem, p: MaterialParams, t_end: float,
                   dt: Optional[float] = None, *,
                   initial: Optional[np.ndarray] = None,
                   sample_times: Optional[Sequence[float]] = None,
                   ramp: Optional[float] = None,
                   step_times: Optional[Sequence[float]] = None) -> StressTrace:
    """March the discretized system with backward Euler, no void handling.

    With dt given, steps are uniform (optionally growing by `ramp` per step);
    without it, an automatic geometric ramp resolves early transients and
    still reaches t_end in roughly a hundred steps.  sample_times selects the
    recorded instants (t = 0 is always available via index 0 when requested);
    by default every step is recorded.  step_times overrides the grid
    entirely.  First order in dt, second order in dx.
    """
    grid = _build_step_grid(t_end, dt, ramp, sample_times, step_times)
    record = None
    if sample_times is not None:
        record = sorted(float(t) for t in sample_times)
    return _march(sys, p, grid, initial, record, detect=False,
                  switch_bc=False, stop_on_event=False, interface_scale="delta")


def nucleation_and_postvoid(sys: DiscretizedSystem, p: MaterialParams,
                            t_end: float, dt: Optional[float] = None, *,
                            initial: Optional[np.ndarray] = None,
                            sample_times: Optional[Sequence[float]] = None,
                            ramp: Optional[float] = None,
                            step_times: Optional[Sequence[float]] = None,
                            interface_scale: str = "delta",
                            switch_bc: bool = True,
                            stop_after_first: bool = False) -> StressTrace:
    """Transient run with void nucleation detection at terminals/junctions.

    When a boundary node crosses sigma_crit (tensile), the crossing time is
    interpolated within the step, an event is recorded and, with switch_bc,
    the node's blocked boundary changes to the absorbing interface
    d(sigma)/dx = sigma/delta from the following step onward.  At most one
    event per node.  Interior mesh crossings are flagged but do not switch
    any boundary.  With switch_bc off the run is detection-only and
    delta_void is not required.
    """
    grid = _build_step_grid(t_end, dt, ramp, sample_times, step_times)
    record = None
    if sample_times is not None:
        record = sorted(float(t) for t in sample_times)
    return _march(sys, p, grid, initial, record, detect=True,
                  switch_bc=switch_bc, stop_on_event=stop_after_first,
                  interface_scale=interface_scale)


# ----------------------------------------------------------------------------
# Analytic single-segment solution
# ----------------------------------------------------------------------------

_SERIES_TOL = 1e-12


def series_bracket(u, tol: float = _SERIES_TOL, max_terms: int = 400_000):
    """Evaluate 1/2 - (4/pi^2) * sum over odd n of exp(-n^2 pi^2 u)/n^2.

    u = kappa*t/L^2.  Terms are added until the next one falls below `tol`
    (absolute, i.e. relative to the beta*j*L prefactor of the stress
    solution).  At u = 0 the truncated tail leaves ~3e-7, so exact-zero
    comparisons must allow for that.
    """
    u_in = np.asarray(u, dtype=float)
    scalar = u_in.ndim == 0
    uu = np.atleast_1d(u_in).astype(float).ravel()
    if np.any(uu < 0):
        raise ValueError("series argument kappa*t/L^2 must be non-negative")
    res = np.full(uu.shape, 0.5)
    active = np.ones(uu.shape, dtype=bool)
    pi2 = math.pi ** 2
    m = 0
    block = 512
    while active.any() and m < max_terms:
        nn = (2 * np.arange(m, m + block) + 1).astype(float)
        ua = uu[active][:, None]
        terms = 4.0 * np.exp(-(nn ** 2) * pi2 * ua) / ((nn ** 2) * pi2)
        res[active] -= terms.sum(axis=1)
        idx = np.where(active)[0]
        active[idx] = terms[:, -1] >= tol
        m += block
    out = res.reshape(u_in.shape) if not scalar else float(res[0])
    return out


def korhonen_series(j: float, length: float, p: MaterialParams, t,
                    tol: float = _SERIES_TOL):
    """Cathode stress sigma(0, t) of an isolated segment, series solution.

    j is the electron current-density magnitude; the cathode is the
    electron-entry end.  Accepts scalar or array t and returns the absolute
    stress including sigma_T.  The steady value is sigma_T + beta*j*L/2.
    """
    d = derived_params(p)
    t_arr = np.asarray(t, dtype=float)
    u = d.kappa * t_arr / length ** 2
    return p.sigma_T + d.beta * abs(j) * length * series_bracket(u, tol=tol)


def korhonen_crossing_time(j: float, length: float, p: MaterialParams,
                           target: Optional[float] = None) -> Optional[float]:
    """First time the isolated-segment cathode stress reaches `target`.

    Defaults to sigma_crit.  Returns None when the steady-state stress never
    reaches the target.
    """
    from scipy.optimize import brentq

    d = derived_params(p)
    if target is None:
        target = p.sigma_crit
    steady = p.sigma_T + d.beta * abs(j) * length * 0.5
    if target >= steady:
        return None
    if target <= p.sigma_T:
        return 0.0
    tau = length ** 2 / d.kappa

    def f(t):
        return float(korhonen_series(j, length, p, t)) - target

    lo, hi = 1e-12 * tau, 4.0 * tau
    while f(hi) < 0:
        hi *= 4.0
        if hi > 1e9 * tau:
            return None
    return float(brentq(f, lo, hi, rtol=1e-12, maxiter=200))


# ----------------------------------------------------------------------------
# Transient-overshoot search (steady-state screens are not sufficient)
# ----------------------------------------------------------------------------


@dataclass(frozen=True)
class OvershootSearchResult:
    """Outcome of the randomized search for transient overshoot instances."""

    found: bool
    netlist: Optional[Netlist]
    overshoot: float       # (transient max)/(steady max) - 1, sigma_T = 0
    steady_max: float      # [Pa]
    transient_max: float   # [Pa]
    n_tried: int
    budget: int
    seed: int


def _default_search_material() -> MaterialParams:
    return MaterialParams(
        Z_eff=1.0, rho_el=2.5e-8, omega=1.18e-29, bulk_modulus=1e11,
        D0=5.2e-5, Ea=0.85, temperature=373.0, sigma_crit=1e9,
        sigma_T=0.0, delta_void=1e-8)


def _biased_candidate(rng: np.random.Generator) -> InterconnectGraph:
    """Short fast segment feeding a long slow chain with opposing wind.

    Early on the fast segment raises its far terminal to ~beta*j_s*l_s while
    the slow chain pins the junction near zero; the slow chain's steady
    contribution later drags that terminal down, so the transient peak
    exceeds the steady maximum.
    """
    k = int(rng.integers(3, 7))          # total segments
    n_slow = k - 1
    l_s = rng.uniform(0.8e-6, 1.6e-6)    # fast stub [m]
    ratio = rng.uniform(6.0, 14.0)       # slow total / fast length
    l_w = ratio * l_s
    alpha = ratio * rng.uniform(0.75, 1.25)   # j_s / j_w
    j_w = rng.uniform(8e8, 3e9)
    j_s = alpha * j_w
    w = 3e-7
    h = 2e-7
    area = w * h

    fr = rng.uniform(0.5, 1.5, n_slow)
    pieces = l_w * fr / fr.sum()

    from .core import Node, Segment

    # chain n0 - n1 - ... - n_slow (slow), stub n_slow - n_fast_end
    nodes = []
    segments = []
    # electron flow in slow chain: n0 -> junction (delivers atoms to junction)
    for i, piece in enumerate(pieces):
        segments.append(Segment(
            id=f"s{i:02d}", node_a=f"n{i:02d}", node_b=f"n{i + 1:02d}",
            length=float(piece), width=w, thickness=h))
    junction = f"n{n_slow:02d}"
    far = f"n{n_slow + 1:02d}"
    # fast stub: electrons enter at the far terminal, flow toward junction
    segments.append(Segment(id=f"s{n_slow:02d}", node_a=far, node_b=junction,
                            length=float(l_s), width=w, thickness=h))

    i_w = j_w * area
    i_s = j_s * area
    inj = {f"n{i:02d}": 0.0 for i in range(n_slow + 2)}
    inj["n00"] = i_w
    inj[far] = i_s
    inj[junction] = -(i_w + i_s)
    for nid in inj:
        nodes.append(Node(id=nid, is_terminal=nid in ("n00", far, junction),
                          injected_current=inj[nid]))
    nodes.sort(key=lambda n: n.id)
    return InterconnectGraph(nodes=tuple(nodes), segments=tuple(segments))


def _random_tree_candidate(rng: np.random.Generator) -> InterconnectGraph:
    from .core import Node, Segment

    k = int(rng.integers(3, 7))
    h = 2e-7
    # random attachment tree over k+1 nodes
    parents = [int(rng.integers(0, i)) for i in range(1, k + 1)]
    segments = []
    currents = {}
    for i, par in enumerate(parents):
        length = float(np.exp(rng.uniform(np.log(1e-6), np.log(3e-5))))
        width = float(np.exp(rng.uniform(np.log(1.5e-7), np.log(6e-7))))
        sid = f"s{i:02d}"
        j = float(np.exp(rng.uniform(np.log(3e8), np.log(3e10))))
        if rng.random() < 0.5:
            j = -j
        segments.append(Segment(id=sid, node_a=f"n{par:02d}", node_b=f"n{i + 1:02d}",
                                length=length, width=width, thickness=h))
        currents[sid] = j * width * h

    inj = {f"n{i:02d}": 0.0 for i in range(k + 1)}
    for s in segments:
        inj[s.node_a] += currents[s.id]
        inj[s.node_b] -= currents[s.id]
    nodes = tuple(sorted((Node(id=nid, is_terminal=True, injected_current=cur)
                          for nid, cur in inj.items()), key=lambda n: n.id))
    return InterconnectGraph(nodes=nodes, segments=tuple(segments))


def _evaluate_overshoot(g: InterconnectGraph, p: MaterialParams,
                        dx_target: Optional[float] = None
                        ) -> tuple[float, float, float]:
    """Return (steady max, transient max, ratio) for sigma_T = 0 instances."""
    from .steady import steady_state

    dc = solve_dc(g, p)
    prof = steady_state(g, dc, p)
    ss_max = prof.max_tensile[1]
    if ss_max <= 0:
        return ss_max, ss_max, 1.0
    d = derived_params(p)
    total_len = sum(s.length for s in g.segments)
    t_end = 10.0 * total_len ** 2 / d.kappa
    sys = discretize(g, dc, p, dx_target=dx_target)
    trace = step_transient(sys, p, t_end, sample_times=[t_end])
    return ss_max, trace.max_tensile, trace.max_tensile / ss_max


def overshoot_search(seed: int, p: Optional[MaterialParams] = None,
                     budget: int = 64) -> OvershootSearchResult:
    """Search 3-6-segment trees for >= 5% transient overshoot.

    Alternates a biased fast-stub/slow-chain family with uniformly random
    trees; every candidate verdict comes from an actual transient solve at
    the solver's default discretization.  When an instance is found, its
    sigma_crit is placed midway between the steady and transient maxima so
    that the steady screen calls it immortal while the transient stage drives
    nucleation; the composed netlist is re-verified through the full check
    pipeline before being returned.  Returns found=False once the budget is
    exhausted.
    """
    from .pipeline import run_check

    if p is None:
        p = _default_search_material()
    rng = np.random.default_rng(seed)
    best = (0.0, None, 0.0, 0.0)  # ratio, graph, ss, tr

    for trial in range(budget):
        g = _biased_candidate(rng) if trial % 2 == 0 else _random_tree_candidate(rng)
        try:
            # coarse screen, then full-resolution confirmation
            min_len = min(s.length for s in g.segments)
            ss, tr, ratio = _evaluate_overshoot(g, p, dx_target=min_len / 4)
            if ratio < 1.055:
                if ratio > best[0]:
                    best = (ratio, g, ss, tr)
                continue
            ss, tr, ratio = _evaluate_overshoot(g, p, dx_target=None)
        except (NetlistError, RuntimeError, ValueError):
            continue
        if ratio < 1.05:
            if ratio > best[0]:
                best = (ratio, g, ss, tr)
            continue

        sigma_mid = 0.5 * (ss + tr)
        mat = replace(p, sigma_crit=float(sigma_mid), sigma_T=0.0,
                      delta_void=p.delta_void if p.delta_void else 1e-8)
        netlist = Netlist(graph=g, material=mat)
        verdict = run_check(netlist)
        if verdict.verdict == "mortal (transient overshoot)":
            return OvershootSearchResult(
                found=True, netlist=netlist, overshoot=ratio - 1.0,
                steady_max=float(ss), transient_max=float(tr),
                n_tried=trial + 1, budget=budget, seed=seed)

    return OvershootSearchResult(found=False, netlist=None,
                         overshoot=best[0] - 1.0, steady_max=best[2],
                         transient_max=best[3], n_tried=budget,
                         budget=budget, seed=seed)
