"""Steady-state stress analysis of interconnect trees.

The steady state of the stress equation with blocked terminals makes the
atomic flux vanish everywhere, so along each segment the stress gradient
balances the electron wind: d(sigma)/dx = -beta*j.  Node stresses follow from
a spanning-tree walk; the free constant is fixed by mass conservation, which
keeps the volume-weighted average stress equal to the initial thermal stress
sigma_T.  Any spanning tree of a KVL-consistent current pattern gives the
same answer.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import dijkstra

from .core import InterconnectGraph, MaterialParams, derived_params
from .dc import DcSolution, SpanningTree, spanning_tree


@dataclass(frozen=True)
class SteadyStressProfile:
    """Steady-state hydrostatic stress at every node of one graph."""

    node_stress: dict[str, float]     # [Pa]
    segment_slopes: dict[str, float]  # d(sigma)/dx along node_a -> node_b [Pa/m]
    max_tensile: tuple[str, float]    # (node id, stress)
    min_compressive: tuple[str, float]

    def stress(self, node_id: str) -> float:
        return self.node_stress[node_id]


def steady_state(g: InterconnectGraph, dc: DcSolution, p: MaterialParams,
                 tree: Optional[SpanningTree] = None) -> SteadyStressProfile:
    """Compute the steady-state stress profile for a DC operating point.

    The profile is piecewise linear in position, so nodal extrema are global
    extrema.  `tree` selects the spanning tree used for the walk; the result
    is tree-independent for KVL-consistent currents.
    """
    d = derived_params(p)
    if tree is None:
        tree = spanning_tree(g)
    seg_by_id = g.segment_by_id()

    # Stress deviations relative to the tree root.
    dev = {tree.root: 0.0}
    children: dict[str, list[str]] = {}
    for child, (par, _) in tree.parent.items():
        children.setdefault(par, []).append(child)
    frontier = [tree.root]
    while frontier:
        nid = frontier.pop()
        for child in sorted(children.get(nid, [])):
            seg = seg_by_id[tree.parent[child][1]]
            drop = d.beta * dc.segment_densities[seg.id] * seg.length
            # sigma_b - sigma_a = -beta*j*l with j positive a -> b
            if seg.node_a == nid:
                dev[child] = dev[nid] - drop
            else:
                dev[child] = dev[nid] + drop
            frontier.append(child)

    # Mass conservation pins the datum: volume-weighted mean equals sigma_T.
    vol = 0.0
    moment = 0.0
    for s in g.segments:
        v = s.area * s.length
        vol += v
        moment += v * 0.5 * (dev[s.node_a] + dev[s.node_b])
    offset = p.sigma_T - moment / vol

    stress = {nid: dev[nid] + offset for nid in g.node_ids()}
    slopes = {s.id: -d.beta * dc.segment_densities[s.id] for s in g.segments}

    max_id = max(stress, key=lambda n: (stress[n], n))
    min_id = min(stress, key=lambda n: (stress[n], n))
    return SteadyStressProfile(
        node_stress=stress, segment_slopes=slopes,
        max_tensile=(max_id, stress[max_id]),
        min_compressive=(min_id, stress[min_id]))


@dataclass(frozen=True)
class ImmortalityResult:
    """Verdict of the steady-state stress screen.

    steady_state_only flags that transient overshoot on multisegment trees is
    not covered by this check; the full pipeline adds a transient stage.
    """

    immortal: bool
    worst_node: str
    max_tensile: float   # [Pa]
    margin: float        # sigma_crit - max tensile [Pa]; >= 0 when immortal
    steady_state_only: bool = True


def immortality_check(profile: SteadyStressProfile,
                      p: MaterialParams) -> ImmortalityResult:
    """A tree is steady-state immortal when no node reaches sigma_crit.

    Stress exactly at sigma_crit counts as immortal (no nucleation below or
    at the threshold), matching the boundary convention of blech_check.
    """
    node, worst = profile.max_tensile
    return ImmortalityResult(
        immortal=worst <= p.sigma_crit,
        worst_node=node,
        max_tensile=worst,
        margin=p.sigma_crit - worst)


def blech_limit(p: MaterialParams) -> float:
    """Critical current-density length product (jL)_crit = 2*sigma_crit/beta."""
    return 2.0 * p.sigma_crit / derived_params(p).beta


def blech_check(jl_product: float, p: MaterialParams) -> bool:
    """Classical single-segment immortality filter: |jL| <= 2*sigma_crit/beta.

    Equality is immortal.  Assumes zero initial thermal stress; for a single
    segment with sigma_T = 0 this is exactly steady-state immortality.
    """
    return abs(jl_product) <= blech_limit(p)


# ----------------------------------------------------------------------------
# Worst-case bounds and PDN current constraints
# ----------------------------------------------------------------------------


@dataclass(frozen=True)
class WorstCaseBounds:
    """Conservative steady-state bounds when only |j| limits are known.

    diff_bound[n] bounds |sigma_n - sigma_datum|; stress_bound[n] bounds
    sigma_n itself, combining the path bound with a mass-conservation bound
    on the datum stress.  Both are attained only when every segment current
    conspires against the node, so they are conservative for real patterns.
    """

    datum: str
    diff_bound: dict[str, float]    # [Pa]
    stress_bound: dict[str, float]  # [Pa]
    conservative: bool = True


def worst_case_bounds(g: InterconnectGraph, p: MaterialParams,
                      j_max: dict[str, float]) -> WorstCaseBounds:
    """Bound steady-state stresses from per-segment current-density limits.

    Each segment contributes |sigma_a - sigma_b| <= beta*j_max*l.  The
    tightest difference bound from this constraint set is the shortest-path
    distance in the segment graph weighted by beta*j_max*l; on a tree that is
    simply the unique path sum.  The absolute bound adds the worst datum
    stress allowed by mass conservation.
    """
    d = derived_params(p)
    node_ids = g.node_ids()
    index = {nid: i for i, nid in enumerate(node_ids)}
    n = len(node_ids)

    rows, cols, vals = [], [], []
    for s in g.segments:
        w = d.beta * abs(j_max[s.id]) * s.length
        ia, ib = index[s.node_a], index[s.node_b]
        rows += [ia, ib]
        cols += [ib, ia]
        vals += [w, w]
    graph = sp.coo_matrix((vals, (rows, cols)), shape=(n, n)).tocsr()
    dist = dijkstra(graph, directed=False, indices=index[g.datum_node])

    diff = {nid: float(dist[index[nid]]) for nid in node_ids}

    # Datum bound: sigma_datum <= sigma_T + volume-weighted mean distance,
    # because every node deviation is at least -dist and the weighted mean
    # deviation from the datum must offset sigma_datum back to sigma_T.
    vol = 0.0
    moment = 0.0
    for s in g.segments:
        v = s.area * s.length
        vol += v
        moment += v * 0.5 * (diff[s.node_a] + diff[s.node_b])
    datum_bound = p.sigma_T + moment / vol

    stress = {nid: datum_bound + diff[nid] for nid in node_ids}
    return WorstCaseBounds(datum=g.datum_node, diff_bound=diff, stress_bound=stress)


@dataclass(frozen=True)
class StressConstraint:
    """Linear constraint sum_i coeff[seg_id]*j_i <= rhs for one node."""

    node_id: str
    coeffs: dict[str, float]  # [Pa per (A/m^2)]
    rhs: float                # [Pa]


def emit_pdn_constraints(g: InterconnectGraph, p: MaterialParams,
                         tree: Optional[SpanningTree] = None
                         ) -> list[StressConstraint]:
    """Linear immortality constraints on segment current densities.

    For a fixed topology the steady-state nodal stress is linear in the
    segment densities; each node yields one inequality keeping its tensile
    stress at or below sigma_crit.  Densities are signed (positive for
    electron flow node_a -> node_b) and must be mutually consistent (i.e.
    realizable by a DC operating point) for the stress model to apply.
    """
    d = derived_params(p)
    if tree is None:
        tree = spanning_tree(g)
    seg_by_id = g.segment_by_id()
    node_ids = g.node_ids()
    seg_ids = [s.id for s in g.segments]
    s_index = {sid: i for i, sid in enumerate(seg_ids)}
    n_index = {nid: i for i, nid in enumerate(node_ids)}

    # Path coefficients: dev[n] = sum_e P[n, e] * j_e
    P = np.zeros((len(node_ids), len(seg_ids)))
    children: dict[str, list[str]] = {}
    for child, (par, _) in tree.parent.items():
        children.setdefault(par, []).append(child)
    frontier = [tree.root]
    while frontier:
        nid = frontier.pop()
        for child in sorted(children.get(nid, [])):
            seg = seg_by_id[tree.parent[child][1]]
            P[n_index[child]] = P[n_index[nid]]
            sign = -1.0 if seg.node_a == nid else 1.0
            P[n_index[child], s_index[seg.id]] += sign * d.beta * seg.length
            frontier.append(child)

    vol = 0.0
    mean_row = np.zeros(len(seg_ids))
    for s in g.segments:
        v = s.area * s.length
        vol += v
        mean_row += v * 0.5 * (P[n_index[s.node_a]] + P[n_index[s.node_b]])
    mean_row /= vol

    rhs = p.sigma_crit - p.sigma_T
    out = []
    for nid in node_ids:
        row = P[n_index[nid]] - mean_row
        coeffs = {sid: float(row[s_index[sid]]) for sid in seg_ids
                  if row[s_index[sid]] != 0.0}
        out.append(StressConstraint(node_id=nid, coeffs=coeffs, rhs=rhs))
    return out


def format_lp(constraints: list[StressConstraint],
              comment: str = "steady-state EM stress limits") -> str:
    """Render constraints in a textual LP-like format for PDN optimizers."""
    lines = [f"\\ {comment}", "\\ variables j_<segment id> in A/m^2; stress in Pa",
             "Subject To"]
    for c in constraints:
        terms = []
        for sid in sorted(c.coeffs):
            coef = c.coeffs[sid]
            op = "-" if coef < 0 else "+"
            terms.append(f"{op} {abs(coef):.17g} j_{sid}")
        if not terms:
            terms = ["+ 0 j_none"]
        joined = " ".join(terms)
        if joined.startswith("+ "):
            joined = joined[2:]
        lines.append(f" stress_{c.node_id}: {joined} <= {c.rhs:.17g}")
    lines.append("End")
    return "\n".join(lines) + "\n"
