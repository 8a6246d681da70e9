"""Nodal DC analysis of interconnect graphs.

The electrical problem determines per-segment electron current densities that
drive the stress models.  Sign convention: a segment current is positive when
electron flow runs node_a -> node_b; node injections are electron currents
into the metal (so a positive injection makes that node an electron source,
i.e. a cathode-side terminal with rising tensile stress).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .core import InterconnectGraph, MaterialParams, NetlistError, Segment

_KCL_REL_TOL = 1e-9


@dataclass(frozen=True)
class DcSolution:
    """DC operating point of one interconnect graph.

    node_voltages are electron potentials relative to the datum node (lowest
    id); electron current flows from high to low potential.
    """

    node_voltages: dict[str, float]
    segment_currents: dict[str, float]   # [A], positive node_a -> node_b
    segment_densities: dict[str, float]  # [A/m^2]
    prescribed: bool

    def density(self, seg_id: str) -> float:
        return self.segment_densities[seg_id]


@dataclass(frozen=True)
class SpanningTree:
    """Spanning tree of a graph: tree segment ids plus the chords left out."""

    root: str
    tree_segments: tuple[str, ...]
    chord_segments: tuple[str, ...]
    parent: dict[str, tuple[str, str]]  # node -> (parent node, segment id)


def spanning_tree(g: InterconnectGraph, seed: Optional[int] = None) -> SpanningTree:
    """Build a spanning tree by breadth-first search from the datum node.

    Deterministic: neighbors are visited in (node id, segment id) order with
    lowest-id tie-breaking.  A seed permutes the visit order; any spanning
    tree yields the same steady-state stress, so the seeded variant exists to
    exercise that invariance.
    """
    adj = g.adjacency()
    order = {nid: i for i, nid in enumerate(g.node_ids())}
    rng = np.random.default_rng(seed) if seed is not None else None

    root = g.datum_node
    parent: dict[str, tuple[str, str]] = {}
    tree: list[str] = []
    visited = {root}
    frontier = [root]
    while frontier:
        next_frontier = []
        for nid in frontier:
            edges = sorted(adj[nid], key=lambda s: (s.node_b if s.node_a == nid
                                                    else s.node_a, s.id))
            if rng is not None:
                # parallel edges to the same neighbor: vary which one is taken
                edges = list(edges)
                rng.shuffle(edges)
            for s in edges:
                other = s.node_b if s.node_a == nid else s.node_a
                if other not in visited:
                    visited.add(other)
                    parent[other] = (nid, s.id)
                    tree.append(s.id)
                    next_frontier.append(other)
        frontier = sorted(next_frontier, key=lambda n: order[n])
        if rng is not None:
            # permuting the visit order changes which same-level node
            # captures a shared child, i.e. the tree itself
            rng.shuffle(frontier)
    chords = tuple(s.id for s in g.segments if s.id not in set(tree))
    return SpanningTree(root=root, tree_segments=tuple(tree),
                        chord_segments=chords, parent=parent)


def _segment_current(seg: Segment, va: float, vb: float, rho: float) -> float:
    # electron current a->b through resistance rho*l/(w*h)
    return (va - vb) / (rho * seg.resistance_per_rho)


def solve_dc(g: InterconnectGraph, p: MaterialParams) -> DcSolution:
    """Solve the nodal system for voltages, segment currents and densities.

    Two modes:
      * solved: no segment carries a prescribed density; injections drive a
        resistive nodal solve (datum node grounded).
      * prescribed: every segment carries a prescribed density; voltages are
        reconstructed along a spanning tree and injections are ignored.
    Mixing prescribed and unprescribed segments is an error.
    """
    prescribed = [s for s in g.segments if s.j is not None]
    if prescribed and len(prescribed) != len(g.segments):
        missing = sorted(s.id for s in g.segments if s.j is None)
        raise NetlistError(
            f"segments {missing} lack a prescribed density while others have one; "
            "prescribe all segments or none")

    if prescribed:
        return _solve_prescribed(g, p)
    return _solve_nodal(g, p)


def _solve_nodal(g: InterconnectGraph, p: MaterialParams) -> DcSolution:
    node_ids = g.node_ids()
    index = {nid: i for i, nid in enumerate(node_ids)}
    n = len(node_ids)

    rows, cols, vals = [], [], []
    for s in g.segments:
        ga = 1.0 / (p.rho_el * s.resistance_per_rho)
        ia, ib = index[s.node_a], index[s.node_b]
        rows += [ia, ib, ia, ib]
        cols += [ia, ib, ib, ia]
        vals += [ga, ga, -ga, -ga]
    lap = sp.csr_matrix(sp.coo_matrix((vals, (rows, cols)), shape=(n, n)))

    inj = np.array([g.nodes[i].injected_current for i in range(n)])

    # Ground the datum node (index 0) and solve the reduced SPD system.
    if n == 1:
        volt = np.zeros(1)
    else:
        reduced = lap[1:, 1:].tocsc()
        try:
            sol = spla.splu(reduced).solve(inj[1:])
        except RuntimeError as e:
            raise RuntimeError(f"internal error: singular nodal system ({e})") from e
        if not np.all(np.isfinite(sol)):
            raise RuntimeError("internal error: nodal solve produced non-finite voltages")
        volt = np.concatenate([[0.0], sol])

    voltages = {nid: float(volt[i]) for nid, i in index.items()}
    currents: dict[str, float] = {}
    densities: dict[str, float] = {}
    for s in g.segments:
        cur = _segment_current(s, voltages[s.node_a], voltages[s.node_b], p.rho_el)
        currents[s.id] = cur
        densities[s.id] = cur / s.area

    _verify_kcl(g, currents, inj)
    return DcSolution(node_voltages=voltages, segment_currents=currents,
                      segment_densities=densities, prescribed=False)


def _solve_prescribed(g: InterconnectGraph, p: MaterialParams) -> DcSolution:
    currents = {s.id: s.j * s.area for s in g.segments}
    densities = {s.id: float(s.j) for s in g.segments}

    # Voltages from a tree walk: V_a - V_b = I * R along each tree segment.
    tree = spanning_tree(g)
    seg_by_id = g.segment_by_id()
    voltages = {tree.root: 0.0}
    frontier = [tree.root]
    children: dict[str, list[str]] = {}
    for child, (par, _) in tree.parent.items():
        children.setdefault(par, []).append(child)
    while frontier:
        nid = frontier.pop()
        for child in sorted(children.get(nid, [])):
            seg = seg_by_id[tree.parent[child][1]]
            drop = currents[seg.id] * p.rho_el * seg.resistance_per_rho
            if seg.node_a == nid:
                voltages[child] = voltages[nid] - drop
            else:
                voltages[child] = voltages[nid] + drop
            frontier.append(child)

    return DcSolution(node_voltages=voltages, segment_currents=currents,
                      segment_densities=densities, prescribed=True)


def nodal_flux_sums(g: InterconnectGraph, sol: DcSolution) -> dict[str, float]:
    """Net electron current [A] entering the metal at each node.

    For a solved operating point this reproduces the injections; for a
    prescribed one it exposes any KCL imbalance implied by the densities.
    """
    sums = {n.id: 0.0 for n in g.nodes}
    for s in g.segments:
        cur = sol.segment_currents[s.id]
        sums[s.node_a] += cur   # current leaves node_a into the segment
        sums[s.node_b] -= cur
    return sums


def _verify_kcl(g: InterconnectGraph, currents: dict[str, float], inj: np.ndarray):
    sums = {n.id: 0.0 for n in g.nodes}
    for s in g.segments:
        sums[s.node_a] += currents[s.id]
        sums[s.node_b] -= currents[s.id]
    scale = max(max((abs(c) for c in currents.values()), default=0.0),
                float(np.max(np.abs(inj))) if inj.size else 0.0)
    if scale == 0.0:
        return
    for i, n in enumerate(g.nodes):
        if abs(sums[n.id] - inj[i]) > 1e3 * _KCL_REL_TOL * scale:
            raise RuntimeError(
                f"internal error: KCL violated at node {n.id}: "
                f"{sums[n.id]:.6e} A vs injection {inj[i]:.6e} A")


def kvl_cycle_residuals(g: InterconnectGraph, sol: DcSolution,
                        p: MaterialParams) -> list[float]:
    """Voltage residual around each fundamental cycle (chord + tree path)."""
    tree = spanning_tree(g)
    seg_by_id = g.segment_by_id()
    residuals = []
    for cid in tree.chord_segments:
        seg = seg_by_id[cid]
        va, vb = sol.node_voltages[seg.node_a], sol.node_voltages[seg.node_b]
        drop = sol.segment_currents[cid] * p.rho_el * seg.resistance_per_rho
        residuals.append((va - vb) - drop)
    return residuals
