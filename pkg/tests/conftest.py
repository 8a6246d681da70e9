"""Shared fixtures: reference materials and small graph builders."""

import json

import pytest

from emstress import InterconnectGraph, MaterialParams, Netlist, Node, Segment

# Copper-like damascene parameters used across the suite.  Chosen round so
# frozen oracle literals are easy to audit.
COPPER = dict(
    Z_eff=1.0,
    rho_el=2.5e-8,
    omega=1.18e-29,
    bulk_modulus=1.0e11,
    D0=5.2e-5,
    Ea=0.85,
    temperature=373.0,
    sigma_crit=5.0e8,
    delta_void=1.0e-8,
)


@pytest.fixture
def copper():
    return MaterialParams(**COPPER)


def make_material(**overrides):
    kw = dict(COPPER)
    kw.update(overrides)
    return MaterialParams(**kw)


def single_segment_netlist(material, *, length=20e-6, width=0.1e-6,
                           thickness=0.2e-6, current=None, j=None):
    """One segment a->b.  Current is injected at a and drawn at b, so a
    positive value drives electron flow a->b (tensile at a)."""
    if current is None:
        if j is None:
            j = 2.0e9
        current = j * width * thickness
    nodes = (
        Node("a", is_terminal=True, injected_current=current),
        Node("b", is_terminal=True, injected_current=-current),
    )
    segs = (Segment("s0", "a", "b", length, width, thickness),)
    return Netlist(InterconnectGraph(nodes, segs), material)


def three_terminal_netlist(material, *, j=1.0e9, length=10e-6,
                           width=0.1e-6, thickness=0.2e-6):
    """Two collinear segments L-M-R with density 2j in L-M and j in M-R,
    electrons entering at R and leaving at L.  Injections: +jA at M and R,
    -2jA at L (A = cross-section)."""
    area = width * thickness
    nodes = (
        Node("L", is_terminal=True, injected_current=-2.0 * j * area),
        Node("M", is_terminal=True, injected_current=j * area),
        Node("R", is_terminal=True, injected_current=j * area),
    )
    segs = (
        Segment("sLM", "L", "M", length, width, thickness),
        Segment("sMR", "M", "R", length, width, thickness),
    )
    return Netlist(InterconnectGraph(nodes, segs), material)


def random_tree_netlist(rng, material, n_nodes, *, j_scale=1.5e9,
                        length_range=(5e-6, 40e-6), width_range=(0.05e-6, 0.3e-6)):
    """Random tree with random balanced terminal injections."""
    nodes = []
    segs = []
    inj = rng.normal(scale=j_scale * 2e-14, size=n_nodes)
    inj[0] -= inj.sum()
    for i in range(n_nodes):
        nodes.append(Node(f"n{i}", is_terminal=True, injected_current=float(inj[i])))
    for i in range(1, n_nodes):
        parent = int(rng.integers(0, i))
        length = float(rng.uniform(*length_range))
        width = float(rng.uniform(*width_range))
        thickness = float(rng.uniform(*width_range))
        segs.append(Segment(f"s{i}", f"n{parent}", f"n{i}", length, width, thickness))
    return Netlist(InterconnectGraph(tuple(nodes), tuple(segs)), material)


def grid_mesh_netlist(rng, material, rows, cols, *, j_scale=1.0e9,
                      length=10e-6, width=0.1e-6, thickness=0.2e-6):
    """rows x cols rectangular mesh (contains cycles for KVL exercise)."""
    nodes = []
    segs = []
    n = rows * cols
    inj = rng.normal(scale=j_scale * width * thickness, size=n)
    inj[0] -= inj.sum()
    for r in range(rows):
        for c in range(cols):
            i = r * cols + c
            nodes.append(Node(f"n{r}_{c}", is_terminal=True,
                              injected_current=float(inj[i])))
    k = 0
    for r in range(rows):
        for c in range(cols):
            if c + 1 < cols:
                segs.append(Segment(f"h{k}", f"n{r}_{c}", f"n{r}_{c + 1}",
                                    length, width, thickness))
                k += 1
            if r + 1 < rows:
                segs.append(Segment(f"v{k}", f"n{r}_{c}", f"n{r + 1}_{c}",
                                    length, width, thickness))
                k += 1
    return Netlist(InterconnectGraph(tuple(nodes), tuple(segs)), material)


def netlist_document(material=None, **overrides):
    """A small valid netlist JSON document (dict) for parser tests."""
    doc = {
        "units": {"length": "um", "current_density": "MA/cm^2"},
        "material": {
            "Z_eff": 1.0,
            "rho_el": 2.5e-8,
            "omega": 1.18e-29,
            "bulk_modulus": 1.0e11,
            "D0": 5.2e-5,
            "Ea": 0.85,
            "temperature": 373.0,
            "sigma_crit": 5.0e8,
        },
        "nodes": [
            {"id": "a", "is_terminal": True, "injected_current": 4.0e-5},
            {"id": "b", "is_terminal": True, "injected_current": -4.0e-5},
        ],
        "segments": [
            {"id": "s0", "node_a": "a", "node_b": "b", "length": 20.0,
             "width": 0.1, "thickness": 0.2},
        ],
    }
    if material is not None:
        doc["material"] = material
    doc.update(overrides)
    return doc


def document_text(**overrides):
    return json.dumps(netlist_document(**overrides))
