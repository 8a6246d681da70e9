"""Core data model: material parameters, interconnect graphs, netlist I/O.

All quantities are stored in SI units internally (m, A, Pa, s, K).  Energies
are in eV where noted, matching common usage for activation energies.  Netlist
files may declare convenience units (um, MA/cm^2, ...) which are converted on
parse; conversion factors are exact powers of ten.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from typing import Optional

# Physical constants (2019 SI exact values).
BOLTZMANN_J = 1.380649e-23        # Boltzmann constant [J/K]
ELEMENTARY_CHARGE = 1.602176634e-19   # elementary charge [C]
BOLTZMANN_EV = BOLTZMANN_J / ELEMENTARY_CHARGE  # [eV/K]
EV_TO_J = ELEMENTARY_CHARGE       # 1 eV in J

# Unit scales accepted in the netlist "units" block.  All exact powers of ten.
LENGTH_SCALES = {
    "m": 1.0,
    "cm": 1e-2,
    "mm": 1e-3,
    "um": 1e-6,
    "µm": 1e-6,
    "nm": 1e-9,
}
DENSITY_SCALES = {
    "A/m^2": 1.0,
    "A/cm^2": 1e4,
    "MA/cm^2": 1e10,
    "A/um^2": 1e12,
    "MA/um^2": 1e18,
}


class NetlistError(ValueError):
    """Raised for malformed or physically inconsistent netlist input."""


@dataclass(frozen=True)
class MaterialParams:
    """Material and stress-model parameters for one metal system.

    Z_eff         effective charge number (dimensionless, magnitude)
    e_charge      electron charge [C]; negative by convention
    rho_el        electrical resistivity [ohm*m]
    omega         atomic volume [m^3]
    bulk_modulus  effective bulk modulus B of the confined line [Pa]
    D0            diffusivity prefactor [m^2/s]
    Ea            activation energy [eV]
    temperature   operating temperature [K]
    sigma_crit    critical tensile stress for void nucleation [Pa]
    var_Ea        variance of Ea across dies [eV^2]
    sigma_T       initial thermal stress, uniform [Pa]
    delta_void    post-void interface parameter delta [m]; required only
                  once a void simulation is requested
    recovery_r    EM recovery factor r for bidirectional current, 0..1
    black_A       Black's-equation prefactor [s * (A/m^2)^n]
    black_n       Black's-equation current exponent
    sigma_ln      lognormal shape parameter of the failure-time distribution
    """

    Z_eff: float
    rho_el: float
    omega: float
    bulk_modulus: float
    D0: float
    Ea: float
    temperature: float
    sigma_crit: float
    e_charge: float = -ELEMENTARY_CHARGE
    var_Ea: float = 0.0
    sigma_T: float = 0.0
    delta_void: Optional[float] = None
    recovery_r: float = 0.0
    black_A: Optional[float] = None
    black_n: Optional[float] = None
    sigma_ln: Optional[float] = None

    def __post_init__(self):
        for name in ("Z_eff", "rho_el", "omega", "bulk_modulus", "D0",
                     "temperature"):
            v = getattr(self, name)
            if not (isinstance(v, (int, float)) and math.isfinite(v) and v > 0):
                raise NetlistError(f"material parameter {name} must be positive, got {v!r}")
        # sigma_crit = inf is legal and disables nucleation entirely
        if not (isinstance(self.sigma_crit, (int, float)) and self.sigma_crit > 0):
            raise NetlistError(
                f"material parameter sigma_crit must be positive, got {self.sigma_crit!r}")
        if self.Ea <= 0:
            raise NetlistError(f"material parameter Ea must be positive, got {self.Ea!r}")
        if self.e_charge >= 0:
            raise NetlistError("e_charge must be negative (electron charge)")
        if self.var_Ea < 0:
            raise NetlistError("var_Ea must be non-negative")
        if not 0.0 <= self.recovery_r <= 1.0:
            raise NetlistError("recovery_r must lie in [0, 1]")
        if self.delta_void is not None and self.delta_void <= 0:
            raise NetlistError("delta_void must be positive when given")


@dataclass(frozen=True)
class DerivedParams:
    """Quantities derived from MaterialParams at the operating temperature."""

    beta: float    # stress-per-(current density * length), beta = Z|e|rho/omega [Pa/(A/m^2 * m)]
    D_a: float     # atomic diffusivity D0*exp(-Ea/kT) [m^2/s]
    kappa: float   # stress diffusivity D_a*B*omega/(kT) [m^2/s]
    kT_ev: float   # thermal energy [eV]
    kT_j: float    # thermal energy [J]


def derived_params(p: MaterialParams) -> DerivedParams:
    """Evaluate the electron-wind coefficient and stress diffusivity.

    beta is stored positive: with electron current density j > 0 flowing from
    node a to node b along a segment, the steady stress gradient is
    d(sigma)/dx = -beta*j, tensile at the electron-entry (cathode) end.
    """
    kT_ev = BOLTZMANN_EV * p.temperature
    kT_j = BOLTZMANN_J * p.temperature
    beta = p.Z_eff * abs(p.e_charge) * p.rho_el / p.omega
    d_a = p.D0 * math.exp(-p.Ea / kT_ev)
    kappa = d_a * p.bulk_modulus * p.omega / kT_j
    return DerivedParams(beta=beta, D_a=d_a, kappa=kappa, kT_ev=kT_ev, kT_j=kT_j)


@dataclass(frozen=True)
class Node:
    """Terminal or junction of an interconnect tree.

    injected_current is the electron current [A] entering the metal at this
    node through a via; positive into the line.
    """

    id: str
    is_terminal: bool = False
    injected_current: float = 0.0


@dataclass(frozen=True)
class Segment:
    """Straight wire segment between two nodes.

    j, when set, is a prescribed electron current density [A/m^2], positive
    when electron flow runs node_a -> node_b.  When None, the density comes
    from the nodal DC solve.
    """

    id: str
    node_a: str
    node_b: str
    length: float     # [m]
    width: float      # [m]
    thickness: float  # [m]
    layer: str = ""
    j: Optional[float] = None

    @property
    def area(self) -> float:
        """Cross-sectional area [m^2]."""
        return self.width * self.thickness

    @property
    def resistance_per_rho(self) -> float:
        """Electrical resistance divided by resistivity, l/(w*h) [1/m]."""
        return self.length / (self.width * self.thickness)


@dataclass(frozen=True)
class WaveformInterval:
    duration: float  # [s]
    density: float   # electron current density [A/m^2], signed


@dataclass(frozen=True)
class CurrentWaveform:
    """Periodic piecewise-constant current-density waveform for one segment."""

    period: float  # [s]
    intervals: tuple[WaveformInterval, ...]

    def __post_init__(self):
        if self.period <= 0:
            raise NetlistError("waveform period must be positive")
        if not self.intervals:
            raise NetlistError("waveform must contain at least one interval")
        total = sum(iv.duration for iv in self.intervals)
        if any(iv.duration <= 0 for iv in self.intervals):
            raise NetlistError("waveform interval durations must be positive")
        if not math.isclose(total, self.period, rel_tol=1e-9, abs_tol=0.0):
            raise NetlistError(
                f"waveform intervals sum to {total!r}, expected period {self.period!r}")


@dataclass(frozen=True)
class InterconnectGraph:
    """Immutable interconnect tree or mesh.

    Nodes and segments are stored sorted by id so that any iteration order
    derived from the graph is deterministic.
    """

    nodes: tuple[Node, ...]
    segments: tuple[Segment, ...]

    def node_ids(self) -> list[str]:
        return [n.id for n in self.nodes]

    def node_by_id(self) -> dict[str, Node]:
        return {n.id: n for n in self.nodes}

    def segment_by_id(self) -> dict[str, Segment]:
        return {s.id: s for s in self.segments}

    def adjacency(self) -> dict[str, list[Segment]]:
        """Node id -> incident segments, in segment-id order."""
        adj: dict[str, list[Segment]] = {n.id: [] for n in self.nodes}
        for s in self.segments:
            adj[s.node_a].append(s)
            adj[s.node_b].append(s)
        return adj

    @property
    def datum_node(self) -> str:
        """Lowest node id; used as the voltage/stress reference."""
        return self.nodes[0].id


@dataclass(frozen=True)
class Netlist:
    """Parsed netlist: graph + material + optional per-segment waveforms."""

    graph: InterconnectGraph
    material: MaterialParams
    waveforms: dict[str, CurrentWaveform] = field(default_factory=dict)


# ----------------------------------------------------------------------------
# Parsing and validation
# ----------------------------------------------------------------------------

_KCL_REL_TOL = 1e-9

_MATERIAL_FIELDS = {
    "Z_eff", "e_charge", "rho_el", "omega", "bulk_modulus", "D0", "Ea",
    "var_Ea", "temperature", "sigma_crit", "sigma_T", "delta_void",
    "recovery_r", "black_A", "black_n", "sigma_ln",
}


def _require(cond: bool, msg: str):
    if not cond:
        raise NetlistError(msg)


def _as_float(x, what: str) -> float:
    if isinstance(x, bool) or not isinstance(x, (int, float)):
        raise NetlistError(f"{what} must be a number, got {x!r}")
    v = float(x)
    if not math.isfinite(v):
        raise NetlistError(f"{what} must be finite, got {x!r}")
    return v


def parse_netlist(text: str) -> Netlist:
    """Parse a JSON netlist document.

    Top-level keys: "material" (required), "nodes" (required), "segments"
    (required), "waveforms" (optional), "units" (optional).
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise NetlistError(f"netlist is not valid JSON: {e}") from e
    return parse_netlist_dict(doc)


def parse_netlist_dict(doc) -> Netlist:
    """Parse an already-deserialized netlist dictionary (same schema)."""
    _require(isinstance(doc, dict), "netlist root must be a JSON object")
    unknown = set(doc) - {"material", "nodes", "segments", "waveforms", "units"}
    _require(not unknown, f"unknown top-level keys: {sorted(unknown)}")
    for key in ("material", "nodes", "segments"):
        _require(key in doc, f"netlist is missing required key '{key}'")

    units = doc.get("units", {})
    _require(isinstance(units, dict), "'units' must be an object")
    len_unit = units.get("length", "m")
    den_unit = units.get("current_density", "A/m^2")
    _require(len_unit in LENGTH_SCALES,
             f"unsupported length unit {len_unit!r}; choose from {sorted(LENGTH_SCALES)}")
    _require(den_unit in DENSITY_SCALES,
             f"unsupported current-density unit {den_unit!r}; "
             f"choose from {sorted(DENSITY_SCALES)}")
    len_scale = LENGTH_SCALES[len_unit]
    den_scale = DENSITY_SCALES[den_unit]

    mat = doc["material"]
    _require(isinstance(mat, dict), "'material' must be an object")
    unknown = set(mat) - _MATERIAL_FIELDS
    _require(not unknown, f"unknown material fields: {sorted(unknown)}")
    try:
        material = MaterialParams(**{k: v for k, v in mat.items()})
    except TypeError as e:
        raise NetlistError(f"material block is incomplete: {e}") from e

    nodes_doc = doc["nodes"]
    _require(isinstance(nodes_doc, list) and nodes_doc, "'nodes' must be a non-empty list")
    nodes: list[Node] = []
    seen_nodes: set[str] = set()
    for nd in nodes_doc:
        _require(isinstance(nd, dict), "each node must be an object")
        _require("id" in nd, "node missing 'id'")
        nid = str(nd["id"])
        _require(nid not in seen_nodes, f"duplicate node id {nid!r}")
        seen_nodes.add(nid)
        extra = set(nd) - {"id", "is_terminal", "injected_current"}
        _require(not extra, f"unknown node fields on {nid!r}: {sorted(extra)}")
        inj = _as_float(nd.get("injected_current", 0.0), f"node {nid} injected_current")
        nodes.append(Node(id=nid, is_terminal=bool(nd.get("is_terminal", False)),
                          injected_current=inj))
    nodes.sort(key=lambda n: n.id)

    segs_doc = doc["segments"]
    _require(isinstance(segs_doc, list) and segs_doc, "'segments' must be a non-empty list")
    segments: list[Segment] = []
    seen_segs: set[str] = set()
    for sd in segs_doc:
        _require(isinstance(sd, dict), "each segment must be an object")
        for key in ("id", "node_a", "node_b", "length", "width", "thickness"):
            _require(key in sd, f"segment missing '{key}'")
        sid = str(sd["id"])
        _require(sid not in seen_segs, f"duplicate segment id {sid!r}")
        seen_segs.add(sid)
        extra = set(sd) - {"id", "node_a", "node_b", "length", "width",
                           "thickness", "layer", "j"}
        _require(not extra, f"unknown segment fields on {sid!r}: {sorted(extra)}")
        a, b = str(sd["node_a"]), str(sd["node_b"])
        _require(a in seen_nodes, f"segment {sid!r} references unknown node {a!r}")
        _require(b in seen_nodes, f"segment {sid!r} references unknown node {b!r}")
        _require(a != b, f"segment {sid!r} connects node {a!r} to itself")
        length = _as_float(sd["length"], f"segment {sid} length") * len_scale
        width = _as_float(sd["width"], f"segment {sid} width") * len_scale
        thickness = _as_float(sd["thickness"], f"segment {sid} thickness") * len_scale
        for name, v in (("length", length), ("width", width), ("thickness", thickness)):
            _require(v > 0, f"segment {sid!r} has non-positive {name}")
        j = sd.get("j")
        if j is not None:
            j = _as_float(j, f"segment {sid} density") * den_scale
        segments.append(Segment(id=sid, node_a=a, node_b=b, length=length,
                                width=width, thickness=thickness,
                                layer=str(sd.get("layer", "")), j=j))
    segments.sort(key=lambda s: s.id)

    graph = InterconnectGraph(nodes=tuple(nodes), segments=tuple(segments))
    _check_connected(graph)
    _check_kcl_closure(graph)

    wf_doc = doc.get("waveforms", {})
    _require(isinstance(wf_doc, dict), "'waveforms' must map segment id -> waveform")
    waveforms: dict[str, CurrentWaveform] = {}
    for sid, w in wf_doc.items():
        sid = str(sid)
        _require(sid in seen_segs, f"waveform references unknown segment {sid!r}")
        _require(isinstance(w, dict), f"waveform for {sid!r} must be an object")
        extra = set(w) - {"period", "intervals"}
        _require(not extra, f"unknown waveform fields on {sid!r}: {sorted(extra)}")
        _require("period" in w and "intervals" in w,
                 f"waveform for {sid!r} needs 'period' and 'intervals'")
        ivs = []
        _require(isinstance(w["intervals"], list), "waveform 'intervals' must be a list")
        for iv in w["intervals"]:
            _require(isinstance(iv, dict) and {"duration", "density"} <= set(iv),
                     f"waveform interval for {sid!r} needs 'duration' and 'density'")
            ivs.append(WaveformInterval(
                duration=_as_float(iv["duration"], "interval duration"),
                density=_as_float(iv["density"], "interval density") * den_scale))
        waveforms[sid] = CurrentWaveform(
            period=_as_float(w["period"], "waveform period"), intervals=tuple(ivs))

    return Netlist(graph=graph, material=material, waveforms=waveforms)


def _check_connected(g: InterconnectGraph):
    adj = g.adjacency()
    seen = {g.nodes[0].id}
    stack = [g.nodes[0].id]
    while stack:
        nid = stack.pop()
        for s in adj[nid]:
            other = s.node_b if s.node_a == nid else s.node_a
            if other not in seen:
                seen.add(other)
                stack.append(other)
    if len(seen) != len(g.nodes):
        missing = sorted(set(g.node_ids()) - seen)
        raise NetlistError(f"graph is disconnected; unreachable nodes: {missing}")


def _check_kcl_closure(g: InterconnectGraph):
    """Injected currents must sum to zero within 1e-9 of the largest magnitude."""
    total = math.fsum(n.injected_current for n in g.nodes)
    scale = max((abs(n.injected_current) for n in g.nodes), default=0.0)
    if scale == 0.0:
        return
    if abs(total) > _KCL_REL_TOL * scale:
        raise NetlistError(
            f"injected currents do not balance: sum = {total:.3e} A "
            f"(largest injection {scale:.3e} A)")


def serialize_netlist(nl: Netlist) -> str:
    """Serialize a netlist back to JSON in SI units.

    A round trip parse(serialize(parse(text))) yields identical objects.
    """
    mat = {
        "Z_eff": nl.material.Z_eff,
        "e_charge": nl.material.e_charge,
        "rho_el": nl.material.rho_el,
        "omega": nl.material.omega,
        "bulk_modulus": nl.material.bulk_modulus,
        "D0": nl.material.D0,
        "Ea": nl.material.Ea,
        "var_Ea": nl.material.var_Ea,
        "temperature": nl.material.temperature,
        "sigma_crit": nl.material.sigma_crit,
        "sigma_T": nl.material.sigma_T,
        "recovery_r": nl.material.recovery_r,
    }
    for key in ("delta_void", "black_A", "black_n", "sigma_ln"):
        v = getattr(nl.material, key)
        if v is not None:
            mat[key] = v
    doc = {
        "units": {"length": "m", "current_density": "A/m^2"},
        "material": mat,
        "nodes": [
            {"id": n.id, "is_terminal": n.is_terminal,
             "injected_current": n.injected_current}
            for n in nl.graph.nodes
        ],
        "segments": [
            {k: v for k, v in (
                ("id", s.id), ("node_a", s.node_a), ("node_b", s.node_b),
                ("length", s.length), ("width", s.width),
                ("thickness", s.thickness), ("layer", s.layer), ("j", s.j))
             if not (k == "j" and v is None) and not (k == "layer" and v == "")}
            for s in nl.graph.segments
        ],
    }
    if nl.waveforms:
        doc["waveforms"] = {
            sid: {"period": w.period,
                  "intervals": [{"duration": iv.duration, "density": iv.density}
                                for iv in w.intervals]}
            for sid, w in sorted(nl.waveforms.items())
        }
    return json.dumps(doc, indent=2, sort_keys=False)


def with_scaled_currents(nl: Netlist, factor: float) -> Netlist:
    """Return a copy with all injections and prescribed densities scaled."""
    nodes = tuple(replace(n, injected_current=n.injected_current * factor)
                  for n in nl.graph.nodes)
    segments = tuple(s if s.j is None else replace(s, j=s.j * factor)
                     for s in nl.graph.segments)
    return Netlist(graph=InterconnectGraph(nodes=nodes, segments=segments),
                   material=nl.material, waveforms=nl.waveforms)
