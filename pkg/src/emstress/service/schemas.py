"""Request/response models for the analysis service.

The netlist schema mirrors the JSON file format one to one, so a netlist
file can be posted as the `netlist` field of any request without rewriting.
Semantic validation (connectivity, KCL closure, geometry) happens in the
core parser; these models only pin the shape and types.
"""

from __future__ import annotations

from typing import Optional

from pydantic import BaseModel, ConfigDict, Field


class NodeSchema(BaseModel):
    model_config = ConfigDict(extra="forbid")

    id: str | int
    is_terminal: bool = False
    injected_current: float = 0.0


class SegmentSchema(BaseModel):
    model_config = ConfigDict(extra="forbid")

    id: str | int
    node_a: str | int
    node_b: str | int
    length: float
    width: float
    thickness: float
    layer: str = ""
    j: Optional[float] = None


class MaterialSchema(BaseModel):
    model_config = ConfigDict(extra="forbid")

    Z_eff: float
    rho_el: float
    omega: float
    bulk_modulus: float
    D0: float
    Ea: float
    temperature: float
    sigma_crit: float
    e_charge: Optional[float] = None
    var_Ea: float = 0.0
    sigma_T: float = 0.0
    delta_void: Optional[float] = None
    recovery_r: float = 0.0
    black_A: Optional[float] = None
    black_n: Optional[float] = None
    sigma_ln: Optional[float] = None


class WaveformIntervalSchema(BaseModel):
    model_config = ConfigDict(extra="forbid")

    duration: float
    density: float


class WaveformSchema(BaseModel):
    model_config = ConfigDict(extra="forbid")

    period: float
    intervals: list[WaveformIntervalSchema]


class UnitsSchema(BaseModel):
    model_config = ConfigDict(extra="forbid")

    length: str = "m"
    current_density: str = "A/m^2"


class NetlistSchema(BaseModel):
    model_config = ConfigDict(extra="forbid")

    material: MaterialSchema
    nodes: list[NodeSchema]
    segments: list[SegmentSchema]
    waveforms: dict[str, WaveformSchema] = Field(default_factory=dict)
    units: Optional[UnitsSchema] = None

    def to_document(self) -> dict:
        """Plain dict in the netlist file schema, None fields dropped."""
        doc = self.model_dump(exclude_none=True)
        if not doc.get("waveforms"):
            doc.pop("waveforms", None)
        return doc


# ---------------------------------------------------------------------------
# Requests
# ---------------------------------------------------------------------------


class NetlistRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    netlist: NetlistSchema


class TransientRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    netlist: NetlistSchema
    t_end: float
    dt: Optional[float] = None
    dx: Optional[float] = None
    sample_count: int = Field(default=50, ge=2, le=100000)
    postvoid: bool = False
    interface_scale: str = "delta"


class VariationRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    netlist: NetlistSchema
    times: list[float]
    order: int = Field(default=8, ge=2, le=16)
    mc_samples: int = Field(default=0, ge=0)
    seed: int = 0
    dx: Optional[float] = None


class LifetimeRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    netlist: NetlistSchema
    t_f: Optional[float] = None   # evaluate fractions at this time [s]
    ff: Optional[float] = None    # or report t_f at this fraction


class TranslateRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    netlist: NetlistSchema        # provides Ea and black_n
    t_f_a: float
    j_a: float
    temp_a: float
    j_b: float
    temp_b: float


class CalibrationPoint(BaseModel):
    model_config = ConfigDict(extra="forbid")

    jL: float
    t_life_over_L2: float


class CalibrateRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    points: list[CalibrationPoint]


class CheckRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    netlist: NetlistSchema
    t_end: Optional[float] = None
    dx: Optional[float] = None


# ---------------------------------------------------------------------------
# Responses
# ---------------------------------------------------------------------------


class HealthResponse(BaseModel):
    status: str
    version: str


class SegmentDcSchema(BaseModel):
    id: str
    current: float   # [A]
    density: float   # [A/m^2]


class DcResponse(BaseModel):
    node_voltages: dict[str, float]
    segments: list[SegmentDcSchema]
    prescribed: bool


class SteadyResponse(BaseModel):
    node_stress: dict[str, float]
    max_tensile_node: str
    max_tensile: float
    min_compressive_node: str
    min_compressive: float
    immortal: bool
    margin: float
    steady_state_only: bool


class EventSchema(BaseModel):
    node_id: str
    time: float
    stress: float


class TransientResponse(BaseModel):
    times: list[float]
    node_ids: list[str]
    stress: list[list[float]]        # [time][node]
    events: list[EventSchema]
    interior_flags: list[str]
    max_tensile: float
    max_tensile_time: float


class VariationRow(BaseModel):
    time: float
    node_id: str
    mean_stress: float
    mc_mean: Optional[float] = None
    mc_stderr: Optional[float] = None


class VariationResponse(BaseModel):
    rows: list[VariationRow]
    lam: float


class AcemRow(BaseModel):
    segment_id: str
    j_avg_pos: float
    j_avg_neg: float
    j_eff_left: float
    j_eff_right: float
    j_eff_left_raw: float
    j_eff_right_raw: float


class AcemResponse(BaseModel):
    rows: list[AcemRow]


class SegmentLifetimeSchema(BaseModel):
    id: str
    j: float
    t50: float
    ff: Optional[float] = None
    t_f: Optional[float] = None


class LifetimeResponse(BaseModel):
    segments: list[SegmentLifetimeSchema]
    chip_failure_probability: Optional[float] = None


class TranslateResponse(BaseModel):
    t_f_b: float


class CalibrateResponse(BaseModel):
    sigma_over_beta: float
    kappa: float
    residual: float
    n_points: int


class CheckResponse(BaseModel):
    verdict: str
    mortal: bool
    stage: str
    steady_max: Optional[float] = None
    margin: Optional[float] = None
    nucleation_time: Optional[float] = None
    nucleation_node: Optional[str] = None


class ConstraintsResponse(BaseModel):
    text: str
    n_constraints: int
