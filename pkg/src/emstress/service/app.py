"""FastAPI application exposing the analysis engines.

Every endpoint takes a JSON body whose `netlist` field follows the netlist
file schema exactly, so clients can forward files untouched.  Input problems
surface as 422 (netlist semantics) or 400 (bad analysis parameters);
verdicts and numbers come back as plain JSON.
"""

from __future__ import annotations

import math

import numpy as np
from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .. import __version__
from ..core import Netlist, NetlistError, parse_netlist_dict
from ..dc import solve_dc
from ..steady import (
    emit_pdn_constraints, format_lp, immortality_check, steady_state,
)
from ..transient import discretize, nucleation_and_postvoid
from ..variation import mc_time_grid, mean_stress_shift, monte_carlo_oracle
from ..acem import effective_densities
from ..reliability import (
    black_mttf, ff_to_z, fit_jl_curve, tf_to_ff, translate_condition,
    weakest_link, z_to_tf,
)
from ..pipeline import run_check
from ..transient import step_transient
from . import schemas as sc


def create_app() -> FastAPI:
    app = FastAPI(title="emstress", version=__version__,
                  description="Electromigration stress and lifetime analysis")

    @app.exception_handler(NetlistError)
    async def netlist_error(request: Request, exc: NetlistError):
        return JSONResponse(status_code=422, content={"detail": str(exc)})

    @app.exception_handler(ValueError)
    async def value_error(request: Request, exc: ValueError):
        return JSONResponse(status_code=400, content={"detail": str(exc)})

    @app.get("/health", response_model=sc.HealthResponse)
    async def health():
        return sc.HealthResponse(status="ok", version=__version__)

    @app.post("/dc", response_model=sc.DcResponse)
    async def dc_endpoint(req: sc.NetlistRequest):
        nl = _parse(req.netlist)
        sol = solve_dc(nl.graph, nl.material)
        return sc.DcResponse(
            node_voltages={k: float(v) for k, v in sol.node_voltages.items()},
            segments=[sc.SegmentDcSchema(id=s.id,
                                         current=float(sol.segment_currents[s.id]),
                                         density=float(sol.segment_densities[s.id]))
                      for s in nl.graph.segments],
            prescribed=sol.prescribed)

    @app.post("/steady", response_model=sc.SteadyResponse)
    async def steady_endpoint(req: sc.NetlistRequest):
        nl = _parse(req.netlist)
        sol = solve_dc(nl.graph, nl.material)
        prof = steady_state(nl.graph, sol, nl.material)
        verdict = immortality_check(prof, nl.material)
        return sc.SteadyResponse(
            node_stress={k: float(v) for k, v in prof.node_stress.items()},
            max_tensile_node=prof.max_tensile[0],
            max_tensile=float(prof.max_tensile[1]),
            min_compressive_node=prof.min_compressive[0],
            min_compressive=float(prof.min_compressive[1]),
            immortal=verdict.immortal,
            margin=float(verdict.margin),
            steady_state_only=verdict.steady_state_only)

    @app.post("/transient", response_model=sc.TransientResponse)
    async def transient_endpoint(req: sc.TransientRequest):
        nl = _parse(req.netlist)
        sol = solve_dc(nl.graph, nl.material)
        sys = discretize(nl.graph, sol, nl.material, dx_target=req.dx)
        samples = _sample_times(req.t_end, req.sample_count)
        trace = nucleation_and_postvoid(
            sys, nl.material, req.t_end, dt=req.dt,
            sample_times=samples, switch_bc=req.postvoid,
            interface_scale=req.interface_scale)
        n_graph = sys.graph_count
        rows = [[float(nl.material.sigma_T)] * n_graph]
        times = [0.0]
        for i, t in enumerate(trace.times):
            if t == 0.0:
                rows[0] = [float(x) for x in trace.stress[i, :n_graph]]
                continue
            times.append(float(t))
            rows.append([float(x) for x in trace.stress[i, :n_graph]])
        return sc.TransientResponse(
            times=times,
            node_ids=list(sys.node_ids),
            stress=rows,
            events=[sc.EventSchema(node_id=e.node_id, time=float(e.time),
                                   stress=float(e.stress))
                    for e in trace.events],
            interior_flags=[f"{desc} t={t:.17g} stress={s:.17g}"
                            for desc, t, s in trace.interior_crossings],
            max_tensile=float(trace.max_tensile),
            max_tensile_time=float(trace.max_tensile_time))

    @app.post("/variation", response_model=sc.VariationResponse)
    async def variation_endpoint(req: sc.VariationRequest):
        nl = _parse(req.netlist)
        times = sorted(set(float(t) for t in req.times))
        if not times or times[-1] <= 0:
            raise ValueError("variation needs at least one positive time")
        sol = solve_dc(nl.graph, nl.material)
        sys = discretize(nl.graph, sol, nl.material, dx_target=req.dx)

        # common step grid for the nominal trace and the Monte Carlo runs
        t_arr = np.asarray(times)
        grid = mc_time_grid(t_arr)
        trace = step_transient(sys, nl.material, float(t_arr[-1]),
                               step_times=grid,
                               sample_times=[t for t in times if t > 0])
        n_graph = sys.graph_count
        nominal = np.empty((len(times), n_graph))
        k = 0
        for i, t in enumerate(times):
            if t == 0.0:
                nominal[i] = nl.material.sigma_T
            else:
                nominal[i] = trace.stress[k, :n_graph]
                k += 1
        shift = mean_stress_shift(sys, nl.material, times, order=req.order,
                                  nominal_trace=nominal)

        mc = None
        if req.mc_samples:
            mc = monte_carlo_oracle(nl.graph, nl.material, req.mc_samples,
                                    req.seed, times, dx_target=req.dx)
        rows = []
        for i, t in enumerate(times):
            for j, nid in enumerate(sys.node_ids):
                rows.append(sc.VariationRow(
                    time=float(t), node_id=nid,
                    mean_stress=float(shift["mean"][i, j]),
                    mc_mean=float(mc.mean[i, j]) if mc else None,
                    mc_stderr=float(mc.stderr[i, j]) if mc else None))
        return sc.VariationResponse(rows=rows, lam=float(shift["lambda"]))

    @app.post("/acem", response_model=sc.AcemResponse)
    async def acem_endpoint(req: sc.NetlistRequest):
        nl = _parse(req.netlist)
        if not nl.waveforms:
            raise ValueError("netlist has no waveforms to average")
        rows = []
        for sid in sorted(nl.waveforms):
            eff = effective_densities(nl.waveforms[sid], nl.material)
            rows.append(sc.AcemRow(
                segment_id=sid,
                j_avg_pos=eff.j_avg_pos, j_avg_neg=eff.j_avg_neg,
                j_eff_left=eff.j_eff_left, j_eff_right=eff.j_eff_right,
                j_eff_left_raw=eff.j_eff_left_raw,
                j_eff_right_raw=eff.j_eff_right_raw))
        return sc.AcemResponse(rows=rows)

    @app.post("/lifetime", response_model=sc.LifetimeResponse)
    async def lifetime_endpoint(req: sc.LifetimeRequest):
        nl = _parse(req.netlist)
        if req.t_f is not None and req.ff is not None:
            raise ValueError("give either t_f or ff, not both")
        p = nl.material
        sol = solve_dc(nl.graph, p)
        segs = []
        fractions = []
        for s in nl.graph.segments:
            j = abs(sol.segment_densities[s.id])
            if j == 0.0:
                continue
            t50 = black_mttf(j, p)
            entry = sc.SegmentLifetimeSchema(id=s.id, j=j, t50=t50)
            if req.ff is not None:
                if p.sigma_ln is None:
                    raise ValueError("sigma_ln must be set to map fractions to times")
                entry.t_f = z_to_tf(ff_to_z(req.ff), t50, p.sigma_ln)
            if req.t_f is not None:
                if p.sigma_ln is None:
                    raise ValueError("sigma_ln must be set to map times to fractions")
                entry.ff = tf_to_ff(req.t_f, t50, p.sigma_ln)
                fractions.append(entry.ff)
            segs.append(entry)
        chip = weakest_link(fractions) if fractions else None
        return sc.LifetimeResponse(segments=segs, chip_failure_probability=chip)

    @app.post("/translate", response_model=sc.TranslateResponse)
    async def translate_endpoint(req: sc.TranslateRequest):
        nl = _parse(req.netlist)
        t_f_b = translate_condition(req.t_f_a, req.j_a, req.temp_a,
                                    req.j_b, req.temp_b, nl.material)
        return sc.TranslateResponse(t_f_b=t_f_b)

    @app.post("/calibrate", response_model=sc.CalibrateResponse)
    async def calibrate_endpoint(req: sc.CalibrateRequest):
        fit = fit_jl_curve([pt.jL for pt in req.points],
                           [pt.t_life_over_L2 for pt in req.points])
        return sc.CalibrateResponse(
            sigma_over_beta=fit.sigma_over_beta, kappa=fit.kappa,
            residual=fit.residual, n_points=fit.n_points)

    @app.post("/constraints", response_model=sc.ConstraintsResponse)
    async def constraints_endpoint(req: sc.NetlistRequest):
        nl = _parse(req.netlist)
        cons = emit_pdn_constraints(nl.graph, nl.material)
        return sc.ConstraintsResponse(text=format_lp(cons), n_constraints=len(cons))

    @app.post("/check", response_model=sc.CheckResponse)
    async def check_endpoint(req: sc.CheckRequest):
        nl = _parse(req.netlist)
        res = run_check(nl, t_end=req.t_end, dx_target=req.dx)
        return sc.CheckResponse(
            verdict=res.verdict, mortal=res.mortal, stage=res.stage,
            steady_max=res.steady_max, margin=res.margin,
            nucleation_time=res.nucleation_time,
            nucleation_node=res.nucleation_node)

    return app


def _parse(netlist: sc.NetlistSchema) -> Netlist:
    return parse_netlist_dict(netlist.to_document())


def _sample_times(t_end: float, count: int) -> list[float]:
    """Geometric sampling over three decades up to t_end."""
    if t_end <= 0:
        raise ValueError("t_end must be positive")
    lo = t_end * 1e-3
    return [float(t) for t in np.geomspace(lo, t_end, count)]


app = create_app()
