"""Command-line interface: a thin client of the analysis service.

By default each subcommand talks to an in-process instance of the service
(no network involved); --server redirects the same requests to a remote
deployment.  Exit codes: 0 success, 1 analysis finding (mortal net under
`check --strict`), 2 input or service errors.  All floats are printed with
17 significant digits so repeated runs are byte-identical.
"""

from __future__ import annotations

import argparse
import asyncio
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Optional

import httpx

from . import __version__

_TIMEOUT = 600.0


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def _post(path: str, payload: dict, server: Optional[str]):
    """POST to the service; in-process ASGI transport unless --server is set."""
    if server:
        with httpx.Client(base_url=server, timeout=_TIMEOUT) as client:
            r = client.post(path, json=payload)
            return r.status_code, r.json()

    from .service.app import app

    async def go():
        transport = httpx.ASGITransport(app=app)
        async with httpx.AsyncClient(transport=transport, timeout=_TIMEOUT,
                                     base_url="http://emstress.local") as client:
            r = await client.post(path, json=payload)
            return r.status_code, r.json()

    return asyncio.run(go())


def _detail_str(body) -> str:
    if isinstance(body, dict):
        detail = body.get("detail", body)
    else:
        detail = body
    if isinstance(detail, list):
        parts = []
        for item in detail:
            if isinstance(item, dict):
                loc = ".".join(str(x) for x in item.get("loc", []))
                parts.append(f"{loc}: {item.get('msg', item)}")
            else:
                parts.append(str(item))
        return "; ".join(parts)
    return str(detail)


class CliError(Exception):
    """Input error; maps to exit code 2."""


def _read_netlist_doc(path: str) -> dict:
    try:
        text = Path(path).read_text()
    except OSError as e:
        raise CliError(f"cannot read input file {path}: {e}") from e
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise CliError(f"{path} is not valid JSON: {e}") from e
    if not isinstance(doc, dict):
        raise CliError(f"{path}: netlist root must be a JSON object")
    return doc


def _call(path: str, payload: dict, server: Optional[str]) -> dict:
    try:
        status, body = _post(path, payload, server)
    except httpx.HTTPError as e:
        raise CliError(f"service request failed: {e}") from e
    if status != 200:
        raise CliError(_detail_str(body))
    return body


def _emit(text: str, out_dir: Optional[str], filename: str):
    if out_dir:
        d = Path(out_dir)
        d.mkdir(parents=True, exist_ok=True)
        (d / filename).write_text(text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------
# Subcommand handlers
# ---------------------------------------------------------------------------


def _cmd_dc(args) -> int:
    doc = _read_netlist_doc(args.input)
    body = _call("/dc", {"netlist": doc}, args.server)
    nodes = "node_id,voltage\n" + "".join(
        f"{nid},{_fmt(v)}\n" for nid, v in sorted(body["node_voltages"].items()))
    segs = "segment_id,current,density\n" + "".join(
        f"{row['id']},{_fmt(row['current'])},{_fmt(row['density'])}\n"
        for row in body["segments"])
    if args.out:
        _emit(nodes, args.out, "dc_nodes.csv")
        _emit(segs, args.out, "dc_segments.csv")
    else:
        sys.stdout.write(nodes)
        sys.stdout.write(segs)
    return 0


def _cmd_steady(args) -> int:
    doc = _read_netlist_doc(args.input)
    body = _call("/steady", {"netlist": doc}, args.server)
    csv = "node_id,stress_pa\n" + "".join(
        f"{nid},{_fmt(v)}\n" for nid, v in sorted(body["node_stress"].items()))
    _emit(csv, args.out, "steady.csv")
    if args.check:
        verdict = "immortal" if body["immortal"] else "mortal"
        sys.stdout.write(f"verdict: {verdict}\n")
        sys.stdout.write(f"margin_pa: {_fmt(body['margin'])}\n")
        sys.stdout.write(f"worst_node: {body['max_tensile_node']}\n")
        sys.stdout.write("steady_state_only: true\n")
    return 0


def _cmd_transient(args) -> int:
    doc = _read_netlist_doc(args.input)
    payload = {"netlist": doc, "t_end": args.t_end, "postvoid": args.postvoid,
               "sample_count": args.samples}
    if args.dt is not None:
        payload["dt"] = args.dt
    if args.dx is not None:
        payload["dx"] = args.dx
    body = _call("/transient", payload, args.server)
    lines = ["time_s,node_id,stress_pa\n"]
    for i, t in enumerate(body["times"]):
        for j, nid in enumerate(body["node_ids"]):
            lines.append(f"{_fmt(t)},{nid},{_fmt(body['stress'][i][j])}\n")
    for ev in body["events"]:
        lines.append(f"# EVENT nucleation node={ev['node_id']} "
                     f"t={_fmt(ev['time'])} stress={_fmt(ev['stress'])}\n")
    for flag in body["interior_flags"]:
        lines.append(f"# FLAG interior-crossing {flag}\n")
    _emit("".join(lines), args.out, "transient.csv")
    return 0


def _cmd_variation(args) -> int:
    doc = _read_netlist_doc(args.input)
    try:
        times = [float(t) for t in args.times.split(",") if t.strip()]
    except ValueError as e:
        raise CliError(f"cannot parse --times: {e}") from e
    payload = {"netlist": doc, "times": times, "order": args.order,
               "mc_samples": args.mc_samples, "seed": args.seed}
    body = _call("/variation", payload, args.server)
    lines = ["time_s,node_id,mean_stress_pa,mc_mean_pa,mc_stderr_pa\n"]
    for row in body["rows"]:
        mc_mean = _fmt(row["mc_mean"]) if row["mc_mean"] is not None else ""
        mc_se = _fmt(row["mc_stderr"]) if row["mc_stderr"] is not None else ""
        lines.append(f"{_fmt(row['time'])},{row['node_id']},"
                     f"{_fmt(row['mean_stress'])},{mc_mean},{mc_se}\n")
    _emit("".join(lines), args.out, "variation.csv")
    return 0


def _cmd_acem(args) -> int:
    doc = _read_netlist_doc(args.input)
    body = _call("/acem", {"netlist": doc}, args.server)
    lines = ["segment_id,j_eff_left,j_eff_right\n"]
    for row in body["rows"]:
        lines.append(f"{row['segment_id']},{_fmt(row['j_eff_left'])},"
                     f"{_fmt(row['j_eff_right'])}\n")
    _emit("".join(lines), args.out, "acem.csv")
    return 0


def _cmd_lifetime(args) -> int:
    doc = _read_netlist_doc(args.input)
    payload: dict = {"netlist": doc}
    if args.tf is not None:
        payload["t_f"] = args.tf
    if args.ff is not None:
        payload["ff"] = args.ff
    body = _call("/lifetime", payload, args.server)
    lines = []
    for seg in body["segments"]:
        prefix = f"segment.{seg['id']}"
        lines.append(f"{prefix}.j_a_per_m2={_fmt(seg['j'])}\n")
        lines.append(f"{prefix}.t50_s={_fmt(seg['t50'])}\n")
        if seg.get("t_f") is not None:
            lines.append(f"{prefix}.t_f_s={_fmt(seg['t_f'])}\n")
        if seg.get("ff") is not None:
            lines.append(f"{prefix}.ff={_fmt(seg['ff'])}\n")
    if body.get("chip_failure_probability") is not None:
        lines.append(
            f"chip.failure_probability={_fmt(body['chip_failure_probability'])}\n")
    _emit("".join(lines), args.out, "lifetime.txt")
    return 0


def _cmd_calibrate(args) -> int:
    try:
        text = Path(args.input).read_text()
    except OSError as e:
        raise CliError(f"cannot read input file {args.input}: {e}") from e
    points = []
    for ln, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if ln == 1 and line.lower().replace(" ", "") in (
                "jl,t_life_over_l2", "jl,tlife_over_l2"):
            continue
        parts = line.split(",")
        if len(parts) != 2:
            raise CliError(f"{args.input}:{ln}: expected 'jL,t_life_over_L2'")
        try:
            points.append({"jL": float(parts[0]), "t_life_over_L2": float(parts[1])})
        except ValueError as e:
            raise CliError(f"{args.input}:{ln}: {e}") from e
    body = _call("/calibrate", {"points": points}, args.server)
    out = (f"sigma_over_beta={_fmt(body['sigma_over_beta'])}\n"
           f"kappa_m2_per_s={_fmt(body['kappa'])}\n"
           f"residual_ln={_fmt(body['residual'])}\n"
           f"n_points={body['n_points']}\n")
    _emit(out, args.out, "calibrate.txt")
    return 0


def _cmd_constraints(args) -> int:
    doc = _read_netlist_doc(args.input)
    body = _call("/constraints", {"netlist": doc}, args.server)
    _emit(body["text"], args.out, "constraints.lp")
    return 0


def _cmd_check(args) -> int:
    inputs = args.input
    payloads = []
    for path in inputs:
        doc = _read_netlist_doc(path)
        payload: dict = {"netlist": doc}
        if args.t_end is not None:
            payload["t_end"] = args.t_end
        payloads.append((path, payload))

    def one(item):
        path, payload = item
        return path, _call("/check", payload, args.server)

    if args.threads > 1 and len(payloads) > 1:
        with ThreadPoolExecutor(max_workers=args.threads) as pool:
            results = list(pool.map(one, payloads))
    else:
        results = [one(item) for item in payloads]

    any_mortal = False
    lines = []
    for path, body in results:
        lines.append(f"{path}: {body['verdict']}\n")
        if body.get("nucleation_time") is not None:
            lines.append(f"{path}: nucleation node={body['nucleation_node']} "
                         f"t={_fmt(body['nucleation_time'])}\n")
        any_mortal = any_mortal or body["mortal"]
    text = "".join(lines)
    if args.out:
        _emit(text, args.out, "check.txt")
    else:
        sys.stdout.write(text)
    if args.strict and any_mortal:
        return 1
    return 0


def _cmd_serve(args) -> int:
    import uvicorn

    from .service.app import app

    uvicorn.run(app, host=args.host, port=args.port)
    return 0


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------


def _common(sub: argparse.ArgumentParser, input_required: bool = True,
            input_multi: bool = False):
    if input_multi:
        sub.add_argument("--input", action="append", required=True,
                         metavar="FILE", help="netlist file (repeatable)")
    else:
        sub.add_argument("--input", required=input_required, metavar="FILE",
                         help="input file")
    sub.add_argument("--out", metavar="DIR", help="output directory (default stdout)")
    sub.add_argument("--seed", type=int, default=0, help="RNG seed")
    sub.add_argument("--threads", type=int, default=1, help="worker threads")
    sub.add_argument("--format", choices=["csv"], default="csv",
                     help="tabular output format")
    sub.add_argument("--server", metavar="URL",
                     help="remote service URL (default: in-process)")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="emstress",
        description="Electromigration stress and lifetime analysis")
    ap.add_argument("--version", action="version",
                    version=f"%(prog)s {__version__}")
    subs = ap.add_subparsers(dest="command", required=True)

    s = subs.add_parser("check", help="screen netlists for EM mortality")
    _common(s, input_multi=True)
    s.add_argument("--strict", action="store_true",
                   help="exit 1 when any net is mortal")
    s.add_argument("--t-end", type=float, dest="t_end",
                   help="transient horizon [s]")
    s.set_defaults(func=_cmd_check)

    s = subs.add_parser("dc", help="DC operating point")
    _common(s)
    s.set_defaults(func=_cmd_dc)

    s = subs.add_parser("steady", help="steady-state stress profile")
    _common(s)
    s.add_argument("--check", action="store_true",
                   help="print the immortality verdict and margin")
    s.set_defaults(func=_cmd_steady)

    s = subs.add_parser("transient", help="transient stress history")
    _common(s)
    s.add_argument("--t-end", type=float, dest="t_end", required=True,
                   help="simulation end time [s]")
    s.add_argument("--dt", type=float, help="fixed time step [s]")
    s.add_argument("--dx", type=float, help="target element size [m]")
    s.add_argument("--samples", type=int, default=50,
                   help="number of sampled output times")
    s.add_argument("--postvoid", action="store_true",
                   help="switch to the absorbing interface after nucleation")
    s.set_defaults(func=_cmd_transient)

    s = subs.add_parser("variation", help="mean stress under Ea variation")
    _common(s)
    s.add_argument("--times", required=True,
                   help="comma-separated output times [s]")
    s.add_argument("--order", type=int, default=8, help="moment order")
    s.add_argument("--mc-samples", type=int, default=0, dest="mc_samples",
                   help="Monte Carlo sample count (0 disables)")
    s.set_defaults(func=_cmd_variation)

    s = subs.add_parser("acem", help="effective DC densities from waveforms")
    _common(s)
    s.set_defaults(func=_cmd_acem)

    s = subs.add_parser("lifetime", help="per-segment Black lifetimes")
    _common(s)
    s.add_argument("--tf", type=float, help="evaluate failure fractions at t_f [s]")
    s.add_argument("--ff", type=float, help="report t_f at this failure fraction")
    s.set_defaults(func=_cmd_lifetime)

    s = subs.add_parser("calibrate", help="fit the jL-vs-lifetime curve")
    _common(s)
    s.set_defaults(func=_cmd_calibrate)

    s = subs.add_parser("constraints", help="emit PDN stress constraints")
    _common(s)
    s.set_defaults(func=_cmd_constraints)

    s = subs.add_parser("serve", help="run the HTTP service")
    s.add_argument("--host", default="127.0.0.1")
    s.add_argument("--port", type=int, default=8000)
    s.set_defaults(func=_cmd_serve)

    return ap


def main(argv: Optional[list[str]] = None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.func(args)
    except CliError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except BrokenPipeError:
        return 0


if __name__ == "__main__":
    sys.exit(main())
