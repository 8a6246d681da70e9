"""HTTP service endpoints, exercised in process."""

import math

import numpy as np
import pytest
from fastapi.testclient import TestClient

from emstress import __version__, derived_params, jl_from_lifetime, weakest_link
from emstress.service.app import create_app

from conftest import make_material, netlist_document

BETA = 339.44420211864406  # beta for the reference copper parameters
J0 = 2e9                   # density implied by the document's injections
L0 = 20e-6


@pytest.fixture(scope="module")
def client():
    return TestClient(create_app())


def _mat(**over):
    doc = netlist_document()
    doc["material"].update(over)
    return doc


def test_health(client):
    r = client.get("/health")
    assert r.status_code == 200
    body = r.json()
    assert body["status"] == "ok"
    assert body["version"] == __version__


def test_dc_endpoint(client):
    r = client.post("/dc", json={"netlist": netlist_document()})
    assert r.status_code == 200
    body = r.json()
    assert body["prescribed"] is False
    seg = body["segments"][0]
    assert seg["id"] == "s0"
    assert seg["current"] == pytest.approx(4.0e-5, rel=1e-12)
    assert seg["density"] == pytest.approx(J0, rel=1e-9)
    v = body["node_voltages"]
    assert v["a"] > v["b"]


def test_steady_endpoint(client):
    r = client.post("/steady", json={"netlist": netlist_document()})
    assert r.status_code == 200
    body = r.json()
    half = BETA * J0 * L0 / 2
    assert body["node_stress"]["a"] == pytest.approx(half, rel=1e-9)
    assert body["node_stress"]["b"] == pytest.approx(-half, rel=1e-9)
    assert body["max_tensile_node"] == "a"
    assert body["min_compressive_node"] == "b"
    assert body["immortal"] is True
    assert body["margin"] == pytest.approx(5e8 - half, rel=1e-9)
    assert body["steady_state_only"] is True


def test_transient_endpoint_starts_at_zero(client):
    d = derived_params(make_material())
    t_end = L0 ** 2 / d.kappa
    r = client.post("/transient", json={
        "netlist": netlist_document(), "t_end": t_end, "sample_count": 20})
    assert r.status_code == 200
    body = r.json()
    assert body["times"][0] == 0.0
    assert len(body["times"]) == len(body["stress"]) == 21
    assert body["node_ids"] == ["a", "b"]
    assert body["stress"][0] == [0.0, 0.0]
    col_a = [row[0] for row in body["stress"]]
    assert all(b >= a - 1e-6 for a, b in zip(col_a, col_a[1:]))
    assert body["events"] == [] and body["interior_flags"] == []
    assert body["max_tensile"] == pytest.approx(col_a[-1], rel=1e-12)


def test_transient_endpoint_reports_events(client):
    doc = _mat(sigma_crit=0.5 * BETA * J0 * L0 / 2, delta_void=1e-8)
    d = derived_params(make_material())
    t_end = 3 * L0 ** 2 / d.kappa
    r = client.post("/transient", json={
        "netlist": doc, "t_end": t_end, "postvoid": True})
    assert r.status_code == 200
    body = r.json()
    assert len(body["events"]) == 1
    ev = body["events"][0]
    assert ev["node_id"] == "a"
    assert 0 < ev["time"] < t_end
    assert ev["stress"] == pytest.approx(0.5 * BETA * J0 * L0 / 2, rel=1e-12)


def test_transient_bad_params(client):
    r = client.post("/transient", json={
        "netlist": netlist_document(), "t_end": -1.0})
    assert r.status_code == 400
    r = client.post("/transient", json={
        "netlist": netlist_document(), "t_end": 1.0, "dx": 1.0})
    assert r.status_code == 400
    assert "detail" in r.json()


def test_variation_endpoint(client):
    doc = _mat(var_Ea=4e-6)
    d = derived_params(make_material())
    tau = L0 ** 2 / d.kappa
    times = [0.1 * tau, 0.5 * tau]
    r = client.post("/variation", json={
        "netlist": doc, "times": times, "mc_samples": 8, "seed": 3})
    assert r.status_code == 200
    body = r.json()
    assert body["lam"] == pytest.approx(0.0019377019730274054, rel=1e-12)
    assert len(body["rows"]) == 4  # 2 times x 2 nodes
    for row in body["rows"]:
        assert row["mc_mean"] is not None and row["mc_stderr"] is not None
        if row["node_id"] == "a":
            assert row["mean_stress"] > 0


def test_variation_no_mc_and_validation(client):
    r = client.post("/variation", json={
        "netlist": netlist_document(), "times": [1.0]})
    assert r.status_code == 200
    assert all(row["mc_mean"] is None for row in r.json()["rows"])
    r = client.post("/variation", json={
        "netlist": netlist_document(), "times": [0.0]})
    assert r.status_code == 400


def test_acem_endpoint(client):
    doc = netlist_document(waveforms={
        "s0": {"period": 2.0,
               "intervals": [{"duration": 1.0, "density": 100.0},
                             {"duration": 1.0, "density": -100.0}]}})
    doc["material"]["recovery_r"] = 0.5
    r = client.post("/acem", json={"netlist": doc})
    assert r.status_code == 200
    rows = r.json()["rows"]
    assert len(rows) == 1
    row = rows[0]
    # 100 MA/cm^2 = 1e12 A/m^2; symmetric square wave averages to half
    assert row["j_avg_pos"] == pytest.approx(5e11, rel=1e-12)
    assert row["j_eff_left"] == pytest.approx(5e11 * 0.5, rel=1e-12)
    assert row["j_eff_left"] == row["j_eff_right"]


def test_acem_requires_waveforms(client):
    r = client.post("/acem", json={"netlist": netlist_document()})
    assert r.status_code == 400


def test_lifetime_endpoint(client):
    doc = _mat(black_A=3.0e-2, black_n=2.0, sigma_ln=0.3)
    r = client.post("/lifetime", json={"netlist": doc, "ff": 0.5})
    assert r.status_code == 200
    seg = r.json()["segments"][0]
    assert seg["t_f"] == pytest.approx(seg["t50"], rel=1e-12)
    assert r.json()["chip_failure_probability"] is None

    t_half = seg["t50"]
    r2 = client.post("/lifetime", json={"netlist": doc, "t_f": t_half})
    body = r2.json()
    assert body["segments"][0]["ff"] == pytest.approx(0.5, rel=1e-9)
    assert body["chip_failure_probability"] == pytest.approx(
        weakest_link([0.5]), rel=1e-12)

    r3 = client.post("/lifetime", json={"netlist": doc, "ff": 0.5, "t_f": 1.0})
    assert r3.status_code == 400
    r4 = client.post("/lifetime",
                     json={"netlist": _mat(black_A=3.0e-2, black_n=2.0),
                           "ff": 0.5})
    assert r4.status_code == 400  # sigma_ln missing


def test_translate_endpoint(client):
    doc = _mat(black_A=3.0e-2, black_n=2.0)
    r = client.post("/translate", json={
        "netlist": doc, "t_f_a": 1e8, "j_a": 2e9, "temp_a": 373.0,
        "j_b": 1e9, "temp_b": 373.0})
    assert r.status_code == 200
    assert r.json()["t_f_b"] == pytest.approx(4e8, rel=1e-12)


def test_calibrate_endpoint(client):
    s_true, k_true = 4.41e3, 3.9e-14
    t = np.logspace(11.0, 14.5, 10)
    jl = np.asarray(jl_from_lifetime(t, s_true, k_true))
    pts = [{"jL": float(a), "t_life_over_L2": float(b)}
           for a, b in zip(jl, t)]
    r = client.post("/calibrate", json={"points": pts})
    assert r.status_code == 200
    body = r.json()
    assert body["sigma_over_beta"] == pytest.approx(s_true, rel=1e-6)
    assert body["kappa"] == pytest.approx(k_true, rel=1e-6)
    assert body["n_points"] == 10

    r2 = client.post("/calibrate", json={"points": pts[:2]})
    assert r2.status_code == 400


def test_constraints_endpoint(client):
    r = client.post("/constraints", json={"netlist": netlist_document()})
    assert r.status_code == 200
    body = r.json()
    assert body["n_constraints"] == 2
    assert "Subject To" in body["text"]
    assert "stress_a" in body["text"]


def test_check_endpoint(client):
    # jL sits far below 2*sigma_crit/beta, so the first filter decides
    r = client.post("/check", json={"netlist": netlist_document()})
    assert r.status_code == 200
    body = r.json()
    assert body["verdict"] == "immortal (blech)"
    assert body["mortal"] is False
    assert body["stage"] == "blech"


def test_semantic_errors_are_422(client):
    doc = netlist_document()
    doc["nodes"][0]["injected_current"] = 1e-5  # KCL broken
    r = client.post("/check", json={"netlist": doc})
    assert r.status_code == 422
    assert "balance" in r.json()["detail"]

    doc2 = netlist_document()
    doc2["segments"][0]["node_b"] = "zz"
    r2 = client.post("/dc", json={"netlist": doc2})
    assert r2.status_code == 422


def test_shape_errors_are_422(client):
    doc = netlist_document()
    doc["flavor"] = "salty"  # unknown top-level key
    r = client.post("/steady", json={"netlist": doc})
    assert r.status_code == 422

    doc2 = netlist_document()
    del doc2["material"]["Ea"]
    r2 = client.post("/steady", json={"netlist": doc2})
    assert r2.status_code == 422


def test_check_deterministic(client):
    a = client.post("/check", json={"netlist": netlist_document()}).json()
    b = client.post("/check", json={"netlist": netlist_document()}).json()
    assert a == b
