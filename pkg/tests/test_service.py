"""HTTP surface tests for the detection service."""

import base64

import numpy as np
import pytest
from fastapi.testclient import TestClient

from evocircles import Circle, netpbm
from evocircles.edges import edge_map_from_bytes
from evocircles.service.app import create_app

from conftest import edge_map_from_circles


@pytest.fixture(scope="module")
def client():
    with TestClient(create_app()) as c:
        yield c


def b64(data: bytes) -> str:
    return base64.b64encode(data).decode()


def disk_image_b64() -> str:
    yy, xx = np.mgrid[0:120, 0:120]
    disk = ((xx - 60) ** 2 + (yy - 60) ** 2 <= 40 * 40)
    return b64(netpbm.encode_gray(np.where(disk, 255, 0).astype(np.uint8)))


def circle_edges_b64(circles=(Circle(100, 100, 40),), size=(200, 200)) -> str:
    edges = edge_map_from_circles(list(circles), *size)
    return b64(netpbm.encode_bitmap(edges.mask))


def test_health(client):
    body = client.get("/health").json()
    assert body["status"] == "ok"


def test_edges_endpoint_extracts_contour(client):
    resp = client.post("/edges", json={"image_b64": disk_image_b64()})
    assert resp.status_code == 200
    body = resp.json()
    edges = edge_map_from_bytes(base64.b64decode(body["edge_map_b64"]))
    assert body["num_points"] == edges.num_points > 100
    dist = np.hypot(edges.points[:, 0] - 60, edges.points[:, 1] - 60)
    assert np.abs(dist - 40).max() <= 2.0


def test_edges_rejects_bad_base64(client):
    resp = client.post("/edges", json={"image_b64": "!!!not-base64!!!"})
    assert resp.status_code == 400
    assert resp.json()["detail"]["code"] == "bad_input"


def test_edges_rejects_wrong_format(client):
    resp = client.post("/edges", json={"image_b64": b64(b"GIF89a....")})
    assert resp.status_code == 400


def test_detect_finds_circle(client):
    resp = client.post("/detect", json={"edge_map_b64": circle_edges_b64(), "seed": 5})
    assert resp.status_code == 200
    body = resp.json()
    assert body["seed"] == 5
    assert len(body["detections"]) == 1
    d = body["detections"][0]
    assert abs(d["x0"] - 100) < 3 and abs(d["y0"] - 100) < 3 and abs(d["r"] - 40) < 3
    assert d["hit_ratio"] >= 0.7
    assert body["config"]["pop_size"] == 30


def test_detect_is_deterministic_given_seed(client):
    payload = {"edge_map_b64": circle_edges_b64(), "seed": 11}
    a = client.post("/detect", json=payload).json()
    b = client.post("/detect", json=payload).json()
    for da, db in zip(a["detections"], b["detections"]):
        da.pop("elapsed_s"), db.pop("elapsed_s")
        assert da == db


def test_detect_generates_seed_when_missing(client):
    body = client.post("/detect", json={"edge_map_b64": circle_edges_b64()}).json()
    assert isinstance(body["seed"], int)


def test_detect_multi_circle(client):
    payload = {
        "edge_map_b64": circle_edges_b64(
            (Circle(60, 60, 25), Circle(150, 140, 30)), (200, 200)),
        "circles": 3,
        "seed": 2,
        "config": {"mask_tolerance": 3.0},
    }
    body = client.post("/detect", json=payload).json()
    assert len(body["detections"]) == 2


def test_detect_accepts_image_payload(client):
    body = client.post("/detect", json={"image_b64": disk_image_b64(), "seed": 3}).json()
    assert len(body["detections"]) == 1
    d = body["detections"][0]
    assert abs(d["x0"] - 60) < 3 and abs(d["r"] - 40) < 3


def test_approximate_keeps_incomplete_fits(client):
    from conftest import arc_edge_map

    arc = arc_edge_map(center=(100, 100), r=60, span_deg=(-60, 60))
    payload = {"edge_map_b64": b64(netpbm.encode_bitmap(arc.mask)), "seed": 4,
               "config": {"min_radius": 15.0}}
    strict = client.post("/detect", json=payload).json()
    assert strict["detections"] == []  # an arc fails the completeness check
    loose = client.post("/detect", json={**payload, "approximate": True}).json()
    assert len(loose["detections"]) == 1
    assert loose["detections"][0]["hit_ratio"] < 0.7


def test_detect_insufficient_edges(client):
    mask = np.zeros((10, 10), dtype=bool)
    mask[3, 3] = True
    resp = client.post("/detect",
                       json={"edge_map_b64": b64(netpbm.encode_bitmap(mask))})
    assert resp.status_code == 422
    assert resp.json()["detail"]["code"] == "insufficient_edges"


def test_detect_requires_exactly_one_input(client):
    assert client.post("/detect", json={}).status_code == 422
    assert client.post("/detect", json={
        "edge_map_b64": circle_edges_b64(), "image_b64": disk_image_b64(),
    }).status_code == 422


def test_detect_rejects_unknown_config_value(client):
    resp = client.post("/detect", json={
        "edge_map_b64": circle_edges_b64(), "config": {"window": 4},
    })
    assert resp.status_code == 422
    assert resp.json()["detail"]["code"] == "config_error"


def test_synthesize_reproducible(client):
    payload = {"width": 160, "height": 160, "count": 1, "noise": 0.02, "seed": 9}
    a = client.post("/synthesize", json=payload).json()
    b = client.post("/synthesize", json=payload).json()
    assert a == b
    assert a["seed"] == 9
    edges = edge_map_from_bytes(base64.b64decode(a["edge_map_b64"]))
    assert edges.num_points == a["num_points"] > 0
    assert len(a["truth"]) == 1


def test_synthesize_explicit_circles(client):
    payload = {"width": 200, "height": 200, "noise": 0.0,
               "circles": [{"x0": 90, "y0": 90, "r": 30}], "seed": 1}
    body = client.post("/synthesize", json=payload).json()
    assert body["truth"] == [{"x0": 90.0, "y0": 90.0, "r": 30.0}]


def test_synthesize_placement_error(client):
    payload = {"width": 100, "height": 100, "noise": 0.0,
               "circles": [{"x0": 50, "y0": 50, "r": 49}], "seed": 1}
    resp = client.post("/synthesize", json=payload)
    assert resp.status_code == 422
    assert resp.json()["detail"]["code"] == "placement_error"


def test_synthesize_requires_one_spec(client):
    resp = client.post("/synthesize", json={"width": 100, "height": 100})
    assert resp.status_code == 422


def test_benchmark_endpoint(client):
    case = {
        "name": "one",
        "edge_map_b64": circle_edges_b64((Circle(80, 80, 30),), (160, 160)),
        "truth": [{"x0": 80, "y0": 80, "r": 30}],
    }
    payload = {"cases": [case], "runs": 3, "seeds": [1, 2, 3]}
    a = client.post("/benchmark", json=payload).json()
    b = client.post("/benchmark", json=payload).json()
    assert a["seeds"] == [1, 2, 3]
    row = a["rows"][0]
    assert row["image"] == "one"
    assert row["success_rate_pct"] == 100.0
    assert row["mean_es"] < 0.5
    assert [r["mean_es"] for r in a["rows"]] == [r["mean_es"] for r in b["rows"]]


def test_benchmark_rejects_short_seed_list(client):
    case = {
        "name": "one",
        "edge_map_b64": circle_edges_b64((Circle(80, 80, 30),), (160, 160)),
        "truth": [{"x0": 80, "y0": 80, "r": 30}],
    }
    resp = client.post("/benchmark", json={"cases": [case], "runs": 5, "seeds": [1]})
    assert resp.status_code == 422
