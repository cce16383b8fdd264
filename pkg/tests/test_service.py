import base64
import io

import numpy as np
import pytest
from fastapi.testclient import TestClient
from PIL import Image

from sparsecrf import imageio
from sparsecrf.field import BACKGROUND, FOREGROUND, UNMARKED, ScribbleMask
from sparsecrf.pipeline import RunConfig, segment
from sparsecrf.service import create_app, rasterize_strokes

CONFIG = '{"q": 16, "degree": 6, "bins": 8, "window": 3, "seed": 5}'


def fixture_png(seed=0, size=24) -> bytes:
    rng = np.random.default_rng(seed)
    arr = (rng.random((size, size)) * 120).astype(np.uint8)
    arr[8:16, 8:16] = 220
    buf = io.BytesIO()
    Image.fromarray(arr, mode="L").save(buf, format="PNG")
    return buf.getvalue()


STROKES = {"strokes": [
    {"class": "fg", "points": [[11, 11], [13, 13]], "radius": 1.5},
    {"class": "bg", "points": [[2, 2], [5, 2]], "radius": 1.5},
]}


@pytest.fixture
def client():
    return TestClient(create_app())


def create(client, png=None, config=CONFIG):
    files = {"image": ("img.png", png or fixture_png(), "image/png")}
    return client.post("/sessions", files=files, data={"config": config})


# ---- session lifecycle

def test_create_session_ok(client):
    r = create(client)
    assert r.status_code == 201
    body = r.json()
    assert body["width"] == 24 and body["height"] == 24
    assert len(body["id"]) == 32


def test_create_corrupt_payload_400(client):
    r = create(client, png=b"not a png")
    assert r.status_code == 400


def test_create_too_large_413():
    app = create_app(max_pixels=100)
    client = TestClient(app)
    r = create(client)
    assert r.status_code == 413


def test_create_bad_config_400(client):
    r = create(client, config='{"divergence": "cosine"}')
    assert r.status_code == 400


def test_duplicate_uploads_distinct_ids_same_objective(client):
    a = create(client).json()
    b = create(client).json()
    assert a["id"] != b["id"]
    assert a["cluster_objective"] == b["cluster_objective"]


def test_delete_then_use_404(client):
    sid = create(client).json()["id"]
    assert client.delete(f"/sessions/{sid}").status_code == 204
    assert client.delete(f"/sessions/{sid}").status_code == 404
    assert client.post(f"/sessions/{sid}/segment", json={}).status_code == 404
    assert client.put(f"/sessions/{sid}/scribbles",
                      json={"strokes": []}).status_code == 404


def test_session_gauge_decrements(client):
    base = client.get("/healthz").json()["sessions"]
    sid = create(client).json()["id"]
    assert client.get("/healthz").json()["sessions"] == base + 1
    client.delete(f"/sessions/{sid}")
    assert client.get("/healthz").json()["sessions"] == base


# ---- scribbles

def test_empty_strokes_ok(client):
    sid = create(client).json()["id"]
    r = client.put(f"/sessions/{sid}/scribbles", json={"strokes": []})
    assert r.status_code == 204


def test_malformed_strokes_400(client):
    sid = create(client).json()["id"]
    bad = [{"class": "purple", "points": [[1, 1]]},
           {"class": "fg", "points": []},
           {"class": "fg", "points": [[1, 1]], "radius": -2},
           "not a stroke"]
    for stroke in bad:
        r = client.put(f"/sessions/{sid}/scribbles",
                       json={"strokes": [stroke]})
        assert r.status_code == 400, stroke
    r = client.put(f"/sessions/{sid}/scribbles", json={"strokes": "zz"})
    assert r.status_code == 400


def test_rasterize_later_stroke_wins():
    scr = ScribbleMask.empty(10, 10)
    out = rasterize_strokes(scr, [
        {"class": "fg", "points": [[5, 5]], "radius": 2},
        {"class": "bg", "points": [[5, 5]], "radius": 1},
    ])
    assert out.labels[5, 5] == BACKGROUND  # later stroke wins
    assert out.labels[5, 7] == FOREGROUND  # outside the bg radius
    erased = rasterize_strokes(out, [
        {"class": "erase", "points": [[5, 5]], "radius": 4},
    ])
    assert (erased.labels == UNMARKED).all()


def test_rasterize_polyline_continuous():
    scr = ScribbleMask.empty(20, 20)
    out = rasterize_strokes(scr, [
        {"class": "fg", "points": [[2, 2], [17, 2]], "radius": 1},
    ])
    assert (out.labels[2, 2:18] == FOREGROUND).all()


# ---- segment

def test_segment_without_scribbles_409(client):
    sid = create(client).json()["id"]
    r = client.post(f"/sessions/{sid}/segment", json={})
    assert r.status_code == 409
    assert "background" in r.json()["detail"] or \
        "foreground" in r.json()["detail"]


def test_segment_full_loop_and_determinism(client):
    sid = create(client).json()["id"]
    assert client.put(f"/sessions/{sid}/scribbles",
                      json=STROKES).status_code == 204
    r1 = client.post(f"/sessions/{sid}/segment", json={})
    assert r1.status_code == 200
    body = r1.json()
    for key in ("mask_png_base64", "energy", "degree_mean", "edges",
                "timings", "bounds"):
        assert key in body
    r2 = client.post(f"/sessions/{sid}/segment", json={})
    assert r2.json()["mask_png_base64"] == body["mask_png_base64"]

    # cached stages: stats/cluster timings are absent from later calls
    t2 = r2.json()["timings"]
    assert t2["stats_ms"] + t2["cluster_ms"] <= \
        body["timings"]["stats_ms"] + body["timings"]["cluster_ms"] + 1e-9

    # mask endpoint serves the same bytes
    raw = client.get(f"/sessions/{sid}/mask")
    assert raw.status_code == 200
    assert raw.content == base64.b64decode(body["mask_png_base64"])


def test_segment_matches_cli_pipeline(client, tmp_path):
    png = fixture_png(seed=3)
    sid = create(client, png=png).json()["id"]
    client.put(f"/sessions/{sid}/scribbles", json=STROKES)
    service_mask = base64.b64decode(
        client.post(f"/sessions/{sid}/segment",
                    json={}).json()["mask_png_base64"])

    # same inputs through the library pipeline
    img = imageio.image_from_bytes(png)
    scribbles = rasterize_strokes(
        ScribbleMask.empty(img.width, img.height), STROKES["strokes"])
    cfg = RunConfig(q=16, degree=6, bins=8, window=3, seed=5)
    mask, _ = segment(img, scribbles, cfg)
    assert imageio.mask_png_bytes(mask) == service_mask


def test_segment_override_and_resample(client):
    sid = create(client).json()["id"]
    client.put(f"/sessions/{sid}/scribbles", json=STROKES)
    a = client.post(f"/sessions/{sid}/segment", json={"seed": 11}).json()
    b = client.post(f"/sessions/{sid}/segment", json={"seed": 11}).json()
    assert a["mask_png_base64"] == b["mask_png_base64"]
    assert a["seed"] == 11
    r = client.post(f"/sessions/{sid}/segment",
                    json={"resample": True})
    assert r.status_code == 200
    bad = client.post(f"/sessions/{sid}/segment", json={"window": 4})
    assert bad.status_code == 400


def test_unknown_session_404(client):
    assert client.post("/sessions/deadbeef/segment", json={}).status_code == 404
    assert client.get("/sessions/deadbeef/mask").status_code == 404
