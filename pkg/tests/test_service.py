import io

import numpy as np
import pytest
from fastapi.testclient import TestClient
from PIL import Image

from hcasal.features import save_feature_tensor
from hcasal.service import app


@pytest.fixture(scope="module")
def client():
    with TestClient(app) as c:
        yield c


def _png(arr, mode="RGB"):
    buf = io.BytesIO()
    Image.fromarray(arr, mode=mode).save(buf, format="PNG")
    return buf.getvalue()


def _scene(size=120):
    img = np.full((size, size, 3), 128, np.uint8)
    gt = np.zeros((size, size), np.uint8)
    lo, hi = size // 2 - 20, size // 2 + 20
    img[lo:hi, lo:hi] = [220, 30, 30]
    gt[lo:hi, lo:hi] = 255
    return img, gt


def test_health(client):
    assert client.get("/health").json() == {"status": "ok"}


def test_run_returns_png_with_matching_dims(client):
    img, _ = _scene()
    resp = client.post(
        "/v1/run",
        files={"image": ("img.png", _png(img))},
        data={"scales": "40,60"},
    )
    assert resp.status_code == 200
    assert resp.headers["content-type"] == "image/png"
    out = Image.open(io.BytesIO(resp.content))
    assert out.size == (120, 120)


def test_run_with_feature_tensor(client, tmp_path):
    img, _ = _scene(60)
    field = np.zeros((60, 60, 2), np.float32)
    field[20:40, 20:40] = 1.0
    p = tmp_path / "f.hcaf"
    save_feature_tensor(field, p)
    resp = client.post(
        "/v1/run",
        files=[
            ("image", ("img.png", _png(img))),
            ("features", ("f.hcaf", p.read_bytes())),
        ],
        data={"scales": "20,30", "feature_weights": "1.0"},
    )
    assert resp.status_code == 200


def test_run_bad_scales_422(client):
    img, _ = _scene(60)
    resp = client.post(
        "/v1/run",
        files={"image": ("img.png", _png(img))},
        data={"scales": "60,40"},
    )
    assert resp.status_code == 422


def test_run_bad_image_400(client):
    resp = client.post("/v1/run", files={"image": ("bad.png", b"not a png")})
    assert resp.status_code == 400


def test_run_bad_feature_weights_422(client):
    img, _ = _scene(60)
    resp = client.post(
        "/v1/run",
        files=[
            ("image", ("img.png", _png(img))),
            ("features", ("f.hcaf", b"HCAF" + b"\x00" * 16)),
        ],
        data={"feature_weights": "0.5,0.6"},
    )
    assert resp.status_code == 422


def test_optimize(client):
    img, gt = _scene()
    resp = client.post(
        "/v1/optimize",
        files={
            "image": ("img.png", _png(img)),
            "prior": ("prior.png", _png(gt, mode="L")),
        },
        data={"scales": "40,60"},
    )
    assert resp.status_code == 200


def test_fuse_requires_two_maps(client):
    _, gt = _scene()
    resp = client.post("/v1/fuse", files=[("maps", ("a.png", _png(gt, mode="L")))])
    assert resp.status_code == 422


def test_fuse(client):
    _, gt = _scene()
    files = [
        ("maps", ("a.png", _png(gt, mode="L"))),
        ("maps", ("b.png", _png(gt, mode="L"))),
    ]
    resp = client.post("/v1/fuse", files=files)
    assert resp.status_code == 200
    assert resp.headers["content-type"] == "image/png"


def test_eval_perfect_map(client):
    _, gt = _scene()
    resp = client.post(
        "/v1/eval",
        files={
            "saliency": ("m.png", _png(gt, mode="L")),
            "gt": ("gt.png", _png(gt, mode="L")),
        },
    )
    assert resp.status_code == 200
    body = resp.json()
    assert body["mae"] == 0.0
    assert body["adaptive_f"] == pytest.approx(1.0)
    assert body["csv"].startswith("threshold,precision,recall,fbeta\n")


def test_eval_degenerate_gt_422(client):
    _, gt = _scene()
    empty = np.zeros_like(gt)
    resp = client.post(
        "/v1/eval",
        files={
            "saliency": ("m.png", _png(gt, mode="L")),
            "gt": ("gt.png", _png(empty, mode="L")),
        },
    )
    assert resp.status_code == 422


def test_selftest_passes(client):
    resp = client.post("/v1/selftest")
    assert resp.status_code == 200
    body = resp.json()
    assert body["passed"] is True
    assert {c["name"] for c in body["checks"]} >= {"sca-oracle", "cca-oracle"}


def test_selftest_perturbed_fails_cca(client):
    resp = client.post("/v1/selftest", data={"perturb": "cca_lambda"})
    body = resp.json()
    assert body["passed"] is False
    failing = [c for c in body["checks"] if not c["passed"]]
    assert any("cca" in c["detail"] or "cca" in c["name"] for c in failing)
