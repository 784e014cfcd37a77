"""FastAPI service exposing the saliency pipeline.

Images and maps travel as multipart file uploads (PNG/JPEG in, grayscale
PNG out); parameters arrive as form fields mirroring the CLI flags.
Configuration errors return 422, unreadable uploads 400.
"""

from __future__ import annotations

import io
import tempfile
from pathlib import Path

import numpy as np
from fastapi import FastAPI, File, Form, HTTPException, UploadFile
from fastapi.responses import Response
from PIL import Image
from pydantic import BaseModel

from . import pipeline
from .cca import CcaParams
from .features import FeatureFormatError, FeatureStack, load_feature_tensor
from .imaging import ImageFormatError
from .metrics import DegenerateGroundTruthError, curves_to_csv, pr_curve
from .sca import ScaParams
from .selftest import run_selftest

app = FastAPI(title="hcasal", description="Cellular-automata saliency detection service")


class EvalResponse(BaseModel):
    mae: float
    adaptive_f: float
    csv: str


class SelftestCheck(BaseModel):
    name: str
    passed: bool
    detail: str = ""


class SelftestResponse(BaseModel):
    passed: bool
    checks: list[SelftestCheck]


def _decode_rgb(upload: UploadFile) -> np.ndarray:
    try:
        with Image.open(io.BytesIO(upload.file.read())) as im:
            arr = np.asarray(im.convert("RGB"), dtype=np.uint8)
    except Exception as exc:
        raise HTTPException(400, f"cannot decode image {upload.filename!r}: {exc}")
    if arr.shape[0] < 1 or arr.shape[1] < 1:
        raise HTTPException(400, f"zero-dimension image {upload.filename!r}")
    return arr


def _decode_gray(upload: UploadFile) -> np.ndarray:
    try:
        with Image.open(io.BytesIO(upload.file.read())) as im:
            return np.asarray(im.convert("L"), dtype=np.float64) / 255.0
    except Exception as exc:
        raise HTTPException(400, f"cannot decode map {upload.filename!r}: {exc}")


def _png_response(saliency: np.ndarray) -> Response:
    data = np.floor(saliency * 255.0 + 0.5).astype(np.uint8)
    buf = io.BytesIO()
    Image.fromarray(data, mode="L").save(buf, format="PNG")
    return Response(content=buf.getvalue(), media_type="image/png")


def _parse_config(scales: str, ts: int, tc: int, lambda_: float, sigma2: float,
                  compactness: float) -> pipeline.PipelineConfig:
    try:
        scale_tuple = tuple(int(s) for s in scales.split(",") if s.strip())
        return pipeline.PipelineConfig(
            scales=scale_tuple,
            sca=ScaParams(sigma_f2=sigma2, iterations=ts),
            cca=CcaParams(log_odds_step=lambda_, iterations=tc),
            compactness=compactness,
        )
    except ValueError as exc:
        raise HTTPException(422, f"bad configuration: {exc}")


def _feature_stack(files, weights: str, width: int, height: int) -> FeatureStack | None:
    if not files:
        return None
    try:
        wts = tuple(float(w) for w in weights.split(",") if w.strip())
    except ValueError as exc:
        raise HTTPException(422, f"bad feature weights: {exc}")
    if len(wts) != len(files):
        raise HTTPException(422, "need one weight per feature file")
    layers = []
    for upload in files:
        with tempfile.NamedTemporaryFile(suffix=".hcaf", delete=False) as tmp:
            tmp.write(upload.file.read())
            tmp_path = Path(tmp.name)
        try:
            layers.append(load_feature_tensor(tmp_path, width, height))
        except (FeatureFormatError, OSError) as exc:
            raise HTTPException(400, f"bad feature tensor {upload.filename!r}: {exc}")
        finally:
            tmp_path.unlink(missing_ok=True)
    try:
        return FeatureStack(layers=tuple(layers), weights=wts)
    except ValueError as exc:
        raise HTTPException(422, f"bad feature stack: {exc}")


@app.get("/health")
def health():
    return {"status": "ok"}


@app.post("/v1/run", response_class=Response)
def run(
    image: UploadFile = File(...),
    features: list[UploadFile] = File(default=[]),
    feature_weights: str = Form(""),
    scales: str = Form("120,160,200"),
    ts: int = Form(20),
    tc: int = Form(3),
    lambda_: float = Form(0.05, alias="lambda"),
    sigma2: float = Form(0.1),
    compactness: float = Form(10.0),
):
    cfg = _parse_config(scales, ts, tc, lambda_, sigma2, compactness)
    rgb = _decode_rgb(image)
    stack = _feature_stack(features, feature_weights, rgb.shape[1], rgb.shape[0])
    try:
        result = pipeline.run_hca(rgb, cfg, features=stack)
    except (ValueError, ImageFormatError) as exc:
        raise HTTPException(422, str(exc))
    return _png_response(result)


@app.post("/v1/optimize", response_class=Response)
def optimize(
    image: UploadFile = File(...),
    prior: UploadFile = File(...),
    scales: str = Form("120,160,200"),
    ts: int = Form(20),
    tc: int = Form(3),
    lambda_: float = Form(0.05, alias="lambda"),
    sigma2: float = Form(0.1),
    compactness: float = Form(10.0),
):
    cfg = _parse_config(scales, ts, tc, lambda_, sigma2, compactness)
    rgb = _decode_rgb(image)
    prior_map = _decode_gray(prior)
    try:
        result = pipeline.optimize_map(rgb, prior_map, cfg)
    except ValueError as exc:
        raise HTTPException(422, str(exc))
    return _png_response(result)


@app.post("/v1/fuse", response_class=Response)
def fuse(
    maps: list[UploadFile] = File(...),
    tc: int = Form(3),
    lambda_: float = Form(0.05, alias="lambda"),
):
    cfg = _parse_config("120,160,200", 20, tc, lambda_, 0.1, 10.0)
    decoded = [_decode_gray(m) for m in maps]
    try:
        result = pipeline.fuse_maps(decoded, cfg)
    except ValueError as exc:
        raise HTTPException(422, str(exc))
    return _png_response(result)


@app.post("/v1/eval", response_model=EvalResponse)
def evaluate(saliency: UploadFile = File(...), gt: UploadFile = File(...)):
    s = _decode_gray(saliency)
    g = _decode_gray(gt)
    try:
        curves = pr_curve(s, g)
    except DegenerateGroundTruthError as exc:
        raise HTTPException(422, str(exc))
    except ValueError as exc:
        raise HTTPException(422, str(exc))
    return EvalResponse(mae=curves.mae, adaptive_f=curves.adaptive_f, csv=curves_to_csv(curves))


@app.post("/v1/selftest", response_model=SelftestResponse)
def selftest(perturb: str = Form("")):
    results = run_selftest(perturb=perturb or None)
    checks = [SelftestCheck(name=n, passed=ok, detail=d) for n, ok, d in results]
    return SelftestResponse(passed=all(c.passed for c in checks), checks=checks)
