"""HTTP service exposing edge extraction, detection, synthesis, and benchmarks.

Every operation is stateless and seedable, so identical requests produce
identical responses (timing fields excepted). Error payloads carry a
machine-readable ``code`` the CLI maps onto its exit codes.
"""

from __future__ import annotations

import base64
import binascii
import math

import numpy as np
from fastapi import FastAPI, HTTPException

from .. import __version__, netpbm
from ..config import build_detector_config, config_as_dict
from ..detector import approximate_shape, detect_multiple
from ..edges import CannyParams, EdgeMap, canny_edges, edge_map_from_bytes, gray_image_from_bytes
from ..errors import ConfigError, NetpbmError, PlacementError
from ..evaluation import GroundTruth, generate_synthetic, random_circles, run_benchmark
from ..geometry import Circle
from . import schemas


def _error(status: int, code: str, message: str) -> HTTPException:
    return HTTPException(status_code=status, detail={"code": code, "message": message})


def _decode_b64(payload: str) -> bytes:
    try:
        return base64.b64decode(payload, validate=True)
    except (binascii.Error, ValueError):
        raise _error(400, "bad_input", "payload is not valid base64") from None


def _b64(data: bytes) -> str:
    return base64.b64encode(data).decode("ascii")


def _fresh_seed() -> int:
    return int(np.random.SeedSequence().generate_state(1)[0])


def _canny_params(opts: schemas.CannyOptions) -> CannyParams:
    try:
        return CannyParams(opts.gaussian_sigma, opts.low_threshold, opts.high_threshold)
    except ValueError as exc:
        raise _error(422, "config_error", str(exc)) from None


def _edges_from_request(req: schemas.DetectRequest) -> EdgeMap:
    try:
        if req.edge_map_b64 is not None:
            return edge_map_from_bytes(_decode_b64(req.edge_map_b64))
        img = gray_image_from_bytes(_decode_b64(req.image_b64))
    except NetpbmError as exc:
        raise _error(400, "bad_input", str(exc)) from None
    return canny_edges(img, _canny_params(req.canny))


def _build_config(overrides: schemas.ConfigOverrides, **extra):
    # exclude_unset keeps an explicit null (disable early stop) distinct
    # from an omitted field (keep the default)
    mapping = overrides.model_dump(exclude_unset=True)
    mapping.update(extra)
    try:
        return build_detector_config(mapping)
    except ConfigError as exc:
        raise _error(422, "config_error", str(exc)) from None


def _nan_safe(v: float) -> float | None:
    return None if math.isnan(v) else v


def create_app() -> FastAPI:
    app = FastAPI(
        title="evocircles",
        version=__version__,
        description="Circle detection on edge maps via discrete differential evolution.",
    )

    @app.get("/health", response_model=schemas.HealthResponse)
    def health():
        return schemas.HealthResponse(status="ok", version=__version__)

    @app.post("/edges", response_model=schemas.EdgesResponse)
    def edges(req: schemas.EdgesRequest):
        try:
            img = gray_image_from_bytes(_decode_b64(req.image_b64))
        except NetpbmError as exc:
            raise _error(400, "bad_input", str(exc)) from None
        edge_map = canny_edges(img, _canny_params(req.canny))
        return schemas.EdgesResponse(
            edge_map_b64=_b64(netpbm.encode_bitmap(edge_map.mask)),
            num_points=edge_map.num_points,
            width=edge_map.width,
            height=edge_map.height,
        )

    @app.post("/detect", response_model=schemas.DetectResponse)
    def detect(req: schemas.DetectRequest):
        edge_map = _edges_from_request(req)
        if edge_map.num_points < 3:
            raise _error(422, "insufficient_edges",
                         f"need at least 3 edge points, have {edge_map.num_points}")
        cfg = _build_config(req.config, max_circles=req.circles)
        seed = req.seed if req.seed is not None else _fresh_seed()
        rng = np.random.default_rng(seed)
        search = approximate_shape if req.approximate else detect_multiple
        found = search(edge_map, cfg, rng)
        detections = [
            schemas.DetectionOut(
                x0=d.circle.x0, y0=d.circle.y0, r=d.circle.r,
                objective=d.objective, hit_ratio=d.hit_ratio,
                generations=d.generations, elapsed_s=d.elapsed,
            )
            for d in found
        ]
        return schemas.DetectResponse(
            detections=detections,
            seed=seed,
            num_points=edge_map.num_points,
            width=edge_map.width,
            height=edge_map.height,
            config=config_as_dict(cfg),
        )

    @app.post("/synthesize", response_model=schemas.SynthResponse)
    def synthesize(req: schemas.SynthRequest):
        seed = req.seed if req.seed is not None else _fresh_seed()
        rng = np.random.default_rng(seed)
        try:
            if req.circles is not None:
                circles = [Circle(c.x0, c.y0, c.r) for c in req.circles]
            else:
                circles = random_circles(req.width, req.height, req.count, rng)
            image, edge_map, truth = generate_synthetic(
                req.width, req.height, circles, req.noise, rng
            )
        except PlacementError as exc:
            raise _error(422, "placement_error", str(exc)) from None
        return schemas.SynthResponse(
            image_b64=_b64(netpbm.encode_gray(image.pixels)),
            edge_map_b64=_b64(netpbm.encode_bitmap(edge_map.mask)),
            truth=[schemas.CircleParams(x0=c.x0, y0=c.y0, r=c.r) for c in truth.circles],
            seed=seed,
            num_points=edge_map.num_points,
        )

    @app.post("/benchmark", response_model=schemas.BenchResponse)
    def benchmark(req: schemas.BenchRequest):
        cfg = _build_config(req.config)
        seeds = req.seeds if req.seeds else [_fresh_seed() for _ in range(req.runs)]
        if len(seeds) < req.runs:
            raise _error(422, "config_error",
                         f"need {req.runs} seeds, got {len(seeds)}")
        suite, names = [], []
        for case in req.cases:
            try:
                edge_map = edge_map_from_bytes(_decode_b64(case.edge_map_b64))
                truth = GroundTruth(
                    tuple(Circle(c.x0, c.y0, c.r) for c in case.truth),
                    edge_map.width, edge_map.height,
                )
            except (NetpbmError, ValueError) as exc:
                raise _error(400, "bad_input", f"case {case.name}: {exc}") from None
            suite.append((edge_map, truth))
            names.append(case.name)
        report = run_benchmark(suite, req.runs, cfg, seeds, names)
        rows = [
            schemas.BenchRowOut(
                image=r.image, runs=r.runs,
                mean_time_s=r.mean_time_s, std_time_s=r.std_time_s,
                success_rate_pct=r.success_rate_pct,
                mean_es=_nan_safe(r.mean_es), std_es=_nan_safe(r.std_es),
            )
            for r in report.rows
        ]
        return schemas.BenchResponse(rows=rows, seeds=list(seeds[:req.runs]))

    return app


app = create_app()
