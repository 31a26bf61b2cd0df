"""Request/response models for the detection service.

Image payloads travel as base64-encoded file bytes; the format is sniffed
from the magic number (PGM, PBM, or PNG), so one field covers all inputs.
"""

from __future__ import annotations

from pydantic import BaseModel, Field, model_validator


class CircleParams(BaseModel):
    x0: float
    y0: float
    r: float = Field(gt=0)


class ConfigOverrides(BaseModel):
    """Optional knobs; unset fields keep the package defaults.

    An explicit ``"target_objective": null`` disables early stopping (the
    default stops once a perfect circle is found), so unset and null are
    distinguished when the request is applied.
    """

    f: float | None = None
    cr: float | None = None
    pop_size: int | None = None
    max_generations: int | None = None
    h: float | None = None
    transform_cap: int | None = None
    penalty_cost: float | None = None
    target_objective: float | None = None
    window: int | None = None
    min_radius: float | None = None
    completeness_threshold: float | None = None
    mask_tolerance: float | None = None


class CannyOptions(BaseModel):
    gaussian_sigma: float = 1.4
    low_threshold: float = 0.1
    high_threshold: float = 0.3


class EdgesRequest(BaseModel):
    image_b64: str
    canny: CannyOptions = CannyOptions()


class EdgesResponse(BaseModel):
    edge_map_b64: str  # PBM (P4)
    num_points: int
    width: int
    height: int


class DetectRequest(BaseModel):
    edge_map_b64: str | None = None
    image_b64: str | None = None
    canny: CannyOptions = CannyOptions()
    circles: int = Field(default=1, ge=1)
    approximate: bool = False
    seed: int | None = None
    config: ConfigOverrides = ConfigOverrides()

    @model_validator(mode="after")
    def _one_input(self):
        if (self.edge_map_b64 is None) == (self.image_b64 is None):
            raise ValueError("provide exactly one of edge_map_b64 or image_b64")
        return self


class DetectionOut(BaseModel):
    x0: float
    y0: float
    r: float
    objective: float
    hit_ratio: float
    generations: int
    elapsed_s: float


class DetectResponse(BaseModel):
    detections: list[DetectionOut]
    seed: int
    num_points: int
    width: int
    height: int
    config: dict


class SynthRequest(BaseModel):
    width: int = Field(default=200, ge=16)
    height: int = Field(default=200, ge=16)
    count: int | None = Field(default=None, ge=1)
    circles: list[CircleParams] | None = None
    noise: float = Field(default=0.0, ge=0.0, lt=1.0)
    seed: int | None = None

    @model_validator(mode="after")
    def _one_spec(self):
        if (self.count is None) == (self.circles is None):
            raise ValueError("provide exactly one of count or circles")
        return self


class SynthResponse(BaseModel):
    image_b64: str      # PGM (P5)
    edge_map_b64: str   # PBM (P4)
    truth: list[CircleParams]
    seed: int
    num_points: int


class BenchCase(BaseModel):
    name: str
    edge_map_b64: str
    truth: list[CircleParams] = Field(min_length=1)


class BenchRequest(BaseModel):
    cases: list[BenchCase] = Field(min_length=1)
    runs: int = Field(default=1, ge=1)
    seeds: list[int] | None = None
    config: ConfigOverrides = ConfigOverrides()


class BenchRowOut(BaseModel):
    image: str
    runs: int
    mean_time_s: float
    std_time_s: float
    success_rate_pct: float
    mean_es: float | None  # None when no detection matched any truth circle
    std_es: float | None


class BenchResponse(BaseModel):
    rows: list[BenchRowOut]
    seeds: list[int]


class HealthResponse(BaseModel):
    status: str
    version: str
