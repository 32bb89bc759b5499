"""Request/response models for the HTTP service.

Arrays cross the wire as plain JSON lists of floats; masked or invalid
samples are carried by explicit boolean masks (or null magnitudes for FRF
pole samples), never by NaN, which JSON cannot represent.
"""
from __future__ import annotations

from typing import Literal

from pydantic import BaseModel, Field

Method = Literal["series", "approx", "fdm", "all"]
FitTarget = Literal["omega-d", "zeta-eq"]
CaseId = Literal["1", "2", "3", "4", "yuan"]


class OscillatorIn(BaseModel):
    omega_n: float = Field(gt=0)
    zeta: float = Field(ge=0, le=1)
    beta: float = Field(ge=0, le=1)


class ImpulseRequest(OscillatorIn):
    t_end: float = Field(gt=0)
    n: int = Field(ge=2, le=200_001)
    method: Method = "series"
    naive: bool = False


class SignalOut(BaseModel):
    x: list[float]
    valid: list[bool]


class ImpulseResponse(BaseModel):
    t: list[float]
    methods: dict[str, SignalOut]
    residual: list[float | None] | None = None
    valid_until: float


class FrfRequest(OscillatorIn):
    g_max: float = Field(default=3.0, gt=0)
    n: int = Field(default=601, ge=2, le=100_001)


class FrfResponse(BaseModel):
    g: list[float]
    mag_exact: list[float | None]
    mag_approx: list[float | None]
    phase_exact: list[float | None]
    phase_approx: list[float | None]


class FitRequest(BaseModel):
    target: FitTarget
    samples: int = Field(default=10_000, ge=3, le=100_000)
    seed: int = 0
    jobs: int = Field(default=1, ge=1, le=64)


class FitResponse(BaseModel):
    target: FitTarget
    a0: float
    a1: float
    ci95_a0: tuple[float, float]
    ci95_a1: tuple[float, float]
    rmse: float
    n_samples: int
    n_failed: int
    scatter_beta: list[float]
    scatter_y: list[float]


class ExcitationIn(BaseModel):
    kind: Literal["cosine", "sine", "constant"]
    amplitude: float = 0.0
    frequency: float = 0.0


class ScenarioIn(OscillatorIn):
    t_end: float = Field(gt=0)
    n: int = Field(ge=2, le=200_001)
    excitation: ExcitationIn


class RespondRequest(BaseModel):
    case: CaseId | None = None
    scenario: ScenarioIn | None = None
    t_end: float | None = Field(default=None, gt=0)
    n: int | None = Field(default=None, ge=2, le=200_001)


class RespondResponse(BaseModel):
    case_id: str
    t: list[float]
    series: SignalOut
    approx: SignalOut
    fdm: SignalOut | None = None
    residual_max: float | None
    residual_rel: float | None
    valid_until: float


class ErrorBody(BaseModel):
    detail: str
