"""Request/response schemas for the matching service."""

from __future__ import annotations

from typing import Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator


class ElementIn(BaseModel):
    model_config = ConfigDict(extra="forbid")

    id: str
    name: str


class ScenarioIn(BaseModel):
    """Inline scenario document, same shape as a scenario file."""

    model_config = ConfigDict(extra="forbid")

    name: str
    source: list[ElementIn]
    target: list[ElementIn]
    expected: list[tuple[str, str]]
    band: Literal["low", "medium", "high"]
    description: str = ""


class EngineSettings(BaseModel):
    """Per-run knobs; defaults mirror the CLI."""

    model_config = ConfigDict(extra="forbid")

    threshold_lo: float = Field(default=0.45, ge=0.0, le=1.0)
    threshold_hi: float = Field(default=0.65, ge=0.0, le=1.0)
    measures_per_tick: int = Field(default=3, ge=1)
    convergence_streak: int = Field(default=3, ge=1)
    patience: int = Field(default=10, ge=1)
    max_ticks: int = Field(default=500, ge=1)
    measures: Optional[list[str]] = Field(
        default=None, description="subset of the measure pool by canonical name")

    @model_validator(mode="after")
    def _check(self) -> "EngineSettings":
        if self.threshold_lo > self.threshold_hi:
            raise ValueError("threshold_lo must be <= threshold_hi")
        if self.patience < self.convergence_streak:
            raise ValueError("patience must be >= convergence_streak")
        return self


class ScenarioRef(BaseModel):
    """Either a bundled fixture name or an inline scenario."""

    model_config = ConfigDict(extra="forbid")

    fixture: Optional[str] = None
    scenario: Optional[ScenarioIn] = None

    @model_validator(mode="after")
    def _exactly_one(self) -> "ScenarioRef":
        if (self.fixture is None) == (self.scenario is None):
            raise ValueError("provide exactly one of 'fixture' or 'scenario'")
        return self


class SimulationRequest(ScenarioRef):
    model_config = ConfigDict(extra="forbid")

    seed: int = 7
    stream_id: int = Field(default=0, ge=0)
    settings: EngineSettings = EngineSettings()


class MatchedPairOut(BaseModel):
    source_id: str
    target_id: str
    mean_score: float


class SimulationResponse(BaseModel):
    scenario: str
    seed: int
    stream_id: int
    ticks_used: int
    matched: list[MatchedPairOut]
    unmatched: list[str]


class MetaRequest(ScenarioRef):
    model_config = ConfigDict(extra="forbid")

    seed: int = 7
    sims: int = Field(default=10, ge=1)
    cutoff: float = Field(default=0.5, gt=0.0, le=1.0)
    workers: int = Field(default=1, ge=1)
    settings: EngineSettings = EngineSettings()


class PairStatOut(BaseModel):
    source_id: str
    target_id: str
    frequency: float
    mean_score: float
    selected: int


class RunOut(BaseModel):
    stream_id: int
    ticks_used: int
    matched: list[MatchedPairOut]
    unmatched: list[str]


class MetaReportOut(BaseModel):
    """Mirrors the report JSON written by the CLI."""

    scenario: str
    seed: int
    n_simulations: int
    frequency_cutoff: float
    pairs: list[PairStatOut]
    final_matching: list[tuple[str, str]]
    runs: list[RunOut]


class EvaluationRequest(ScenarioRef):
    """Score a found matching against a scenario's expected mapping."""

    model_config = ConfigDict(extra="forbid")

    found: list[tuple[str, str]]


class EvaluationResponse(BaseModel):
    scenario: str
    matchings_to_find: int
    correct_found: int
    spurious_found: int
    pct_correct: float
    precision: float
    recall: float


class SweepRequest(ScenarioRef):
    model_config = ConfigDict(extra="forbid")

    seed: int = 7
    sims_values: list[int] = Field(default=[3, 10], min_length=1)
    repetitions: int = Field(default=30, ge=1)
    cutoff: float = Field(default=0.5, gt=0.0, le=1.0)
    workers: int = Field(default=1, ge=1)
    settings: EngineSettings = EngineSettings()


class SweepPointOut(BaseModel):
    sims: int
    mean_pct: float


class SweepResponse(BaseModel):
    scenario: str
    repetitions: int
    points: list[SweepPointOut]


class FixtureInfoOut(BaseModel):
    name: str
    source_elements: int
    target_elements: int
    matchings_to_find: int
    band: str
    heterogeneity_index: float


class HealthOut(BaseModel):
    status: str
    version: str
