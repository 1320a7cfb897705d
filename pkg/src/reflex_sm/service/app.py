"""HTTP service wrapping the matcher: the same operations the CLI offers,
for long-running or multi-client deployments."""

from __future__ import annotations

from fastapi import FastAPI, HTTPException

from .. import __version__
from ..engine import SimulationConfig, run_simulation
from ..evaluation import score_matching, sweep_sims
from ..meta import MetaConfig, run_meta
from ..randomness import RngStream, ThresholdInterval
from ..scenario import (
    Scenario,
    ValidationError,
    builtin_fixture,
    builtin_fixtures,
    heterogeneity_index,
    scenario_from_dict,
)
from ..similarity import ALL_MEASURES, Measure
from .models import (
    EngineSettings,
    EvaluationRequest,
    EvaluationResponse,
    FixtureInfoOut,
    HealthOut,
    MetaReportOut,
    MetaRequest,
    ScenarioRef,
    SimulationRequest,
    SimulationResponse,
    SweepPointOut,
    SweepRequest,
    SweepResponse,
)


def _simulation_config(settings: EngineSettings) -> SimulationConfig:
    if settings.measures is None:
        pool = ALL_MEASURES
    else:
        try:
            pool = frozenset(Measure.from_name(name) for name in settings.measures)
        except ValueError as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from None
    if not pool or settings.measures_per_tick > len(pool):
        raise HTTPException(
            status_code=422,
            detail=f"measures_per_tick must be in 1..{len(pool)} for the given pool")
    return SimulationConfig(
        threshold_interval=ThresholdInterval(settings.threshold_lo, settings.threshold_hi),
        measures_per_tick=settings.measures_per_tick,
        convergence_streak=settings.convergence_streak,
        patience=settings.patience,
        max_ticks=settings.max_ticks,
        measure_pool=pool,
    )


def _resolve_scenario(ref: ScenarioRef) -> Scenario:
    if ref.fixture is not None:
        try:
            return builtin_fixture(ref.fixture)
        except KeyError as exc:
            raise HTTPException(status_code=404, detail=str(exc.args[0])) from None
    try:
        return scenario_from_dict(ref.scenario.model_dump(exclude_defaults=False))
    except (ValidationError, ValueError) as exc:
        raise HTTPException(status_code=422, detail=str(exc)) from None


def create_app() -> FastAPI:
    app = FastAPI(
        title="reflex-sm",
        version=__version__,
        description="Stochastic multi-agent schema matching as a service.",
    )

    @app.get("/health", response_model=HealthOut)
    def health() -> HealthOut:
        return HealthOut(status="ok", version=__version__)

    @app.get("/fixtures", response_model=list[FixtureInfoOut])
    def fixtures() -> list[FixtureInfoOut]:
        return [
            FixtureInfoOut(
                name=sc.name,
                source_elements=len(sc.source),
                target_elements=len(sc.target),
                matchings_to_find=len(sc.expected),
                band=sc.band.value,
                heterogeneity_index=heterogeneity_index(sc),
            )
            for sc in builtin_fixtures()
        ]

    @app.get("/fixtures/{name}")
    def fixture_document(name: str) -> dict:
        from ..scenario import scenario_to_dict

        try:
            return scenario_to_dict(builtin_fixture(name))
        except KeyError as exc:
            raise HTTPException(status_code=404, detail=str(exc.args[0])) from None

    @app.post("/simulations", response_model=SimulationResponse)
    def simulate(request: SimulationRequest) -> SimulationResponse:
        scenario = _resolve_scenario(request)
        cfg = _simulation_config(request.settings)
        result = run_simulation(scenario, cfg, RngStream(request.seed, request.stream_id))
        doc = result.to_dict()
        return SimulationResponse(
            scenario=scenario.name,
            seed=request.seed,
            stream_id=request.stream_id,
            ticks_used=result.ticks_used,
            matched=doc["matched"],
            unmatched=doc["unmatched"],
        )

    @app.post("/meta", response_model=MetaReportOut)
    def meta(request: MetaRequest) -> MetaReportOut:
        scenario = _resolve_scenario(request)
        cfg = MetaConfig(
            seed=request.seed,
            n_simulations=request.sims,
            frequency_cutoff=request.cutoff,
            base=_simulation_config(request.settings),
        )
        report = run_meta(scenario, cfg, workers=request.workers)
        return MetaReportOut(**report.to_dict())

    @app.post("/evaluations", response_model=EvaluationResponse)
    def evaluate(request: EvaluationRequest) -> EvaluationResponse:
        scenario = _resolve_scenario(request)
        report = score_matching(request.found, scenario.expected, scenario.name)
        doc = report.to_dict()
        return EvaluationResponse(**doc)

    @app.post("/sweeps", response_model=SweepResponse)
    def sweep(request: SweepRequest) -> SweepResponse:
        scenario = _resolve_scenario(request)
        if any(v < 1 for v in request.sims_values):
            raise HTTPException(status_code=422, detail="sims_values entries must be >= 1")
        cfg = MetaConfig(
            seed=request.seed,
            frequency_cutoff=request.cutoff,
            base=_simulation_config(request.settings),
        )
        rows = sweep_sims(scenario, cfg, request.sims_values, request.repetitions,
                          workers=request.workers)
        return SweepResponse(
            scenario=scenario.name,
            repetitions=request.repetitions,
            points=[SweepPointOut(sims=s, mean_pct=m) for s, m in rows],
        )

    return app


app = create_app()
