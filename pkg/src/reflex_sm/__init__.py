"""Stochastic multi-agent schema matching.

Schema elements act as agents that search the opposite schema for a partner;
repeated randomized runs are tallied into a frequency-ranked final matching.
"""

from .engine import (
    AgentPhase,
    AgentState,
    AgentStatus,
    Decision,
    DecisionKind,
    MatchBoard,
    MatchedPair,
    SimulationConfig,
    SimulationResult,
    act,
    decide,
    detect_consensus,
    perceive,
    run_simulation,
)
from .evaluation import EvalReport, score_matching, sweep_sims
from .meta import MetaConfig, MetaReport, repeat_meta, run_meta, select_final
from .randomness import (
    AggregationFn,
    AggregationKind,
    InvalidDrawSize,
    LengthMismatch,
    RngStream,
    ThresholdInterval,
    aggregate,
    draw_aggregation,
    draw_measures,
    draw_threshold,
)
from .scenario import (
    GroundTruthMapping,
    HeterogeneityBand,
    ParseError,
    Scenario,
    Schema,
    SchemaElement,
    Side,
    ValidationError,
    builtin_fixture,
    builtin_fixtures,
    heterogeneity_index,
    load_scenario,
)
from .similarity import Measure, TokenizedName, normalize, score, similarity

__version__ = "0.1.0"

__all__ = [
    "AgentPhase",
    "AgentState",
    "AgentStatus",
    "AggregationFn",
    "AggregationKind",
    "Decision",
    "DecisionKind",
    "EvalReport",
    "GroundTruthMapping",
    "HeterogeneityBand",
    "InvalidDrawSize",
    "LengthMismatch",
    "MatchBoard",
    "MatchedPair",
    "Measure",
    "MetaConfig",
    "MetaReport",
    "ParseError",
    "RngStream",
    "Scenario",
    "Schema",
    "SchemaElement",
    "Side",
    "SimulationConfig",
    "SimulationResult",
    "ThresholdInterval",
    "TokenizedName",
    "ValidationError",
    "act",
    "aggregate",
    "builtin_fixture",
    "builtin_fixtures",
    "decide",
    "detect_consensus",
    "draw_aggregation",
    "draw_measures",
    "draw_threshold",
    "heterogeneity_index",
    "load_scenario",
    "normalize",
    "perceive",
    "run_meta",
    "repeat_meta",
    "run_simulation",
    "score",
    "score_matching",
    "select_final",
    "similarity",
    "sweep_sims",
    "__version__",
]
