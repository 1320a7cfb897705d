"""The reflexive-agent state machine and the tick scheduler for one matching run.

Every schema element is an agent that repeatedly perceives the opposite
population (scoring each available element with freshly drawn measures and an
aggregation rule), decides on a candidate against a freshly drawn acceptance
threshold, and acts by nominating it. A pair is matched only when both sides
confirm each other in the same tick.

Ticks are synchronous rounds: all agents perceive and decide against the
pre-tick state, then all act, then mutual confirmations are collected once.
Per-agent draws are keyed by (stream, agent id, tick), so results do not
depend on the order agents are iterated in.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import MutableSequence

from .randomness import (
    RngStream,
    ThresholdInterval,
    aggregate,
    draw_aggregation,
    draw_measures,
    draw_threshold,
)
from .scenario import Scenario, SchemaElement, Side
from .similarity import ALL_MEASURES, Measure, TokenizedName, normalize, score


class AgentPhase(str, Enum):
    PERCEIVING = "perceiving"
    DECIDING = "deciding"
    ACTING = "acting"


class AgentStatus(str, Enum):
    SEARCHING = "searching"
    COMMITTED = "committed"
    MATCHED = "matched"


class DecisionKind(str, Enum):
    SELECT_CANDIDATE = "select"
    KEEP_CANDIDATE = "keep"
    RESET_BELIEFS = "reset"
    CONFIRM_CONSENSUS = "confirm"
    NO_OP = "noop"


@dataclass(frozen=True)
class Decision:
    """Outcome of one decision phase; `score` is the candidate's aggregate this tick."""

    kind: DecisionKind
    target: str | None = None
    score: float | None = None


@dataclass
class AgentState:
    """One element's runtime beliefs while it searches for its consensual match."""

    element: SchemaElement
    patience_left: int
    phase: AgentPhase = AgentPhase.PERCEIVING
    candidate: str | None = None
    candidate_streak: int = 0
    status: AgentStatus = AgentStatus.SEARCHING
    inbound_nominations: frozenset[str] = frozenset()
    # Running aggregate-score bookkeeping for the current candidate.
    score_sum: float = 0.0
    score_ticks: int = 0

    @property
    def id(self) -> str:
        return self.element.id

    def mean_candidate_score(self) -> float:
        return self.score_sum / self.score_ticks if self.score_ticks else 0.0


@dataclass(frozen=True)
class SimulationConfig:
    """Every knob of one simulation run."""

    threshold_interval: ThresholdInterval = ThresholdInterval(0.45, 0.65)
    measures_per_tick: int = 3
    convergence_streak: int = 3
    patience: int = 10
    max_ticks: int = 500
    measure_pool: frozenset[Measure] = ALL_MEASURES

    def __post_init__(self) -> None:
        if self.max_ticks < 1:
            raise ValueError("max_ticks must be at least 1")
        if self.convergence_streak < 1:
            raise ValueError("convergence_streak must be at least 1")
        if self.patience < self.convergence_streak:
            raise ValueError("patience must be >= convergence_streak")
        if not self.measure_pool:
            raise ValueError("measure pool is empty")
        if not 1 <= self.measures_per_tick <= len(self.measure_pool):
            raise ValueError(
                f"measures_per_tick must be in 1..{len(self.measure_pool)}, got {self.measures_per_tick}"
            )


@dataclass(frozen=True)
class MatchedPair:
    source_id: str
    target_id: str
    mean_score: float


@dataclass(frozen=True)
class SimulationResult:
    """The 1:1 correspondence set one seeded run converged to."""

    matched_pairs: tuple[MatchedPair, ...]
    unmatched: tuple[str, ...]
    ticks_used: int
    seed: int
    stream_id: int

    def pair_ids(self) -> frozenset[tuple[str, str]]:
        return frozenset((p.source_id, p.target_id) for p in self.matched_pairs)

    def to_dict(self) -> dict:
        return {
            "stream_id": self.stream_id,
            "ticks_used": self.ticks_used,
            "matched": [
                {"source_id": p.source_id, "target_id": p.target_id, "mean_score": p.mean_score}
                for p in self.matched_pairs
            ],
            "unmatched": list(self.unmatched),
        }


class MatchBoard:
    """The shared environment: standing nominations, this tick's confirmations,
    and the growing matched relation."""

    def __init__(self, scenario: Scenario, cfg: SimulationConfig):
        self.cfg = cfg
        self.source_agents = [
            AgentState(element=e, patience_left=cfg.patience) for e in scenario.source.elements
        ]
        self.target_agents = [
            AgentState(element=e, patience_left=cfg.patience) for e in scenario.target.elements
        ]
        self.agents_by_id = {a.id: a for a in self.source_agents + self.target_agents}
        self.nominations: dict[str, str] = {}
        self.confirmations: dict[str, str] = {}
        self.matched: dict[str, str] = {}  # both directions
        self.pair_scores: dict[tuple[str, str], float] = {}

    def active(self, agents: list[AgentState]) -> list[AgentState]:
        return [a for a in agents if a.status is not AgentStatus.MATCHED]

    def begin_tick(self) -> None:
        self.confirmations = {}


def perceive(
    agent: AgentState,
    opposites: list[AgentState],
    rng: RngStream,
    cfg: SimulationConfig,
    names: dict[str, TokenizedName] | None = None,
) -> dict[str, float]:
    """Score every available opposite element with freshly drawn measures.

    Returns the aggregated score per opposite id and refreshes the agent's
    inbound nominations from the opposites' standing candidates. The caller
    must not pass matched agents, nor call this on one.
    """
    agent.phase = AgentPhase.PERCEIVING
    agent.inbound_nominations = frozenset(
        o.id for o in opposites if o.candidate == agent.id
    )
    if not opposites:
        agent.phase = AgentPhase.DECIDING
        return {}
    if names is None:
        names = {a.id: normalize(a.element.name) for a in opposites + [agent]}
    measures = sorted(draw_measures(rng, cfg.measure_pool, cfg.measures_per_tick), key=lambda m: m.value)
    agg = draw_aggregation(rng, len(measures))
    own = names[agent.id]
    percepts: dict[str, float] = {}
    for opposite in opposites:
        other = names[opposite.id]
        percepts[opposite.id] = aggregate(agg, [score(m, own, other) for m in measures])
    agent.phase = AgentPhase.DECIDING
    return percepts


def decide(
    agent: AgentState,
    percepts: dict[str, float],
    rng: RngStream,
    cfg: SimulationConfig,
) -> Decision:
    """Pick this tick's action from the percepts and a fresh threshold draw.

    The best-scoring opposite becomes (or remains) the candidate when it
    clears the threshold; a candidate held for `convergence_streak` ticks and
    nominating back is confirmed; exhausted patience resets the beliefs.
    Ties on the top score go to the lowest opposite id.
    """
    agent.phase = AgentPhase.DECIDING
    threshold = draw_threshold(rng, cfg.threshold_interval)
    best_id: str | None = None
    best_score = 0.0
    if percepts:
        best_id = min(percepts, key=lambda oid: (-percepts[oid], oid))
        best_score = percepts[best_id]
    if best_id is None or best_score < threshold:
        if agent.patience_left - 1 <= 0:
            return Decision(DecisionKind.RESET_BELIEFS)
        return Decision(DecisionKind.NO_OP)
    if best_id == agent.candidate:
        kind = DecisionKind.KEEP_CANDIDATE
        streak = agent.candidate_streak + 1
    else:
        kind = DecisionKind.SELECT_CANDIDATE
        streak = 1
    if streak >= cfg.convergence_streak and best_id in agent.inbound_nominations:
        return Decision(DecisionKind.CONFIRM_CONSENSUS, target=best_id, score=best_score)
    return Decision(kind, target=best_id, score=best_score)


def act(agent: AgentState, decision: Decision, board: MatchBoard) -> AgentState:
    """Apply a decision: update beliefs and publish nominations/confirmations."""
    agent.phase = AgentPhase.ACTING
    kind = decision.kind
    if kind is DecisionKind.NO_OP:
        agent.patience_left -= 1
    elif kind is DecisionKind.RESET_BELIEFS:
        agent.candidate = None
        agent.candidate_streak = 0
        agent.patience_left = board.cfg.patience
        agent.status = AgentStatus.SEARCHING
        agent.score_sum = 0.0
        agent.score_ticks = 0
        board.nominations.pop(agent.id, None)
    else:
        assert decision.target is not None and decision.score is not None
        if decision.target == agent.candidate:
            agent.candidate_streak += 1
            agent.score_sum += decision.score
            agent.score_ticks += 1
        else:
            agent.candidate = decision.target
            agent.candidate_streak = 1
            agent.score_sum = decision.score
            agent.score_ticks = 1
        board.nominations[agent.id] = decision.target
        if kind is DecisionKind.CONFIRM_CONSENSUS:
            agent.status = AgentStatus.COMMITTED
            board.confirmations[agent.id] = decision.target
    agent.phase = AgentPhase.PERCEIVING
    return agent


def detect_consensus(board: MatchBoard) -> set[tuple[str, str]]:
    """Collect the pairs that confirmed each other this tick and mark them matched."""
    pairs: set[tuple[str, str]] = set()
    for agent_id, partner_id in sorted(board.confirmations.items()):
        agent = board.agents_by_id[agent_id]
        if agent.element.side is not Side.SOURCE:
            continue
        if board.confirmations.get(partner_id) == agent_id:
            pairs.add((agent_id, partner_id))
    for source_id, target_id in sorted(pairs):
        source = board.agents_by_id[source_id]
        target = board.agents_by_id[target_id]
        source.status = AgentStatus.MATCHED
        target.status = AgentStatus.MATCHED
        board.matched[source_id] = target_id
        board.matched[target_id] = source_id
        board.pair_scores[(source_id, target_id)] = (
            source.mean_candidate_score() + target.mean_candidate_score()
        ) / 2.0
    return pairs


def run_simulation(
    scenario: Scenario,
    cfg: SimulationConfig,
    rng: RngStream,
    trace: MutableSequence[dict] | None = None,
) -> SimulationResult:
    """Run one simulation to quiescence or the tick cap.

    Fully determined by (scenario, cfg, rng identity). When `trace` is given,
    per-agent decision records and match events are appended to it.
    """
    board = MatchBoard(scenario, cfg)
    names = {
        a.id: normalize(a.element.name) for a in board.source_agents + board.target_agents
    }
    ticks_used = 0
    for tick in range(1, cfg.max_ticks + 1):
        active_source = board.active(board.source_agents)
        active_target = board.active(board.target_agents)
        if not active_source or not active_target:
            break
        ticks_used = tick
        board.begin_tick()

        decisions: dict[str, Decision] = {}
        for agent, opposites in (
            *((a, active_target) for a in active_source),
            *((a, active_source) for a in active_target),
        ):
            agent_rng = rng.substream(agent.id, tick)
            percepts = perceive(agent, opposites, agent_rng, cfg, names)
            decision = decide(agent, percepts, agent_rng, cfg)
            decisions[agent.id] = decision
            if trace is not None:
                trace.append({
                    "tick": tick,
                    "agent": agent.id,
                    "decision": decision.kind.value,
                    "target": decision.target,
                    "scores": dict(sorted(percepts.items())),
                })
        for agent in active_source + active_target:
            act(agent, decisions[agent.id], board)
        for source_id, target_id in sorted(detect_consensus(board)):
            if trace is not None:
                trace.append({
                    "tick": tick,
                    "event": "matched",
                    "source": source_id,
                    "target": target_id,
                })

    matched_pairs = tuple(
        MatchedPair(source_id=s, target_id=t, mean_score=board.pair_scores[(s, t)])
        for s, t in sorted(
            (s, t) for s, t in board.matched.items()
            if board.agents_by_id[s].element.side is Side.SOURCE
        )
    )
    unmatched = tuple(sorted(
        a.id for a in board.source_agents + board.target_agents
        if a.status is not AgentStatus.MATCHED
    ))
    return SimulationResult(
        matched_pairs=matched_pairs,
        unmatched=unmatched,
        ticks_used=ticks_used,
        seed=rng.seed,
        stream_id=rng.stream_id,
    )
