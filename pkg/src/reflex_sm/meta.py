"""Meta-simulation: batches of seeded runs turned into a frequency-ranked matching.

A meta-simulation executes N independent runs (stream ids 0..N-1 off one
seed), tallies how often each pair occurred, and keeps the pairs whose
frequency clears the cutoff, resolved to a 1:1 matching. Reports are
deterministic: same scenario and config, byte-identical JSON, regardless of
how many workers executed the runs.
"""

from __future__ import annotations

import csv
import io
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

from .engine import SimulationConfig, SimulationResult, run_simulation
from .randomness import RngStream, derive_key
from .scenario import Scenario

_SEED_MASK = (1 << 64) - 1


@dataclass(frozen=True)
class MetaConfig:
    """Batch size, acceptance cutoff, per-run config and the root seed."""

    seed: int
    n_simulations: int = 10
    frequency_cutoff: float = 0.5
    base: SimulationConfig = SimulationConfig()

    def __post_init__(self) -> None:
        if self.n_simulations < 1:
            raise ValueError("n_simulations must be at least 1")
        if not 0.0 < self.frequency_cutoff <= 1.0:
            raise ValueError("frequency_cutoff must be in (0, 1]")


@dataclass(frozen=True)
class MetaReport:
    """Per-pair occurrence statistics over one batch plus the selected matching."""

    scenario_name: str
    seed: int
    n_simulations: int
    frequency_cutoff: float
    per_pair_frequency: dict[tuple[str, str], float]
    per_pair_mean_score: dict[tuple[str, str], float]
    final_matching: frozenset[tuple[str, str]]
    runs: tuple[SimulationResult, ...]

    def to_dict(self) -> dict:
        pairs = [
            {
                "source_id": s,
                "target_id": t,
                "frequency": self.per_pair_frequency[(s, t)],
                "mean_score": self.per_pair_mean_score[(s, t)],
                "selected": 1 if (s, t) in self.final_matching else 0,
            }
            for s, t in sorted(self.per_pair_frequency)
        ]
        return {
            "scenario": self.scenario_name,
            "seed": self.seed,
            "n_simulations": self.n_simulations,
            "frequency_cutoff": self.frequency_cutoff,
            "pairs": pairs,
            "final_matching": [[s, t] for s, t in sorted(self.final_matching)],
            "runs": [r.to_dict() for r in self.runs],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    def frequency_csv(self) -> str:
        out = io.StringIO()
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(["source_id", "target_id", "frequency", "mean_score", "selected"])
        for s, t in sorted(self.per_pair_frequency):
            writer.writerow([
                s,
                t,
                self.per_pair_frequency[(s, t)],
                self.per_pair_mean_score[(s, t)],
                1 if (s, t) in self.final_matching else 0,
            ])
        return out.getvalue()


def select_final(
    freqs: dict[tuple[str, str], float],
    mean_scores: dict[tuple[str, str], float],
    cutoff: float,
) -> set[tuple[str, str]]:
    """Keep pairs at or above the cutoff, greedily resolved to a 1:1 matching.

    Candidates are taken in (frequency desc, mean score desc, source id asc,
    target id asc) order; a pair is kept only while both endpoints are free.
    """
    ranked = sorted(
        (pair for pair, f in freqs.items() if f >= cutoff),
        key=lambda p: (-freqs[p], -mean_scores.get(p, 0.0), p[0], p[1]),
    )
    chosen: set[tuple[str, str]] = set()
    used_sources: set[str] = set()
    used_targets: set[str] = set()
    for s, t in ranked:
        if s in used_sources or t in used_targets:
            continue
        chosen.add((s, t))
        used_sources.add(s)
        used_targets.add(t)
    return chosen


def run_meta(scenario: Scenario, cfg: MetaConfig, workers: int = 1) -> MetaReport:
    """Execute the batch and assemble the report, in stream-id order."""
    stream_ids = range(cfg.n_simulations)

    def one(stream_id: int) -> SimulationResult:
        return run_simulation(scenario, cfg.base, RngStream(cfg.seed, stream_id))

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            runs = tuple(pool.map(one, stream_ids))
    else:
        runs = tuple(one(i) for i in stream_ids)

    counts: dict[tuple[str, str], int] = {}
    score_sums: dict[tuple[str, str], float] = {}
    for result in runs:
        for pair in result.matched_pairs:
            key = (pair.source_id, pair.target_id)
            counts[key] = counts.get(key, 0) + 1
            score_sums[key] = score_sums.get(key, 0.0) + pair.mean_score
    freqs = {pair: n / cfg.n_simulations for pair, n in counts.items()}
    mean_scores = {pair: score_sums[pair] / counts[pair] for pair in counts}
    final = select_final(freqs, mean_scores, cfg.frequency_cutoff)
    return MetaReport(
        scenario_name=scenario.name,
        seed=cfg.seed,
        n_simulations=cfg.n_simulations,
        frequency_cutoff=cfg.frequency_cutoff,
        per_pair_frequency=freqs,
        per_pair_mean_score=mean_scores,
        final_matching=frozenset(final),
        runs=runs,
    )


def repetition_seed(seed: int, repetition: int) -> int:
    """The derived seed for one repetition of a repeated meta-simulation."""
    return derive_key(seed, "repetition", repetition) & _SEED_MASK


def repeat_meta(
    scenario: Scenario,
    cfg: MetaConfig,
    repetitions: int,
    workers: int = 1,
) -> tuple[list[MetaReport], dict[tuple[str, str], int]]:
    """Run the meta-simulation `repetitions` times on derived seeds.

    Returns all reports plus, per pair, in how many repetitions' final
    matching it appeared.
    """
    if repetitions < 1:
        raise ValueError("repetitions must be at least 1")
    reports = []
    for rep in range(repetitions):
        rep_cfg = MetaConfig(
            seed=repetition_seed(cfg.seed, rep),
            n_simulations=cfg.n_simulations,
            frequency_cutoff=cfg.frequency_cutoff,
            base=cfg.base,
        )
        reports.append(run_meta(scenario, rep_cfg, workers=workers))
    summary: dict[tuple[str, str], int] = {}
    for report in reports:
        for pair in report.final_matching:
            summary[pair] = summary.get(pair, 0) + 1
    return reports, summary


def combined_to_json(reports: list[MetaReport], summary: dict[tuple[str, str], int], seed: int) -> str:
    """Serialize a repeated meta-simulation: all reports plus the repeatability summary."""
    doc = {
        "seed": seed,
        "repetitions": len(reports),
        "reports": [r.to_dict() for r in reports],
        "pair_repetition_counts": [
            {"source_id": s, "target_id": t, "repetitions": n}
            for (s, t), n in sorted(summary.items())
        ],
    }
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"
