"""Scoring found matchings against ground truth and rendering experiment tables.

The headline metric is the share of expected correspondences that were found
("% C.M.F."). Precision is reported alongside it so that a missing pair can
be told apart from a wrong one.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from typing import Iterable

from .meta import MetaConfig, repeat_meta
from .scenario import GroundTruthMapping, Scenario

# Reference results of the COMA matcher on same-size scenarios, shipped as
# static constants for side-by-side tables (the tool itself is never run).
# Per scenario name: (matchings to find, correct matchings found).
COMA_REFERENCE: dict[str, tuple[int, int]] = {
    "Person": (6, 5),
    "Order": (8, 6),
    "Travel": (15, 13),
}


@dataclass(frozen=True)
class EvalReport:
    """Counts and rates of one found matching against the expected one."""

    scenario_name: str
    matchings_to_find: int
    correct_found: int
    spurious_found: int
    pct_correct: float
    precision: float
    recall: float

    def to_dict(self) -> dict:
        return {
            "scenario": self.scenario_name,
            "matchings_to_find": self.matchings_to_find,
            "correct_found": self.correct_found,
            "spurious_found": self.spurious_found,
            "pct_correct": self.pct_correct,
            "precision": self.precision,
            "recall": self.recall,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"


def score_matching(
    found: Iterable[tuple[str, str]],
    expected: GroundTruthMapping | frozenset[tuple[str, str]] | set[tuple[str, str]],
    scenario_name: str = "",
) -> EvalReport:
    """Count correct and spurious pairs in `found` against the expected mapping.

    Recall is 1.0 when there was nothing to find, and precision is 1.0 when
    nothing was found.
    """
    expected_pairs = expected.pairs if isinstance(expected, GroundTruthMapping) else frozenset(expected)
    found_pairs = frozenset(found)
    correct = len(found_pairs & expected_pairs)
    spurious = len(found_pairs - expected_pairs)
    to_find = len(expected_pairs)
    recall = correct / to_find if to_find else 1.0
    precision = correct / (correct + spurious) if found_pairs else 1.0
    return EvalReport(
        scenario_name=scenario_name,
        matchings_to_find=to_find,
        correct_found=correct,
        spurious_found=spurious,
        pct_correct=recall,
        precision=precision,
        recall=recall,
    )


_TABLE_HEADER = ("Scenario", "M.S.", "M. to F.", "C.M.F.", "% C.M.F.")


def _format_pct(value: float) -> str:
    return f"{round(value * 100)}%"


def _render_aligned(header: tuple[str, ...], rows: list[tuple[str, ...]]) -> str:
    widths = [max(len(header[i]), *(len(r[i]) for r in rows)) if rows else len(header[i])
              for i in range(len(header))]
    lines = ["  ".join(h.ljust(widths[i]) for i, h in enumerate(header)).rstrip()]
    for row in rows:
        lines.append("  ".join(cell.ljust(widths[i]) for i, cell in enumerate(row)).rstrip())
    return "\n".join(lines) + "\n"


def experiment_table(results: list[tuple[str, int, EvalReport]]) -> tuple[str, str]:
    """Render combined experiment rows as (aligned text, CSV).

    Rows come out in scenario-then-index order; scenarios keep their first-
    appearance order so the canonical Person/Order/Travel sequence survives.
    """
    scenario_order: dict[str, int] = {}
    for name, _, _ in results:
        scenario_order.setdefault(name, len(scenario_order))
    ordered = sorted(results, key=lambda row: (scenario_order[row[0]], row[1]))

    text_rows = [
        (name, str(index), str(rep.matchings_to_find), str(rep.correct_found), _format_pct(rep.pct_correct))
        for name, index, rep in ordered
    ]
    text = _render_aligned(_TABLE_HEADER, text_rows)

    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["scenario", "meta_simulation", "matchings_to_find", "correct_found", "pct_correct"])
    for name, index, rep in ordered:
        writer.writerow([name, index, rep.matchings_to_find, rep.correct_found, rep.pct_correct])
    return text, out.getvalue()


def comparison_table(results: list[tuple[str, EvalReport]]) -> str:
    """Aligned side-by-side table against the shipped COMA reference numbers."""
    header = ("Scenario", "M. to F.", "C.M.F.", "% C.M.F.", "COMA C.M.F.", "COMA % C.M.F.")
    rows = []
    for name, rep in results:
        ref = COMA_REFERENCE.get(name)
        if ref is None:
            ref_found, ref_pct = "-", "-"
        else:
            ref_found = str(ref[1])
            ref_pct = _format_pct(ref[1] / ref[0])
        rows.append((
            name,
            str(rep.matchings_to_find),
            str(rep.correct_found),
            _format_pct(rep.pct_correct),
            ref_found,
            ref_pct,
        ))
    return _render_aligned(header, rows)


def parse_experiment_csv(text: str) -> list[tuple[str, int, int, int, float]]:
    """Parse the CSV emitted by experiment_table back into typed rows."""
    reader = csv.reader(io.StringIO(text))
    header = next(reader)
    if header != ["scenario", "meta_simulation", "matchings_to_find", "correct_found", "pct_correct"]:
        raise ValueError(f"unexpected header: {header}")
    return [(r[0], int(r[1]), int(r[2]), int(r[3]), float(r[4])) for r in reader]


def sweep_sims(
    scenario: Scenario,
    cfg: MetaConfig,
    sims_values: list[int],
    repetitions: int,
    workers: int = 1,
) -> list[tuple[int, float]]:
    """Mean pct_correct per batch size, averaged over repeated meta-simulations."""
    if not sims_values:
        raise ValueError("sims_values must be non-empty")
    rows = []
    for sims in sims_values:
        sweep_cfg = MetaConfig(
            seed=cfg.seed,
            n_simulations=sims,
            frequency_cutoff=cfg.frequency_cutoff,
            base=cfg.base,
        )
        reports, _ = repeat_meta(scenario, sweep_cfg, repetitions, workers=workers)
        pcts = [
            score_matching(r.final_matching, scenario.expected, scenario.name).pct_correct
            for r in reports
        ]
        rows.append((sims, sum(pcts) / len(pcts)))
    return rows


def sweep_csv(rows: list[tuple[int, float]]) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["sims", "mean_pct"])
    for sims, mean_pct in rows:
        writer.writerow([sims, mean_pct])
    return out.getvalue()
