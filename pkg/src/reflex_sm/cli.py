"""Command-line front end: reproducible matching experiments from one binary.

Thin client over the core package; the long-running HTTP service offers the
same operations (`reflex-sm serve`). Exit codes: 0 success, 1 flag/validation
problem, 2 unreadable or invalid input file.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from .engine import SimulationConfig, run_simulation
from .evaluation import (
    comparison_table,
    experiment_table,
    score_matching,
    sweep_csv,
    sweep_sims,
)
from .meta import MetaConfig, combined_to_json, repeat_meta, run_meta
from .randomness import RngStream, ThresholdInterval
from .scenario import (
    FIXTURE_NAMES,
    ParseError,
    Scenario,
    ValidationError,
    builtin_fixture,
    builtin_fixtures,
    heterogeneity_index,
    load_scenario,
)
from .similarity import ALL_MEASURES, Measure

DEFAULT_SEED = 7
SEED_ENV_VAR = "REFLEX_SM_SEED"

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_IO = 2


class _UsageError(Exception):
    """Flag values outside their documented ranges."""


class _Parser(argparse.ArgumentParser):
    """argparse that exits 1 (not 2) on bad usage, per the CLI contract."""

    def error(self, message: str):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _default_seed() -> int:
    raw = os.environ.get(SEED_ENV_VAR)
    if raw is None:
        return DEFAULT_SEED
    try:
        return int(raw)
    except ValueError:
        raise _UsageError(f"{SEED_ENV_VAR} must be an integer, got {raw!r}") from None


def _add_scenario_args(parser: argparse.ArgumentParser) -> None:
    group = parser.add_mutually_exclusive_group(required=True)
    group.add_argument("--fixture", metavar="NAME",
                       help=f"bundled scenario: {', '.join(n.lower() for n in FIXTURE_NAMES)}")
    group.add_argument("--scenario", metavar="PATH", help="scenario JSON file")


def _add_engine_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--seed", type=int, default=None,
                        help=f"root seed (default: ${SEED_ENV_VAR} or {DEFAULT_SEED})")
    parser.add_argument("--threshold-lo", type=float, default=0.45,
                        help="lower bound of the acceptance-threshold interval (default 0.45)")
    parser.add_argument("--threshold-hi", type=float, default=0.65,
                        help="upper bound of the acceptance-threshold interval (default 0.65)")
    parser.add_argument("--measures-per-tick", type=int, default=3,
                        help="how many measures each agent draws per tick (default 3)")
    parser.add_argument("--measures", metavar="LIST", default=None,
                        help="comma list restricting the measure pool "
                             "(levenshtein,jaro-winkler,bigram-dice,trigram-jaccard,monge-elkan)")
    parser.add_argument("--convergence-streak", type=int, default=3,
                        help="ticks a candidate must be held before confirming (default 3)")
    parser.add_argument("--patience", type=int, default=10,
                        help="below-threshold ticks before beliefs reset (default 10)")
    parser.add_argument("--max-ticks", type=int, default=500,
                        help="hard cap on simulation ticks (default 500)")


def _add_meta_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--sims", type=int, default=10,
                        help="simulations per meta-simulation (default 10)")
    parser.add_argument("--cutoff", type=float, default=0.5,
                        help="frequency cutoff for the final matching (default 0.5)")
    parser.add_argument("--workers", type=int, default=1,
                        help="parallel workers for the simulation batch (default 1)")


def build_parser() -> _Parser:
    parser = _Parser(prog="reflex-sm",
                     description="Stochastic multi-agent schema matching experiments.")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    p_fixtures = sub.add_parser("fixtures", help="list the bundled benchmark scenarios")
    p_fixtures.set_defaults(func=_cmd_fixtures)

    p_run = sub.add_parser("run", help="execute one simulation and print its matching")
    _add_scenario_args(p_run)
    _add_engine_args(p_run)
    p_run.add_argument("--stream-id", type=int, default=0, help="stream id of the run (default 0)")
    p_run.add_argument("--trace", metavar="PATH", default=None,
                       help="write per-tick decision records as JSON lines")
    p_run.add_argument("--out", metavar="PATH", default=None, help="write the run result as JSON")
    p_run.set_defaults(func=_cmd_run)

    p_meta = sub.add_parser("meta", help="run a meta-simulation and write its report")
    _add_scenario_args(p_meta)
    _add_engine_args(p_meta)
    _add_meta_args(p_meta)
    p_meta.add_argument("--repetitions", type=int, default=1,
                        help="repeat the meta-simulation on derived seeds (default 1)")
    p_meta.add_argument("--out", metavar="PATH", default=None, help="write the report JSON here")
    p_meta.add_argument("--out-csv", metavar="PATH", default=None,
                        help="write the pair-frequency table as CSV")
    p_meta.set_defaults(func=_cmd_meta)

    p_eval = sub.add_parser("eval", help="score a meta report against ground truth")
    p_eval.add_argument("report", metavar="REPORT.json", help="report written by `meta`")
    p_eval.add_argument("--scenario", metavar="PATH", default=None,
                        help="scenario file (defaults to the bundled scenario named in the report)")
    p_eval.add_argument("--out-csv", metavar="PATH", default=None, help="write rows as CSV")
    p_eval.add_argument("--json", dest="json_out", metavar="PATH", default=None,
                        help="write the evaluation as JSON")
    p_eval.set_defaults(func=_cmd_eval)

    p_sweep = sub.add_parser("sweep", help="compare batch sizes by mean correctness")
    _add_scenario_args(p_sweep)
    _add_engine_args(p_sweep)
    p_sweep.add_argument("--sims-values", metavar="LIST", default="3,10",
                         help="comma list of batch sizes to compare (default 3,10)")
    p_sweep.add_argument("--repetitions", type=int, default=30,
                         help="meta-simulations averaged per batch size (default 30)")
    p_sweep.add_argument("--cutoff", type=float, default=0.5,
                         help="frequency cutoff for the final matching (default 0.5)")
    p_sweep.add_argument("--workers", type=int, default=1,
                         help="parallel workers for each batch (default 1)")
    p_sweep.add_argument("--out-csv", metavar="PATH", default=None,
                         help="write (sims, mean_pct) rows as CSV")
    p_sweep.set_defaults(func=_cmd_sweep)

    p_repro = sub.add_parser("reproduce",
                             help="all bundled scenarios x 3 meta-simulations, combined table")
    _add_engine_args(p_repro)
    _add_meta_args(p_repro)
    p_repro.add_argument("--compare", action="store_true",
                         help="append the side-by-side reference comparison table")
    p_repro.add_argument("--out-csv", metavar="PATH", default=None,
                         help="write the combined table as CSV")
    p_repro.set_defaults(func=_cmd_reproduce)

    p_serve = sub.add_parser("serve", help="start the HTTP service")
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--port", type=int, default=8000)
    p_serve.set_defaults(func=_cmd_serve)

    return parser


def _require(condition: bool, message: str) -> None:
    if not condition:
        raise _UsageError(message)


def _resolve_scenario(args: argparse.Namespace) -> Scenario:
    if args.fixture is not None:
        try:
            return builtin_fixture(args.fixture)
        except KeyError as exc:
            raise _UsageError(str(exc.args[0])) from None
    return load_scenario(args.scenario)


def _measure_pool(spec: str | None) -> frozenset[Measure]:
    if spec is None:
        return ALL_MEASURES
    try:
        pool = frozenset(Measure.from_name(part) for part in spec.split(",") if part.strip())
    except ValueError as exc:
        raise _UsageError(str(exc)) from None
    _require(bool(pool), "--measures must name at least one measure")
    return pool


def _simulation_config(args: argparse.Namespace) -> SimulationConfig:
    _require(0.0 <= args.threshold_lo <= args.threshold_hi <= 1.0,
             "threshold interval must satisfy 0 <= lo <= hi <= 1")
    pool = _measure_pool(args.measures)
    _require(1 <= args.measures_per_tick <= len(pool),
             f"--measures-per-tick must be in 1..{len(pool)}")
    _require(args.convergence_streak >= 1, "--convergence-streak must be at least 1")
    _require(args.patience >= args.convergence_streak,
             "--patience must be >= --convergence-streak")
    _require(args.max_ticks >= 1, "--max-ticks must be at least 1")
    return SimulationConfig(
        threshold_interval=ThresholdInterval(args.threshold_lo, args.threshold_hi),
        measures_per_tick=args.measures_per_tick,
        convergence_streak=args.convergence_streak,
        patience=args.patience,
        max_ticks=args.max_ticks,
        measure_pool=pool,
    )


def _meta_config(args: argparse.Namespace) -> MetaConfig:
    _require(args.sims >= 1, "--sims must be at least 1")
    _require(0.0 < args.cutoff <= 1.0, "--cutoff must be in (0, 1]")
    _require(args.workers >= 1, "--workers must be at least 1")
    seed = args.seed if args.seed is not None else _default_seed()
    return MetaConfig(
        seed=seed,
        n_simulations=args.sims,
        frequency_cutoff=args.cutoff,
        base=_simulation_config(args),
    )


def _write_text(path: str, text: str) -> None:
    Path(path).write_text(text, encoding="utf-8")


def _cmd_fixtures(args: argparse.Namespace) -> int:
    print(f"{'name':<8} {'source':>6} {'target':>6} {'pairs':>5} {'band':<6} {'heterogeneity':>13}")
    for sc in builtin_fixtures():
        print(f"{sc.name:<8} {len(sc.source):>6} {len(sc.target):>6} "
              f"{len(sc.expected):>5} {sc.band.value:<6} {heterogeneity_index(sc):>13.3f}")
    return EXIT_OK


def _cmd_run(args: argparse.Namespace) -> int:
    scenario = _resolve_scenario(args)
    cfg = _simulation_config(args)
    seed = args.seed if args.seed is not None else _default_seed()
    trace: list[dict] | None = [] if args.trace else None
    result = run_simulation(scenario, cfg, RngStream(seed, args.stream_id), trace=trace)
    names = {e.id: e.name for e in scenario.source.elements + scenario.target.elements}
    print(f"{scenario.name}: seed={seed} stream={args.stream_id} ticks={result.ticks_used}")
    for pair in result.matched_pairs:
        print(f"  {pair.source_id} ({names[pair.source_id]}) -> "
              f"{pair.target_id} ({names[pair.target_id]})  score={pair.mean_score:.4f}")
    if result.unmatched:
        print(f"  unmatched: {', '.join(result.unmatched)}")
    if args.trace:
        _write_text(args.trace, "".join(json.dumps(rec, sort_keys=True) + "\n" for rec in trace))
    if args.out:
        doc = dict(result.to_dict(), scenario=scenario.name, seed=seed)
        _write_text(args.out, json.dumps(doc, indent=2, sort_keys=True) + "\n")
    return EXIT_OK


def _cmd_meta(args: argparse.Namespace) -> int:
    _require(args.repetitions >= 1, "--repetitions must be at least 1")
    scenario = _resolve_scenario(args)
    cfg = _meta_config(args)
    if args.repetitions == 1:
        report = run_meta(scenario, cfg, workers=args.workers)
        ev = score_matching(report.final_matching, scenario.expected, scenario.name)
        print(f"{scenario.name}: seed={cfg.seed} sims={cfg.n_simulations} "
              f"final={len(report.final_matching)} correct={ev.correct_found}/{ev.matchings_to_find}")
        if args.out:
            _write_text(args.out, report.to_json())
        if args.out_csv:
            _write_text(args.out_csv, report.frequency_csv())
    else:
        reports, summary = repeat_meta(scenario, cfg, args.repetitions, workers=args.workers)
        for i, report in enumerate(reports, start=1):
            ev = score_matching(report.final_matching, scenario.expected, scenario.name)
            print(f"{scenario.name} meta {i}: seed={report.seed} "
                  f"correct={ev.correct_found}/{ev.matchings_to_find}")
        if args.out:
            _write_text(args.out, combined_to_json(reports, summary, cfg.seed))
        if args.out_csv:
            _write_text(args.out_csv, reports[-1].frequency_csv())
    return EXIT_OK


def _load_report_rows(path: str) -> tuple[str, list[tuple[int, frozenset[tuple[str, str]]]]]:
    """Read a meta report file; returns (scenario name, [(meta index, final pairs)])."""
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ParseError(f"report is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ParseError("report must be a JSON object")
    if "reports" in doc:
        inner = doc["reports"]
        if not isinstance(inner, list) or not inner:
            raise ParseError("'reports' must be a non-empty list")
        name = inner[0].get("scenario")
        rows = [(i, frozenset((s, t) for s, t in rep["final_matching"]))
                for i, rep in enumerate(inner, start=1)]
    else:
        name = doc.get("scenario")
        if "final_matching" not in doc:
            raise ParseError("report lacks a 'final_matching' key")
        rows = [(1, frozenset((s, t) for s, t in doc["final_matching"]))]
    if not isinstance(name, str) or not name:
        raise ParseError("report lacks a scenario name")
    return name, rows


def _cmd_eval(args: argparse.Namespace) -> int:
    name, rows = _load_report_rows(args.report)
    if args.scenario:
        scenario = load_scenario(args.scenario)
    else:
        try:
            scenario = builtin_fixture(name)
        except KeyError:
            raise _UsageError(
                f"report scenario {name!r} is not bundled; pass --scenario PATH") from None
    results = [(scenario.name, index, score_matching(found, scenario.expected, scenario.name))
               for index, found in rows]
    text, csv_text = experiment_table(results)
    print(text, end="")
    if args.out_csv:
        _write_text(args.out_csv, csv_text)
    if args.json_out:
        doc = [r.to_dict() | {"meta_simulation": i} for _, i, r in results]
        _write_text(args.json_out, json.dumps(doc, indent=2, sort_keys=True) + "\n")
    return EXIT_OK


def _cmd_sweep(args: argparse.Namespace) -> int:
    try:
        sims_values = [int(part) for part in args.sims_values.split(",") if part.strip()]
    except ValueError:
        raise _UsageError("--sims-values must be a comma list of integers") from None
    _require(bool(sims_values), "--sims-values must be non-empty")
    _require(all(v >= 1 for v in sims_values), "--sims-values entries must be at least 1")
    _require(args.repetitions >= 1, "--repetitions must be at least 1")
    _require(0.0 < args.cutoff <= 1.0, "--cutoff must be in (0, 1]")
    _require(args.workers >= 1, "--workers must be at least 1")
    scenario = _resolve_scenario(args)
    seed = args.seed if args.seed is not None else _default_seed()
    cfg = MetaConfig(seed=seed, frequency_cutoff=args.cutoff, base=_simulation_config(args))
    rows = sweep_sims(scenario, cfg, sims_values, args.repetitions, workers=args.workers)
    print(f"{scenario.name}: mean pct correct over {args.repetitions} repetitions")
    for sims, mean_pct in rows:
        print(f"  sims={sims:<4d} mean_pct={mean_pct * 100:.1f}%")
    if args.out_csv:
        _write_text(args.out_csv, sweep_csv(rows))
    return EXIT_OK


def _cmd_reproduce(args: argparse.Namespace) -> int:
    cfg = _meta_config(args)
    results = []
    comparisons = []
    for scenario in builtin_fixtures():
        reports, _ = repeat_meta(scenario, cfg, repetitions=3, workers=args.workers)
        for i, report in enumerate(reports, start=1):
            ev = score_matching(report.final_matching, scenario.expected, scenario.name)
            results.append((scenario.name, i, ev))
        comparisons.append((scenario.name,
                            score_matching(reports[-1].final_matching, scenario.expected,
                                           scenario.name)))
    text, csv_text = experiment_table(results)
    print(text, end="")
    if args.compare:
        print()
        print(comparison_table(comparisons), end="")
    if args.out_csv:
        _write_text(args.out_csv, csv_text)
    return EXIT_OK


def _cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .service.app import create_app

    uvicorn.run(create_app(), host=args.host, port=args.port)
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except _UsageError as exc:
        print(f"reflex-sm: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ParseError, ValidationError) as exc:
        print(f"reflex-sm: {exc}", file=sys.stderr)
        return EXIT_IO
    except OSError as exc:
        print(f"reflex-sm: {exc}", file=sys.stderr)
        return EXIT_IO


def entrypoint() -> None:
    raise SystemExit(main())


if __name__ == "__main__":
    entrypoint()
