"""Batch front-end: scenario configs in, JSON/CSV reports and figures out.

Exit codes: 0 for any completed evaluation (the verdict is a result, not a
failure), 2 for invalid configuration, 3 for runtime errors.  Every error
path emits a single line ``predlab: error: [CODE] message`` on stderr.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import tempfile
import time
from dataclasses import dataclass
from pathlib import Path

from . import __version__
from . import analysis, bitstreams, core, dyadic, mealy, quantum
from .errors import ConfigError, PredlabError

EXPERIMENT_KINDS = ("dyadic", "mealy-em", "qubit-ec")
EXTRACTOR_KINDS = (
    "window",
    "trial-index",
    "io-log",
    "preparation",
    "script-reader",
    "null",
)
PREDICTOR_KINDS = (
    "identity",
    "constant-0",
    "constant-1",
    "majority",
    "withhold",
    "negate-previous",
)
REPETITION_KINDS = ("fresh-seed", "same-box", "adversarial")
STREAM_KINDS = ("periodic", "rule", "seeded-noise", "file")
NAMED_STATES = {
    "zero": quantum.ZERO,
    "one": quantum.ONE,
    "plus": quantum.PLUS,
    "minus": quantum.MINUS,
}


def _require(condition: bool, message: str) -> None:
    if not condition:
        raise ConfigError(message)


def _kind_of(spec, what: str, known) -> str:
    _require(isinstance(spec, dict), f"{what} spec must be an object")
    kind = spec.get("kind")
    _require(
        kind in known,
        f"unknown {what} kind {kind!r} (known: {', '.join(known)})",
    )
    return kind


def build_stream(spec) -> bitstreams.BitStream:
    kind = _kind_of(spec, "stream", STREAM_KINDS)
    try:
        if kind == "periodic":
            return bitstreams.periodic_stream(
                spec.get("prefix", ""), spec.get("cycle", "0")
            )
        if kind == "rule":
            params = {}
            if "bit" in spec:
                params["bit"] = spec["bit"]
            return bitstreams.make_rule_stream(spec.get("rule", ""), **params)
        if kind == "seeded-noise":
            return bitstreams.make_seeded_noise_stream(int(spec.get("seed", 0)))
        return bitstreams.file_stream(spec["path"], spec.get("total_bits"))
    except PredlabError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"bad stream spec: {exc}") from exc


def _build_seed_source(spec):
    _require(isinstance(spec, dict), "seed_source must be an object")
    if spec.get("fresh"):
        _require(
            spec.get("kind") == "seeded-noise",
            "fresh per-trial seeds require kind 'seeded-noise'",
        )
        return bitstreams.fresh_noise_seeds(int(spec.get("seed", 0)))
    stream = build_stream(spec)
    return lambda i: stream


def build_experiment(spec) -> core.Experiment:
    kind = _kind_of(spec, "experiment", EXPERIMENT_KINDS)
    if kind == "dyadic":
        _require("k" in spec, "dyadic experiment needs a shift count 'k'")
        _require("seed_source" in spec, "dyadic experiment needs a 'seed_source'")
        return dyadic.dyadic_experiment(
            int(spec["k"]), _build_seed_source(spec["seed_source"])
        )
    if kind == "mealy-em":
        automaton_spec = spec.get("automaton", "canonical")
        if automaton_spec == "canonical":
            automaton = mealy.canonical_example()
        elif isinstance(automaton_spec, dict) and "table" in automaton_spec:
            try:
                automaton = mealy.parse_automaton(automaton_spec["table"])
            except ValueError as exc:
                raise ConfigError(f"bad automaton table: {exc}") from exc
        elif isinstance(automaton_spec, dict) and "path" in automaton_spec:
            try:
                automaton = mealy.parse_automaton(
                    Path(automaton_spec["path"]).read_text()
                )
            except (OSError, ValueError) as exc:
                raise ConfigError(f"bad automaton file: {exc}") from exc
        else:
            raise ConfigError(
                "automaton must be 'canonical' or an object with 'table' or 'path'"
            )
        try:
            box = mealy.BlackBox(automaton, spec.get("start"))
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        return mealy.em_experiment(box)
    psi = _build_state(spec.get("psi", "zero"))
    phi = _build_state(spec.get("phi", "plus"))
    source_spec = spec.get("source", {"mode": "born", "seed": 0})
    _require(isinstance(source_spec, dict), "outcome source must be an object")
    mode = source_spec.get("mode")
    if mode == "born":
        source = quantum.BornSource(int(source_spec.get("seed", 0)))
    elif mode == "scripted":
        _require("stream" in source_spec, "scripted source needs a 'stream'")
        source = quantum.ScriptedSource(build_stream(source_spec["stream"]))
    else:
        raise ConfigError(f"unknown outcome-source mode {mode!r} (known: born, scripted)")
    return quantum.ec_experiment(psi, phi, source)


def _build_state(spec) -> quantum.QubitState:
    if isinstance(spec, str):
        _require(
            spec in NAMED_STATES,
            f"unknown state name {spec!r} (known: {', '.join(sorted(NAMED_STATES))})",
        )
        return NAMED_STATES[spec]
    _require(
        isinstance(spec, list) and len(spec) == 2,
        "state must be a name or [[re0,im0],[re1,im1]]",
    )
    try:
        amps = [complex(float(re), float(im)) for re, im in spec]
        return quantum.QubitState(*amps)
    except PredlabError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad state amplitudes: {exc}") from exc


def build_extractor(spec) -> core.Extractor:
    kind = _kind_of(spec, "extractor", EXTRACTOR_KINDS)
    try:
        if kind == "window":
            return dyadic.window_extractor(int(spec["lo"]), int(spec["hi"]))
        if kind == "trial-index":
            return core.trial_index_extractor()
        if kind == "io-log":
            return mealy.io_log_extractor(spec.get("symbol", "z"))
        if kind == "preparation":
            return quantum.preparation_extractor()
        if kind == "script-reader":
            return quantum.script_reader_extractor()
        return core.null_extractor()
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"bad extractor spec: {exc}") from exc


def build_predictor(spec) -> core.Predictor:
    kind = _kind_of(spec, "predictor", PREDICTOR_KINDS)
    fuel = spec.get("fuel")
    if fuel is not None:
        fuel = int(fuel)
    if kind == "identity":
        return dyadic.identity_predictor(fuel)
    if kind == "constant-0":
        return core.constant_predictor(0, fuel)
    if kind == "constant-1":
        return core.constant_predictor(1, fuel)
    if kind == "majority":
        return dyadic.majority_predictor(fuel)
    if kind == "negate-previous":
        return mealy.negate_previous_predictor(fuel)
    return core.withhold_predictor(fuel)


def build_repetition(
    spec, predictor: core.Predictor, extractor: core.Extractor, k_shift: int | None
) -> core.RepetitionProcedure:
    kind = _kind_of(spec, "repetition", REPETITION_KINDS)
    if kind == "fresh-seed":
        source = None
        if "seed_source" in spec:
            source = _build_seed_source(spec["seed_source"])
        return core.FreshSeedRepetition(source)
    if kind == "same-box":
        return mealy.SameBoxRepetition(spec.get("preparation", "x"))
    _require(
        k_shift is not None, "adversarial repetition applies to dyadic experiments"
    )
    _require("l" in spec, "adversarial repetition needs the precision bound 'l'")
    return dyadic.adversarial_repetition(
        predictor, extractor, int(spec["l"]), k_shift, spec.get("base")
    )


@dataclass
class Scenario:
    config: dict
    experiment: core.Experiment
    repetition: core.RepetitionProcedure
    extractor: core.Extractor
    predictor: core.Predictor
    k: int
    n_max: int

    @property
    def id(self) -> str:
        return self.config.get("id", self.experiment.id)


def build_scenario(config) -> Scenario:
    _require(isinstance(config, dict), "scenario must be a JSON object")
    for field_name in ("experiment", "extractor", "predictor", "repetition", "k", "n_max"):
        _require(field_name in config, f"scenario is missing the {field_name!r} field")
    k, n_max = int(config["k"]), int(config["n_max"])
    _require(k >= 1, "k must be >= 1")
    _require(k <= n_max, "k must not exceed n_max")
    experiment = build_experiment(config["experiment"])
    extractor = build_extractor(config["extractor"])
    predictor = build_predictor(config["predictor"])
    k_shift = experiment.k if isinstance(experiment, dyadic.DyadicExperiment) else None
    try:
        repetition = build_repetition(config["repetition"], predictor, extractor, k_shift)
    except PredlabError as exc:
        raise ConfigError(str(exc)) from exc
    return Scenario(config, experiment, repetition, extractor, predictor, k, n_max)


def apply_seed_override(config: dict, seed: int) -> dict:
    """Point every seeded component of the scenario at the given seed."""
    config = json.loads(json.dumps(config))
    exp = config.get("experiment", {})
    if isinstance(exp.get("seed_source"), dict):
        exp["seed_source"]["seed"] = seed
    if isinstance(exp.get("source"), dict) and exp["source"].get("mode") == "born":
        exp["source"]["seed"] = seed
    return config


@dataclass
class RunReport:
    scenario: dict
    report: core.EvaluationReport
    tool_version: str
    wall_time_s: float

    def to_dict(self) -> dict:
        body = {"scenario": self.scenario, "tool_version": self.tool_version}
        body.update(self.report.to_dict())
        body["wall_time_s"] = self.wall_time_s
        return body

    @classmethod
    def from_dict(cls, data: dict) -> "RunReport":
        counts = data["counts"]
        report = core.EvaluationReport(
            k=data["k"],
            n_max=data["n_max"],
            n_used=data["n_used"],
            correct=counts["correct"],
            incorrect=counts["incorrect"],
            withheld=counts["withheld"],
            verdict=core.Verdict(data["verdict"]),
        )
        return cls(data["scenario"], report, data["tool_version"], data["wall_time_s"])


def _atomic_write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _write_json(path: Path, payload: dict) -> None:
    _atomic_write(path, json.dumps(payload, indent=2, sort_keys=True) + "\n")


def write_trials_csv(path: Path, report: core.EvaluationReport) -> None:
    if report.trials is None:
        raise ValueError("report carries no per-trial log")
    buffer = io.StringIO()
    writer = csv.writer(buffer)
    writer.writerow(["index", "extracted", "prediction", "outcome", "classification"])
    for t in report.trials:
        writer.writerow(
            [t.index, t.extracted.bits, t.prediction.value, t.outcome, t.classification.value]
        )
    _atomic_write(path, buffer.getvalue())


def read_bits_file(path: Path) -> str:
    """Accept either a trials CSV (outcome column) or raw 0/1 text."""
    text = path.read_text()
    first_line = text.splitlines()[0] if text.splitlines() else ""
    if "outcome" in first_line and "," in first_line:
        rows = list(csv.DictReader(io.StringIO(text)))
        return "".join(row["outcome"] for row in rows)
    bits = "".join(text.split())
    if bits.strip("01"):
        raise ConfigError(f"{path} is neither a trials CSV nor a 0/1 text file")
    return bits


def run_scenario(scenario: Scenario) -> RunReport:
    started = time.perf_counter()
    report = core.run_trials(
        scenario.experiment,
        scenario.repetition,
        scenario.extractor,
        scenario.predictor,
        scenario.k,
        scenario.n_max,
    )
    return RunReport(scenario.config, report, __version__, time.perf_counter() - started)


def cmd_run(args) -> int:
    try:
        config = json.loads(Path(args.config).read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    multi = isinstance(config, dict) and "scenarios" in config
    raw_list = config["scenarios"] if multi else [config]
    _require(isinstance(raw_list, list) and raw_list, "'scenarios' must be a non-empty list")
    if args.seed is not None:
        raw_list = [apply_seed_override(c, args.seed) for c in raw_list]
    scenarios = [build_scenario(c) for c in raw_list]

    out_path = Path(args.out)
    results = []
    for position, scenario in enumerate(scenarios):
        run_report = run_scenario(scenario)
        results.append(run_report)
        suffix = f"-{scenario.id}" if multi else ""
        if args.trials_csv:
            csv_path = Path(args.trials_csv)
            csv_path = csv_path.with_name(csv_path.stem + suffix + csv_path.suffix)
            write_trials_csv(csv_path, run_report.report)
            if args.figures:
                from . import figures

                figures.save_trial_figure(
                    run_report.report,
                    csv_path.with_suffix(".png"),
                    title=f"{scenario.id}: {run_report.report.verdict.value}",
                )
    if multi:
        _write_json(out_path, {"reports": [r.to_dict() for r in results]})
    else:
        _write_json(out_path, results[0].to_dict())
    for run_report in results:
        print(
            f"{run_report.scenario.get('id', 'scenario')}: "
            f"{run_report.report.verdict.value} "
            f"counts={run_report.report.counts} n_used={run_report.report.n_used}"
        )
    return 0


def cmd_enumerate(args) -> int:
    predicates = (
        [p.strip() for p in args.predicates.split(",") if p.strip()]
        if args.predicates
        else list(mealy.ENUMERATION_PREDICATES)
    )
    for name in predicates:
        _require(
            name in mealy.ENUMERATION_PREDICATES,
            f"unknown predicate {name!r} (known: {', '.join(mealy.ENUMERATION_PREDICATES)})",
        )
    _require(args.q_max >= 1, "--q-max must be >= 1")
    if args.q_max > mealy.MAX_ENUMERATION_STATES:
        raise ConfigError(
            f"--q-max {args.q_max} exceeds the supported maximum "
            f"{mealy.MAX_ENUMERATION_STATES}"
        )
    summary = mealy.enumerate_automata(args.q_max, predicates, args.exemplars)
    _write_json(Path(args.out), summary.to_dict())
    for q in sorted(summary.totals):
        print(
            f"|Q|={q}: total={summary.totals[q]} "
            + " ".join(f"{n}={c}" for n, c in summary.counts[q].items())
            + f" conjunction={summary.conjunction[q]}"
        )
    return 0


def cmd_analyze(args) -> int:
    if args.bits_path:
        bits = read_bits_file(Path(args.bits_path))
        if args.n is not None:
            _require(args.n <= len(bits), f"input holds only {len(bits)} bits")
            bits = bits[: args.n]
    else:
        _require(args.rule is not None, "provide --bits-path or --rule")
        n = args.n if args.n is not None else 4096
        if args.rule == "seeded-noise":
            stream = bitstreams.make_seeded_noise_stream(args.seed or 0)
        else:
            params = {"bit": args.rule_bit} if args.rule == "constant" else {}
            stream = bitstreams.make_rule_stream(args.rule, **params)
        bits = stream.prefix(n).bits

    payload: dict = {"n": len(bits)}
    out_path = Path(args.out)
    wants_normality = args.normality or not args.cycle
    if wants_normality:
        report = analysis.borel_normality_check(bits, args.blocks)
        payload["normality"] = report.to_dict()
        if args.figures:
            from . import figures

            figures.save_normality_figure(report, out_path.with_suffix(".normality.png"))
    if args.cycle:
        bound = args.cycle_bound or min(len(bits), 2048)
        _require(bound >= 2, "cycle bound must be >= 2")
        cycle = analysis.detect_cycle(bits[:bound], bound)
        payload["cycle"] = cycle.to_dict()
        if args.figures:
            from . import figures

            figures.save_cycle_figure(bits[:bound], cycle, out_path.with_suffix(".cycle.png"))
    _write_json(out_path, payload)
    if "normality" in payload:
        print(f"normality: {'pass' if payload['normality']['passed'] else 'fail'}")
    if "cycle" in payload:
        c = payload["cycle"]
        print(
            f"cycle: found={c['found']} transient={c['transient']} period={c['period']}"
        )
    return 0


DEMO_SCENARIOS = [
    {
        "id": "dyadic",
        "experiment": {
            "kind": "dyadic",
            "k": 3,
            "seed_source": {"kind": "seeded-noise", "seed": 42, "fresh": True},
        },
        "extractor": {"kind": "window", "lo": 4, "hi": 4},
        "predictor": {"kind": "identity"},
        "repetition": {"kind": "fresh-seed"},
        "k": 100,
        "n_max": 100,
    },
    {
        "id": "mealy-em",
        "experiment": {"kind": "mealy-em", "automaton": "canonical", "start": "q0"},
        "extractor": {"kind": "io-log", "symbol": "z"},
        "predictor": {"kind": "withhold"},
        "repetition": {"kind": "same-box"},
        "k": 1,
        "n_max": 64,
    },
    {
        "id": "qubit-ec",
        "experiment": {
            "kind": "qubit-ec",
            "psi": "zero",
            "phi": [[0.5, 0.0], [0.8660254037844386, 0.0]],
            "source": {"mode": "born", "seed": 2025},
        },
        "extractor": {"kind": "trial-index"},
        "predictor": {"kind": "withhold"},
        "repetition": {"kind": "fresh-seed"},
        "k": 1,
        "n_max": 2000,
    },
]


def cmd_demo(args) -> int:
    from . import figures

    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    for config in DEMO_SCENARIOS:
        config = json.loads(json.dumps(config))
        if args.seed is not None:
            config = apply_seed_override(config, args.seed)
        name = config["id"]
        _write_json(out_dir / f"{name}.config.json", config)
        run_report = run_scenario(build_scenario(config))
        _write_json(out_dir / f"{name}.report.json", run_report.to_dict())
        write_trials_csv(out_dir / f"{name}.trials.csv", run_report.report)
        figures.save_trial_figure(
            run_report.report,
            out_dir / f"{name}.trials.png",
            title=f"{name}: {run_report.report.verdict.value}",
        )
        print(
            f"{name}: {run_report.report.verdict.value} "
            f"counts={run_report.report.counts}"
        )
        if name == "mealy-em":
            outcomes = "".join(str(t.outcome) for t in run_report.report.trials)
            cycle = analysis.detect_cycle(outcomes)
            _write_json(out_dir / f"{name}.cycle.json", cycle.to_dict())
            figures.save_cycle_figure(outcomes, cycle, out_dir / f"{name}.cycle.png")
            print(f"  output cycle: transient={cycle.transient} period={cycle.period}")
        if name == "qubit-ec":
            outcomes = [t.outcome for t in run_report.report.trials]
            figures.save_running_frequency_figure(
                outcomes,
                0.25,
                out_dir / f"{name}.frequency.png",
                title="projection outcome frequency (overlap^2 = 0.25)",
            )
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="predlab",
        description="Prediction-game laboratory: run scenarios, enumerate automata, analyze sequences.",
    )
    parser.add_argument("--version", action="version", version=f"predlab {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="evaluate a scenario config")
    p_run.add_argument("--config", required=True, help="scenario JSON path")
    p_run.add_argument("--out", default="run-report.json", help="report JSON path")
    p_run.add_argument("--trials-csv", default=None, help="per-trial CSV path")
    p_run.add_argument("--seed", type=int, default=None, help="override seeded components")
    p_run.add_argument("--figures", action="store_true", help="render figures beside the CSV")
    p_run.set_defaults(fn=cmd_run)

    p_enum = sub.add_parser("enumerate", help="count small automata by predicate")
    p_enum.add_argument("--q-max", type=int, required=True, help="largest state count (<= 4)")
    p_enum.add_argument(
        "--predicates",
        default=None,
        help="comma-separated predicate names (default: all)",
    )
    p_enum.add_argument("--exemplars", type=int, default=0, help="sample tables to include")
    p_enum.add_argument("--out", default="enumeration.json", help="counts JSON path")
    p_enum.set_defaults(fn=cmd_enumerate)

    p_an = sub.add_parser("analyze", help="normality/cycle diagnostics on bit sequences")
    src = p_an.add_mutually_exclusive_group(required=True)
    src.add_argument("--bits-path", default=None, help="trials CSV or raw 0/1 text")
    src.add_argument("--rule", default=None, help="named rule stream, or 'seeded-noise'")
    p_an.add_argument("--seed", type=int, default=None, help="seed for --rule seeded-noise")
    p_an.add_argument("--rule-bit", type=int, default=0, help="bit for --rule constant")
    p_an.add_argument("--n", type=int, default=None, help="prefix length to analyze")
    p_an.add_argument("--blocks", type=int, default=2, help="max block length L")
    p_an.add_argument("--normality", action="store_true", help="run the normality check")
    p_an.add_argument("--cycle", action="store_true", help="run cycle detection")
    p_an.add_argument("--cycle-bound", type=int, default=None, help="cycle search bound")
    p_an.add_argument("--out", default="analysis.json", help="report JSON path")
    p_an.add_argument("--figures", action="store_true", help="render figures beside the report")
    p_an.set_defaults(fn=cmd_analyze)

    p_demo = sub.add_parser("demo", help="run the three bundled scenarios")
    p_demo.add_argument("--out-dir", default="predlab-demo", help="output directory")
    p_demo.add_argument("--seed", type=int, default=None, help="override seeded components")
    p_demo.set_defaults(fn=cmd_demo)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except ConfigError as exc:
        print(f"predlab: error: [{exc.code}] {exc.message}", file=sys.stderr)
        return 2
    except PredlabError as exc:
        print(f"predlab: error: [{exc.code}] {exc.message}", file=sys.stderr)
        return 3
    except (OSError, ValueError) as exc:
        print(f"predlab: error: [RUNTIME] {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
