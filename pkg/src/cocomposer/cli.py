"""Command-line interface.

subcommands:
  compose   run one composition session and save its artifacts
  lint      validate an ABC file, optionally auto-fixing it in place
  render    render an ABC file to a standard MIDI file
  eval      run the batch evaluation over the prompt set
  report    re-render a saved run.json as table, csv, or json

Exit codes: 0 success, 1 session/row/lint failure, 2 configuration errors.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from .evalharness import (
    EvalRunConfig,
    render_report,
    report_from_json,
    run_experiment,
)
from .llm import BackendError, HttpBackend, ModelConfig
from .midi import RenderError, render_midi
from .notation import (
    actions_to_json,
    issues_to_json,
    parse_abc,
    repair,
    serialize_abc,
    validate,
)
from .notation.errors import ParseError, RepairError
from .orchestrator import CompositionBrief, SessionConfig, dump_transcript, run_session

DEFAULT_ENDPOINT = "https://api.openai.com/v1"


class ConfigError(Exception):
    """Bad or missing configuration; maps to exit code 2."""


def _parse_indices(text: str) -> tuple[int, ...]:
    indices: set[int] = set()
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        if "-" in part:
            lo, _, hi = part.partition("-")
            try:
                indices.update(range(int(lo), int(hi) + 1))
            except ValueError as err:
                raise argparse.ArgumentTypeError(f"bad index range {part!r}") from err
        else:
            try:
                indices.add(int(part))
            except ValueError as err:
                raise argparse.ArgumentTypeError(f"bad index {part!r}") from err
    if not indices:
        raise argparse.ArgumentTypeError("no prompt indices given")
    return tuple(sorted(indices))


def _load_file_config(path: str | None) -> dict:
    if not path:
        return {}
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, ValueError) as err:
        raise ConfigError(f"cannot read config file {path}: {err}") from err
    if not isinstance(data, dict):
        raise ConfigError(f"config file {path} must hold a JSON object")
    return data


def _model_config(args: argparse.Namespace, file_config: dict) -> ModelConfig:
    model_id = getattr(args, "model", None) or file_config.get("model_id")
    if not model_id:
        raise ConfigError("no model configured (use --model or config file model_id)")
    endpoint = (
        getattr(args, "endpoint", None)
        or file_config.get("endpoint")
        or os.environ.get("COCOMPOSER_API_BASE")
        or DEFAULT_ENDPOINT
    )
    return ModelConfig(
        model_id=model_id,
        endpoint_url=endpoint,
        temperature=float(file_config.get("temperature", 0.7)),
    )


def _backend() -> HttpBackend:
    if not os.environ.get("COCOMPOSER_API_KEY"):
        raise ConfigError("COCOMPOSER_API_KEY is not set")
    return HttpBackend()


def _session_config(args: argparse.Namespace, file_config: dict) -> SessionConfig:
    max_iterations = getattr(args, "max_iterations", None)
    if max_iterations is None:
        max_iterations = int(file_config.get("max_iterations", 2))
    return SessionConfig(model=_model_config(args, file_config), max_iterations=max_iterations)


def _cmd_compose(args: argparse.Namespace) -> int:
    file_config = _load_file_config(args.config)
    prompt = args.prompt
    if prompt.startswith("@"):
        try:
            prompt = Path(prompt[1:]).read_text()
        except OSError as err:
            raise ConfigError(f"cannot read prompt file: {err}") from err
    if not prompt.strip():
        raise ConfigError("prompt is empty")
    config = _session_config(args, file_config)
    backend = _backend()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    try:
        result = run_session(CompositionBrief(prompt.strip()), config, backend, "compose")
    except BackendError as err:
        print(f"backend failure: {err}", file=sys.stderr)
        return 1
    (out / "transcript.json").write_text(dump_transcript(result, "compose", config))
    if not result.success or result.final_tune is None:
        print(f"composition failed: {result.failure_reason}", file=sys.stderr)
        return 1
    (out / "score.abc").write_text(serialize_abc(result.final_tune))
    try:
        (out / "score.mid").write_bytes(render_midi(result.final_tune))
    except RenderError as err:
        print(f"midi rendering failed: {err}", file=sys.stderr)
        return 1
    print(str(out / "score.abc"))
    print(str(out / "score.mid"))
    return 0


def _cmd_lint(args: argparse.Namespace) -> int:
    try:
        source = Path(args.file).read_text()
    except OSError as err:
        raise ConfigError(f"cannot read {args.file}: {err}") from err
    try:
        tune = parse_abc(source)
    except ParseError as err:
        print(json.dumps({"error": str(err)}))
        return 1
    issues = validate(tune)
    output: dict = {"issues": issues_to_json(issues)}
    if args.fix:
        try:
            repaired, actions = repair(tune)
        except RepairError as err:
            output["error"] = str(err)
            print(json.dumps(output, indent=2))
            return 1
        Path(args.file).write_text(serialize_abc(repaired))
        output["actions"] = actions_to_json(actions)
        issues = validate(repaired)
        output["issues"] = issues_to_json(issues)
    print(json.dumps(output, indent=2))
    return 0 if not issues else 1


def _cmd_render(args: argparse.Namespace) -> int:
    try:
        source = Path(args.file).read_text()
    except OSError as err:
        raise ConfigError(f"cannot read {args.file}: {err}") from err
    try:
        midi = render_midi(parse_abc(source))
    except (ParseError, RenderError) as err:
        print(f"render failed: {err}", file=sys.stderr)
        return 1
    Path(args.output).write_bytes(midi)
    print(args.output)
    return 0


def _cmd_eval(args: argparse.Namespace) -> int:
    file_config = _load_file_config(args.config)
    session_config = _session_config(args, file_config)
    backend = _backend()
    config = EvalRunConfig(
        system_label=args.system,
        prompt_indices=args.prompts,
        session_config=session_config,
        output_dir=Path(args.out),
        synth_cmd=args.synth_cmd
        or file_config.get("synth_cmd")
        or os.environ.get("COCOMPOSER_SYNTH_CMD"),
        bridge_cmd=args.bridge_cmd or file_config.get("bridge_cmd"),
        repeats=args.repeats,
        use_single_agent=args.single_agent,
    )
    report = run_experiment(config, backend)
    print(render_report(report, "table"), end="")
    return 0 if all(row.success for row in report.rows) else 1


def _cmd_report(args: argparse.Namespace) -> int:
    try:
        data = json.loads(Path(args.run_json).read_text())
        report = report_from_json(data)
    except (OSError, ValueError, KeyError, TypeError) as err:
        raise ConfigError(f"cannot load report {args.run_json}: {err}") from err
    print(render_report(report, args.format), end="")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cocomposer")
    sub = parser.add_subparsers(dest="command", required=True)

    compose = sub.add_parser("compose", help="run one composition session")
    compose.add_argument("--prompt", required=True, help="request text, or @file")
    compose.add_argument("--model", help="model identifier")
    compose.add_argument("--endpoint", help="chat-completions API base URL")
    compose.add_argument("--max-iterations", type=int, default=None)
    compose.add_argument("--out", required=True, help="artifact directory")
    compose.add_argument("--config", help="JSON run-config file")
    compose.set_defaults(func=_cmd_compose)

    lint = sub.add_parser("lint", help="validate an ABC file")
    lint.add_argument("file")
    lint.add_argument("--fix", action="store_true", help="rewrite with repairs applied")
    lint.set_defaults(func=_cmd_lint)

    render = sub.add_parser("render", help="render an ABC file to MIDI")
    render.add_argument("file")
    render.add_argument("-o", "--output", required=True)
    render.set_defaults(func=_cmd_render)

    evaluate = sub.add_parser("eval", help="run the batch evaluation")
    evaluate.add_argument("--system", required=True, help="system label for the report")
    evaluate.add_argument("--prompts", type=_parse_indices, default=tuple(range(1, 21)))
    evaluate.add_argument("--out", required=True)
    evaluate.add_argument("--repeats", type=int, default=1)
    evaluate.add_argument("--model", help="model identifier")
    evaluate.add_argument("--endpoint", help="chat-completions API base URL")
    evaluate.add_argument("--max-iterations", type=int, default=None)
    evaluate.add_argument("--synth-cmd", help="synthesizer command: <cmd> in.mid out.wav")
    evaluate.add_argument("--bridge-cmd", help="aesthetics bridge command")
    evaluate.add_argument("--single-agent", action="store_true")
    evaluate.add_argument("--config", help="JSON run-config file")
    evaluate.set_defaults(func=_cmd_eval)

    report = sub.add_parser("report", help="render a saved run.json")
    report.add_argument("run_json")
    report.add_argument("--format", choices=("table", "csv", "json"), default="table")
    report.set_defaults(func=_cmd_report)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
