"""Command-line entry points: headless runs, batch comparisons, live serving.

Exit codes: 0 clean run (success or timeout), 1 invalid input, 2 collision,
3 batch with failed cells, 64 usage errors.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

from .scenario import MODES, ScenarioInvalid, UserModelSpec, load_scenario
from .simulator import batch, format_report, run, tick_to_dict
from .world import MapError

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_COLLISION = 2
EXIT_CELL_FAILED = 3
EXIT_USAGE = 64


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on bad flags; the CLI contract reserves 2 for
    # collisions, so usage errors exit 64 instead.
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="sharenav", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one scenario headlessly")
    p_run.add_argument("--scenario", required=True, help="scenario TOML path")
    p_run.add_argument("--mode", choices=MODES, help="override the scenario's mode")
    p_run.add_argument("--seed", type=int, default=0)
    p_run.add_argument("--out", required=True, help="metrics report path (JSON)")
    p_run.add_argument("--log", help="tick log path (one JSON object per line)")
    p_run.add_argument("--tape", help="replay this command tape as the user")

    p_batch = sub.add_parser("batch", help="aggregate runs over scenarios x modes x seeds")
    p_batch.add_argument("--scenarios", required=True, help="directory of scenario TOML files")
    p_batch.add_argument("--modes", required=True, help="comma-separated mode list")
    p_batch.add_argument("--seeds", type=int, required=True, help="run seeds 0..N-1")
    p_batch.add_argument("--out", required=True, help="report path (CSV)")

    p_serve = sub.add_parser("serve", help="serve a live teleop session")
    p_serve.add_argument("--scenario", required=True)
    p_serve.add_argument("--port", type=int, required=True)
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--tick-hz", type=float, default=20.0, help="wall-clock tick rate")
    p_serve.add_argument("--seed", type=int, default=0)
    p_serve.add_argument("--capture", help="write received commands to this tape file")
    return parser


def _cmd_run(args) -> int:
    try:
        scenario = load_scenario(args.scenario)
        if args.mode:
            scenario = dataclasses.replace(scenario, mode=args.mode)
        if args.tape:
            scenario = dataclasses.replace(
                scenario, user=UserModelSpec(kind="tape", tape=args.tape)
            )
        report, records = run(scenario, args.seed)
    except (ScenarioInvalid, MapError) as exc:
        print(f"sharenav run: {exc}", file=sys.stderr)
        return EXIT_INVALID
    Path(args.out).write_text(
        json.dumps(dataclasses.asdict(report), indent=2) + "\n", encoding="utf-8"
    )
    if args.log:
        with open(args.log, "w", encoding="utf-8") as fh:
            for rec in records:
                fh.write(json.dumps(tick_to_dict(rec)) + "\n")
    if report.collision_count > 0:
        return EXIT_COLLISION
    return EXIT_OK


def _cmd_batch(args, parser) -> int:
    modes = [m.strip() for m in args.modes.split(",") if m.strip()]
    if not modes or any(m not in MODES for m in modes):
        parser.error(f"--modes must be a comma-separated subset of {MODES}")
    if args.seeds < 1:
        parser.error("--seeds must be >= 1")
    paths = sorted(Path(args.scenarios).glob("*.toml"))
    if not paths:
        print(f"sharenav batch: no scenario files in {args.scenarios}", file=sys.stderr)
        return EXIT_INVALID

    scenarios = []
    failures = []
    for path in paths:
        try:
            scenarios.append(load_scenario(path))
        except ScenarioInvalid as exc:
            failures.extend((path.stem, mode, str(exc)) for mode in modes)
    rows = []
    if scenarios:
        rows, run_failures = batch(scenarios, modes, range(args.seeds))
        failures.extend(run_failures)
    Path(args.out).write_text(format_report(rows), encoding="utf-8")
    for name, mode, message in failures:
        print(f"sharenav batch: cell ({name}, {mode}) failed: {message}", file=sys.stderr)
    return EXIT_CELL_FAILED if failures else EXIT_OK


def _cmd_serve(args) -> int:
    from .server import serve_forever  # heavy import kept off run/batch paths

    try:
        scenario = load_scenario(args.scenario)
    except ScenarioInvalid as exc:
        print(f"sharenav serve: {exc}", file=sys.stderr)
        return EXIT_INVALID
    # The live client is the user; scripted user models stay out of serving.
    scenario = dataclasses.replace(scenario, user=UserModelSpec(kind="silent"))
    try:
        serve_forever(
            scenario,
            host=args.host,
            port=args.port,
            tick_hz=args.tick_hz,
            seed=args.seed,
            capture_path=args.capture,
            scenario_path=args.scenario,
        )
    except OSError as exc:
        print(f"sharenav serve: {exc}", file=sys.stderr)
        return EXIT_INVALID
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "run":
        return _cmd_run(args)
    if args.command == "batch":
        return _cmd_batch(args, parser)
    return _cmd_serve(args)


if __name__ == "__main__":
    sys.exit(main())
