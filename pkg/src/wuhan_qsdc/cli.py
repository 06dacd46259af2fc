"""Command line entry point: ``wuhan-qsdc run | list-scenarios | self-test``."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from wuhan_qsdc.harness import SCENARIOS, ScenarioError, emit_report, make_scenario, run_scenario

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_INVALID = 2


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="wuhan-qsdc",
        description="Seeded simulator of supervised entanglement sharing and teleportation QSDC.",
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging on stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a named scenario and emit a report")
    run.add_argument("--scenario", required=True, help="scenario name (see list-scenarios)")
    run.add_argument("--trials", type=int, default=1)
    run.add_argument("--seed", type=int, default=0, help="64-bit master seed")
    msg = run.add_mutually_exclusive_group()
    msg.add_argument("--message", help="bit string to send, e.g. 010110")
    msg.add_argument("--msg-len", type=int, help="send a random message of this length per trial")
    run.add_argument("--check-fraction", type=float, default=0.5)
    run.add_argument("--triples", type=int, help="tripartite states per session (default: sized to the message)")
    run.add_argument("--max-restarts", type=int, default=0, help="sessions re-run after an abort")
    run.add_argument("--jobs", type=int, default=1, help="worker processes for trials")
    run.add_argument("--format", choices=("json", "csv"), default="json")
    run.add_argument("--out", type=Path, help="write the report here instead of stdout")

    sub.add_parser("list-scenarios", help="print the built-in scenario names")
    sub.add_parser("self-test", help="run the engine invariant suite")
    return parser


def _cmd_run(args) -> int:
    try:
        scenario = make_scenario(
            args.scenario,
            trials=args.trials,
            master_seed=args.seed,
            message=args.message,
            msg_len=args.msg_len,
            check_fraction=args.check_fraction,
            sequence_length=args.triples,
            max_restarts=args.max_restarts,
        )
    except ScenarioError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    data = emit_report(run_scenario(scenario, jobs=args.jobs), args.format)
    if args.out is None:
        sys.stdout.buffer.write(data)
        sys.stdout.flush()
    else:
        args.out.write_bytes(data)
    return EXIT_OK


def _cmd_list() -> int:
    width = max(map(len, SCENARIOS))
    for name, template in SCENARIOS.items():
        print(f"{name:<{width}}  {template.description}")
    return EXIT_OK


def _cmd_self_test() -> int:
    from wuhan_qsdc.selftest import run_self_test
    from wuhan_qsdc.statevec import BACKEND

    print(f"kernel backend: {BACKEND}")
    results = run_self_test()
    for r in results:
        print(f"[{'PASS' if r.passed else 'FAIL'}] {r.name}: {r.detail}")
    return EXIT_OK if all(r.passed for r in results) else EXIT_FAILED


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.command == "run":
        return _cmd_run(args)
    if args.command == "list-scenarios":
        return _cmd_list()
    return _cmd_self_test()


if __name__ == "__main__":
    sys.exit(main())
