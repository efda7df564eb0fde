"""Command-line front end.

    pilotguard run <config> [--headless | --serve PORT] [--seed N] [--log PATH]
    pilotguard replay <log>
    pilotguard bench <suite>

<config> is a YAML scenario file or a builtin scenario name.  Environment
overrides: PILOTGUARD_LOG (default log path), PILOTGUARD_PORT (serve port).
Exit status: 0 success, 1 safety violation or replay mismatch, 2 bad input.
"""

from __future__ import annotations

import argparse
import os
import sys

from .harness import (
    BENCH_SUITES,
    BUILTINS,
    CLEARANCE_SENTINEL,
    ConfigError,
    ReplayError,
    RunLog,
    SimSession,
    get_scenario,
    load_scenario,
    replay,
)


def _load_config(spec: str):
    if os.path.exists(spec):
        return load_scenario(spec)
    if spec in BUILTINS:
        return get_scenario(spec)
    raise ConfigError(
        f"'{spec}' is neither a file nor a builtin scenario "
        f"(builtins: {', '.join(sorted(BUILTINS))})"
    )


def _fmt_clearance(value: float) -> str:
    return "inf" if value >= CLEARANCE_SENTINEL else f"{value:.3f} m"


def _print_metrics(name: str, metrics) -> None:
    print(f"scenario {name}:")
    print(f"  min clearance   {_fmt_clearance(metrics.min_clearance)}")
    print(f"  mean/max speed  {metrics.mean_speed:.2f} / {metrics.max_speed:.2f} m/s")
    print(f"  path length     {metrics.path_length:.2f} m")
    print(f"  completion      {metrics.completion}")
    print(f"  safety          {'VIOLATED' if metrics.safety_violation else 'ok'}")
    mpc = metrics.timings.get("mpc", {})
    if mpc.get("count"):
        print(f"  mpc solve p50   {mpc['p50']:.2f} ms  (p99 {mpc['p99']:.2f} ms)")


def cmd_run(args) -> int:
    config = _load_config(args.config)
    if args.seed is not None:
        config = config.model_copy(update={"seed": args.seed})
    log_path = args.log or os.environ.get("PILOTGUARD_LOG")

    if args.serve is not None:
        port = args.serve
        if config.joystick.source == "hover":
            joystick = config.joystick.model_copy(update={"source": "live"})
            config = config.model_copy(update={"joystick": joystick})
        from .service import serve_ui

        session = SimSession(config)
        print(f"serving ws://127.0.0.1:{port}/ws (Ctrl-C to stop)")
        log, metrics = serve_ui(port, session)
        if log is None:
            print("stopped before the scenario finished")
            return 0
    else:
        session = SimSession(config)
        log, metrics = session.run()

    if log_path:
        log.write(log_path)
        print(f"log written to {log_path}")
    _print_metrics(config.name, metrics)
    return 1 if metrics.safety_violation else 0


def cmd_replay(args) -> int:
    log = RunLog.load(args.log)
    try:
        traj = replay(log)
    except ReplayError as e:
        print(f"replay FAILED: {e}")
        return 1
    print(f"replay ok: {len(traj)} logged states reproduced bit-exactly")
    return 0


def cmd_bench(args) -> int:
    if args.suite not in BENCH_SUITES:
        raise ConfigError(
            f"unknown suite '{args.suite}' (have: {', '.join(sorted(BENCH_SUITES))})"
        )
    any_violation = False
    rows = []
    for name, overrides in BENCH_SUITES[args.suite]:
        config = get_scenario(name, **overrides)
        if args.seed is not None:
            config = config.model_copy(update={"seed": args.seed})
        log, metrics = SimSession(config).run()
        any_violation |= metrics.safety_violation
        mpc = metrics.timings["mpc"]
        rows.append(
            (
                name,
                _fmt_clearance(metrics.min_clearance),
                "yes" if metrics.completion else "no",
                "VIOLATED" if metrics.safety_violation else "ok",
                f"{mpc['p50']:.2f}",
            )
        )
    header = ("scenario", "min clearance", "complete", "safety", "mpc p50 ms")
    widths = [max(len(str(r[i])) for r in rows + [header]) for i in range(len(header))]
    for row in [header] + rows:
        print("  ".join(str(v).ljust(w) for v, w in zip(row, widths)))
    return 1 if any_violation else 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pilotguard", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a scenario")
    run.add_argument("config", help="YAML scenario file or builtin name")
    mode = run.add_mutually_exclusive_group()
    mode.add_argument("--headless", action="store_true", help="no UI bridge (default)")
    mode.add_argument(
        "--serve",
        type=int,
        nargs="?",
        const=int(os.environ.get("PILOTGUARD_PORT", "8642")),
        metavar="PORT",
        help="serve the pilot UI bridge while running",
    )
    run.add_argument("--seed", type=int, default=None)
    run.add_argument("--log", default=None, help="write the JSONL run log here")
    run.set_defaults(func=cmd_run)

    rep = sub.add_parser("replay", help="verify a run log reproduces bit-exactly")
    rep.add_argument("log")
    rep.set_defaults(func=cmd_replay)

    bench = sub.add_parser("bench", help="run a scenario suite")
    bench.add_argument("suite", help=f"one of: {', '.join(sorted(BENCH_SUITES))}")
    bench.add_argument("--seed", type=int, default=None)
    bench.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return 2
    except FileNotFoundError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
