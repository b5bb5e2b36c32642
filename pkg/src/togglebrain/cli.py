"""Command-line driver.

Exit codes: 0 ok, 1 config/usage, 2 stimuli, 3 snapshot, 4 runtime.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .brain import Brain, default_cycles
from .config import ConfigError, StimulusError, StimulusTrace, load_config, load_stimuli
from .memory import SnapshotError, load_snapshot, save_snapshot
from .priority import gen_adder_microcode

EXIT_CONFIG, EXIT_STIMULI, EXIT_SNAPSHOT, EXIT_RUNTIME = 1, 2, 3, 4


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="togglebrain", description="Run the controlled-toggle brain simulator.")
    p.add_argument("--config", help="config file (required)")
    p.add_argument("--stimuli", help="stimulus trace, one '<time>,<bits>' per line")
    p.add_argument("--cycles", type=int, help="oscillator half-periods to run (default: cover the trace)")
    p.add_argument("--seed", type=int, help="overrides the config seed")
    p.add_argument("--snapshot-in", help="LTM snapshot to load before running")
    p.add_argument("--snapshot-out", help="write the LTM snapshot here after running")
    p.add_argument("--log", help="run log destination (default: stdout)")
    p.add_argument("--dump-microcode", help="write the adder microcode here")
    return p


def _fail(code: int, msg: str) -> int:
    print(f"togglebrain: {msg}", file=sys.stderr)
    return code


def main(argv: list[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except _UsageError as exc:
        return _fail(EXIT_CONFIG, str(exc))
    if not args.config:
        return _fail(EXIT_CONFIG, "--config is required")
    try:
        cfg = load_config(args.config)
    except ConfigError as exc:
        return _fail(EXIT_CONFIG, f"config: {exc}")
    if args.seed is not None:
        cfg = cfg.with_seed(args.seed)
    if cfg.seed is None:
        return _fail(EXIT_CONFIG, "config: seed: no seed in config and no --seed given")
    if args.cycles is not None and args.cycles < 0:
        return _fail(EXIT_CONFIG, "--cycles must be >= 0")

    ltm = None
    if args.snapshot_in:
        try:
            ltm = load_snapshot(args.snapshot_in)
        except SnapshotError as exc:
            return _fail(EXIT_SNAPSHOT, f"snapshot: {exc}")
        if ltm.k != cfg.K:
            return _fail(EXIT_SNAPSHOT, f"snapshot: K={ltm.k} does not match config K={cfg.K}")
        if len(ltm) > cfg.M:
            return _fail(EXIT_SNAPSHOT, f"snapshot: {len(ltm)} records exceed config M={cfg.M}")
        ltm.capacity = cfg.M

    trace = StimulusTrace()
    if args.stimuli:
        try:
            trace = load_stimuli(args.stimuli, cfg.K)
        except StimulusError as exc:
            return _fail(EXIT_STIMULI, f"stimuli: {exc}")

    try:
        if args.dump_microcode:
            prog = gen_adder_microcode(cfg.kappa, cfg.N1)
            Path(args.dump_microcode).write_text(prog.dumps())
        brain = Brain(cfg, ltm)
        cycles = default_cycles(trace, cfg.D) if args.cycles is None else args.cycles
        runlog = brain.run(trace, cycles)
        if args.log:
            Path(args.log).write_text(runlog.text())
        else:
            sys.stdout.write(runlog.text())
    except (ValueError, RuntimeError, OSError) as exc:
        return _fail(EXIT_RUNTIME, f"runtime: {exc}")

    if args.snapshot_out:
        try:
            save_snapshot(brain.ltm, args.snapshot_out)
        except OSError as exc:
            return _fail(EXIT_SNAPSHOT, f"snapshot: {exc}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
