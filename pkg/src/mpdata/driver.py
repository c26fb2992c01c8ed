"""Run orchestration and the ``mpdata-run`` command line."""
from __future__ import annotations

import argparse
import csv
import os
import sys
from dataclasses import dataclass, field

import numpy as np

from .config import ConfigError, RunConfig, parse_config
from .diagnostics import NORM_FIELDS, ErrorNorms, TimerReport, Timers, error_norms
from .io import write_field_dump
from .stepper import MpdataSolver, NumericalInstabilityError
from .testcases import analytic_solution, make_preset

EXIT_OK = 0
EXIT_REFERENCE = 1      # a reference norm is out of tolerance
EXIT_USAGE = 2          # bad configuration or I/O failure
EXIT_ABORT = 3          # non-finite values during the run

CSV_HEADER = ("step", "time") + NORM_FIELDS


@dataclass
class RunResult:
    status: int
    steps_done: int
    norms: ErrorNorms | None
    report: TimerReport
    norms_path: str
    dumps: list = field(default_factory=list)
    failures: list = field(default_factory=list)
    message: str = ""


def _row(step, time, norms):
    return [str(step), repr(float(time))] + [repr(float(getattr(norms, k))) for k in NORM_FIELDS]


def run_simulation(cfg: RunConfig, out=None) -> RunResult:
    """Advance the configured preset and write norms, dumps and timers.

    Norms against the exact solution are written to ``<output>/norms.csv``
    every ``iout`` steps and after the last step (only then when ``iout``
    is 0).  Field dumps follow the same cadence when ``dump_fields`` is
    set and ``iout > 0``.  The timer table goes to ``out`` (stdout by
    default) and to ``<output>/timers.csv``.
    """
    out = sys.stdout if out is None else out
    timers = Timers()
    with timers.scope("initialization"):
        preset = make_preset(cfg.preset, dtype=np.dtype(cfg.precision.replace("f", "float")),
                             **cfg.grid)
        opts = cfg.options(preset.variant)
        nsteps = cfg.steps_for(preset.steps_per_period)
        solver = MpdataSolver(preset.grid, preset.vel, opts, preset.boundaries,
                              cfg.decomposition, cfg.workers, timers=timers)
        solver.set_tracer(preset.initial)
    os.makedirs(cfg.output, exist_ok=True)
    norms_path = os.path.join(cfg.output, "norms.csv")
    dump_dir = os.path.join(cfg.output, "fields")
    dumps = []
    norms = None
    status, message = EXIT_OK, ""

    def emit(step, writer):
        nonlocal norms
        with timers.scope("output"):
            t = step * preset.dt
            num = solver.tracer()
            norms = error_norms(num, analytic_solution(preset, t))
            writer.writerow(_row(step, t, norms))
            if cfg.dump_fields and cfg.iout > 0:
                os.makedirs(dump_dir, exist_ok=True)
                path = os.path.join(dump_dir, f"{cfg.preset}_{step:07d}.bin")
                write_field_dump(num, path, preset=cfg.preset, step=step, time=float(t))
                dumps.append(path)

    step = 0
    try:
        with open(norms_path, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(CSV_HEADER)
            try:
                for step in range(1, nsteps + 1):
                    timers.start("timeloop")
                    try:
                        solver.step()
                    finally:
                        timers.stop("timeloop")
                    if (cfg.iout > 0 and step % cfg.iout == 0) or step == nsteps:
                        emit(step, writer)
            except NumericalInstabilityError as exc:
                status, message = EXIT_ABORT, f"aborted: {exc}"
    finally:
        solver.close()

    report = timers.report()
    with open(os.path.join(cfg.output, "timers.csv"), "w") as fh:
        fh.write(report.to_csv())
    print(report.to_table(), file=out)

    failures = []
    if status == EXIT_OK and cfg.reference is not None:
        failures = cfg.reference.failures(norms)
        for name in ("err0", "linf"):
            got, ref = getattr(norms, name), getattr(cfg.reference, name)
            verdict = "FAIL" if name in failures else "PASS"
            print(f"{verdict} {name}: {got!r} (reference {ref!r}, tol {cfg.reference.tol!r})",
                  file=out)
        if failures:
            status = EXIT_REFERENCE
    if message:
        print(message, file=sys.stderr)
    return RunResult(status, step if status != EXIT_ABORT else step - 1, norms, report,
                     norms_path, dumps, failures, message)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="mpdata-run",
                                description="Run an MPDATA advection test case.")
    p.add_argument("--config", required=True, help="JSON configuration file")
    p.add_argument("--output", help="output directory (overrides the config)")
    p.add_argument("--workers", type=int, help="worker threads (overrides the config)")
    p.add_argument("--preset", help="test case name (overrides the config)")
    p.add_argument("--dump-fields", action="store_true", default=None,
                   help="write a field dump at every output step")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = parse_config(args.config).with_overrides(
            output=args.output, workers=args.workers, preset=args.preset,
            dump_fields=args.dump_fields)
    except (ConfigError, OSError) as exc:
        print(f"mpdata-run: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        return run_simulation(cfg).status
    except OSError as exc:
        print(f"mpdata-run: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
