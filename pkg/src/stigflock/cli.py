"""Command-line entry point: ``stigflock {generate,validate,run,grid,sweep}``.

Exit status is 0 on success, 1 on a usage error and 2 on a runtime error.
"""

from __future__ import annotations

import argparse
import csv
import logging
import os
import sys
from pathlib import Path
from typing import Optional, Sequence

from . import scenario as scn
from .behavior import Role
from .experiment import (
    TRIAL_COLUMNS,
    TrialConfig,
    _csv,
    bisect_sweep,
    run_experiment,
    run_grid,
    run_trial,
    sweep,
    trial_seed,
)
from .params import Algorithm, SimParams

SEED_ENV = "STIGFLOCK_SEED"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        raise UsageError(f"{self.prog}: {message}")


def _csv_list(text: str) -> list[str]:
    return [t.strip() for t in text.split(",") if t.strip()]


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="stigflock", description="Stigmergy + flocking UAV target-search simulator")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    g = sub.add_parser("generate", help="write a built-in benchmark scenario to a file")
    g.add_argument("--name", required=True, choices=scn.SCENARIO_NAMES)
    g.add_argument("--seed", type=int)
    g.add_argument("--out", required=True)

    v = sub.add_parser("validate", help="parse a scenario file and print its census")
    v.add_argument("--scenario", required=True)

    def sim_flags(sp, trials_default):
        src = sp.add_mutually_exclusive_group()
        src.add_argument("--scenario", help="scenario file")
        src.add_argument("--name", choices=scn.SCENARIO_NAMES, help="built-in scenario")
        sp.add_argument("--scenario-seed", type=int, help="seed for a built-in scenario (default: --seed)")
        sp.add_argument("--seed", type=int, help=f"master seed (falls back to ${SEED_ENV})")
        sp.add_argument("--set", action="append", default=[], metavar="NAME=VALUE",
                        help="override a parameter by its tunable name (repeatable)")
        sp.add_argument("--tick-cap", type=int)
        sp.add_argument("--trials", type=int, default=trials_default)
        sp.add_argument("--workers", type=int, default=1)
        sp.add_argument("--out")

    r = sub.add_parser("run", help="run one trial (or several with --trials)")
    sim_flags(r, 1)
    r.add_argument("--algo", default="sf", choices=["r", "s", "sf"])
    r.add_argument("--redundancy", type=int, default=1)
    r.add_argument("--trace", help="per-tick CSV of tick, drone, role, x, y, heading")
    r.add_argument("--field-dump", help="file receiving pheromone snapshots")
    r.add_argument("--field-dump-every", type=int, default=0, metavar="N")

    gr = sub.add_parser("grid", help="scenario x algorithm x redundancy benchmark")
    sim_flags(gr, 10)
    gr.add_argument("--scenarios", type=_csv_list, default=list(scn.SCENARIO_NAMES))
    gr.add_argument("--algos", type=_csv_list, default=["r", "s", "sf"])
    gr.add_argument("--redundancies", type=_csv_list, default=["1", "3", "5"])
    gr.add_argument("--trials-out", help="per-trial CSV")

    sw = sub.add_parser("sweep", help="completion time across values of one parameter")
    sim_flags(sw, 10)
    sw.add_argument("--algo", default="sf", choices=["r", "s", "sf"])
    sw.add_argument("--redundancy", type=int, default=1)
    sw.add_argument("--param", required=True, help="tunable parameter name")
    mode = sw.add_mutually_exclusive_group(required=True)
    mode.add_argument("--values", type=_csv_list)
    mode.add_argument("--bisect", metavar="LO:HI")
    sw.add_argument("--tol", type=float, default=0.05)
    return p


def _seed(args) -> int:
    if args.seed is not None:
        return args.seed
    env = os.environ.get(SEED_ENV)
    if env is None:
        raise UsageError(f"--seed is required (or set {SEED_ENV})")
    try:
        return int(env)
    except ValueError:
        raise UsageError(f"{SEED_ENV}={env!r} is not an integer") from None


def _params(args, **fixed) -> SimParams:
    params = SimParams(**fixed)
    for item in args.set:
        if "=" not in item:
            raise UsageError(f"--set expects NAME=VALUE, got {item!r}")
        name, value = item.split("=", 1)
        try:
            params = params.with_named(name, value)
        except KeyError as exc:
            raise UsageError(str(exc.args[0])) from None
        except ValueError as exc:
            raise UsageError(f"--set {item}: {exc}") from None
    if getattr(args, "tick_cap", None) is not None:
        if args.tick_cap <= 0:
            raise UsageError("--tick-cap must be positive")
        params = params.replace(tick_cap=args.tick_cap)
    return params


def _scenario(args, seed: int) -> scn.Scenario:
    if args.scenario:
        return scn.load(args.scenario)
    if args.name:
        return scn.generate(args.name, args.scenario_seed if args.scenario_seed is not None else seed)
    raise UsageError("one of --scenario or --name is required")


def _write(path: Optional[str], text: str) -> None:
    if path:
        Path(path).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _check_counts(args) -> None:
    if args.trials < 1:
        raise UsageError("--trials must be at least 1")
    if args.workers < 1:
        raise UsageError("--workers must be at least 1")


def cmd_generate(args) -> int:
    s = scn.generate(args.name, _seed(args))
    scn.save(s, args.out)
    print(f"wrote {args.out}: {s.counts}")
    return 0


def cmd_validate(args) -> int:
    s = scn.load(args.scenario)
    counts = " ".join(f"{k}={v}" for k, v in s.counts.items())
    print(f"{s.name}: grid {s.grid_size}x{s.grid_size} {counts}")
    return 0


class _Tracer:
    def __init__(self, trace_path, dump_path, every):
        self.trace = open(trace_path, "w", newline="", encoding="utf-8") if trace_path else None
        self.writer = csv.writer(self.trace, lineterminator="\n") if self.trace else None
        if self.writer:
            self.writer.writerow(["tick", "drone", "role", "x", "y", "heading"])
        self.dump = open(dump_path, "w", encoding="utf-8") if dump_path and every > 0 else None
        self.every = every

    def __call__(self, t, swarm, record, field, env):
        if self.writer:
            for i in range(len(swarm)):
                self.writer.writerow([t, i, Role(int(record.roles[i])).name.lower(),
                                      repr(float(swarm.x[i])), repr(float(swarm.y[i])),
                                      repr(float(swarm.heading[i]))])
        if self.dump and t % self.every == 0:
            field.dump(self.dump, tick=t)

    def close(self):
        for fh in (self.trace, self.dump):
            if fh:
                fh.close()


def cmd_run(args) -> int:
    _check_counts(args)
    seed = _seed(args)
    if args.redundancy < 1:
        raise UsageError("--redundancy must be at least 1")
    if args.field_dump_every < 0:
        raise UsageError("--field-dump-every must be nonnegative")
    if args.field_dump_every and not args.field_dump:
        raise UsageError("--field-dump-every needs --field-dump PATH")
    params = _params(args, algorithm=args.algo, redundancy=args.redundancy)
    sc = _scenario(args, seed)
    cfg = TrialConfig(sc, params, seed)
    algo = Algorithm.parse(args.algo)
    if args.trials == 1:
        tracer = _Tracer(args.trace, args.field_dump, args.field_dump_every) \
            if (args.trace or args.field_dump) else None
        try:
            results = [run_trial(cfg, tracer)]
        finally:
            if tracer:
                tracer.close()
        mean = results[0].ticks
        print(f"{sc.name} {algo.label}({args.redundancy}) seed={seed}: "
              f"{'TIMEOUT' if mean is None else f'{mean} ticks'}, {results[0].confirmed} confirmed")
    else:
        if args.trace or args.field_dump:
            raise UsageError("--trace/--field-dump apply to single-trial runs only")
        stats = run_experiment(cfg, args.trials, args.workers)
        results = list(stats.results)
        print(f"{sc.name} {algo.label}({args.redundancy}) master_seed={seed}: "
              f"{stats.mean:.1f} +/- {stats.half_width:.1f} ticks over {stats.n} trials, {stats.timeouts} timeouts")
    rows = [{"scenario": sc.name, "algorithm": algo.label, "redundancy": args.redundancy,
             "trial_index": i, "seed": r.seed, "ticks": "TIMEOUT" if r.timed_out else r.ticks,
             "confirmed": r.confirmed} for i, r in enumerate(results)]
    if args.out:
        _write(args.out, _csv(TRIAL_COLUMNS, rows))
    return 0


def cmd_grid(args) -> int:
    _check_counts(args)
    if args.trials < 2:
        raise UsageError("--trials must be at least 2 for confidence intervals")
    seed = _seed(args)
    params = _params(args)
    try:
        algos = [Algorithm.parse(a) for a in args.algos]
        reds = [int(r) for r in args.redundancies]
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if any(r < 1 for r in reds):
        raise UsageError("redundancies must be positive integers")
    if args.scenario:
        scenarios = [scn.load(args.scenario)]
    else:
        sseed = args.scenario_seed if args.scenario_seed is not None else seed
        unknown = [n for n in args.scenarios if n not in scn.SCENARIO_NAMES]
        if unknown:
            raise UsageError(f"unknown scenarios: {', '.join(unknown)}")
        names = [args.name] if args.name else args.scenarios
        scenarios = [scn.generate(n, sseed) for n in names]
    result = run_grid(scenarios, algos, reds, args.trials, seed, params, args.workers)
    _write(args.out, result.results_csv())
    if args.trials_out:
        _write(args.trials_out, result.trials_csv())
    return 0


def cmd_sweep(args) -> int:
    _check_counts(args)
    if args.trials < 2:
        raise UsageError("--trials must be at least 2")
    seed = _seed(args)
    params = _params(args, algorithm=args.algo, redundancy=args.redundancy)
    try:
        params.named_value(args.param)
    except KeyError as exc:
        raise UsageError(str(exc.args[0])) from None
    sc = _scenario(args, seed)
    cfg = TrialConfig(sc, params, seed)
    try:
        if args.values:
            result = sweep(args.param, [float(v) for v in args.values], cfg, args.trials, args.workers)
            best = result.argmin
        else:
            lo, hi = (float(v) for v in args.bisect.split(":"))
            params.with_named(args.param, lo)
            params.with_named(args.param, hi)
            best, result = bisect_sweep(args.param, lo, hi, args.tol, cfg, args.trials, args.workers)
    except ValueError as exc:
        raise UsageError(f"{args.param}: {exc}") from None
    _write(args.out, result.csv())
    print(f"argmin {args.param} = {best:g}", file=sys.stderr)
    return 0


COMMANDS = {"generate": cmd_generate, "validate": cmd_validate, "run": cmd_run,
            "grid": cmd_grid, "sweep": cmd_sweep}


def main(argv: Optional[Sequence[str]] = None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        args = build_parser().parse_args(argv)
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except scn.ScenarioError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc.filename}: {exc.strerror}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
