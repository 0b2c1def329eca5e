"""Seeded trials, completion-time statistics, the benchmark grid and sweeps."""

from __future__ import annotations

import csv
import io
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional, Sequence

import numpy as np
from scipy import stats as _stats

from .environment import Confirmation, GridEnvironment, SensorModel
from .field import FieldParams, PheromoneField
from .params import Algorithm, SimParams
from .scenario import Scenario
from .swarm import Swarm, TickRecord, apply_effects

log = logging.getLogger(__name__)

RESULT_COLUMNS = ("scenario", "algorithm", "redundancy", "n_trials", "mean_ticks",
                  "ci95_halfwidth", "timeouts", "master_seed")
TRIAL_COLUMNS = ("scenario", "algorithm", "redundancy", "trial_index", "seed", "ticks", "confirmed")

TickObserver = Callable[[int, Swarm, TickRecord, PheromoneField, GridEnvironment], None]


@dataclass(frozen=True)
class TrialConfig:
    scenario: Scenario
    params: SimParams = SimParams()
    seed: int = 0
    termination: float = 0.95

    def __post_init__(self) -> None:
        if not 0.0 < self.termination <= 1.0:
            raise ValueError("termination fraction must lie in (0, 1]")
        if not self.scenario.targets:
            raise ValueError("scenario has no targets")

    @property
    def algorithm(self) -> Algorithm:
        return self.params.algorithm

    @property
    def redundancy(self) -> int:
        return self.params.redundancy

    @property
    def needed(self) -> int:
        """Confirmations required to finish."""
        return math.ceil(self.termination * len(self.scenario.targets) - 1e-9)

    def with_seed(self, seed: int) -> TrialConfig:
        return TrialConfig(self.scenario, self.params, seed, self.termination)


@dataclass(frozen=True)
class TrialResult:
    ticks: Optional[int]
    confirmed: int
    seed: int
    confirmation_ticks: tuple[int, ...] = ()

    @property
    def timed_out(self) -> bool:
        return self.ticks is None


@dataclass(frozen=True)
class ExperimentStats:
    n: int
    mean: float
    half_width: float
    samples: tuple[int, ...]
    timeouts: int = 0
    results: tuple[TrialResult, ...] = field(default=(), compare=False)

    @property
    def valid(self) -> bool:
        return self.n > 0

    @property
    def interval(self) -> tuple[float, float]:
        return self.mean - self.half_width, self.mean + self.half_width


def trial_seed(master_seed: int, index: int) -> int:
    """Seed of trial ``index``; independent of how many trials run."""
    a, b = np.random.SeedSequence([int(master_seed), int(index)]).generate_state(2, np.uint32)
    return (int(a) << 32) | int(b)


def draw_sensing_errors(params: SimParams, n: int, rng: np.random.Generator) -> np.ndarray:
    """One error probability per drone for the whole trial, uniform on the configured interval."""
    lo, hi = params.sensing_error
    return lo + (hi - lo) * rng.random(n)


def run_trial(config: TrialConfig, observer: Optional[TickObserver] = None) -> TrialResult:
    """Simulate until the termination fraction of targets is confirmed or the tick cap."""
    sc, params = config.scenario, config.params
    env = GridEnvironment.from_scenario(sc)
    field_ = PheromoneField(sc.grid_size, sc.grid_size, env.obstacle_mask)
    fparams = FieldParams.from_sim(params)
    model = SensorModel(0.0, params.redundancy)
    swarm = Swarm([s[0] for s in sc.spawns], [s[1] for s in sc.spawns],
                  [s[2] for s in sc.spawns], [s[3] for s in sc.spawns])
    n = len(swarm)
    sensor_ss, motion_ss = np.random.SeedSequence(config.seed).spawn(2)
    sensor_rng = np.random.default_rng(sensor_ss)
    motion_rng = np.random.default_rng(motion_ss)
    error_probability = draw_sensing_errors(params, n, sensor_rng)

    needed = config.needed
    log_ticks: list[int] = []
    for t in range(1, params.tick_cap + 1):
        sense_u = sensor_rng.random(n)
        turn_u = motion_rng.random(n)
        record = swarm.step(env, field_, params, error_probability, sense_u, turn_u)
        for _, _, outcome in apply_effects(record, env, field_, params, model):
            if outcome is Confirmation.NEWLY_CONFIRMED:
                log_ticks.append(t)
        if observer is not None:
            observer(t, swarm, record, field_, env)
        if len(env.confirmed) >= needed:
            return TrialResult(t, len(env.confirmed), config.seed, tuple(log_ticks))
        field_.step(fparams)
    return TrialResult(None, len(env.confirmed), config.seed, tuple(log_ticks))


def summarize(results: Sequence[TrialResult]) -> ExperimentStats:
    """Mean and Student-t 95% half-width over the trials that finished."""
    samples = tuple(r.ticks for r in results if r.ticks is not None)
    timeouts = len(results) - len(samples)
    if timeouts:
        log.warning("%d of %d trials hit the tick cap and are excluded from the mean",
                    timeouts, len(results))
    n = len(samples)
    if n == 0:
        return ExperimentStats(0, math.nan, math.nan, (), timeouts, tuple(results))
    mean = float(np.mean(samples))
    if n < 2:
        return ExperimentStats(n, mean, math.nan, samples, timeouts, tuple(results))
    s = float(np.std(samples, ddof=1))
    half = float(_stats.t.ppf(0.975, n - 1)) * s / math.sqrt(n)
    return ExperimentStats(n, mean, half, samples, timeouts, tuple(results))


def _run_one(config: TrialConfig) -> TrialResult:
    return run_trial(config)


def run_trials(configs: Sequence[TrialConfig], workers: int = 1) -> list[TrialResult]:
    """Run independent trials, in parallel when ``workers > 1``; order is preserved."""
    if workers <= 1 or len(configs) <= 1:
        return [run_trial(c) for c in configs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_run_one, configs, chunksize=1))


def run_experiment(config: TrialConfig, n_trials: int, workers: int = 1) -> ExperimentStats:
    if n_trials < 2:
        raise ValueError("an experiment needs at least 2 trials")
    configs = [config.with_seed(trial_seed(config.seed, i)) for i in range(n_trials)]
    return summarize(run_trials(configs, workers))


@dataclass
class GridResult:
    rows: list[dict]
    trials: list[dict]
    stats: dict[tuple[str, str, int], ExperimentStats]

    def results_csv(self) -> str:
        return _csv(RESULT_COLUMNS, self.rows)

    def trials_csv(self) -> str:
        return _csv(TRIAL_COLUMNS, self.trials)


def run_grid(scenarios: Sequence[Scenario], algorithms: Iterable[Algorithm | str],
             redundancies: Iterable[int], n_trials: int, master_seed: int,
             base: SimParams = SimParams(), workers: int = 1,
             termination: float = 0.95) -> GridResult:
    """Full cross product of scenario x algorithm x redundancy.

    Trial ``i`` of every cell uses the same seed, so cells are compared
    under common random numbers.
    """
    algorithms = [Algorithm.parse(a) for a in algorithms]
    redundancies = [int(r) for r in redundancies]
    if not scenarios or not algorithms or not redundancies:
        raise ValueError("grid axes must be nonempty")
    if n_trials < 2:
        raise ValueError("each grid cell needs at least 2 trials")
    seeds = [trial_seed(master_seed, i) for i in range(n_trials)]
    cells, configs = [], []
    for sc in scenarios:
        for algo in algorithms:
            for red in redundancies:
                params = base.replace(algorithm=algo, redundancy=red)
                cells.append((sc.name, algo, red))
                configs.extend(TrialConfig(sc, params, s, termination) for s in seeds)
    results = run_trials(configs, workers)
    rows, trials, all_stats = [], [], {}
    for k, (name, algo, red) in enumerate(cells):
        chunk = results[k * n_trials:(k + 1) * n_trials]
        st = summarize(chunk)
        all_stats[(name, algo.value, red)] = st
        rows.append({
            "scenario": name, "algorithm": algo.label, "redundancy": red, "n_trials": n_trials,
            "mean_ticks": _fmt(st.mean), "ci95_halfwidth": _fmt(st.half_width),
            "timeouts": st.timeouts, "master_seed": master_seed,
        })
        for i, r in enumerate(chunk):
            trials.append({
                "scenario": name, "algorithm": algo.label, "redundancy": red, "trial_index": i,
                "seed": r.seed, "ticks": "TIMEOUT" if r.timed_out else r.ticks, "confirmed": r.confirmed,
            })
    return GridResult(rows, trials, all_stats)


@dataclass
class SweepResult:
    parameter: str
    values: list[float]
    stats: list[ExperimentStats]

    @property
    def argmin(self) -> float:
        means = [s.mean if s.valid else math.inf for s in self.stats]
        return self.values[int(np.argmin(means))]

    def rows(self) -> list[dict]:
        return [{"parameter": self.parameter, "value": v, "n_trials": len(s.results),
                 "mean_ticks": _fmt(s.mean), "ci95_halfwidth": _fmt(s.half_width), "timeouts": s.timeouts}
                for v, s in zip(self.values, self.stats)]

    def csv(self) -> str:
        return _csv(("parameter", "value", "n_trials", "mean_ticks", "ci95_halfwidth", "timeouts"), self.rows())


def sweep(parameter: str, values: Sequence[float], base: TrialConfig, n_trials: int,
          workers: int = 1) -> SweepResult:
    """One experiment per candidate value of a tunable parameter."""
    if not values:
        raise ValueError("sweep needs at least one value")
    base.params.with_named(parameter, values[0])  # rejects unknown names early
    out = []
    for v in values:
        cfg = TrialConfig(base.scenario, base.params.with_named(parameter, v), base.seed, base.termination)
        out.append(run_experiment(cfg, n_trials, workers))
    return SweepResult(parameter, list(values), out)


def bisection_minimize(f: Callable[[float], float], lo: float, hi: float, tol: float,
                       max_iter: int = 100) -> tuple[float, dict[float, float]]:
    """Shrink ``[lo, hi]`` around the minimum of a unimodal ``f``.

    Each round compares ``f`` just left and right of the midpoint and keeps
    the half that holds the smaller value.  Returns the final midpoint and
    every evaluation made.
    """
    if not lo < hi:
        raise ValueError("need lo < hi")
    if tol <= 0:
        raise ValueError("tol must be positive")
    seen: dict[float, float] = {}

    def ev(x: float) -> float:
        if x not in seen:
            seen[x] = f(x)
        return seen[x]

    for _ in range(max_iter):
        if hi - lo <= tol:
            break
        mid = 0.5 * (lo + hi)
        h = tol / 4
        if ev(mid - h) <= ev(mid + h):
            hi = mid + h
        else:
            lo = mid - h
    return 0.5 * (lo + hi), seen


def bisect_sweep(parameter: str, lo: float, hi: float, tol: float, base: TrialConfig,
                 n_trials: int, workers: int = 1) -> tuple[float, SweepResult]:
    """Bisection on the mean completion time as a function of one parameter."""
    cache: dict[float, ExperimentStats] = {}

    def objective(v: float) -> float:
        cfg = TrialConfig(base.scenario, base.params.with_named(parameter, v), base.seed, base.termination)
        st = run_experiment(cfg, n_trials, workers)
        cache[v] = st
        return st.mean if st.valid else math.inf

    best, _ = bisection_minimize(objective, lo, hi, tol)
    values = sorted(cache)
    return best, SweepResult(parameter, values, [cache[v] for v in values])


def _fmt(v: float) -> str:
    return "nan" if math.isnan(v) else f"{v:.3f}"


def _csv(columns: Sequence[str], rows: Iterable[dict]) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=list(columns), lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow(r)
    return buf.getvalue()
