"""Metaheuristic PI gain tuning against a closed-loop error index.

Two optimizers over the (kp, ki) box: a real-coded genetic algorithm
(tournament selection, BLX-alpha crossover, Gaussian mutation, elitism) and
simulated annealing with a geometric cooling schedule. Both are deterministic
for a fixed seed, and evaluations may run on worker threads without changing
any result (the RNG lives in the single-threaded optimizer state machine;
batch results are reduced in candidate order).
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Callable, Sequence

import numpy as np

from .lti import TransferFunction, is_stable, series, unity_feedback
from .metrics import error_index
from .sim import NumericalBlowup, PIGains, SimConfig, pi_tf, simulate_pi_loop

PENALTY_BASE = 1e9
_SURROGATE_CAP = 1e12

Objective = Callable[[PIGains], float]


class InvalidConfig(ValueError):
    """An optimizer configuration violates its invariants."""


@dataclass(frozen=True)
class GainBounds:
    """Search box for the gain vector; the stated defaults contain all three
    reference gain sets with roughly 2x margin."""

    kp_min: float = 0.0
    kp_max: float = 500.0
    ki_min: float = 0.0
    ki_max: float = 200.0

    def __post_init__(self) -> None:
        for lo, hi, name in ((self.kp_min, self.kp_max, "kp"), (self.ki_min, self.ki_max, "ki")):
            if not 0.0 <= lo < hi:
                raise InvalidConfig(f"{name} bounds must satisfy 0 <= min < max, got [{lo}, {hi}]")

    @property
    def lows(self) -> np.ndarray:
        return np.array([self.kp_min, self.ki_min])

    @property
    def highs(self) -> np.ndarray:
        return np.array([self.kp_max, self.ki_max])


@dataclass(frozen=True)
class GAConfig:
    population_size: int = 50
    generations: int = 100
    tournament_size: int = 3
    crossover_rate: float = 0.9
    blx_alpha: float = 0.5
    mutation_rate: float = 0.1
    mutation_sigma_fraction: float = 0.05
    elitism_count: int = 1
    seed: int = 0

    def __post_init__(self) -> None:
        if self.population_size < 4:
            raise InvalidConfig("population_size must be >= 4")
        if not 2 <= self.tournament_size <= self.population_size:
            raise InvalidConfig("tournament_size must be in [2, population_size]")
        for rate, name in ((self.crossover_rate, "crossover_rate"), (self.mutation_rate, "mutation_rate")):
            if not 0.0 <= rate <= 1.0:
                raise InvalidConfig(f"{name} must be in [0, 1]")
        if not 0 <= self.elitism_count < self.population_size:
            raise InvalidConfig("elitism_count must be in [0, population_size)")
        if self.generations < 1:
            raise InvalidConfig("generations must be >= 1")
        if self.blx_alpha < 0.0 or self.mutation_sigma_fraction <= 0.0:
            raise InvalidConfig("blx_alpha must be >= 0 and mutation_sigma_fraction > 0")


@dataclass(frozen=True)
class SAConfig:
    initial_temperature: float | None = None  # None: calibrate from probe moves
    cooling_factor: float = 0.95
    moves_per_temperature: int = 100
    stop_temperature_ratio: float = 1e-4
    proposal_sigma_fraction: float = 0.02
    seed: int = 0

    def __post_init__(self) -> None:
        if not 0.0 < self.cooling_factor < 1.0:
            raise InvalidConfig("cooling_factor must be in (0, 1)")
        if self.moves_per_temperature < 1:
            raise InvalidConfig("moves_per_temperature must be >= 1")
        if not 0.0 < self.stop_temperature_ratio < 1.0:
            raise InvalidConfig("stop_temperature_ratio must be in (0, 1)")
        if self.proposal_sigma_fraction <= 0.0:
            raise InvalidConfig("proposal_sigma_fraction must be > 0")
        if self.initial_temperature is not None and not self.initial_temperature > 0.0:
            raise InvalidConfig("initial_temperature must be positive (or None for auto)")


@dataclass(frozen=True)
class TuningResult:
    gains: PIGains
    cost: float
    seed: int
    evaluations: int
    history: tuple[tuple[int, float], ...]  # (iteration, best cost so far)


@dataclass(frozen=True)
class RunSet:
    """Results of repeated tuner runs, sorted by ascending cost."""

    runs: tuple[TuningResult, ...]

    def __post_init__(self) -> None:
        seeds = [r.seed for r in self.runs]
        if len(set(seeds)) != len(seeds):
            raise ValueError("runs must have distinct seeds")

    @property
    def best(self) -> TuningResult:
        return self.runs[0]


def objective(
    gains: PIGains,
    plant: TransferFunction,
    cfg: SimConfig,
    index_kind: str = "ITAE",
) -> float:
    """Closed-loop error index of the PI loop, with an instability penalty.

    Candidates whose algebraic closed loop fails the Routh test (marginal
    included) are penalized at 1e9 plus a bounded max-|error| surrogate from
    the time-domain run, so the penalty still grades how badly the loop
    misbehaves while dominating every stable candidate's cost.
    """
    if gains.kp == 0.0 and gains.ki == 0.0:
        # no feedback at all: the error never decays, which the index prices in
        return error_index(simulate_pi_loop(plant, gains, cfg), index_kind).value
    closed = unity_feedback(series(pi_tf(gains), plant))
    stable = is_stable(closed)
    try:
        trace = simulate_pi_loop(plant, gains, cfg)
    except NumericalBlowup as blowup:
        return PENALTY_BASE + min(blowup.peak_error, _SURROGATE_CAP)
    if not stable:
        return PENALTY_BASE + min(float(np.max(np.abs(trace.e))), _SURROGATE_CAP)
    return error_index(trace, index_kind).value


def _eval_batch(objective_fn: Objective, candidates: Sequence[np.ndarray], workers: int) -> list[float]:
    gains = [PIGains(float(c[0]), float(c[1])) for c in candidates]
    if workers <= 1:
        return [float(objective_fn(g)) for g in gains]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return [float(v) for v in pool.map(objective_fn, gains)]


def ga_tune(
    bounds: GainBounds,
    config: GAConfig,
    objective_fn: Objective,
    workers: int = 1,
) -> TuningResult:
    """Real-coded GA over the gain box; deterministic for a fixed seed."""
    rng = np.random.default_rng(config.seed)
    lows, highs = bounds.lows, bounds.highs
    ranges = highs - lows
    sigma = config.mutation_sigma_fraction * ranges
    pop_n, elite_n = config.population_size, config.elitism_count

    pop = rng.uniform(lows, highs, size=(pop_n, 2))
    costs = _eval_batch(objective_fn, pop, workers)
    evaluations = pop_n

    best_idx = int(np.argmin(costs))
    best_x, best_cost = pop[best_idx].copy(), costs[best_idx]
    history = [(0, best_cost)]

    def tournament() -> int:
        idx = rng.integers(0, pop_n, size=config.tournament_size)
        local = [costs[i] for i in idx]
        return int(idx[int(np.argmin(local))])

    for gen in range(1, config.generations + 1):
        order = np.argsort(costs, kind="stable")
        elites = pop[order[:elite_n]].copy()
        elite_costs = [costs[i] for i in order[:elite_n]]

        children: list[np.ndarray] = []
        while len(children) < pop_n - elite_n:
            p1, p2 = pop[tournament()], pop[tournament()]
            if rng.uniform() < config.crossover_rate:
                pair = []
                for _ in range(2):
                    child = np.empty(2)
                    for g in range(2):
                        lo, hi = min(p1[g], p2[g]), max(p1[g], p2[g])
                        spread = config.blx_alpha * (hi - lo)
                        child[g] = rng.uniform(lo - spread, hi + spread)
                    pair.append(child)
            else:
                pair = [p1.copy(), p2.copy()]
            for child in pair:
                for g in range(2):
                    if rng.uniform() < config.mutation_rate:
                        child[g] += rng.normal(0.0, sigma[g])
                np.clip(child, lows, highs, out=child)
                if len(children) < pop_n - elite_n:
                    children.append(child)

        child_costs = _eval_batch(objective_fn, children, workers)
        evaluations += len(children)
        pop = np.vstack([elites, np.array(children)]) if elite_n else np.array(children)
        costs = elite_costs + child_costs
        gen_best = int(np.argmin(costs))
        if costs[gen_best] < best_cost:
            best_x, best_cost = pop[gen_best].copy(), costs[gen_best]
        history.append((gen, best_cost))

    return TuningResult(
        gains=PIGains(float(best_x[0]), float(best_x[1])),
        cost=best_cost,
        seed=config.seed,
        evaluations=evaluations,
        history=tuple(history),
    )


def sa_tune(
    bounds: GainBounds,
    config: SAConfig,
    objective_fn: Objective,
    workers: int = 1,
) -> TuningResult:
    """Simulated annealing with Gaussian proposals and geometric cooling.

    With initial_temperature=None, T0 is calibrated from 50 probe moves around
    the start point so the median uphill move is accepted with probability 0.8.
    The chain itself is sequential; workers only parallelize the probe batch.
    """
    rng = np.random.default_rng(config.seed)
    lows, highs = bounds.lows, bounds.highs
    sigma = config.proposal_sigma_fraction * (highs - lows)

    current = rng.uniform(lows, highs)
    current_cost = _eval_batch(objective_fn, [current], workers=1)[0]
    evaluations = 1
    best_x, best_cost = current.copy(), current_cost

    if config.initial_temperature is not None:
        t0 = config.initial_temperature
    else:
        probes = np.clip(current + rng.normal(0.0, sigma, size=(50, 2)), lows, highs)
        probe_costs = _eval_batch(objective_fn, probes, workers)
        evaluations += len(probes)
        for p, c in zip(probes, probe_costs):
            if c < best_cost:
                best_x, best_cost = p.copy(), c
        uphill = [c - current_cost for c in probe_costs if c > current_cost]
        # exp(-median/t0) = 0.8  =>  t0 = median / ln(1/0.8)
        t0 = float(np.median(uphill)) / math.log(1.0 / 0.8) if uphill else 1.0

    history = [(0, best_cost)]
    temperature = t0
    stage = 0
    while temperature >= config.stop_temperature_ratio * t0:
        stage += 1
        for _ in range(config.moves_per_temperature):
            proposal = np.clip(current + rng.normal(0.0, sigma, size=2), lows, highs)
            cost = float(objective_fn(PIGains(float(proposal[0]), float(proposal[1]))))
            evaluations += 1
            delta = cost - current_cost
            if delta <= 0.0 or rng.uniform() < math.exp(-delta / temperature):
                current, current_cost = proposal, cost
            if cost < best_cost:
                best_x, best_cost = proposal.copy(), cost
        history.append((stage, best_cost))
        temperature *= config.cooling_factor

    return TuningResult(
        gains=PIGains(float(best_x[0]), float(best_x[1])),
        cost=best_cost,
        seed=config.seed,
        evaluations=evaluations,
        history=tuple(history),
    )


def multi_run(tuner: Callable[..., TuningResult], base_config, n_runs: int = 10) -> RunSet:
    """Run a tuner with seeds base..base+n_runs-1; results sorted by cost.

    The selected result is runs[0], the lowest-cost run.
    """
    if n_runs < 1:
        raise ValueError("n_runs must be >= 1")
    results = [tuner(replace(base_config, seed=base_config.seed + i)) for i in range(n_runs)]
    results.sort(key=lambda r: r.cost)  # stable: ties keep seed order
    return RunSet(tuple(results))
