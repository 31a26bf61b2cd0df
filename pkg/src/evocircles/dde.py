"""Discrete differential evolution over integer vectors.

The engine evolves integer vectors by transforming them into a real-valued
domain, applying best/1 mutation and binomial crossover there, and rounding
the trials back to integers. Trials that land outside the integer bounds
are assigned a flat penalty instead of being evaluated, so the objective
only ever sees feasible vectors. Selection is greedy and keeps ties in
favor of the trial, which makes the best objective value non-increasing
across generations.

Integer vectors are int64 arrays, real vectors float64 arrays.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError
from .geometry import round_half_away_from_zero


@dataclass(frozen=True)
class DdeConfig:
    """Engine parameters.

    ``transform_cap`` is the exclusive upper range of the integer<->real
    transforms. When the search upper bound reaches it, the cap is raised
    to the smallest power of ten exceeding the bound so large index spaces
    keep a faithful round trip.
    """

    f: float = 0.25
    cr: float = 0.80
    pop_size: int = 30
    dim: int = 3
    lower_bound: int = 1
    upper_bound: int = 999
    max_generations: int = 100
    h: float = 100.0
    transform_cap: int = 1000
    penalty_cost: float = 2.0
    target_objective: float | None = None
    seed: int | None = None

    def __post_init__(self):
        if self.f <= 0:
            raise ConfigError("mutation factor f must be positive")
        if not 0 <= self.cr <= 1:
            raise ConfigError("crossover constant cr must be in [0, 1]")
        if self.pop_size < 4:
            raise ConfigError("pop_size must be at least 4 (best + two donors + target)")
        if self.dim < 1:
            raise ConfigError("dim must be at least 1")
        if self.upper_bound < self.lower_bound:
            raise ConfigError(
                f"upper_bound {self.upper_bound} < lower_bound {self.lower_bound}"
            )
        if self.max_generations < 0:
            raise ConfigError("max_generations must be non-negative")
        if self.h <= 0 or self.transform_cap < 2:
            raise ConfigError("need h > 0 and transform_cap >= 2")
        if self.penalty_cost <= 0:
            raise ConfigError("penalty_cost must be positive")
        if self.upper_bound >= self.transform_cap:
            cap = 10 ** len(str(self.upper_bound))
            object.__setattr__(self, "transform_cap", cap)


@dataclass(frozen=True)
class EvolutionResult:
    best: np.ndarray
    best_objective: float
    generations_run: int
    objective_trace: list[float] = field(repr=False)
    evaluations: int = 0


def init_population(cfg: DdeConfig, rng: np.random.Generator) -> np.ndarray:
    """Draw pop_size integer vectors uniformly from [lower_bound, upper_bound]."""
    return rng.integers(
        cfg.lower_bound, cfg.upper_bound + 1, size=(cfg.pop_size, cfg.dim), dtype=np.int64
    )


def forward_transform(x, cfg: DdeConfig):
    """Map integer entries into the real domain: -1 + x*h*5/(cap - 1)."""
    return -1.0 + (np.asarray(x, dtype=np.float64) * cfg.h * 5.0) / (cfg.transform_cap - 1)


def backward_transform(x_real, cfg: DdeConfig):
    """Map real entries back to integers, rounding half away from zero."""
    arr = np.asarray(x_real, dtype=np.float64)
    if not np.isfinite(arr).all():
        raise ValueError("backward_transform requires finite input")
    v = (1.0 + arr) * (cfg.transform_cap - 1) / (5.0 * cfg.h)
    if arr.ndim == 0:
        return round_half_away_from_zero(float(v))
    out = np.where(v >= 0, np.floor(v + 0.5), np.ceil(v - 0.5))
    return out.astype(np.int64)


def mutate(best: np.ndarray, xr1: np.ndarray, xr2: np.ndarray, f: float) -> np.ndarray:
    """best/1 mutation: v = best + f * (xr1 - xr2)."""
    if not len(best) == len(xr1) == len(xr2):
        raise ValueError("mutation operands must share one dimension")
    return best + f * (xr1 - xr2)


def crossover(
    target: np.ndarray, mutant: np.ndarray, cr: float, rng: np.random.Generator
) -> np.ndarray:
    """Binomial crossover; the coordinate at j_rand always comes from the mutant."""
    if len(target) != len(mutant):
        raise ValueError("crossover operands must share one dimension")
    dim = len(target)
    j_rand = int(rng.integers(dim))
    take = rng.random(dim) <= cr
    take[j_rand] = True
    return np.where(take, mutant, target)


def select(
    target: np.ndarray, trial: np.ndarray, j_target: float, j_trial: float
) -> np.ndarray:
    """Greedy selection; a tie keeps the trial."""
    return trial if j_trial <= j_target else target


def validate(v: np.ndarray, cfg: DdeConfig) -> bool:
    """True when every coordinate lies within [lower_bound, upper_bound]."""
    return bool(((v >= cfg.lower_bound) & (v <= cfg.upper_bound)).all())


def sample_distinct_pair(
    rng: np.random.Generator, pop_size: int, exclude: int
) -> tuple[int, int]:
    """Two distinct population indices, both different from ``exclude``."""
    r1 = exclude
    while r1 == exclude:
        r1 = int(rng.integers(pop_size))
    r2 = exclude
    while r2 == exclude or r2 == r1:
        r2 = int(rng.integers(pop_size))
    return r1, r2


def _call(objective, vec: np.ndarray, generation: int, index: int) -> float:
    try:
        return float(objective(vec))
    except Exception as exc:
        raise RuntimeError(
            f"objective raised at generation {generation}, individual {index}"
        ) from exc


def evolve(objective, cfg: DdeConfig, rng: np.random.Generator | None = None) -> EvolutionResult:
    """Run the full evolution loop and return the best vector found.

    Stops after ``max_generations`` generations, or as soon as the best
    objective value reaches ``target_objective`` (when one is set).
    Infeasible trials are penalized with ``penalty_cost`` and never passed
    to the objective.
    """
    if rng is None:
        rng = np.random.default_rng(cfg.seed)

    pop = init_population(cfg, rng)
    objs = np.array(
        [_call(objective, pop[i], 0, i) for i in range(cfg.pop_size)], dtype=np.float64
    )
    evaluations = cfg.pop_size

    best_idx = int(np.argmin(objs))
    best = pop[best_idx].copy()
    best_obj = float(objs[best_idx])
    trace = [best_obj]

    def done() -> bool:
        return cfg.target_objective is not None and best_obj <= cfg.target_objective

    gen = 0
    while gen < cfg.max_generations and not done():
        gen += 1
        real = forward_transform(pop, cfg)
        best_real = forward_transform(best, cfg)
        new_pop = pop.copy()
        new_objs = objs.copy()
        for i in range(cfg.pop_size):
            r1, r2 = sample_distinct_pair(rng, cfg.pop_size, i)
            mutant = mutate(best_real, real[r1], real[r2], cfg.f)
            trial = backward_transform(crossover(real[i], mutant, cfg.cr, rng), cfg)
            if validate(trial, cfg):
                j_trial = _call(objective, trial, gen, i)
                evaluations += 1
            else:
                j_trial = cfg.penalty_cost
            if j_trial <= objs[i]:
                new_pop[i] = trial
                new_objs[i] = j_trial
        pop, objs = new_pop, new_objs
        best_idx = int(np.argmin(objs))
        if objs[best_idx] <= best_obj:
            best = pop[best_idx].copy()
            best_obj = float(objs[best_idx])
        trace.append(best_obj)

    return EvolutionResult(best, best_obj, gen, trace, evaluations)
