"""
DE/best/1/bin optimizer and the super-directive array synthesis problem
built on it.

Design vectors are laid out as ``[gaps (N-1), lengths (N), amplitudes
(N), phases (N)]`` with gaps and lengths in wavelengths.  Positions are
the cumulative gaps, centered on the array midpoint; amplitudes are
renormalized to unit peak and phases referenced to element 0 on decode.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np

from .emcore import CONSTANTS, ArrayDesign, PhysicalConstants
from .impedance import active_input_impedance, impedance_matrix
from .network import Z0, endfire_metrics

__all__ = [
    "DEConfig", "DERun", "ArrayProblem", "ArrayRun", "SweepResult",
    "de_optimize", "desired_realized_gain", "shortfall_cost",
    "optimize_array", "sweep_max_elements", "default_workers",
    "INFEASIBLE_PENALTY", "RG_FLOOR_DB",
]

INFEASIBLE_PENALTY = 1e6
RG_FLOOR_DB = -100.0
TARGET_FACTOR = 1.4
ACHIEVED_COST = 1e-3


def default_workers() -> int:
    """Worker count capped by the SUPERDIR_THREADS environment variable."""
    try:
        return max(1, int(os.environ.get("SUPERDIR_THREADS", "1")))
    except ValueError:
        return 1


@dataclass(frozen=True)
class DEConfig:
    population_size: int = 200
    crossover: float = 0.8
    mutation: float = 0.8
    max_iterations: int = 250
    seed: int = 0
    bounds: tuple[tuple[float, float], ...] | None = None
    tolerance: float = 1e-12

    def __post_init__(self):
        if self.population_size < 4:
            raise ValueError("DE/best/1 needs a population of at least 4")
        if not 0 <= self.crossover <= 1:
            raise ValueError("crossover must lie in [0, 1]")
        if not 0 < self.mutation <= 2:
            raise ValueError("mutation must lie in (0, 2]")
        if self.max_iterations < 0:
            raise ValueError("max_iterations must be non-negative")
        if not 0 <= self.seed < 2 ** 64:
            raise ValueError("seed must be a non-negative 64-bit integer")
        if self.bounds is not None:
            b = tuple((float(lo), float(hi)) for lo, hi in self.bounds)
            if any(not lo < hi for lo, hi in b):
                raise ValueError("every bound needs lo < hi")
            object.__setattr__(self, "bounds", b)


@dataclass
class DERun:
    config: DEConfig
    history: list[float]
    best: np.ndarray
    best_cost: float
    evaluations: int
    best_history: np.ndarray = field(repr=False)

    @property
    def iterations(self) -> int:
        return len(self.history) - 1


def _reflect(x, lo, hi):
    w = hi - lo
    y = np.mod(x - lo, 2 * w)
    return lo + np.where(y > w, 2 * w - y, y)


def _draw_two(rng, n, exclude):
    # two distinct indices from range(n) minus ``exclude`` (sorted, unique)
    picks = []
    for _ in range(2):
        skip = sorted(set(exclude) | set(picks))
        r = int(rng.integers(n - len(skip)))
        for s in skip:
            if r >= s:
                r += 1
        picks.append(r)
    return picks


def _evaluator(objective, workers):
    if workers <= 1:
        return lambda x: np.asarray(objective(x), float)

    def run(x):
        chunks = np.array_split(x, workers)
        with ThreadPoolExecutor(workers) as pool:
            parts = list(pool.map(objective, chunks))
        return np.concatenate([np.asarray(p, float) for p in parts])
    return run


def de_optimize(objective: Callable[[np.ndarray], np.ndarray],
                config: DEConfig, workers: int = 1,
                callback: Callable[[int, float], None] | None = None) -> DERun:
    """Minimize a batched objective with DE/best/1/bin.

    ``objective`` maps an (M, D) array to M costs.  Random draws come from
    a separate stream per (iteration, member), so results do not depend on
    how evaluation is split across workers.
    """
    if config.bounds is None:
        raise ValueError("DEConfig.bounds must be set")
    lo = np.array([b[0] for b in config.bounds])
    hi = np.array([b[1] for b in config.bounds])
    dim, npop = len(lo), config.population_size
    evaluate = _evaluator(objective, workers)

    rng = np.random.default_rng([config.seed, 0])
    pop = lo + rng.random((npop, dim)) * (hi - lo)
    cost = evaluate(pop)
    evaluations = npop
    best = int(np.argmin(cost))
    history = [float(cost[best])]
    best_history = [pop[best].copy()]

    for it in range(1, config.max_iterations + 1):
        if cost[best] < config.tolerance:
            break
        trials = np.empty_like(pop)
        for j in range(npop):
            r = np.random.default_rng([config.seed, it, j])
            r1, r2 = _draw_two(r, npop, sorted({j, best}))
            mutant = pop[best] + config.mutation * (pop[r1] - pop[r2])
            cross = r.random(dim) < config.crossover
            cross[r.integers(dim)] = True
            trials[j] = np.where(cross, mutant, pop[j])
        trials = _reflect(trials, lo, hi)
        trial_cost = evaluate(trials)
        evaluations += npop
        keep = trial_cost <= cost
        pop[keep] = trials[keep]
        cost[keep] = trial_cost[keep]
        best = int(np.argmin(cost))
        history.append(float(cost[best]))
        best_history.append(pop[best].copy())
        if callback is not None:
            callback(it, history[-1])

    return DERun(config, history, pop[best].copy(), float(cost[best]),
                 evaluations, np.array(best_history))


def shortfall_cost(achieved_db, target_db):
    """Squared shortfall below target; zero once the target is met."""
    delta = np.asarray(target_db, float) - np.asarray(achieved_db, float)
    out = np.where(delta > 0, delta * delta, 0.0)
    return out if out.ndim else float(out)


def _uniform_endfire(n, frequency, constants):
    lam = constants.wavelength(frequency)
    x = (np.arange(n) - (n - 1) / 2) * lam / 2
    k = constants.wavenumber(frequency)
    # co-phased at end-fire under the exp(-j k r.r_n) sum
    return x, np.full(n, lam / 2), np.exp(1j * k * x), lam / 200


def desired_realized_gain(n_elements: int, frequency: float, z0: float = Z0,
                          constants: PhysicalConstants = CONSTANTS) -> float:
    """Target realized gain in dBi: 1.4x the uncoupled end-fire baseline.

    The baseline is N half-wave dipoles at half-wave spacing with uniform
    end-fire phasing, evaluated with all mutual impedances set to zero.
    """
    if n_elements < 1:
        raise ValueError("need at least one element")
    x, l, i, rho = _uniform_endfire(n_elements, frequency, constants)
    m = endfire_metrics(x, l, i, rho, frequency, z0, constants, coupled=False)
    return 10 * math.log10(TARGET_FACTOR * float(m["realized"][0]))


@dataclass(frozen=True)
class ArrayProblem:
    """End-fire realized-gain synthesis for N elements."""
    n: int
    frequency: float
    z0: float = Z0
    constants: PhysicalConstants = CONSTANTS
    gap_bounds: tuple[float, float] = (0.05, 0.5)
    length_bounds: tuple[float, float] = (0.35, 0.55)
    target_db: float | None = None

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("need at least one element")
        if self.target_db is None:
            object.__setattr__(self, "target_db", desired_realized_gain(
                self.n, self.frequency, self.z0, self.constants))

    @property
    def wavelength(self) -> float:
        return self.constants.wavelength(self.frequency)

    @property
    def radius(self) -> float:
        return self.wavelength / 200

    @property
    def dim(self) -> int:
        return 4 * self.n - 1

    def bounds(self) -> tuple[tuple[float, float], ...]:
        n = self.n
        return ((self.gap_bounds,) * (n - 1) + (self.length_bounds,) * n
                + ((0.0, 1.0),) * n + ((-math.pi, math.pi),) * n)

    def split(self, vectors):
        v = np.atleast_2d(np.asarray(vectors, float))
        n, lam = self.n, self.wavelength
        gaps = v[:, :n - 1] * lam
        lengths = v[:, n - 1:2 * n - 1] * lam
        amps = v[:, 2 * n - 1:3 * n - 1]
        phases = v[:, 3 * n - 1:]
        x = np.concatenate([np.zeros((len(v), 1)), np.cumsum(gaps, 1)], 1)
        x -= (x[:, :1] + x[:, -1:]) / 2
        peak = amps.max(1, keepdims=True)
        amps = amps / np.where(peak > 0, peak, 1.0)
        phases = phases - phases[:, :1]
        return x, lengths, amps * np.exp(1j * phases), peak[:, 0]

    def violation(self, vectors) -> np.ndarray:
        x, lengths, _, peak = self.split(vectors)
        v = np.where(peak > 1e-12, 0.0, 1.0)
        if self.n > 1:
            short = 2 * self.radius - np.diff(x, axis=1)
            v = v + np.sum(np.clip(short, 0, None), 1) / self.wavelength
        k = self.constants.wavenumber(self.frequency)
        res = 1e-6 - np.abs(np.sin(k * lengths / 2))
        return v + np.sum(np.clip(res, 0, None), 1)

    def realized_gain_db(self, vectors) -> np.ndarray:
        """End-fire realized gain (dBi, floored) per design vector; NaN
        where the vector does not decode."""
        x, lengths, currents, _ = self.split(vectors)
        out = np.full(len(x), np.nan)
        ok = self.violation(vectors) == 0
        if np.any(ok):
            m = endfire_metrics(x[ok], lengths[ok], currents[ok], self.radius,
                                self.frequency, self.z0, self.constants)
            with np.errstate(divide="ignore", invalid="ignore"):
                rg = 10 * np.log10(m["realized"])
            rg = np.where(np.isfinite(rg) & (m["p_in"] > 0), rg, RG_FLOOR_DB)
            out[ok] = np.maximum(rg, RG_FLOOR_DB)
        return out

    def cost(self, vectors) -> np.ndarray:
        viol = self.violation(vectors)
        rg = self.realized_gain_db(vectors)
        c = shortfall_cost(np.nan_to_num(rg, nan=RG_FLOOR_DB), self.target_db)
        return np.where(viol > 0, INFEASIBLE_PENALTY + viol, c)

    def decode(self, vector) -> ArrayDesign:
        x, lengths, currents, _ = self.split(vector)
        return ArrayDesign.from_arrays(self.frequency, x[0], lengths[0],
                                       currents[0], self.radius,
                                       self.constants)


@dataclass
class ArrayRun:
    problem: ArrayProblem
    run: DERun
    design: ArrayDesign
    realized_gain_db: float
    rg_history: np.ndarray

    @property
    def n(self) -> int:
        return self.problem.n

    @property
    def target_db(self) -> float:
        return self.problem.target_db

    @property
    def achieved(self) -> bool:
        return self.run.best_cost < ACHIEVED_COST

    @property
    def active_resistance(self) -> np.ndarray:
        zin = active_input_impedance(impedance_matrix(self.design),
                                     self.design.currents)
        return zin.real


def optimize_array(n_elements: int, config: DEConfig, frequency: float,
                   z0: float = Z0, constants: PhysicalConstants = CONSTANTS,
                   workers: int = 1, callback=None) -> ArrayRun:
    problem = ArrayProblem(n_elements, frequency, z0, constants)
    cfg = replace(config, bounds=problem.bounds())
    run = de_optimize(problem.cost, cfg, workers, callback)
    rg = problem.realized_gain_db(run.best_history)
    return ArrayRun(problem, run, problem.decode(run.best), float(rg[-1]), rg)


@dataclass
class SweepResult:
    runs: dict[int, ArrayRun]

    @property
    def max_elements(self) -> int | None:
        """Largest N whose run met the target."""
        ok = [n for n, r in self.runs.items() if r.achieved]
        return max(ok) if ok else None


def sweep_max_elements(n_values: Sequence[int], config: DEConfig,
                       frequency: float, z0: float = Z0,
                       constants: PhysicalConstants = CONSTANTS,
                       workers: int = 1, progress=None) -> SweepResult:
    runs = {}
    for n in n_values:
        runs[n] = optimize_array(n, config, frequency, z0, constants, workers)
        if progress is not None:
            progress(runs[n])
    return SweepResult(runs)
