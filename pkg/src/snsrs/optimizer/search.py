"""Derivative-free maximization of the key rate over the free source settings.

Coordinate descent with a golden-section line search per variable, run from
the starting point and from random restarts, followed by a Nelder-Mead polish
of the best point. Probabilities and intensities that span decades are
searched on a log scale.
"""

import logging
import math
from collections.abc import Callable
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
import pandas as pd
from scipy import optimize as scipy_optimize

from snsrs.config.models import RunConfig
from snsrs.config.settings import (
    DEFAULT_SOURCE,
    LINE_SEARCH_TOL,
    MAX_WIDENINGS,
    OPTIMIZER_BOUNDS,
    OPTIMIZER_LIMITS,
    OPTIMIZER_LOG_SCALE,
    OPTIMIZER_RESTARTS,
    OPTIMIZER_VARIABLES,
    PZ_MIN,
)
from snsrs.keyrate.formulas import KeyRateResult
from snsrs.keyrate.pipeline import evaluate

logger = logging.getLogger(__name__)

INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0
INV_PHI_SQ = (3.0 - math.sqrt(5.0)) / 2.0
# Share of the budget spent on coordinate descent before the polish
DESCENT_SHARE = 0.8
MAX_SWEEPS = 50
SWEEP_RTOL = 1e-9
ORDER_MARGIN = 1e-9
# Best points this close to a box bound, in line-search units, count as on it
BOUND_MARGIN = 2.0 * LINE_SEARCH_TOL


class InfeasibleProblemError(ValueError):
    """Raised when the search box admits no feasible point."""

    pass


class _BudgetExhausted(Exception):
    pass


@dataclass(frozen=True)
class TraceEntry:
    """An improvement of the best objective."""

    evaluation: int
    values: tuple[float, ...]
    objective: float


@dataclass
class OptimizationProblem:
    """Free variables (p_v, p_x, p_y, mu_x, mu_y, mu_z, lambda_slice); p_z = 1 − p_v − p_x − p_y.

    The default objective is the unclamped key rate of the full pipeline.
    """

    base: RunConfig
    asymptotic: bool = False
    bounds: dict[str, tuple[float, float]] = field(default_factory=lambda: dict(OPTIMIZER_BOUNDS))
    objective: Callable[[RunConfig], float] | None = None

    def evaluate(self, config: RunConfig) -> float:
        if self.objective is not None:
            return float(self.objective(config))
        return evaluate(config, asymptotic=self.asymptotic).raw_rate

    def check(self) -> None:
        """Raise InfeasibleProblemError if the box cannot hold a feasible point."""
        problems = []
        for name in OPTIMIZER_VARIABLES:
            lo, hi = self.bounds[name]
            if not lo < hi:
                problems.append(f"{name}: empty interval [{lo}, {hi}]")
            if name in OPTIMIZER_LOG_SCALE and lo <= 0.0:
                problems.append(f"{name}: log-scale bound must be positive")
        if sum(self.bounds[name][0] for name in ("p_v", "p_x", "p_y")) > 1.0 - PZ_MIN:
            problems.append("lower bounds of p_v, p_x, p_y leave no room for p_z")
        if self.bounds["mu_y"][1] <= self.bounds["mu_x"][0]:
            problems.append("mu_y upper bound does not exceed mu_x lower bound")
        if problems:
            raise InfeasibleProblemError("; ".join(problems))


@dataclass(frozen=True)
class OptimizationResult:
    config: RunConfig
    objective: float
    evaluations: int
    trace: list[TraceEntry]
    widened: tuple[str, ...] = ()

    @property
    def values(self) -> dict[str, float]:
        return values_of(self.config)


def values_of(config: RunConfig) -> dict[str, float]:
    return {name: float(getattr(config.protocol, name)) for name in OPTIMIZER_VARIABLES}


def config_with(base: RunConfig, values: np.ndarray) -> RunConfig:
    """Base configuration with the free variables replaced and p_z filled in."""
    settings = dict(zip(OPTIMIZER_VARIABLES, (float(v) for v in values)))
    settings["p_z"] = 1.0 - settings["p_v"] - settings["p_x"] - settings["p_y"]
    return base.with_protocol(**settings)


def golden_section_max(
    func: Callable[[float], float], a: float, b: float, tol: float
) -> tuple[float, float]:
    """Maximize a unimodal function on [a, b].

    Returns:
        (argmax, max) among the evaluated points
    """
    dist = b - a
    if dist <= tol:
        mid = 0.5 * (a + b)
        return mid, func(mid)

    n = int(math.ceil(math.log(tol / dist) / math.log(INV_PHI)))
    c = a + INV_PHI_SQ * dist
    d = a + INV_PHI * dist
    yc = func(c)
    yd = func(d)
    best_x, best_y = (c, yc) if yc >= yd else (d, yd)

    for _ in range(n - 1):
        if yc > yd:
            b, d, yd = d, c, yc
            dist *= INV_PHI
            c = a + INV_PHI_SQ * dist
            yc = func(c)
            if yc > best_y:
                best_x, best_y = c, yc
        else:
            a, c, yc = c, d, yd
            dist *= INV_PHI
            d = a + INV_PHI * dist
            yd = func(d)
            if yd > best_y:
                best_x, best_y = d, yd

    return best_x, best_y


class _Search:
    """Budgeted objective with best-point tracking."""

    def __init__(self, problem: OptimizationProblem, budget: int, seed: int) -> None:
        self.problem = problem
        self.budget = budget
        self.limit = budget
        self.bounds = dict(problem.bounds)
        self.rng = np.random.Generator(np.random.Philox(seed))
        self.evaluations = 0
        self.best = -math.inf
        self.best_values: np.ndarray | None = None
        self.trace: list[TraceEntry] = []

    # Internal coordinates: log for log-scale variables, identity otherwise
    @staticmethod
    def to_internal(index: int, value: float) -> float:
        return math.log(value) if OPTIMIZER_VARIABLES[index] in OPTIMIZER_LOG_SCALE else value

    @staticmethod
    def from_internal(index: int, value: float) -> float:
        return math.exp(value) if OPTIMIZER_VARIABLES[index] in OPTIMIZER_LOG_SCALE else value

    def feasible(self, values: np.ndarray) -> bool:
        named = dict(zip(OPTIMIZER_VARIABLES, values))
        for name, value in named.items():
            lo, hi = self.bounds[name]
            if not lo <= value <= hi:
                return False
        p_z = 1.0 - named["p_v"] - named["p_x"] - named["p_y"]
        return bool(p_z >= PZ_MIN and named["mu_y"] > named["mu_x"])

    def objective(self, values: np.ndarray) -> float:
        if not self.feasible(values):
            return -math.inf
        if self.evaluations >= self.limit:
            raise _BudgetExhausted
        self.evaluations += 1
        try:
            value = self.problem.evaluate(config_with(self.problem.base, values))
        except (ArithmeticError, ValueError, RuntimeError) as e:
            logger.debug(f"Objective failed at {values.tolist()}: {e}")
            value = -math.inf
        if math.isnan(value):
            value = -math.inf
        if value > self.best:
            self.best = value
            self.best_values = np.array(values, dtype=float)
            self.trace.append(TraceEntry(self.evaluations, tuple(values.tolist()), value))
        return value

    def coordinate_range(self, values: np.ndarray, index: int) -> tuple[float, float]:
        name = OPTIMIZER_VARIABLES[index]
        named = dict(zip(OPTIMIZER_VARIABLES, values))
        lo, hi = self.bounds[name]
        if name in ("p_v", "p_x", "p_y"):
            others = sum(named[p] for p in ("p_v", "p_x", "p_y") if p != name)
            hi = min(hi, 1.0 - PZ_MIN - others)
        elif name == "mu_x":
            hi = min(hi, named["mu_y"] * (1.0 - ORDER_MARGIN))
        elif name == "mu_y":
            lo = max(lo, named["mu_x"] * (1.0 + ORDER_MARGIN))
        return lo, hi

    def descend(self, start: np.ndarray) -> tuple[np.ndarray, float]:
        """Coordinate sweeps from ``start`` until a sweep stops improving."""
        current = np.array(start, dtype=float)
        value = self.objective(current)
        for _ in range(MAX_SWEEPS):
            before = value
            for index in range(len(OPTIMIZER_VARIABLES)):
                lo, hi = self.coordinate_range(current, index)
                if not lo < hi:
                    continue

                def along(u: float, index: int = index) -> float:
                    trial = current.copy()
                    trial[index] = min(max(self.from_internal(index, u), lo), hi)
                    return self.objective(trial)

                a, b = self.to_internal(index, lo), self.to_internal(index, hi)
                u_best, y_best = golden_section_max(along, a, b, LINE_SEARCH_TOL * (b - a))
                if y_best > value:
                    current[index] = min(max(self.from_internal(index, u_best), lo), hi)
                    value = y_best
            if value - before <= SWEEP_RTOL * abs(value):
                break
        return current, value

    def random_start(self) -> np.ndarray | None:
        for _ in range(100):
            internal = [
                self.rng.uniform(self.to_internal(i, lo), self.to_internal(i, hi))
                for i, (lo, hi) in enumerate(self.bounds[name] for name in OPTIMIZER_VARIABLES)
            ]
            values = np.array([self.from_internal(i, u) for i, u in enumerate(internal)])
            if self.feasible(values):
                return values
        return None

    def polish(self, start: np.ndarray, share: float = 1.0) -> None:
        """Nelder-Mead from ``start`` on at most ``share`` of the remaining budget."""
        remaining = int((self.budget - self.evaluations) * share)
        if remaining <= 0:
            return
        self.limit = self.evaluations + remaining
        fatol = 1e-10 * abs(self.best) if math.isfinite(self.best) else 0.0
        x0 = np.array([self.to_internal(i, v) for i, v in enumerate(start)])
        box = [
            (self.to_internal(i, self.bounds[name][0]), self.to_internal(i, self.bounds[name][1]))
            for i, name in enumerate(OPTIMIZER_VARIABLES)
        ]

        lows = np.array([self.bounds[name][0] for name in OPTIMIZER_VARIABLES])
        highs = np.array([self.bounds[name][1] for name in OPTIMIZER_VARIABLES])

        def negated(u: np.ndarray) -> float:
            values = np.array([self.from_internal(i, x) for i, x in enumerate(u)])
            values = np.clip(values, lows, highs)
            return -self.objective(values)

        try:
            scipy_optimize.minimize(
                negated,
                x0,
                method="Nelder-Mead",
                bounds=box,
                options={"maxfev": remaining, "xatol": 1e-8, "fatol": fatol},
            )
        except _BudgetExhausted:
            pass

    def widen(self) -> list[str]:
        """Relax box bounds touched by the best point, within the hard limits."""
        assert self.best_values is not None
        widened = []
        for index, (name, value) in enumerate(zip(OPTIMIZER_VARIABLES, self.best_values)):
            lo, hi = self.bounds[name]
            limit_lo, limit_hi = OPTIMIZER_LIMITS[name]
            a, b = self.to_internal(index, lo), self.to_internal(index, hi)
            u = self.to_internal(index, value)
            near = BOUND_MARGIN * (b - a)
            new_lo, new_hi = lo, hi
            if u - a <= near and lo > limit_lo:
                new_lo = max(limit_lo, lo / 10.0 if name in OPTIMIZER_LOG_SCALE else lo / 2.0)
            if b - u <= near and hi < limit_hi:
                new_hi = min(limit_hi, hi * 2.0)
            if (new_lo, new_hi) != (lo, hi):
                logger.warning(
                    f"Optimum hit the {name} bound [{lo:g}, {hi:g}]; widening to "
                    f"[{new_lo:g}, {new_hi:g}]"
                )
                self.bounds[name] = (new_lo, new_hi)
                widened.append(name)
        return widened


def _default_start(problem: OptimizationProblem) -> np.ndarray:
    values = []
    for name in OPTIMIZER_VARIABLES:
        lo, hi = problem.bounds[name]
        values.append(min(max(DEFAULT_SOURCE[name], lo), hi))
    return np.array(values, dtype=float)


def optimize(
    problem: OptimizationProblem,
    budget: int,
    seed: int,
    start: RunConfig | None = None,
) -> OptimizationResult:
    """Maximize the objective within ``budget`` evaluations.

    Args:
        problem: Base configuration, bounds and objective
        budget: Maximum objective evaluations, at least 1
        seed: Seed for the random restarts
        start: Warm start; defaults to the built-in source settings

    Returns:
        OptimizationResult with the best feasible configuration and the
        improvement trace

    Raises:
        ValueError: If budget < 1
        InfeasibleProblemError: If the bounds admit no feasible point
    """
    if budget < 1:
        raise ValueError(f"budget = {budget} must be >= 1")
    problem.check()
    search = _Search(problem, budget, seed)

    first = _default_start(problem)
    if start is not None:
        first = np.array([values_of(start)[name] for name in OPTIMIZER_VARIABLES])
    starts: list[np.ndarray | None] = [first]
    starts += [search.random_start() for _ in range(OPTIMIZER_RESTARTS)]
    per_start = max(1, int(budget * DESCENT_SHARE) // len(starts))

    for restart, point in enumerate(starts):
        if point is None or not search.feasible(point):
            logger.debug(f"Restart {restart} has no feasible start; skipped")
            continue
        search.limit = min(budget, search.evaluations + per_start)
        try:
            search.descend(point)
        except _BudgetExhausted:
            pass

    widened: list[str] = []
    for round_ in range(MAX_WIDENINGS + 1):
        if search.best_values is None:
            break
        last = round_ == MAX_WIDENINGS
        # earlier rounds keep half the budget for a widened search
        search.polish(search.best_values, share=1.0 if last else 0.5)
        if last or search.evaluations >= budget:
            break
        newly = search.widen()
        if not newly:
            break
        widened += newly
        search.limit = budget
        try:
            search.descend(search.best_values)
        except _BudgetExhausted:
            pass

    if search.best_values is None:
        raise InfeasibleProblemError("no feasible point with a finite objective was found")

    logger.info(
        f"Optimized L={problem.base.channel.length_km} km m={problem.base.protocol.m}: "
        f"objective {search.best:.6e} after {search.evaluations} evaluations"
    )
    return OptimizationResult(
        config=config_with(problem.base, search.best_values),
        objective=search.best,
        evaluations=search.evaluations,
        trace=search.trace,
        widened=tuple(dict.fromkeys(widened)),
    )


@dataclass(frozen=True)
class ScanPoint:
    index: int
    distance_km: float
    m: int
    optimization: OptimizationResult
    result: KeyRateResult


def point_seed(seed: int, index: int) -> int:
    return int(np.random.SeedSequence(seed, spawn_key=(index,)).generate_state(1)[0])


_GroupTask = tuple[RunConfig, int, list[tuple[int, float]], int, int, bool, bool]


def _scan_group(task: _GroupTask) -> list[ScanPoint]:
    config, m, points, budget, seed, warm_start, asymptotic = task
    results = []
    previous: RunConfig | None = None
    for index, distance in points:
        base = config.with_modes(m).with_distance(distance)
        problem = OptimizationProblem(base=base, asymptotic=asymptotic)
        start = None
        if warm_start and previous is not None:
            start = config_with(base, np.array(list(values_of(previous).values())))
        best = optimize(problem, budget, point_seed(seed, index), start=start)
        previous = best.config
        results.append(
            ScanPoint(
                index=index,
                distance_km=distance,
                m=m,
                optimization=best,
                result=evaluate(best.config, asymptotic=asymptotic),
            )
        )
    return results


def scan(
    distances: list[float],
    m_values: list[int],
    config: RunConfig,
    budget: int,
    seed: int,
    warm_start: bool = True,
    workers: int = 1,
    asymptotic: bool = False,
) -> list[ScanPoint]:
    """Optimize every (m, distance) point.

    Points are indexed m-major in the order given. With ``warm_start`` each
    distance starts from the previous distance's optimum for the same m, so
    parallelism runs across m values; otherwise across points. The output
    order is the index order regardless of completion order.

    Raises:
        ValueError: If distances are not sorted ascending
    """
    if list(distances) != sorted(distances):
        raise ValueError("distances must be sorted ascending")

    indexed = [
        (m, [(i * len(distances) + k, d) for k, d in enumerate(distances)])
        for i, m in enumerate(m_values)
    ]
    if warm_start:
        groups = indexed
    else:
        groups = [(m, [point]) for m, points in indexed for point in points]
    tasks: list[_GroupTask] = [
        (config, m, points, budget, seed, warm_start, asymptotic) for m, points in groups if points
    ]

    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            chunks = list(pool.map(_scan_group, tasks))
    else:
        chunks = [_scan_group(task) for task in tasks]
    return sorted((p for chunk in chunks for p in chunk), key=lambda p: p.index)


def trace_frame(points: list[ScanPoint]) -> pd.DataFrame:
    """One row per improvement: point, distance_km, m, evaluation, variables, objective."""
    columns = ["point", "distance_km", "m", "evaluation", *OPTIMIZER_VARIABLES, "objective"]
    rows = [
        [p.index, p.distance_km, p.m, entry.evaluation, *entry.values, entry.objective]
        for p in points
        for entry in p.optimization.trace
    ]
    return pd.DataFrame(rows, columns=columns)
