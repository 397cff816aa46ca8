"""Integer derivative-free search for the best feasible partition.

The search works on the interior boundary coordinates ``x[1..B-1]`` with
coordinate directions, an expanding integer step, a nonmonotone acceptance
rule (compare against the worst of the last ``M`` accepted values) and a
sequential exterior penalty for the black-box constraints.
"""

from __future__ import annotations

import itertools
import math
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .partition import (
    EvalResult,
    Partition,
    PartitionProblem,
    canonicalize,
    from_cuts,
    uniform_start,
)

BRUTE_FORCE_CAP = 2_000_000


@dataclass(frozen=True)
class SolverConfig:
    max_evals: int = 5000
    penalty_eps: float = 1.0
    penalty_shrink: float = 0.1
    nonmonotone_memory: int = 4
    initial_step: int = 2
    seed: int = 0
    min_eps: float = 1e-12
    max_directions: int = 64  # extra directions beyond the coordinate ones

    def __post_init__(self) -> None:
        if self.max_evals < 1:
            raise ValueError("max_evals must be at least 1")
        if self.penalty_eps <= 0:
            raise ValueError("penalty_eps must be positive")
        if not 0 < self.penalty_shrink < 1:
            raise ValueError("penalty_shrink must lie in (0, 1)")
        if self.nonmonotone_memory < 1:
            raise ValueError("nonmonotone_memory must be at least 1")
        if self.initial_step < 1:
            raise ValueError("initial_step must be at least 1")
        if self.max_directions < 0:
            raise ValueError("max_directions must be non-negative")


def penalized_value(e: EvalResult, eps: float) -> float:
    """Objective plus ``1/eps`` times the summed constraint violation."""
    if eps <= 0:
        raise ValueError("eps must be positive")
    return e.f + e.total_violation / eps


def _better(a: EvalResult, b: EvalResult | None) -> bool:
    """Ordering used for incumbents: feasibility, then f (or violation), then ties."""
    if b is None:
        return True
    if a.feasible != b.feasible:
        return a.feasible
    if a.feasible:
        key_a = (a.f, a.partition.N, a.x)
        key_b = (b.f, b.partition.N, b.x)
    else:
        key_a = (a.total_violation, a.f, a.partition.N, a.x)
        key_b = (b.total_violation, b.f, b.partition.N, b.x)
    return key_a < key_b


@dataclass
class SolverRun:
    best: EvalResult
    history: list[tuple[int, float, float]] = field(default_factory=list)
    evals_used: int = 0
    converged: bool = False
    final_eps: float = 1.0
    seed: int = 0

    @property
    def feasible(self) -> bool:
        return self.best.feasible

    @property
    def partition(self) -> Partition:
        return self.best.partition

    def to_json_dict(self) -> dict:
        return {
            "x": list(self.best.x),
            "partition": self.best.to_json_dict(),
            "feasible": self.feasible,
            "evals_used": self.evals_used,
            "converged": self.converged,
            "final_eps": self.final_eps,
            "seed": self.seed,
            "history": [list(h) for h in self.history],
        }


class _BudgetExhausted(Exception):
    pass


class _Search:
    def __init__(self, problem: PartitionProblem, scfg: SolverConfig):
        self.problem = problem
        self.scfg = scfg
        self.memo: dict[tuple[int, ...], EvalResult] = {}
        self.history: list[tuple[int, float, float]] = []
        self.best: EvalResult | None = None

    def get(self, x: tuple[int, ...]) -> EvalResult:
        e = self.memo.get(x)
        if e is not None:
            return e
        if len(self.memo) >= self.scfg.max_evals:
            raise _BudgetExhausted
        e = self.problem.evaluate(Partition(x, self.problem.grid))
        self.memo[x] = e
        self.history.append((len(self.memo), e.f, e.violation))
        if _better(e, self.best):
            self.best = e
        return e


def _move(x: tuple[int, ...], direction: np.ndarray, step: int, grid) -> tuple[int, ...]:
    raw = np.array(x)
    raw[1:-1] += step * direction
    return canonicalize(raw.tolist(), grid).x


def _random_direction(n: int, rng: np.random.Generator, seen: set[tuple[int, ...]]) -> np.ndarray | None:
    """New primitive direction in {-1, 0, 1}^n with at least two nonzeros."""
    if n < 2:
        return None
    for _ in range(100):
        d = rng.integers(-1, 2, size=n)
        if np.count_nonzero(d) < 2:
            continue
        key = tuple(int(v) for v in d)
        neg = tuple(-v for v in key)
        if key in seen or neg in seen:
            continue
        seen.add(key)
        return d
    return None


def solve(
    problem: PartitionProblem,
    scfg: SolverConfig = SolverConfig(),
    start: Partition | None = None,
) -> SolverRun:
    """Minimize ``E + w*S`` over feasible partitions within the evaluation budget.

    Coordinate directions are tried first. When no unit move is accepted,
    an infeasible incumbent shrinks the penalty parameter; a feasible one
    marks the run converged. After that (or once the penalty reaches
    ``min_eps``) the remaining budget goes to extra random primitive
    directions from the incumbent, up to ``max_directions`` of them.
    """
    grid = problem.grid
    start = start or uniform_start(grid)
    rng = np.random.default_rng(scfg.seed)
    search = _Search(problem, scfg)
    eps = scfg.penalty_eps
    converged = False

    n = grid.B - 1
    directions = [np.eye(n, dtype=int)[i] for i in range(n)]
    seen = {tuple(int(v) for v in d) for d in directions}
    max_directions = n + scfg.max_directions
    # one step length per signed direction
    steps = {(j, sg): scfg.initial_step for j in range(n) for sg in (1, -1)}

    # accepted moves lower the reference within M moves, so cycles are finite;
    # the probe cap only guards against pathological float behaviour
    probe_cap = 200 * scfg.max_evals
    probes = 0
    try:
        x = start.x
        pen = lambda e: penalized_value(e, eps)  # noqa: E731
        memory = deque([pen(search.get(x))], maxlen=scfg.nonmonotone_memory)
        while probes < probe_cap:
            moved = False
            for j in rng.permutation(len(directions)):
                j = int(j)
                d = directions[j]
                for sg in (1, -1) if rng.random() < 0.5 else (-1, 1):
                    s = steps[j, sg]
                    trial = _move(x, d, sg * s, grid)
                    probes += 1
                    if trial == x:
                        steps[j, sg] = max(1, s // 2)
                        continue
                    p_trial = pen(search.get(trial))
                    if p_trial < max(memory):
                        # expand along the same direction while it keeps improving
                        while True:
                            bigger = _move(x, d, sg * 2 * s, grid)
                            probes += 1
                            if bigger == trial:
                                break
                            p_big = pen(search.get(bigger))
                            if p_big >= p_trial:
                                break
                            trial, p_trial, s = bigger, p_big, 2 * s
                        x = trial
                        memory.append(p_trial)
                        steps[j, sg] = s
                        moved = True
                        break
                    steps[j, sg] = max(1, s // 2)
            if moved or any(v > 1 for v in steps.values()):
                continue
            # no accepted unit move along any current direction
            if not search.best.feasible and eps * scfg.penalty_shrink >= scfg.min_eps:
                eps *= scfg.penalty_shrink
                pen = lambda e: penalized_value(e, eps)  # noqa: E731
                steps = {key: scfg.initial_step for key in steps}
            else:
                converged = converged or search.best.feasible
                d = _random_direction(n, rng, seen) if len(directions) < max_directions else None
                if d is None:
                    break
                directions.append(d)
                j = len(directions) - 1
                steps[j, 1] = steps[j, -1] = scfg.initial_step
            x = search.best.x
            memory = deque([pen(search.get(x))], maxlen=scfg.nonmonotone_memory)
    except _BudgetExhausted:
        pass

    return SolverRun(
        best=search.best,
        history=search.history,
        evals_used=len(search.memo),
        converged=converged,
        final_eps=eps,
        seed=scfg.seed,
    )


def solve_restarts(problem: PartitionProblem, scfg: SolverConfig = SolverConfig(), restarts: int = 1) -> SolverRun:
    """Best of ``restarts`` runs with seeds ``seed, seed+1, ...``."""
    if restarts < 1:
        raise ValueError("restarts must be at least 1")
    best_run = None
    for r in range(restarts):
        cfg = SolverConfig(**{**scfg.__dict__, "seed": scfg.seed + r})
        run = solve(problem, cfg)
        if best_run is None or _better(run.best, best_run.best):
            best_run = run
    return best_run


class SearchSpaceTooLarge(ValueError):
    pass


def search_space_size(G: int, B: int) -> int:
    """Number of distinct boundary sets with at most B intervals."""
    return sum(math.comb(G - 1, j) for j in range(0, min(B - 1, G - 1) + 1))


def brute_force(problem: PartitionProblem, cap: int = BRUTE_FORCE_CAP) -> EvalResult | None:
    """Exhaustive minimum-f feasible partition, or ``None`` if none is feasible.

    Ties are broken by fewer intervals, then by the lexicographically
    smallest ``x``.
    """
    grid = problem.grid
    size = search_space_size(grid.G, grid.B)
    if size > cap:
        raise SearchSpaceTooLarge(f"{size} candidate partitions exceed the cap of {cap}")
    best: EvalResult | None = None
    inner = range(1, grid.G)
    for n_cuts in range(0, min(grid.B - 1, grid.G - 1) + 1):
        for cuts in itertools.combinations(inner, n_cuts):
            e = problem.evaluate(from_cuts(cuts, grid))
            if e.feasible and _better(e, best):
                best = e
    return best
