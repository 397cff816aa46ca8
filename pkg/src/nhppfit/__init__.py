"""Optimal piecewise-constant arrival rates for nonhomogeneous Poisson data.

The day is split into non-equally-spaced intervals chosen by an integer
derivative-free search that minimizes fit error plus a smoothness penalty,
subject to a CU Kolmogorov-Smirnov test and a dispersion test on every
interval.
"""

__version__ = "0.1.0"

from .empirical import EmpiricalRate, build_empirical, rate_mass
from .ingest import ArrivalDataset, Weekday, count_in_interval, load_arrivals
from .partition import (
    EvalResult,
    Partition,
    PartitionGrid,
    PartitionProblem,
    canonicalize,
    evaluate,
    starting_point,
)
from .solver import SolverConfig, SolverRun, brute_force, penalized_value, solve
from .stattests import TestConfig, cu_ks_test, dispersion_test
from .synth import OverdispersionSpec, TrueRate, expected_counts, generate

__all__ = [
    "ArrivalDataset",
    "EmpiricalRate",
    "EvalResult",
    "OverdispersionSpec",
    "Partition",
    "PartitionGrid",
    "PartitionProblem",
    "SolverConfig",
    "SolverRun",
    "TestConfig",
    "TrueRate",
    "Weekday",
    "brute_force",
    "build_empirical",
    "canonicalize",
    "count_in_interval",
    "cu_ks_test",
    "dispersion_test",
    "evaluate",
    "expected_counts",
    "generate",
    "load_arrivals",
    "penalized_value",
    "rate_mass",
    "solve",
    "starting_point",
]
