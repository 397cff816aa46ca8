import numpy as np
import pytest

from nhppfit.empirical import build_empirical
from nhppfit.ingest import ArrivalDataset
from nhppfit.partition import PartitionGrid, PartitionProblem
from nhppfit.synth import TrueRate, generate


def make_dataset(weeks, weekday="tue"):
    return ArrivalDataset(weekday, tuple(np.asarray(w, dtype=float) for w in weeks))


@pytest.fixture
def toy_grid():
    return PartitionGrid(G=8, B=8, ell_units=1)


@pytest.fixture(scope="session")
def four_segment_ds():
    return generate(TrueRate.parse("0-6:3,6-12:9,12-18:4,18-24:7"), 13, seed=400)


@pytest.fixture
def toy_problem(four_segment_ds, toy_grid):
    ds = four_segment_ds
    return PartitionProblem(ds, build_empirical(ds), 1.0, grid=toy_grid)


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
