import numpy as np
import pytest

from gridlock.rng import RandomSource

_CRITERIA: dict[int, tuple[bool, str]] = {}


def record_criterion(number: int, passed: bool, detail: str) -> None:
    _CRITERIA[number] = (bool(passed), detail)
    print(f"criterion {number}: {'PASS' if passed else 'FAIL'} {detail}")


@pytest.fixture
def src():
    return RandomSource(20240917)


@pytest.fixture
def gen():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_CRITERIA):
        ok, detail = _CRITERIA[n]
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}")


class ScriptedSource:
    """Source whose walk steps and tie values are given explicitly; anything unlisted is +1 / 0.5."""

    master_seed = None

    def __init__(self, steps=None, ties=None, space_ties=None, directions=None, default_step=1):
        self.steps = steps or {}
        self.ties = ties or {}
        self.space_ties = space_ties or {}
        self.dirs = directions or {}
        self.default_step = default_step

    def walk_increments(self, cars, s, mu=None):
        return np.array([self.steps.get((c, s), self.default_step) for c in np.atleast_1d(cars).tolist()],
                        dtype=np.int64)

    def tie_breaks(self, cars, s):
        return np.array([self.ties.get((c, s), 0.5) for c in np.atleast_1d(cars).tolist()])

    def space_tie_breaks(self, cars, s):
        return np.array([self.space_ties.get((c, s), 0.5) for c in np.atleast_1d(cars).tolist()])

    def directions(self, vertices, indices, mu=None):
        keys = zip(np.atleast_1d(vertices).tolist(), np.atleast_1d(indices).tolist())
        return np.array([self.dirs.get(k, self.default_step) for k in keys], dtype=np.int64)

    def shift(self, zeta):
        return 0
