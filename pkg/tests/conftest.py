import numpy as np
import pytest

from chflow import Grid, ScalarField0, ScalarField1


def gaussian_field(grid: Grid, amp: float = 1.0, center: float = 0.0,
                   width: float = 1.0) -> ScalarField1:
    z = (grid.x - center) / width
    u = amp * np.exp(-z * z)
    return ScalarField1(grid, u, -2.0 * z / width * u)


def antisymmetric_field(grid: Grid, amp: float = 1.0, center: float = 0.0,
                        width: float = 1.0) -> ScalarField1:
    z = (grid.x - center) / width
    bump = np.exp(-z * z)
    return ScalarField1(grid, amp * (grid.x - center) * bump,
                        amp * (1.0 - 2.0 * z * z) * bump)


def gaussian_source(grid: Grid, amp: float = 1.0, center: float = 0.0,
                    width: float = 1.0) -> ScalarField0:
    z = (grid.x - center) / width
    return ScalarField0(grid, amp * np.exp(-z * z))


@pytest.fixture
def grid20() -> Grid:
    return Grid.from_interval(-20.0, 20.0, 1025)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20260808)
