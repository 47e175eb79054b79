import numpy as np
import pytest

from chflow import (
    EulerianState,
    Grid,
    ScalarField1,
    compare,
    euler_rhs,
    integrate,
    integrate_eulerian,
)
from chflow.errors import TimeMismatch
from chflow.eulerian import fourth_order_dx

from conftest import gaussian_field


class TestEulerRhs:
    def test_zero(self, grid20):
        out = euler_rhs(EulerianState(0.0, grid20, np.zeros(grid20.n)))
        assert np.abs(out).max() == 0.0

    def test_even_velocity_gives_odd_tendency(self, grid20):
        u = 0.7 * np.exp(-grid20.x ** 2)
        out = euler_rhs(EulerianState(0.0, grid20, u))
        assert np.abs(out + out[::-1]).max() <= 1e-13

    def test_fd_stencil_is_fourth_order_on_interior(self):
        errs = []
        for n in (513, 1025):
            grid = Grid.from_interval(-20.0, 20.0, n)
            u = np.exp(-grid.x ** 2)
            ux = fourth_order_dx(u, grid.h)
            errs.append(np.abs(ux + 2 * grid.x * u).max())
        assert np.log2(errs[0] / errs[1]) >= 3.5


class TestIntegrateEulerian:
    def test_zero_data(self, grid20):
        states = integrate_eulerian(ScalarField1.zeros(grid20), 0.1, 1e-2)
        assert all(np.abs(s.u).max() == 0.0 for s in states)
        assert states[-1].t == pytest.approx(0.1, abs=1e-12)

    def test_energy_drift_small(self):
        grid = Grid.from_interval(-20.0, 20.0, 1024)
        states = integrate_eulerian(gaussian_field(grid, amp=0.5), 0.5, 2e-3,
                                    record_every=50)
        ems = [s.energy_momentum() for s in states]
        E = np.array([e for e, _ in ems])
        M = np.array([m for _, m in ems])
        # The trapezoid kernel scans leave an O(h^2) conservation residual,
        # measured at ~4e-5 relative at this resolution and horizon.
        assert np.abs(E - E[0]).max() / E[0] <= 1e-4
        assert np.abs(M - M[0]).max() / abs(M[0]) <= 1e-7

    @pytest.mark.parametrize("bad", [0.0, -1.0])
    def test_bad_times_rejected(self, grid20, bad):
        with pytest.raises(ValueError):
            integrate_eulerian(ScalarField1.zeros(grid20), bad, 1e-3)


class TestCompare:
    def test_identical_zero_solutions(self, grid20):
        traj = integrate(ScalarField1.zeros(grid20), 0.1, 1e-2, record_every=5)
        states = integrate_eulerian(ScalarField1.zeros(grid20), 0.1, 1e-2,
                                    record_every=5)
        report = compare(traj, states, [0.0, 0.1])
        assert report.sup_diff == [0.0, 0.0]
        assert report.l2_diff == [0.0, 0.0]

    def test_missing_time_rejected(self, grid20):
        traj = integrate(ScalarField1.zeros(grid20), 0.1, 1e-2)
        states = integrate_eulerian(ScalarField1.zeros(grid20), 0.1, 1e-2)
        with pytest.raises(TimeMismatch):
            compare(traj, states, [0.05])

    def test_cross_method_gap_shrinks_second_order(self):
        # Halving h (and dt with it) cuts the cross-formulation gap by the
        # trapezoid floor factor of about four.
        gaps = []
        for n, dt in ((512, 4e-3), (1024, 2e-3)):
            grid = Grid.from_interval(-20.0, 20.0, n)
            u0 = gaussian_field(grid, amp=0.5)
            traj = integrate(u0, 1.0, dt, record_every=10 ** 9)
            states = integrate_eulerian(u0, 1.0, dt, record_every=10 ** 9)
            gaps.append(compare(traj, states, [1.0]).sup_diff[0])
        assert 3.0 <= gaps[0] / gaps[1] <= 6.0
