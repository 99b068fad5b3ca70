"""Stream-solution tests against closed forms.

Every expected number here comes from solving U'' + omega(U) = 0 by hand:
constant omega = b gives the parabola U = s y - b y^2 / 2, linear
omega(tau) = b tau gives U = s sin(sqrt(b) y) / sqrt(b), and the
piecewise-linear profile omega = 2 tau - 1 gives U = (1 - cos(sqrt(2) y)) / 2.
The cubic depth integral is checked against a Beta-function oracle.
"""

import math

import numpy as np
import pytest
from scipy.special import gamma

from stillwave.errors import (DivergentDepth, NoStillSolution, NotStill)
from stillwave.stream import (critical_surface_speed, least_still_depth,
                              monotone_interval_lower, shear_solution,
                              solve_cauchy, still_depth_family)
from stillwave.vorticity import (ConstantVorticity, LinearVorticity,
                                 QuadraticTruncatedVorticity,
                                 TabulatedVorticity)

# int_0^1 (1 - tau^3)^(-1/2) dtau = B(1/3, 1/2) / 3
CUBIC_DEPTH = gamma(1.0 / 3.0) * gamma(0.5) / (3.0 * gamma(5.0 / 6.0))

HAT = TabulatedVorticity(nodes=(0.0, 1.0), values=(-1.0, 1.0))


class TestCriticalSpeed:
    def test_constant_b2(self):
        crit = critical_surface_speed(ConstantVorticity(b=2.0))
        assert crit.speed == pytest.approx(2.0, abs=1e-12)
        assert crit.maximiser == pytest.approx(1.0, abs=1e-12)
        assert not crit.degenerate

    def test_linear_b1(self):
        crit = critical_surface_speed(LinearVorticity(b=1.0))
        assert crit.speed == pytest.approx(1.0, abs=1e-12)
        assert crit.maximiser == pytest.approx(1.0, abs=1e-12)

    def test_descending_linear_max_at_origin(self):
        # omega = -tau: antiderivative -tau^2/2 peaks at tau = 0
        crit = critical_surface_speed(LinearVorticity(b=-1.0))
        assert crit.speed == 0.0
        assert crit.maximiser == pytest.approx(0.0, abs=1e-10)

    def test_hat_tie_resolves_to_surface(self):
        # antiderivative tau^2 - tau vanishes at both endpoints; the tie
        # must resolve to tau = 1 so the still branch engages
        crit = critical_surface_speed(HAT)
        assert crit.speed == 0.0
        assert crit.maximiser == 1.0
        assert not crit.degenerate

    def test_degenerate_zero_vorticity(self):
        crit = critical_surface_speed(ConstantVorticity(b=0.0))
        assert crit.degenerate
        assert crit.speed == 0.0


class TestCauchyProblem:
    def test_parabola_profile(self):
        prof = solve_cauchy(ConstantVorticity(b=2.0), s=2.0, y_max=1.5)
        y = np.linspace(0.0, 1.0, 201)
        assert np.max(np.abs(prof.U(y) - (2.0 * y - y ** 2))) < 1e-10
        assert np.max(np.abs(prof.Uy(y) - (2.0 - 2.0 * y))) < 1e-10

    def test_sine_profile(self):
        prof = solve_cauchy(LinearVorticity(b=1.0), s=1.0, y_max=2.0)
        y = np.linspace(0.0, 2.0, 101)
        assert np.max(np.abs(prof.U(y) - np.sin(y))) < 1e-9

    def test_first_integral_random_slopes(self):
        rng = np.random.default_rng(7)
        dist = LinearVorticity(b=1.0)
        for s in rng.uniform(0.3, 2.0, size=4):
            prof = solve_cauchy(dist, s=float(s), y_max=3.0)
            assert prof.first_integral_defect(dist) < 1e-9

    def test_turning_points_recorded(self):
        # U = 0.5 sin y turns at odd multiples of pi/2
        prof = solve_cauchy(LinearVorticity(b=1.0), s=0.5, y_max=5.0)
        expected = np.array([np.pi / 2.0, 3.0 * np.pi / 2.0])
        assert np.max(np.abs(prof.turning_points[:2] - expected)) < 1e-8


class TestLeastDepth:
    def test_constant_b2_exact(self):
        assert least_still_depth(ConstantVorticity(b=2.0)) == pytest.approx(
            1.0, abs=1e-10)

    def test_linear_b1_quarter_period(self):
        assert least_still_depth(LinearVorticity(b=1.0)) == pytest.approx(
            np.pi / 2.0, abs=1e-10)

    def test_cubic_against_beta_oracle(self):
        # b = 3/2 makes the critical slope exactly 1, so the depth is the
        # bare cubic integral
        h0 = least_still_depth(QuadraticTruncatedVorticity(b=1.5, R=1.1))
        assert h0 == pytest.approx(CUBIC_DEPTH, abs=1e-10)

    def test_hat_double_zero(self):
        # zero critical slope: integrable inverse-sqrt at both ends
        assert least_still_depth(HAT) == pytest.approx(
            np.pi / np.sqrt(2.0), abs=1e-10)

    def test_not_still(self):
        with pytest.raises(NotStill):
            least_still_depth(LinearVorticity(b=-1.0))

    def test_divergent_when_vorticity_dies_at_surface(self):
        dist = TabulatedVorticity(nodes=(0.0, 1.0), values=(1.0, 0.0))
        with pytest.raises(DivergentDepth):
            least_still_depth(dist)


class TestMonotoneInterval:
    def test_unbounded_for_constant(self):
        assert monotone_interval_lower(ConstantVorticity(b=2.0), 2.0) == -math.inf

    def test_linear_half_period_below(self):
        y_minus = monotone_interval_lower(LinearVorticity(b=1.0), 1.0)
        assert y_minus == pytest.approx(-np.pi / 2.0, abs=1e-8)


class TestDepthFamily:
    def test_constant_single_member(self):
        members = still_depth_family(ConstantVorticity(b=2.0), k_max=3)
        assert len(members) == 1
        m = members[0]
        assert m.depth == pytest.approx(1.0, abs=1e-10)
        assert m.still
        assert abs(m.U(m.depth) - 1.0) < 1e-8

    def test_linear_ladder(self):
        members = still_depth_family(LinearVorticity(b=1.0), k_max=1)
        depths = [m.depth for m in members]
        expected = [np.pi / 2.0, 3.0 * np.pi / 2.0,
                    5.0 * np.pi / 2.0, 7.0 * np.pi / 2.0]
        assert len(depths) == 4
        assert np.max(np.abs(np.array(depths) - expected)) < 1e-8
        assert all(m.still for m in members)
        assert all(b - a > 0 for a, b in zip(depths, depths[1:]))
        signs = [m.branch[0] for m in members]
        assert signs == ["+", "-", "+", "-"]

    def test_family_first_integral(self):
        dist = LinearVorticity(b=1.0)
        for m in still_depth_family(dist, k_max=1):
            assert m.profile.first_integral_defect(dist) < 1e-9

    def test_rest_start_ladder(self):
        # omega(0) = -1 < 0 starts the rise from rest; reflections stack
        # odd multiples of the least depth
        members = still_depth_family(HAT, k_max=2)
        depths = np.array([m.depth for m in members])
        base = np.pi / np.sqrt(2.0)
        assert np.max(np.abs(depths - base * np.array([1.0, 3.0, 5.0]))) < 1e-8
        assert all(m.still for m in members)

    def test_rest_start_requires_negative_origin(self):
        dist = TabulatedVorticity(nodes=(0.0, 0.5, 1.0), values=(0.0, 1.0, -1.0))
        # antiderivative peaks inside (0, 1): no still configuration
        with pytest.raises(NoStillSolution):
            still_depth_family(dist)

    def test_no_still_for_descending_linear(self):
        with pytest.raises(NoStillSolution):
            still_depth_family(LinearVorticity(b=-1.0))

    def test_degenerate_rejected(self):
        with pytest.raises(NoStillSolution):
            still_depth_family(ConstantVorticity(b=0.0))

    def test_negative_k_max(self):
        with pytest.raises(ValueError):
            still_depth_family(LinearVorticity(b=1.0), k_max=-1)


class TestShearProbe:
    def test_transversal_crossing(self):
        # U = y^2/2 crosses 1 at sqrt(2) with nonzero slope
        sol = shear_solution(ConstantVorticity(b=-1.0), s=0.0)
        assert sol.depth == pytest.approx(np.sqrt(2.0), abs=1e-8)
        assert not sol.still
        assert sol.surface_speed == pytest.approx(np.sqrt(2.0), abs=1e-6)

    def test_tangential_arrival(self):
        sol = shear_solution(ConstantVorticity(b=2.0), s=2.0)
        assert sol.depth == pytest.approx(1.0, abs=1e-6)
        assert sol.still

    def test_subcritical_never_reaches(self):
        # U = y - y^2 tops out at 1/4
        with pytest.raises(ValueError):
            shear_solution(ConstantVorticity(b=2.0), s=1.0, y_limit=50.0)

    def test_oscillating_flow_reported(self):
        with pytest.raises(ValueError, match="oscillates"):
            shear_solution(LinearVorticity(b=1.0), s=0.5, y_limit=40.0)
