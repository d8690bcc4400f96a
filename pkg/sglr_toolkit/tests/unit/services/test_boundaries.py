"""Tests for the boundary crossing bounds and solvers
"""
import math

import numpy as np
import pytest

from sglr_toolkit.app.exceptions import DegenerateBoundError, DomainError, InvalidBoundaryError
from sglr_toolkit.app.schemas.boundary import (
    ConstantBoundary, LogLogBoundary, PiecewiseConstantBoundary, StitchParams
)
from sglr_toolkit.app.services.boundaries import (
    crossing_bound_constant, crossing_bound_general, expected_n_bound_const, expected_n_bound_noseq,
    k_eta, lorden_bound, loglog_boundary, loglog_stitched_sum,
    solve_g_alpha_constant, solve_g_alpha_lorden, stitched_boundary, stitched_sum, t_high,
    t_high_bound, validate_boundary
)


def brute_force_bound(d1: float, g: float, k_max: int = 10000) -> float:
    """Exhaustive scan of the integer form over k = 1..k_max
    """

    ks = np.arange(1, k_max + 1, dtype=float)
    return float(np.min(ks * np.exp(-g * (d1 / g) ** (1 / ks))))


class TestKEta:
    """Tests for the number of stitched epochs
    """

    def test_constant_boundary(self):
        """Smallest k with 2^k >= g / d1
        """

        assert k_eta(ConstantBoundary(g=5), 0.02, 2.0) == 8

    def test_edge_cases(self):
        """Zero epochs once d1 reaches g(1), infinitely many when d1 is zero
        """

        assert k_eta(ConstantBoundary(g=5), 6.0, 2.0) == 0
        assert math.isinf(k_eta(ConstantBoundary(g=5), 0.0, 2.0))

    def test_invalid_eta(self):
        """eta must exceed 1
        """

        with pytest.raises(DomainError):
            k_eta(ConstantBoundary(g=5), 0.1, 1.0)


class TestCrossingBoundConstant:
    """Tests for the integer form of the constant boundary bound
    """

    def test_separated_case(self):
        """e^-g once d1 >= g, from both branches at d1 = g
        """

        assert crossing_bound_constant(3.0, 2.0) == pytest.approx(math.exp(-2))
        assert crossing_bound_constant(2.0, 2.0) == pytest.approx(math.exp(-2))

    def test_matches_exhaustive_scan(self):
        """Early exit finds the same minimum as a full scan
        """

        assert crossing_bound_constant(0.1, 10.0) == pytest.approx(5.5e-3, rel=0.05)
        rng = np.random.default_rng(7)
        for d1, g in zip(10 ** rng.uniform(-4, 0, 25), rng.uniform(2, 25, 25)):
            if d1 >= g:
                continue
            assert crossing_bound_constant(d1, g) == pytest.approx(brute_force_bound(d1, g), rel=1e-10)

    def test_monotone(self):
        """Decreasing in g and nonincreasing in d1
        """

        assert crossing_bound_constant(1e-3, 12.0) < crossing_bound_constant(1e-3, 11.0)
        assert crossing_bound_constant(2e-3, 11.0) <= crossing_bound_constant(1e-3, 11.0)

    def test_degenerate(self):
        """mu1 == mu0 makes the bound vacuous
        """

        with pytest.raises(DegenerateBoundError):
            crossing_bound_constant(0.0, 5.0)


class TestSolvers:
    """Tests for the boundary value solvers
    """

    def test_large_d1(self):
        """log(1/alpha) once d1 is at least that large
        """

        assert solve_g_alpha_constant(5.0, 0.05) == pytest.approx(math.log(20))
        assert solve_g_alpha_lorden(5.0, 0.05) == pytest.approx(math.log(20))

    @pytest.mark.parametrize("d1", [1e-2, 1e-5, 1e-9])
    def test_round_trip(self, d1):
        """bound(solve(alpha)) lands in [alpha - 1e-6, alpha]
        """

        g = solve_g_alpha_constant(d1, 0.05)
        assert 0.05 - 1e-6 <= crossing_bound_constant(d1, g) <= 0.05

    def test_lorden(self):
        """(1 + g / d1) e^-g = alpha at the solution
        """

        g = solve_g_alpha_lorden(0.01, 0.05)
        assert lorden_bound(0.01, g) == pytest.approx(0.05, abs=1e-6)
        assert (1 + g / 0.01) * math.exp(-g) == pytest.approx(0.05, abs=1e-6)

    def test_below_lorden_for_small_gaps(self):
        """Stitched boundary is smaller than Lorden's once d1 is small
        """

        for d1 in (1e-6, 1e-9, 1e-12):
            assert solve_g_alpha_constant(d1, 0.05) < solve_g_alpha_lorden(d1, 0.05)

    def test_loglog_growth(self):
        """Growth in log(1/d1) flattens out
        """

        g_3, g_6, g_12 = (solve_g_alpha_constant(d1, 0.025) for d1 in (1e-3, 1e-6, 1e-12))
        assert g_12 - g_6 <= g_6 - g_3 + 1


class TestLogLog:
    """Tests for the log-log boundary and its stitched series
    """

    def test_values(self):
        """c [log(1/alpha) + 2 log(log_c(c n))]
        """

        assert loglog_boundary(2.0, 0.1, 4) == pytest.approx(2 * (math.log(10) + 2 * math.log(3)))
        assert loglog_boundary(2.0, 0.1, 1) == pytest.approx(2 * math.log(10))

    def test_stitched_sum_at_eta_c(self):
        """alpha (pi^2/6 - 1) when eta = c and d1 = 0
        """

        assert loglog_stitched_sum(2.0, 0.05, 2.0) == pytest.approx(0.05 * (math.pi ** 2 / 6 - 1), rel=1e-10)
        assert loglog_stitched_sum(3.0, 0.1, 3.0) == pytest.approx(0.1 * (math.pi ** 2 / 6 - 1), rel=1e-10)

    def test_general_bound_without_separation(self):
        """The infimum over eta is at most the eta = c value
        """

        bound = crossing_bound_general(LogLogBoundary(c=2.0, alpha=0.05), 0.0)
        assert bound <= 0.05 * (math.pi ** 2 / 6 - 1) + 1e-12

    def test_general_bound_at_fixed_eta(self):
        """A pinned eta evaluates the series at that eta only
        """

        boundary = LogLogBoundary(c=2.0, alpha=0.05)
        bound = crossing_bound_general(boundary, 0.0, StitchParams(eta=2.0))
        assert bound == pytest.approx(loglog_stitched_sum(2.0, 0.05, 2.0))


class TestGeneralBound:
    """Tests for crossing_bound_general and the stitched series
    """

    def test_constant_reduces_to_integer_form(self):
        """Constant boundaries use the integer form exactly
        """

        assert crossing_bound_general(ConstantBoundary(g=6.0), 0.01) == crossing_bound_constant(0.01, 6.0)

    def test_separated(self):
        """e^-g(1) once d1 >= g(1)
        """

        assert crossing_bound_general(LogLogBoundary(c=2.0, alpha=0.1), 10.0) == pytest.approx(0.1 ** 2)

    def test_constant_series(self):
        """K_eta e^-g/eta for a constant boundary
        """

        assert stitched_sum(ConstantBoundary(g=5.0), 0.02, 2.0) == pytest.approx(8 * math.exp(-2.5))

    def test_invalid_boundary(self):
        """g(n)/n must not increase
        """

        with pytest.raises(InvalidBoundaryError):
            validate_boundary(PiecewiseConstantBoundary(breaks=[10], values=[1, 100]))


def test_stitched_boundary():
    """Smaller neighbouring value at the shared endpoint
    """

    boundary = stitched_boundary([(1, 10), (10, 100)], [5.0, 6.0])
    assert float(boundary(5)) == 5.0
    assert float(boundary(10)) == 5.0
    assert float(boundary(11)) == 6.0
    assert float(boundary(500)) == 6.0


class TestStoppingTimeBounds:
    """Tests for t_high and the expected sample size bounds
    """

    def test_t_high_large_dstar(self, gaussian):
        """Stops at t = 1 when D* is huge
        """

        assert t_high(gaussian, 100.0, 0.0, 2.0, 0.05) == 1

    def test_t_high_monotone_in_delta(self, gaussian):
        """Smaller delta needs at least as long
        """

        assert t_high(gaussian, 0.5, 0.0, 2.0, 0.01) >= t_high(gaussian, 0.5, 0.0, 2.0, 0.2)

    def test_t_high_below_closed_form(self, gaussian):
        """The closed-form bound is an upper bound
        """

        for delta in (0.05, 0.2):
            assert t_high(gaussian, 0.5, 0.0, 2.0, delta) <= t_high_bound(gaussian, 0.5, 0.0, 2.0, delta)

    def test_expected_n_const(self, gaussian):
        """Positive and shrinking as the true mean moves away
        """

        near = expected_n_bound_const(gaussian, 0.5, 0.0, 0.5, 0.05)
        far = expected_n_bound_const(gaussian, 1.0, 0.0, 0.5, 0.05)
        assert near > far > 0

    def test_expected_n_const_requires_order(self, gaussian):
        """mu >= mu1 > mu0 is required
        """

        with pytest.raises(DomainError):
            expected_n_bound_const(gaussian, 0.2, 0.0, 0.5, 0.05)

    def test_expected_n_noseq(self, gaussian):
        """Grows as the true mean approaches mu0
        """

        assert expected_n_bound_noseq(gaussian, 0.1, 0.0, 2.0, 0.05) > expected_n_bound_noseq(
            gaussian, 0.5, 0.0, 2.0, 0.05)
