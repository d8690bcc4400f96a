"""Tests for divergences and the LR-like / GLR-like statistics
"""
from dataclasses import dataclass

import numpy as np
import pytest

from sglr_toolkit.app.exceptions import DomainError, InvalidHypothesesError, NoSolutionError
from sglr_toolkit.app.families import Bernoulli, Side, SubExponential
from sglr_toolkit.app.services.divergences import (
    bregman, divergence_difference_exact, dstar, dstar_point, glr_like_rate, inv_bregman,
    log_glr_like, log_lr_like, lr_like_forms
)


@dataclass(frozen=True)
class DoubledConjugateBernoulli(Bernoulli):
    """Bernoulli with psi* off by a factor of two and psi left alone
    """

    def psi_star(self, z, mu):
        return 2 * super().psi_star(z, mu)


class TestBregman:
    """Tests for bregman and inv_bregman
    """

    def test_values(self, gaussian, bernoulli):
        """Closed-form values
        """

        assert bregman(gaussian, 0.2, 0.0) == pytest.approx(0.02)
        assert bregman(bernoulli, 0.75, 0.5) == pytest.approx(0.130812, abs=1e-6)
        assert bregman(bernoulli, 0.3, 0.3) == 0.0

    def test_outside_domain(self, bernoulli):
        """mu0 must be inside M and z inside its closure
        """

        with pytest.raises(DomainError):
            bregman(bernoulli, 0.5, 0.0)
        with pytest.raises(DomainError):
            bregman(bernoulli, 1.2, 0.5)

    def test_inverse(self, gaussian, bernoulli):
        """Inverse of the divergence on the upper side
        """

        assert inv_bregman(gaussian, 0.0, 0.02, Side.UPPER) == pytest.approx(0.2)
        assert inv_bregman(bernoulli, 0.5, 0.130812, Side.UPPER) == pytest.approx(0.75, abs=1e-5)
        assert inv_bregman(bernoulli, 0.4, 0.0) == 0.4

    def test_inverse_round_trip(self, poisson):
        """inv_bregman undoes bregman on a grid, both sides
        """

        mu0s = np.array([0.5, 1.0, 3.0])
        upper = inv_bregman(poisson, mu0s, bregman(poisson, mu0s * 2, mu0s), Side.UPPER)
        lower = inv_bregman(poisson, mu0s, bregman(poisson, mu0s / 2, mu0s), Side.LOWER)
        np.testing.assert_allclose(upper, mu0s * 2, atol=1e-8)
        np.testing.assert_allclose(lower, mu0s / 2, atol=1e-8)

    def test_inverse_beyond_limit(self, bernoulli):
        """Targets at or past log(1/mu0) have no upper solution
        """

        with pytest.raises(NoSolutionError):
            inv_bregman(bernoulli, 0.5, 0.8, Side.UPPER)

    def test_negative_target(self, gaussian):
        """Divergence targets can't be negative
        """

        with pytest.raises(DomainError):
            inv_bregman(gaussian, 0.0, -1.0)


class TestStatistics:
    """Tests for the LR-like and GLR-like statistics
    """

    def test_lr_like(self, gaussian):
        """n (lambda1 xbar - psi(lambda1))
        """

        assert log_lr_like(gaussian, 10, 0.3, 0.2, 0.0) == pytest.approx(0.4)
        assert log_lr_like(gaussian, 10, 0.7, 0.0, 0.0) == 0.0
        assert log_lr_like(gaussian, 10, 0.2, 0.2, 0.0) == pytest.approx(10 * 0.02)

    def test_forms_agree(self, bernoulli):
        """Natural parameter, tangent and divergence-difference forms agree
        """

        xbars = np.array([0.0, 0.2, 0.45, 0.9, 1.0])
        forms = lr_like_forms(bernoulli, 25, xbars, 0.6, 0.4)
        np.testing.assert_allclose(forms.tangent_form, forms.lambda_form, rtol=1e-9, atol=1e-12)
        np.testing.assert_allclose(forms.divergence_form, forms.lambda_form, rtol=1e-9, atol=1e-12)

    @pytest.mark.parametrize("family, xbars, mu1, mu0", [
        ("gaussian", [-1.0, 0.1, 2.5], 0.5, 0.0),
        ("poisson", [0.3, 1.0, 4.0], 1.5, 1.0),
    ])
    def test_divergence_difference(self, family, xbars, mu1, mu0, request):
        """n [D(xbar, mu0) - D(xbar, mu1)] matches the natural parameter form
        """

        forms = lr_like_forms(request.getfixturevalue(family), 8, np.array(xbars), mu1, mu0)
        np.testing.assert_allclose(forms.divergence_form, forms.lambda_form, rtol=1e-9, atol=1e-12)

    def test_wrong_conjugate_detected(self):
        """A conjugate that doesn't match psi breaks the agreement of the forms
        """

        forms = lr_like_forms(DoubledConjugateBernoulli(), 25, np.array([0.2, 0.45, 0.9]), 0.6, 0.4)
        assert not np.allclose(forms.divergence_form, forms.lambda_form, rtol=1e-6)

    def test_exact_families(self, gaussian, bernoulli, poisson):
        """The divergence difference is only exact for exponential families
        """

        assert divergence_difference_exact(gaussian)
        assert divergence_difference_exact(bernoulli)
        assert divergence_difference_exact(poisson)
        assert not divergence_difference_exact(SubExponential(scale=1.0))

    def test_glr_like(self, gaussian):
        """Divergence above mu1, clipped tangent below
        """

        assert log_glr_like(gaussian, 10, 0.3, 0.2, 0.0) == pytest.approx(0.45)
        assert log_glr_like(gaussian, 10, 0.1, 0.2, 0.0) == pytest.approx(0.0, abs=1e-12)
        assert log_glr_like(gaussian, 10, -0.4, 0.0, 0.0) == 0.0

    def test_glr_like_matches_sup_of_lr_like(self, bernoulli):
        """GLR-like equals the sup of the LR-like statistic over alternatives above mu1
        """

        alternatives = np.linspace(0.5, 0.999, 2000)
        for xbar in (0.3, 0.55, 0.8):
            brute = max(0.0, max(float(log_lr_like(bernoulli, 12, xbar, z, 0.3)) for z in alternatives))
            assert log_glr_like(bernoulli, 12, xbar, 0.5, 0.3) == pytest.approx(brute, abs=1e-3)

    def test_rate_vectorised(self, gaussian):
        """glr_like_rate broadcasts over xbar
        """

        rates = glr_like_rate(gaussian, np.array([-1.0, 0.1, 0.3]), 0.2, 0.0)
        np.testing.assert_allclose(rates, [0.0, 0.0, 0.045], atol=1e-12)

    def test_alternative_below_null(self, gaussian):
        """mu1 below mu0 is rejected
        """

        with pytest.raises(InvalidHypothesesError):
            log_glr_like(gaussian, 5, 0.1, -0.2, 0.0)


class TestDstar:
    """Tests for the balance-point divergence
    """

    def test_gaussian_midpoint(self, gaussian):
        """(mu - mu0)^2 / 8 at the midpoint
        """

        assert dstar(gaussian, 0.4, 0.0) == pytest.approx(0.02, abs=1e-9)
        assert dstar_point(gaussian, 0.4, 0.0) == pytest.approx(0.2, abs=1e-9)
        assert dstar(gaussian, 0.0, 0.4) == pytest.approx(0.02, abs=1e-9)

    def test_bernoulli_bounds(self, bernoulli):
        """Between the quadratic lower bound and the KL divergence
        """

        value = dstar(bernoulli, 0.7, 0.5)
        assert 0.02 <= value <= bernoulli.divergence(0.7, 0.5)

    def test_equal_means(self, bernoulli):
        """Zero when the means coincide
        """

        assert dstar(bernoulli, 0.3, 0.3) == 0.0

    def test_argument_order(self, bernoulli):
        """Swapping mu and mu0 gives the same value and balance point
        """

        assert dstar(bernoulli, 0.2, 0.6) == pytest.approx(dstar(bernoulli, 0.6, 0.2), rel=1e-12)
        assert dstar_point(bernoulli, 0.2, 0.6) == pytest.approx(dstar_point(bernoulli, 0.6, 0.2), rel=1e-12)
        assert 0.2 < dstar_point(bernoulli, 0.2, 0.6) < 0.6

    def test_point_outside_domain(self, bernoulli):
        """Both means must lie in the mean space
        """

        with pytest.raises(DomainError):
            dstar_point(bernoulli, 1.3, 0.5)
        with pytest.raises(DomainError):
            dstar(bernoulli, 0.5, -0.1)
