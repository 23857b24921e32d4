import math

import mpmath
import numpy as np
import pytest

from gencesaro.specfun import beta, hgamma_coeff, log_beta, log_gamma_ratio

mpmath.mp.dps = 40


@pytest.mark.parametrize("a,b", [(1.0, 1.0), (11.0, 3.5), (0.5, 0.5), (1e4, 2.0),
                                 (3.0, 1e6), (2.5e8, 1.5), (7.25, 0.001)])
def test_log_beta_matches_mpmath(a, b):
    ref = float(mpmath.log(mpmath.beta(a, b)))
    assert log_beta(a, b) == pytest.approx(ref, rel=1e-14, abs=1e-13)


def test_log_beta_is_symmetric_and_vectorised():
    a = np.array([1.0, 5.5, 300.0])
    b = np.array([2.0, 0.25, 7.0])
    np.testing.assert_allclose(log_beta(a, b), log_beta(b, a), rtol=1e-15, atol=1e-14)


def test_small_beta_values():
    assert beta(2, 2) == pytest.approx(1 / 6, rel=1e-15)
    assert beta(11, 3.5) == pytest.approx(
        math.gamma(11) * math.gamma(3.5) / math.gamma(14.5), rel=1e-13)


@pytest.mark.parametrize("a,b", [(1.0, 0.5), (40.0, 2.5), (1e6, -0.5), (3.0, 1e3)])
def test_log_gamma_ratio(a, b):
    ref = float(mpmath.loggamma(a + b) - mpmath.loggamma(a))
    assert log_gamma_ratio(a, b) == pytest.approx(ref, rel=1e-14, abs=1e-13)


def test_hgamma_coeff_examples():
    assert hgamma_coeff(2.0, 3) == pytest.approx(4.0, rel=1e-14)
    assert hgamma_coeff(1.0, np.arange(10)) == pytest.approx(np.ones(10), rel=1e-14)
    for g in (0.3, 1.7, 5.0):
        assert hgamma_coeff(g, 1) == pytest.approx(g, rel=1e-14)
