import math

import numpy as np
import pytest

from gencesaro.cesaro import OperatorSection, SectionOverflowError, apply, apply_integral, matrix_section
from gencesaro.spaces import CoefficientSeries, SpaceSpec
from gencesaro.weights import log_moments, parse_weight

ORACLE_WEIGHTS = ["one", "pow(0.5)", "pow(2)", "pow2(1)"]


def test_classical_cesaro_average():
    rng = np.random.default_rng(0)
    f = CoefficientSeries(rng.normal(size=40) + 1j * rng.normal(size=40))
    g = apply(parse_weight("one"), f)
    np.testing.assert_allclose(g.coeffs, np.cumsum(f.coeffs) / np.arange(1, 41), atol=1e-13)


@pytest.mark.parametrize("label", ["pow(1)", "exp(1,1)", "loginv(2)"])
def test_image_of_constant(label):
    w = parse_weight(label)
    n = np.arange(30.0)
    lw = log_moments(w, n)[0]
    lo = log_moments(w, 2 * n + 1)[0]
    g = apply(w, CoefficientSeries([1]).padded(29))
    np.testing.assert_allclose(g.coeffs.real, np.exp(lw - lo) / (2 * (n + 1)), rtol=1e-13)


def test_log_series_at_one_half():
    g = apply(parse_weight("one"), CoefficientSeries([1]).padded(60))
    assert abs(g.evaluate(0.5) - 2 * math.log(2)) < 1e-10
    assert apply_integral(parse_weight("one"), CoefficientSeries([1]), 0.5) == pytest.approx(
        2 * math.log(2), abs=1e-13)


@pytest.mark.parametrize("label", ORACLE_WEIGHTS)
def test_integral_form_matches_coefficient_form(label):
    w = parse_weight(label)
    f = CoefficientSeries(0.3 ** np.arange(65))
    g = apply(w, f)
    for z in (0.1, 0.3, 0.5, 0.6, 0.7, 0.5j, -0.4 + 0.3j):
        assert abs(apply_integral(w, f, z) - g.evaluate(z)) <= 1e-8


def test_integral_form_at_zero():
    w = parse_weight("pow(2)")
    lw = log_moments(w, [0.0, 1.0])[0]
    val = apply_integral(w, CoefficientSeries([1, 5, 7]), 0)
    assert val == pytest.approx(math.exp(lw[0] - lw[1]) / 2, rel=1e-12)


def test_triangularity_and_positivity():
    rng = np.random.default_rng(1)
    w = parse_weight("pow(1)")
    f = CoefficientSeries(rng.uniform(size=30))
    g = apply(w, f)
    assert np.all(g.coeffs.real >= 0)
    h = CoefficientSeries(np.concatenate([f.coeffs[:10], rng.uniform(size=20)]))
    np.testing.assert_array_equal(apply(w, h).coeffs[:10], g.coeffs[:10])


def test_section_examples():
    sp = SpaceSpec.hgamma(1)
    w = parse_weight("one")
    np.testing.assert_allclose(matrix_section(w, sp, 1).entries, [[1.0]])
    np.testing.assert_allclose(matrix_section(w, sp, 2).entries, [[1, 0], [0.5, 0.5]])
    M = matrix_section(w, sp, 50).entries
    np.testing.assert_allclose(M, np.tril(np.ones((50, 50))) / np.arange(1, 51)[:, None],
                               rtol=1e-14)
    # pow2(0) is the same density through a different closed form
    a = matrix_section(parse_weight("pow2(0)"), sp, 30).entries
    np.testing.assert_allclose(a, matrix_section(w, sp, 30).entries, rtol=4e-15)


def test_section_invariants(table):
    w, sp = parse_weight("exp(1,1)"), SpaceSpec.bergman("pow(1)")
    S = matrix_section(w, sp, 80, table(w))
    assert np.all(np.isfinite(S.entries)) and np.all(S.entries >= 0)
    assert np.all(np.triu(S.entries, 1) == 0)
    # with a shared moment table the smaller section is exactly the leading block
    big = matrix_section(w, sp, 120, table(w))
    np.testing.assert_array_equal(big.entries[:80, :80], S.entries)
    np.testing.assert_array_equal(big.leading(80).entries, S.entries)
    # independent quadrature batches agree to rounding
    fresh = matrix_section(w, sp, 120)
    np.testing.assert_allclose(fresh.entries, big.entries, rtol=1e-13)


def test_section_matches_apply():
    # C f in orthonormal coordinates: x_n = f_n sqrt(w_n)
    w, sp = parse_weight("pow(0.5)"), SpaceSpec.hgamma(2)
    rng = np.random.default_rng(4)
    f = rng.normal(size=25)
    sq = np.exp(0.5 * sp.log_coeff_weights(np.arange(25)))
    got = matrix_section(w, sp, 25).entries @ (f * sq)
    np.testing.assert_allclose(got, apply(w, CoefficientSeries(f)).coeffs.real * sq, rtol=1e-12)


def test_section_rejects_dirichlet_and_reports_overflow():
    with pytest.raises(ValueError):
        matrix_section(parse_weight("one"), SpaceSpec.dirichlet(), 4)
    with pytest.raises(SectionOverflowError) as info:
        matrix_section(parse_weight("exp(1,4)"), SpaceSpec.hgamma(1), 3000)
    assert info.value.log_value > 709


def test_flush_counter():
    assert matrix_section(parse_weight("one"), SpaceSpec.hgamma(1), 300).flushed == 0
    S = matrix_section(parse_weight("one"), SpaceSpec.hgamma(300), 300)
    assert S.flushed > 0
    assert np.count_nonzero(np.tril(S.entries) == 0) >= S.flushed


def test_section_dump_round_trip(tmp_path):
    S = matrix_section(parse_weight("pow(1)"), SpaceSpec.hgamma(1), 12)
    S.sigma_max = 1.5
    S.dump(tmp_path / "s.csv")
    head = (tmp_path / "s.csv").read_text().splitlines()[:2]
    assert head[0].startswith("# {") and head[1] == "n,k,value"
    T = OperatorSection.load(tmp_path / "s.csv")
    np.testing.assert_array_equal(T.entries, S.entries)
    assert T.metadata() == S.metadata()
