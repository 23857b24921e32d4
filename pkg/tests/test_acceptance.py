"""Acceptance gate: one test per criterion, each recording a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py``; the lines are repeated in the
terminal summary under "acceptance criteria".
"""

import math

import numpy as np

from gencesaro.analysis import (ScanConfig, boundedness_scan, compactness_probe,
                                dirichlet_divergence, section_norm, truncation_degree)
from gencesaro.cesaro import apply, apply_integral, matrix_section
from gencesaro.kernels import kernel_coeffs
from gencesaro.spaces import CoefficientSeries, SpaceSpec, norm
from gencesaro.specfun import log_gamma_ratio
from gencesaro.weights import ROSTER, classify, log_moments, parse_weight

# pinned tolerances
TOL_CESARO = 1e-12
ULPS_IDENTITY = 4
TOL_LOG2 = 1e-10
TOL_KERNEL_REL = 1e-9
TOL_ORACLE = 1e-8
TOL_SIGMA2 = 1e-9
HARDY_FLOOR = 1.75
EXP_GROWTH = 2.0
DIRICHLET_L_MIN = 2.3
PROBE_NORM_TOL = 1e-6
PROBE_FLOOR = 0.1
TRIALS = 1000


def test_c01_classical_cesaro(criterion):
    rng = np.random.default_rng(101)
    w = parse_weight("one")
    worst = 0.0
    for _ in range(100):
        f = rng.normal(size=65) + 1j * rng.normal(size=65)
        g = apply(w, CoefficientSeries(f)).coeffs
        worst = max(worst, float(np.max(np.abs(g - np.cumsum(f) / np.arange(1, 66)))))
    criterion(1, "apply(one) is the running average", worst <= TOL_CESARO,
              f"max abs deviation {worst:.3g} over 100 vectors (tol {TOL_CESARO})")


def test_c02_image_of_one(criterion):
    g = apply(parse_weight("one"), CoefficientSeries([1]).padded(60))
    exact = 1.0 / np.arange(1, 62)
    ulps = float(np.max(np.abs(g.coeffs - exact) / np.spacing(exact)))
    dev = abs(g.evaluate(0.5) - 2 * math.log(2))
    criterion(2, "C_one(1) = sum z^n/(n+1)", ulps <= ULPS_IDENTITY and dev <= TOL_LOG2,
              f"coefficients within {ulps:.0f} ulp, |g(0.5) - 2 log 2| = {dev:.3g}")


def test_c03_kernel_closed_form(criterion):
    worst = 0.0
    n = np.arange(513.0)
    for alpha in (0.0, 1.0, 2.5):
        w = parse_weight(f"pow2({alpha})")
        got = kernel_coeffs(w, 512, method="quad").coeffs
        ref = (alpha + 1) * np.exp(log_gamma_ratio(n + 1, alpha + 1) - math.lgamma(2 + alpha))
        worst = max(worst, float(np.max(np.abs(got / ref - 1))))
    criterion(3, "pow2 kernel coefficients from quadrature", worst <= TOL_KERNEL_REL,
              f"max rel error {worst:.3g} for n <= 512 (tol {TOL_KERNEL_REL})")


def test_c04_integral_vs_coefficients(criterion):
    f = CoefficientSeries(0.3 ** np.arange(65))
    worst = 0.0
    for label in ("one", "pow(0.5)", "pow(2)", "pow2(1)"):
        w = parse_weight(label)
        g = apply(w, f)
        for z in (0.1, 0.3, 0.5, 0.6, 0.7):
            worst = max(worst, abs(apply_integral(w, f, z) - g.evaluate(z)))
    criterion(4, "integral form agrees with coefficient form", worst <= TOL_ORACLE,
              f"max |difference| {worst:.3g} (tol {TOL_ORACLE})")


def test_c05_hardy_constant(criterion):
    w, sp = parse_weight("one"), SpaceSpec.hgamma(1)
    rep = boundedness_scan(w, sp, [64, 256, 1024, 4096])
    s = np.array(rep.sigmas)
    s2 = section_norm(matrix_section(w, sp, 2)).sigma
    ok = (np.all(np.diff(s) > 0) and np.all(s < 2) and s[-1] > HARDY_FLOOR
          and abs(s2 - math.sqrt((3 + math.sqrt(5)) / 4)) <= TOL_SIGMA2)
    criterion(5, "Cesaro sections approach 2 from below", bool(ok),
              f"sigma = {', '.join(f'{v:.6f}' for v in s)}; sigma(2) = {s2:.10f}")


def test_c06_boundedness_dichotomy(criterion):
    verdicts = {}
    for label in ("one", "pow(1)"):
        for g in (0.5, 1.0, 2.0):
            rep = boundedness_scan(parse_weight(label), SpaceSpec.hgamma(g))
            verdicts[(label, f"hgamma:{g}")] = rep.verdict
    rep = boundedness_scan(parse_weight("pow(1)"), SpaceSpec.bergman("pow(0.5)"),
                           [64, 128, 256, 512, 1024, 2048])
    verdicts[("pow(1)", "bergman:pow(0.5)")] = rep.verdict
    bounded = all(v == "bounded-looking" for v in verdicts.values())
    exp_rep = boundedness_scan(parse_weight("exp(1,1)"), SpaceSpec.hgamma(1))
    growth = exp_rep.sigmas[-1] / exp_rep.sigmas[exp_rep.Ns.index(512)]
    ok = bounded and exp_rep.verdict == "unbounded-looking" and growth >= EXP_GROWTH
    odd = [k for k, v in verdicts.items() if v != "bounded-looking"]
    criterion(6, "bounded-looking for D weights, unbounded for exp(1,1)", ok,
              f"{len(verdicts) - len(odd)}/{len(verdicts)} bounded-looking; exp(1,1) "
              f"{exp_rep.verdict}, sigma(4096)/sigma(512) = {growth:.3g}")


def test_c07_dirichlet_failure(criterion):
    holds, L_final = [], None
    for label in ROSTER:
        c = dirichlet_divergence(parse_weight(label), 10000)
        holds.append(bool(np.all(c.S >= c.L)))
        L_final = c.L[-1]
    ok = all(holds) and L_final > DIRICHLET_L_MIN
    criterion(7, "S(N) >= L(N) for every roster weight", ok,
              f"{sum(holds)}/{len(holds)} weights, L(10^4) = {L_final:.4f}")


def test_c08_noncompactness_probe(criterion):
    details, ok = [], True
    for label, sp in (("one", SpaceSpec.hgamma(1)), ("pow(1)", SpaceSpec.bergman("pow(1)"))):
        rep = compactness_probe(parse_weight(label), sp, [0.9, 0.99, 0.999])
        norm_dev = max(abs(v - 1) for v in rep.norm_f)
        ok &= norm_dev <= PROBE_NORM_TOL and min(rep.ratio) >= PROBE_FLOOR
        details.append(f"{label} on {sp.label}: min ratio {min(rep.ratio):.4f}, "
                       f"|norm - 1| <= {norm_dev:.2g}")
    criterion(8, "probe ratios stay away from zero", bool(ok), "; ".join(details))


def test_c09_classifier_truth_table(criterion):
    got = {label: classify(parse_weight(label)) for label in ROSTER}
    ok = all(got[k].in_d.verdict == "yes" for k in ("one", "pow(0.5)", "pow(1)", "pow(2)",
                                                     "pow2(1)"))
    ok &= got["exp(1,1)"].in_dhat.verdict == "no"
    ok &= got["loginv(2)"].in_dhat.verdict == "yes" and got["loginv(2)"].in_m.verdict == "no"
    table = ", ".join(f"{k}: d={r.in_d.verdict}/dhat={r.in_dhat.verdict}/m={r.in_m.verdict}"
                      for k, r in got.items())
    criterion(9, "classifier truth table", bool(ok), table)


def _monotonicity_trials(rng):
    labels = ["one", "pow(0.5)", "pow(2)", "pow2(1)", "exp(1,1)", "loginv(2)"]
    bad = 0
    for _ in range(TRIALS):
        kind = rng.integers(0, 4)
        if kind == 0:
            label = labels[rng.integers(0, len(labels))]
        elif kind == 1:
            label = f"pow({rng.uniform(-0.9, 5):.4f})"
        elif kind == 2:
            label = f"exp({rng.uniform(0.1, 3):.4f},{rng.uniform(0.2, 2):.4f})"
        else:
            label = f"sum(pow({rng.uniform(0, 3):.3f}),loginv({rng.uniform(1.1, 4):.3f}))"
        x, y = np.sort(rng.uniform(0, 1e4, 2))
        v, e = log_moments(parse_weight(label), [x, y])
        bad += v[0] < v[1] - 2 * (e[0] + e[1])
    return bad


def _nesting_trials(rng):
    spaces = [SpaceSpec.hgamma(0.5), SpaceSpec.hgamma(1), SpaceSpec.hgamma(2.5),
              SpaceSpec.bergman("pow(1)"), SpaceSpec.bergman("exp(1,1)")]
    weights = [parse_weight(s) for s in ("one", "pow(0.5)", "pow(2)", "pow2(1)", "exp(1,1)",
                                         "loginv(2)")]
    bad = 0
    for _ in range(TRIALS):
        w = weights[rng.integers(0, len(weights))]
        sp = spaces[rng.integers(0, len(spaces))]
        n = int(rng.integers(1, 40))
        n2 = int(rng.integers(n + 1, 64))
        small = matrix_section(w, sp, n).entries
        big = matrix_section(w, sp, n2).entries
        same = np.allclose(big[:n, :n], small, rtol=1e-13, atol=0)
        s1, s2 = section_norm(small).sigma, section_norm(big).sigma
        bad += (not same) or s1 > s2 * (1 + 2e-8)
    return bad


def _linearity_trials(rng):
    weights = [parse_weight(s) for s in ("one", "pow(1.5)", "pow2(0.5)", "exp(1,1)",
                                         "loginv(2)")]
    bad = 0
    for _ in range(TRIALS):
        w = weights[rng.integers(0, len(weights))]
        d = int(rng.integers(0, 33))
        f = rng.normal(size=d + 1) + 1j * rng.normal(size=d + 1)
        g = rng.normal(size=d + 1) + 1j * rng.normal(size=d + 1)
        a, b = complex(*rng.normal(size=2)), complex(*rng.normal(size=2))
        lhs = apply(w, CoefficientSeries(a * f + b * g)).coeffs
        rhs = a * apply(w, CoefficientSeries(f)).coeffs + b * apply(w, CoefficientSeries(g)).coeffs
        scale = (abs(a) + abs(b)) * apply(w, CoefficientSeries(np.abs(f) + np.abs(g))).coeffs.real
        bad += not np.all(np.abs(lhs - rhs) <= 1e-13 * scale + 1e-300)
    return bad


def _additivity_trials(rng):
    spaces = [SpaceSpec.hgamma(0.3), SpaceSpec.hgamma(1), SpaceSpec.hgamma(4),
              SpaceSpec.bergman("one"), SpaceSpec.bergman("loginv(2)")]
    bad = 0
    for _ in range(TRIALS):
        sp = spaces[rng.integers(0, len(spaces))]
        d = int(rng.integers(1, 200))
        c = rng.normal(size=d + 1) + 1j * rng.normal(size=d + 1)
        mask = rng.uniform(size=d + 1) < 0.5
        f, g = CoefficientSeries(np.where(mask, c, 0)), CoefficientSeries(np.where(mask, 0, c))
        lhs = norm(sp, f + g) ** 2
        bad += abs(lhs - norm(sp, f) ** 2 - norm(sp, g) ** 2) > 1e-13 * lhs
    return bad


def test_c10_property_suites(criterion):
    rng = np.random.default_rng(2024)
    counts = {"moment monotonicity": _monotonicity_trials(rng),
              "section nesting": _nesting_trials(rng),
              "linearity of apply": _linearity_trials(rng),
              "norm additivity": _additivity_trials(rng)}
    criterion(10, f"property suites, {TRIALS} trials each", not any(counts.values()),
              ", ".join(f"{k}: {v} violations" for k, v in counts.items()))


if __name__ == "__main__":
    import sys

    import pytest

    sys.exit(pytest.main([__file__, "-q"]))
