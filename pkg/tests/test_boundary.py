import math

import pytest

from itostrat.boundary import (
    EPSILONS, BoundaryClass, IntegralVerdict, NonDegenerateBoundaryError,
    accessibility_integral, boundary_report, classify_boundary, classify_via_integral,
    reflect,
)
from itostrat.coefficients import DiffusionSpec

A, R, I = (BoundaryClass.ACCESSIBLE_ABSORBING, BoundaryClass.ACCESSIBLE_REFLECTING,
           BoundaryClass.INACCESSIBLE)


def spec(f, g, dom="[0, inf)", interp="Ito"):
    return DiffusionSpec.from_strings(f, g, dom, interp)


# hand-integrated I(eps) for g = x and constant f on [eps, delta]
def oracle(c, delta, eps):
    if c == 0:
        return delta - eps * (math.log(delta / eps) + 1)
    if c == 1:
        return delta * math.log(delta / eps) - (delta - eps)
    if c == 0.5:
        return 2 * (delta - 2 * math.sqrt(delta * eps) + eps)
    raise ValueError(c)


@pytest.mark.parametrize("c", [0, 0.5, 1])
@pytest.mark.parametrize("eps", [1e-2, 1e-4, 1e-6])
def test_integral_matches_closed_form(c, eps):
    s = spec(str(c), "x")
    assert accessibility_integral(s, 0.0, 0.5, eps) == pytest.approx(oracle(c, 0.5, eps),
                                                                      rel=1e-10)


def test_feller_integral_decreasing_to_finite_limit():
    vals = [accessibility_integral(spec("0", "x"), 0.0, 1.0, e) for e in EPSILONS]
    assert all(b > a for a, b in zip(vals, vals[1:]))
    assert vals[-1] == pytest.approx(1.0, abs=2e-5)


def test_integral_rejects_bad_eps():
    with pytest.raises(ValueError):
        accessibility_integral(spec("0", "x"), 0.0, 0.5, 0.6)


@pytest.mark.parametrize("f, cls", [("0", A), ("1/2", R), ("1", I), ("2", I)])
def test_analytic_classes(f, cls):
    assert classify_boundary(spec(f, "x"), 0.0) is cls


def test_logistic_both_ends_absorbing():
    s = spec("x - x^2", "x - x^2", "[0, 1]")
    for e in (0.0, 1.0):
        r = boundary_report(s, e)
        assert r.analytic_class is A
        assert r.integral_verdict is IntegralVerdict.FINITE
        assert r.agreement


@pytest.mark.parametrize("f, verdict", [("0", IntegralVerdict.FINITE),
                                        ("1/2", IntegralVerdict.FINITE),
                                        ("1", IntegralVerdict.DIVERGENT),
                                        ("2", IntegralVerdict.DIVERGENT)])
def test_integral_verdicts(f, verdict):
    assert classify_via_integral(spec(f, "x"), 0.0) is verdict


# f(a) in {0, g'/2, g', 2 g'} for g = x and g = x - x^2 (drift vanishing at 1)
SUITE = [(f, "x", "[0, inf)") for f in ("0", "0.5", "1", "2")] + \
    [(f, "x - x^2", "[0, 1]") for f in ("0", "0.5*(1 - x)", "1 - x", "2*(1 - x)")]
EXPECTED = [A, R, I, I] * 2


@pytest.mark.parametrize("case, expected", list(zip(SUITE, EXPECTED)))
def test_truth_table(case, expected):
    r = boundary_report(spec(*case), 0.0)
    assert r.analytic_class is expected
    assert r.agreement


def test_scale_covariance():
    for f, g, dom in SUITE:
        for c in (0.1, 3.0, 40.0):
            scaled = spec(f"{c}*({f})", f"{c}*({g})", dom)
            assert classify_boundary(scaled, 0.0) is classify_boundary(spec(f, g, dom), 0.0)


def test_right_endpoint_equals_reflected_left():
    s = spec("x - x^2", "x - x^2", "[0, 1]")
    r = reflect(s)
    assert classify_boundary(s, 1.0) is classify_boundary(r, 0.0)
    assert accessibility_integral(s, 1.0, 0.5, 1e-4) == accessibility_integral(r, 0.0, 0.5, 1e-4)


def test_reflecting_right_endpoint():
    s = spec("-0.5*x", "x*(1-x)", "[0, 1]")
    assert classify_boundary(s, 1.0) is R
    assert classify_boundary(s, 0.0) is A


def test_nondegenerate_endpoint_refused():
    with pytest.raises(NonDegenerateBoundaryError, match="non-degenerate"):
        classify_boundary(spec("0", "1 + x"), 0.0)


def test_incompatible_drift_refused():
    with pytest.raises(ValueError, match="compatibility"):
        classify_boundary(spec("-1", "x"), 0.0)


def test_stratonovich_refused():
    with pytest.raises(ValueError):
        classify_boundary(spec("0", "x", interp="Stratonovich"), 0.0)


def test_report_serialises():
    d = boundary_report(spec("0", "x"), 0.0).to_dict()
    assert d["analytic_class"] == "AccessibleAbsorbing"
    assert d["integral_verdict"] == "Finite"
    assert len(d["integral_estimates"]) == len(EPSILONS)
