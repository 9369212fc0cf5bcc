import json
import warnings

import numpy as np
import pytest

from itostrat.coefficients import DiffusionSpec
from itostrat.expr import equivalent, eval_expr, parse_expr, to_string
from itostrat.simulate import Path, residual_path
from itostrat.transform import (
    AuditWarning, absorbing_state_audit, fixed_points, ito_to_stratonovich,
    stratonovich_to_ito,
)

ITO, STRAT = "Ito", "Stratonovich"
CORPUS = [
    ("0", "x", "[0, inf)"),
    ("x - x^2", "x - x^2", "[0, 1]"),
    ("1/2", "x", "[0, inf)"),
    ("0", "x*(1-x)", "[0, 1]"),
    ("x*(1-x)", "x*(1-x)", "[0, 1]"),
    ("0", "1", "[0, inf)"),
    ("1 - x", "x*(1-x)", "[0, 1]"),
    ("exp(-x)", "x*exp(x)", "[0, inf)"),
]


def spec(f, g, dom="[0, inf)", interp=ITO):
    return DiffusionSpec.from_strings(f, g, dom, interp)


def test_feller_to_stratonovich():
    r = ito_to_stratonovich(spec("0", "x"))
    assert to_string(r.target.f) == "-0.5"
    assert r.destroyed == (0.0,) and r.created == ()
    assert r.target.interpretation.value == STRAT
    assert r.target.g == r.source.g


def test_two_absorbing_to_stratonovich():
    r = ito_to_stratonovich(spec("x - x^2", "x - x^2", "[0, 1]"))
    assert equivalent(r.target.f, parse_expr("-1/2 + 2*x - x^2"))
    assert r.destroyed == (0.0, 1.0)


def test_constant_half_creates_trivial_point():
    r = ito_to_stratonovich(spec("1/2 + 0*x", "x"))
    assert to_string(r.target.f) == "0"
    assert r.destroyed == () and r.created == (0.0,)


def test_stratonovich_feller_to_ito():
    r = stratonovich_to_ito(spec("0", "x", interp=STRAT))
    assert to_string(r.target.f) == "0.5"
    assert r.destroyed == (0.0,)


def test_inverse_of_first_example():
    r = stratonovich_to_ito(spec("-1/2", "x", interp=STRAT))
    assert to_string(r.target.f) == "0"
    assert r.created == (0.0,)


def test_additive_noise_is_invariant():
    r = stratonovich_to_ito(spec("0", "1", interp=STRAT))
    assert to_string(r.target.f) == "0"
    assert r.destroyed == () and r.created == ()


def test_wrong_interpretation():
    with pytest.raises(ValueError):
        ito_to_stratonovich(spec("0", "x", interp=STRAT))
    with pytest.raises(ValueError):
        stratonovich_to_ito(spec("0", "x"))


@pytest.mark.parametrize("f, g, dom", CORPUS)
def test_round_trip_restores_drift(f, g, dom):
    s = spec(f, g, dom)
    back = stratonovich_to_ito(ito_to_stratonovich(s).target).target
    assert equivalent(back.f, s.f)
    sign = ito_to_stratonovich(s)
    xs = np.linspace(0.05, 0.95, 9)
    for x in xs:
        assert eval_expr(sign.target.f, x) == pytest.approx(
            eval_expr(s.f, x) - 0.5 * eval_expr(s.gprime, x), abs=1e-14)


@pytest.mark.parametrize("f, g, dom", CORPUS)
def test_destroyed_points_have_nonzero_slope(f, g, dom):
    r = ito_to_stratonovich(spec(f, g, dom))
    for x in r.destroyed:
        assert abs(eval_expr(r.source.gprime, x)) > 1e-12


def test_audit_examples():
    ito = spec("0", "x")
    strat = spec("-1/2", "x", interp=STRAT)
    assert absorbing_state_audit(ito, strat)[:2] == ([0.0], [])
    assert absorbing_state_audit(ito, ito)[:2] == ([], [])
    a = spec("x - x^2", "x - x^2", "[0, 1]")
    b = spec("-1/2 + 2*x - x^2", "x - x^2", "[0, 1]", STRAT)
    assert absorbing_state_audit(a, b)[0] == [0.0, 1.0]


def test_audit_requires_shared_g():
    with pytest.raises(ValueError):
        absorbing_state_audit(spec("0", "x"), spec("0", "2*x"))


def test_flat_common_root_is_flagged():
    with pytest.warns(AuditWarning):
        destroyed, created, degenerate = absorbing_state_audit(spec("0", "x^2"),
                                                               spec("0", "x^2"))
    assert degenerate == [0.0] and destroyed == [] and created == []


def test_interior_root_found_by_refinement():
    # f = g = 0 at x = 1/3, an interior point off the validation grid
    pts = fixed_points(parse_expr("3*x - 1"), parse_expr("(3*x - 1)^2"), (0.0, 1.0))
    assert pts == [pytest.approx(1 / 3, abs=1e-12)]


@pytest.mark.parametrize("f, g, dom", CORPUS[:2])
def test_destroyed_point_residual_grows_like_half_slope(f, g, dom):
    r = ito_to_stratonovich(spec(f, g, dom))
    t = np.linspace(0, 0.5, 501)
    W = np.cumsum(np.r_[0.0, np.random.default_rng(0).normal(0, np.sqrt(1e-3), 500)])
    for x in r.destroyed:
        res = residual_path(r.target, Path(t, np.full_like(t, x), W))
        slope = eval_expr(r.source.gprime, x)
        # X == x leaves -int (f - g'/2) dt = t g'(x)/2
        np.testing.assert_allclose(res, 0.5 * slope * t, atol=1e-12)


def test_report_json_field_names():
    d = json.loads(json.dumps(ito_to_stratonovich(spec("0", "x")).to_dict()))
    assert set(d) >= {"source", "target", "correction", "fixed_points_source",
                      "fixed_points_target", "destroyed", "created"}


def test_audit_no_warning_for_nondegenerate_roots():
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        ito_to_stratonovich(spec("x - x^2", "x - x^2", "[0, 1]"))
