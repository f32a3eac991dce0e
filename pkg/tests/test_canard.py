"""Connection geometry, the slow relation, entry-exit orbits, cyclicity.

The default section sits at y = -p0^2; orbits of the lower field are the
parabolas y = const + x^2, so the connection endpoints have the closed form
psi_pm(s) = +-sqrt(p0^2 - s).  That makes every geometric quantity here
checkable by hand for the untuned model.
"""

import math

import numpy as np
import pytest

from slowdiv.canard import (
    check_assumptions,
    connection_endpoints,
    generate_orbit,
    make_canard_setup,
    multiplicity_of_I,
    orbit_from_map,
    predict_cyclicity,
    sdi_I,
    setup_from_model,
    slow_relation_G,
    slow_relation_G_inverse,
)
from slowdiv.errors import NumericalError, ValidationError
from slowdiv.models import canonical_model, load_model
from slowdiv.sdi import sdi_split_sum


# -- setup geometry ----------------------------------------------------------


def test_section_base_and_default_range(canonical_setup):
    assert canonical_setup.y_base == pytest.approx(-0.04, abs=1e-10)
    assert canonical_setup.sbar == pytest.approx(0.03, abs=1e-12)
    assert canonical_setup.p0 == 0.2
    x, y = canonical_setup.section_point(0.01)
    assert x == 0.0
    assert y == pytest.approx(-0.03, abs=1e-12)


def test_connection_endpoints_closed_form(canonical_setup):
    for s in (-0.02, 0.0, 0.01, 0.025):
        want = math.sqrt(0.04 - s)
        for method in ("integrate", "closed"):
            lo, hi = connection_endpoints(canonical_setup, s, method=method)
            assert hi == pytest.approx(want, abs=1e-10)
            assert lo == pytest.approx(-want, abs=1e-10)


def test_connection_endpoints_monotone(canonical_setup):
    ss = np.linspace(-0.025, 0.025, 9)
    plus = [connection_endpoints(canonical_setup, float(s))[1] for s in ss]
    minus = [connection_endpoints(canonical_setup, float(s))[0] for s in ss]
    assert all(a > b for a, b in zip(plus, plus[1:]))   # psi_+ decreasing
    assert all(a < b for a, b in zip(minus, minus[1:]))  # psi_- increasing


def test_connection_endpoint_anchor(tuned_setup):
    # s = p0^2 - 0.21^2 lands the upper endpoint exactly at 0.21
    s = 0.04 - 0.21**2
    for method in ("integrate", "closed"):
        _, hi = connection_endpoints(tuned_setup, s, method=method)
        assert hi == pytest.approx(0.21, abs=1e-10)


def test_connection_endpoints_range_checks(canonical_setup, tanh_reg):
    with pytest.raises(ValidationError, match="exceeds sbar"):
        connection_endpoints(canonical_setup, 0.05)
    with pytest.raises(ValidationError, match="unknown endpoint method"):
        connection_endpoints(canonical_setup, 0.01, method="guess")
    narrow = make_canard_setup(canonical_model(), tanh_reg, eta=(-0.25, 0.25))
    with pytest.raises(ValidationError, match="leave the sliding range"):
        connection_endpoints(narrow, -0.03)


# -- the cycle integral I ----------------------------------------------------


def test_cycle_integral_vanishes_for_symmetric_model(canonical_setup):
    for s in (-0.02, 0.0, 0.013, 0.028):
        assert abs(sdi_I(canonical_setup, s)) <= 1e-12


def test_cycle_integral_balanced_at_zero(tuned_setup):
    assert abs(sdi_I(tuned_setup, 0.0)) <= 1e-9


def test_cycle_integral_sign_definite(tuned_setup):
    for s in np.geomspace(1e-4, tuned_setup.sbar, 12):
        assert sdi_I(tuned_setup, float(s)) < 0.0
        assert sdi_I(tuned_setup, float(-s)) > 0.0


def test_cycle_integral_methods_agree(tuned_setup):
    for s in (0.005, 0.015, 0.025):
        direct = sdi_I(tuned_setup, s, method="direct")
        split = sdi_I(tuned_setup, s, method="split")
        assert direct == pytest.approx(split, abs=1e-9)
    with pytest.raises(ValidationError, match="unknown sdi_I method"):
        sdi_I(tuned_setup, 0.01, method="other")


# -- the slow relation G -----------------------------------------------------


def test_slow_relation_identity_for_symmetric_model(canonical_setup):
    for s in (-0.02, 0.01, 0.025):
        assert slow_relation_G(canonical_setup, s) == pytest.approx(s, abs=1e-10)
    assert slow_relation_G(canonical_setup, 0.0) == pytest.approx(0.0, abs=1e-10)


def test_slow_relation_contracts_on_tuned_model(tuned_setup):
    for s in (0.005, 0.01, 0.02, 0.029):
        g = slow_relation_G(tuned_setup, s)
        assert 0.0 < g < s


def test_slow_relation_balances_the_connection(tuned_setup, tanh_reg):
    # G(s) is defined by a vanishing integral between the entry point at
    # offset s and the exit point at offset G(s); recheck with the
    # improper split-sum quadrature
    for s in (0.008, 0.018, 0.027):
        g = slow_relation_G(tuned_setup, s)
        lo, _ = connection_endpoints(tuned_setup, s)
        _, hi = connection_endpoints(tuned_setup, g)
        res = sdi_split_sum(tuned_setup.system, tanh_reg, lo, hi)
        assert abs(res.value) <= 1e-9


def test_slow_relation_roundtrip(tuned_setup):
    for s in (0.004, 0.012, 0.024):
        g = slow_relation_G(tuned_setup, s)
        back = slow_relation_G_inverse(tuned_setup, g)
        assert back == pytest.approx(s, abs=1e-9)


def test_slow_relation_range_check(tuned_setup):
    with pytest.raises(ValidationError, match="exceeds sbar"):
        slow_relation_G(tuned_setup, 0.05)
    with pytest.raises(ValidationError, match="exceeds sbar"):
        slow_relation_G_inverse(tuned_setup, -0.05)


# -- orbit iteration ---------------------------------------------------------


def test_orbit_from_quadratic_map_harmonic_tail():
    orbit = orbit_from_map(lambda s: s - s * s, 0.5)
    assert orbit.stop_reason == "maxIter"
    assert len(orbit) == 100001
    # terms behave like 1/n: n * s_n drifts to 1 slowly from below
    assert 0.9 < 5000 * orbit.terms[5000] < 1.0
    arr = orbit.as_array()
    assert arr.shape == (len(orbit),)
    assert np.all(np.diff(arr) < 0.0)


def test_orbit_from_halving_map_reaches_floor():
    orbit = orbit_from_map(lambda s: 0.5 * s, 0.5, floor=1e-9)
    assert orbit.stop_reason == "floorReached"
    assert len(orbit) == 30
    assert orbit.terms[-1] <= 1e-9
    assert orbit.terms[:3] == (0.5, 0.25, 0.125)


def test_orbit_respects_iteration_cap():
    orbit = orbit_from_map(lambda s: 0.999 * s, 0.5, max_iter=100)
    assert orbit.stop_reason == "maxIter"
    assert len(orbit) == 101


def test_orbit_flags_bad_steps():
    orbit = orbit_from_map(lambda s: -0.1, 0.5)
    assert orbit.stop_reason == "rootFailure"
    assert orbit.terms == (0.5,)

    def blows_up(s):
        raise NumericalError("step failed")

    orbit = orbit_from_map(blows_up, 0.5)
    assert orbit.stop_reason == "rootFailure"
    assert orbit.terms == (0.5,)


def test_generated_orbit_decreases_to_floor(tuned_orbit):
    assert tuned_orbit.direction == "forwardG"
    assert tuned_orbit.stop_reason == "floorReached"
    arr = tuned_orbit.as_array()
    assert arr[0] == 0.02
    assert np.all(np.diff(arr) < 0.0)
    assert arr[-1] <= 1e-9
    assert len(tuned_orbit) > 100


def test_generated_orbit_degenerate_start(tuned_setup):
    orbit = generate_orbit(tuned_setup, 0.0)
    assert orbit.terms == (0.0,)
    assert orbit.stop_reason == "floorReached"


def test_generated_orbit_rejects_bad_start(tuned_setup):
    with pytest.raises(ValidationError, match="lie in"):
        generate_orbit(tuned_setup, -0.01)
    with pytest.raises(ValidationError, match="lie in"):
        generate_orbit(tuned_setup, 0.08)


def test_generated_orbit_rejects_symmetric_model(canonical_setup):
    with pytest.raises(ValidationError, match="symmetric model"):
        generate_orbit(canonical_setup, 0.02)


# -- multiplicity of the integral's zero -------------------------------------


def test_multiplicity_simple_zero(tuned_setup):
    fit = multiplicity_of_I(tuned_setup)
    assert fit.accepted
    assert fit.m == 1
    assert abs(fit.slope - 1.0) < 0.15


def test_multiplicity_double_zero(tuned_double_setup):
    fit = multiplicity_of_I(tuned_double_setup)
    assert fit.accepted
    assert fit.m == 2
    assert abs(fit.slope - 2.0) < 0.15


def test_multiplicity_slope_against_direct_fit(tuned_setup):
    # independent least-squares fit of log |I| on the default window
    hi = min(1e-2, tuned_setup.sbar / 8.0)
    ss = np.geomspace(hi / 100.0, hi, 30)
    vals = np.array([abs(sdi_I(tuned_setup, float(s))) for s in ss])
    slope = np.polyfit(np.log(ss), np.log(vals), 1)[0]
    assert abs(slope - 1.0) < 0.15


def test_multiplicity_flat_integral_is_infinite(canonical_setup):
    fit = multiplicity_of_I(canonical_setup)
    assert fit.accepted
    assert fit.m == math.inf


def test_multiplicity_indeterminate_when_unbalanced(tanh_reg):
    setup = make_canard_setup(canonical_model(a=-0.01, e=1.0), tanh_reg)
    fit = multiplicity_of_I(setup)
    assert not fit.accepted
    assert fit.m is None


def test_multiplicity_window_validation(tuned_setup):
    with pytest.raises(ValidationError, match="fit window"):
        multiplicity_of_I(tuned_setup, fit_window=(0.02, 0.01))
    with pytest.raises(ValidationError, match="fit window"):
        multiplicity_of_I(tuned_setup, fit_window=(1e-3, 0.1))


# -- cyclicity prediction ----------------------------------------------------


def test_cyclicity_from_dimension_zero():
    pred = predict_cyclicity(dim_b=0.0)
    assert pred.multiplicity == 1
    assert pred.bound == 2
    assert {"uniqueHyperbolic", "saddleNode"} <= pred.scenarios


def test_cyclicity_from_dimension_half():
    pred = predict_cyclicity(dim_b=0.5)
    assert pred.multiplicity == 2
    assert pred.bound == 3
    assert pred.scenarios == frozenset()


def test_cyclicity_from_multiplicity():
    pred = predict_cyclicity(multiplicity=3)
    assert pred.dim_b == pytest.approx(2.0 / 3.0)
    assert pred.bound == 4


def test_cyclicity_sign_refinement():
    attracting = predict_cyclicity(multiplicity=1, i_sign=-1.0)
    assert "attractingUnique" in attracting.scenarios
    repelling = predict_cyclicity(multiplicity=1, i_sign=+1.0)
    assert "repellingUnique" in repelling.scenarios


def test_cyclicity_argument_validation():
    with pytest.raises(ValidationError, match="exactly one"):
        predict_cyclicity(dim_b=0.0, multiplicity=1)
    with pytest.raises(ValidationError, match="exactly one"):
        predict_cyclicity()
    with pytest.raises(ValidationError, match="no finite cyclicity bound"):
        predict_cyclicity(dim_b=1.0)
    with pytest.raises(ValidationError, match="positive integer"):
        predict_cyclicity(multiplicity=2.5)
    with pytest.raises(ValidationError, match="lie in"):
        predict_cyclicity(dim_b=1.2)


# -- assumption report -------------------------------------------------------


def test_assumptions_pass_on_tuned_model(tuned_setup):
    report = check_assumptions(tuned_setup)
    assert report.passed
    for name in (
        "slidingStructure",
        "twoFoldType",
        "foldTransversality",
        "regularizerTails",
        "integralSign",
    ):
        assert report.item(name).passed, name


def test_assumptions_flag_symmetric_integral(canonical_setup):
    report = check_assumptions(canonical_setup)
    assert not report.passed
    assert not report.item("integralSign").passed
    assert report.item("twoFoldType").passed


def test_assumptions_flag_wrong_two_fold(tanh_reg):
    setup = make_canard_setup(canonical_model(c=0.5), tanh_reg)
    report = check_assumptions(setup)
    assert not report.item("twoFoldType").passed
    assert "VI2" in report.item("twoFoldType").witness


def test_setup_from_model_requires_section_metadata(tanh_reg):
    with pytest.raises(ValidationError, match="p0"):
        setup_from_model(load_model("builtin:tangency"), tanh_reg)
