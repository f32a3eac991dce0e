"""Boundary classification, sliding, two-folds, and coordinate changes."""

import numpy as np
import pytest

from slowdiv.errors import (
    CrossingRegionError,
    NormalFormError,
    NotOnBoundaryError,
    ValidationError,
)
from slowdiv.models import canonical_model, degenerate_two_fold_model, tangency_model
from slowdiv.smoothmap import PolyMap2
from slowdiv.system import (
    BoundaryTag,
    Diffeo,
    PwsSystem,
    Rect,
    SlidingSegment,
    TwoFoldType,
    VectorField,
    boundary_data,
    classify_boundary_point,
    classify_two_fold,
    det_z,
    filippov_sliding_vf,
    is_normal_form,
    lie_derivative,
    pseudo_equilibria,
    pullback_system,
    scale_system,
    tau,
    time_reversed,
)

Y = PolyMap2.coordinate("y")


def nf(xp, yp, xm, ym, lam=0.0):
    """Normal-form system with boundary h = y on the default square."""
    return PwsSystem(
        VectorField(xp, yp), VectorField(xm, ym), Y, Rect(-1, 1, -1, 1), lam=lam
    )


# -- Lie derivatives ---------------------------------------------------------


def test_lie_derivative_first_order(canonical):
    assert lie_derivative(canonical, "+", (0.5, 0.0)) == pytest.approx(0.5)
    assert lie_derivative(canonical, "-", (0.5, 0.0)) == pytest.approx(-1.0)


def test_lie_derivative_second_order(canonical):
    # Z+ = (1, x) so L^2 h = d/dx(x) * 1 = 1 at the fold
    assert lie_derivative(canonical, "+", (0.0, 0.0), order=2) == pytest.approx(1.0)
    assert lie_derivative(canonical, "-", (0.0, 0.0), order=2) == pytest.approx(2.0)


def test_lie_derivative_sees_lam():
    sys_l = canonical_model().with_lam(0.1)
    assert lie_derivative(sys_l, "+", (0.0, 0.0)) == pytest.approx(0.1)


# -- pointwise classification ------------------------------------------------


def test_classify_stable_and_unstable_sliding(canonical):
    cls = classify_boundary_point(canonical, (-0.5, 0.0))
    assert cls.tag is BoundaryTag.STABLE_SLIDING
    assert cls.is_sliding
    cls = classify_boundary_point(canonical, (0.5, 0.0))
    assert cls.tag is BoundaryTag.UNSTABLE_SLIDING
    assert cls.is_sliding


def test_classify_crossing():
    crossing = canonical_model(c=-1.0)
    cls = classify_boundary_point(crossing, (0.5, 0.0))
    assert cls.tag is BoundaryTag.CROSSING
    assert not cls.is_sliding


def test_classify_two_fold_tangency(canonical):
    cls = classify_boundary_point(canonical, (0.0, 0.0))
    assert cls.tag is BoundaryTag.TANGENCY
    assert cls.tangency.side == "both"
    assert cls.tangency.visibility_plus == "visible"
    assert cls.tangency.visibility_minus == "invisible"


def test_classify_one_sided_tangency():
    cls = classify_boundary_point(tangency_model(), (0.0, 0.0))
    assert cls.tag is BoundaryTag.TANGENCY
    assert cls.tangency.side == "plus"
    assert cls.tangency.visibility_plus == "visible"


def test_classify_rejects_off_boundary_point(canonical):
    with pytest.raises(NotOnBoundaryError, match="not on the switching boundary"):
        classify_boundary_point(canonical, (0.1, 0.5))


# -- two-fold taxonomy -------------------------------------------------------


def test_two_fold_canonical_is_canard_type(canonical):
    rep = classify_two_fold(canonical, (0.0, 0.0))
    assert rep.type is TwoFoldType.VI3
    assert rep.visibility_plus == "visible"
    assert rep.visibility_minus == "invisible"
    assert rep.nu == pytest.approx(1.0 / 3.0, abs=1e-14)
    assert rep.tau_limit == pytest.approx(2.0 / 3.0, abs=1e-14)
    assert rep.detz_multiplicity == 1


def test_two_fold_mirror_image_is_same_type():
    # canonical reflected through x -> -x; the canard direction flips sign
    # of nu together with the stable branch, so the type is unchanged
    mirror = nf(-1.0, [[0.0], [-1.0]], 1.0, [[0.0], [2.0]])
    rep = classify_two_fold(mirror, (0.0, 0.0))
    assert rep.type is TwoFoldType.VI3
    assert rep.nu == pytest.approx(-1.0 / 3.0, abs=1e-14)


def test_two_fold_visible_visible():
    vv = nf(1.0, [[0.0], [1.0]], 1.0, [[0.0], [-2.0]])
    rep = classify_two_fold(vv, (0.0, 0.0))
    assert rep.type is TwoFoldType.VV1
    assert rep.visibility_plus == "visible"
    assert rep.visibility_minus == "visible"
    assert rep.nu == pytest.approx(1.0, abs=1e-14)


def test_two_fold_double_detz_zero_is_non_generic():
    rep = classify_two_fold(degenerate_two_fold_model(2), (0.0, 0.0))
    assert rep.type is TwoFoldType.NON_GENERIC_SLIDING
    assert rep.detz_multiplicity == 2


def test_two_fold_requires_actual_two_fold(canonical):
    with pytest.raises(ValidationError, match="not a two-fold"):
        classify_two_fold(canonical, (0.5, 0.0))


# -- tau and the sliding field -----------------------------------------------


def test_tau_constant_on_canonical(canonical):
    assert tau(canonical, (0.3, 0.0)) == pytest.approx(2.0 / 3.0, abs=1e-14)
    assert tau(canonical, (-0.7, 0.0)) == pytest.approx(2.0 / 3.0, abs=1e-14)
    # removable-singularity value at the two-fold itself
    assert tau(canonical, (0.0, 0.0)) == pytest.approx(2.0 / 3.0, abs=1e-14)


def test_tau_at_one_sided_tangency():
    assert tau(tangency_model(), (0.0, 0.0)) == pytest.approx(1.0)


def test_tau_degenerate_two_fold_raises():
    degenerate = nf(1.0, [[0.0], [1.0]], -1.0, [[0.0], [1.0]])
    with pytest.raises(ValidationError, match="degenerate two-fold"):
        tau(degenerate, (0.0, 0.0))


def test_tau_undefined_for_equal_normal_speeds():
    same = nf(1.0, 1.0, -1.0, 1.0)
    with pytest.raises(ValidationError, match="tau undefined"):
        tau(same, (0.2, 0.0))


def test_filippov_field_on_sliding_segment(canonical):
    v = filippov_sliding_vf(canonical, (-0.5, 0.0))
    assert v[0] == pytest.approx(1.0 / 3.0, abs=1e-14)
    assert v[1] == pytest.approx(0.0, abs=1e-14)


def test_filippov_field_extends_through_two_fold(canonical):
    v = filippov_sliding_vf(canonical, (0.0, 0.0))
    assert v[0] == pytest.approx(1.0 / 3.0, abs=1e-14)
    assert v[1] == 0.0


def test_filippov_field_extends_through_one_sided_tangency():
    v = filippov_sliding_vf(tangency_model(), (0.0, 0.0))
    assert v[0] == pytest.approx(1.0)
    assert v[1] == 0.0


def test_filippov_field_rejects_crossing_points():
    crossing = canonical_model(c=-1.0)
    with pytest.raises(CrossingRegionError, match="crossing set"):
        filippov_sliding_vf(crossing, (0.5, 0.0))


def test_filippov_tangent_to_boundary_after_pullback(canonical):
    T = Diffeo(lambda w: (w[0], w[1] + 0.1 * w[0] ** 2))
    pb = pullback_system(canonical, T)
    for x in (-0.6, -0.3, -0.1):
        w = (x, -0.1 * x * x)
        v = filippov_sliding_vf(pb, w)
        hx = pb.h.partial(1, 0)(*w)
        hy = pb.h.partial(0, 1)(*w)
        normal_speed = hx * v[0] + hy * v[1]
        assert abs(normal_speed) <= 1e-9 * (1.0 + np.linalg.norm(v))


# -- boundary restriction data -----------------------------------------------


def test_det_z_values(canonical):
    assert det_z(canonical, 0.5) == pytest.approx(-0.5, abs=1e-14)
    assert det_z(canonical, 0.0) == pytest.approx(0.0, abs=1e-14)
    assert det_z(tangency_model(), 0.0) == pytest.approx(-1.0)


def test_boundary_data_exact_derivatives(canonical):
    bd = boundary_data(canonical)
    assert bd.Yp(0.2) == pytest.approx(0.2)
    assert bd.Ym(0.2) == pytest.approx(-0.4)
    assert bd.der("Yp", 0.2, 1) == pytest.approx(1.0, abs=1e-14)
    assert bd.der("detz", 0.0, 1) == pytest.approx(-1.0, abs=1e-14)
    mult, lead = bd.detz_multiplicity(0.0)
    assert mult == 1
    assert lead == pytest.approx(-1.0, abs=1e-12)


def test_detz_multiplicity_on_quadratic_contact():
    bd = boundary_data(degenerate_two_fold_model(2))
    mult, _ = bd.detz_multiplicity(0.0)
    assert mult == 2


# -- sliding segments and pseudo-equilibria ----------------------------------


def test_segment_validation_passes_on_clean_sliding(canonical):
    seg = SlidingSegment.on_axis(-0.9, -0.1)
    seg.validate(canonical)


def test_segment_validation_rejects_mixed_stability(canonical):
    seg = SlidingSegment.on_axis(-0.2, 0.2)
    with pytest.raises(ValidationError, match="mixes stable and unstable"):
        seg.validate(canonical)


def test_segment_validation_rejects_crossing_region():
    crossing = canonical_model(c=-1.0)
    seg = SlidingSegment.on_axis(0.1, 0.5)
    with pytest.raises(ValidationError, match="leaves the sliding set"):
        seg.validate(crossing)


def test_no_pseudo_equilibria_on_canonical(canonical):
    assert pseudo_equilibria(canonical, (0.1, 0.9)) == []


def test_pseudo_equilibrium_located():
    # sliding speed works out to x - 0.5 on this interval
    sys_pe = nf(1.0, [[1.5], [-1.0]], -1.0, [[-0.5], [-1.0]])
    roots = pseudo_equilibria(sys_pe, (0.3, 0.7))
    assert len(roots) == 1
    x0, y0 = roots[0]
    assert x0 == pytest.approx(0.5, abs=1e-9)
    assert y0 == 0.0


def test_pseudo_equilibria_reject_crossing_interval():
    crossing = canonical_model(c=-1.0)
    with pytest.raises(ValidationError, match="touches the crossing set"):
        pseudo_equilibria(crossing, (0.1, 0.5))


# -- coordinate changes ------------------------------------------------------


def test_pullback_identity_preserves_everything(canonical):
    ident = Diffeo(
        lambda w: (w[0], w[1]),
        jacobian=lambda w: np.eye(2),
        inverse=lambda z: np.asarray(z, dtype=float),
    )
    pb = pullback_system(canonical, ident)
    for x in (-0.5, 0.5):
        assert (
            classify_boundary_point(pb, (x, 0.0)).tag
            is classify_boundary_point(canonical, (x, 0.0)).tag
        )
    assert lie_derivative(pb, "+", (0.25, 0.0)) == pytest.approx(
        0.25, abs=1e-12
    )


def test_pullback_shear_preserves_classification(canonical):
    T = Diffeo(lambda w: (w[0], w[1] + 0.1 * w[0] ** 2))
    pb = pullback_system(canonical, T)
    # boundary in w-coordinates is w2 = -0.1 w1^2
    cls = classify_boundary_point(pb, (-0.5, -0.025))
    assert cls.tag is BoundaryTag.STABLE_SLIDING
    cls = classify_boundary_point(pb, (0.5, -0.025))
    assert cls.tag is BoundaryTag.UNSTABLE_SLIDING
    cls = classify_boundary_point(pb, (0.0, 0.0))
    assert cls.tag is BoundaryTag.TANGENCY
    assert cls.tangency.side == "both"


def test_pullback_commutes_with_lie_derivative(canonical):
    T = Diffeo(lambda w: (w[0], w[1] + 0.1 * w[0] ** 2))
    pb = pullback_system(canonical, T)
    for x in (-0.7, -0.2, 0.3, 0.6):
        w = (x, -0.1 * x * x)
        got = lie_derivative(pb, "+", w)
        want = lie_derivative(canonical, "+", (x, 0.0))
        assert got == pytest.approx(want, abs=1e-9)


def test_pullback_rejects_singular_jacobian(canonical):
    T = Diffeo(
        lambda w: (w[0] ** 2, w[1]),
        jacobian=lambda w: np.array([[2.0 * w[0], 0.0], [0.0, 1.0]]),
        inverse=lambda z: np.array([np.sqrt(abs(z[0])), z[1]]),
    )
    with pytest.raises(ValidationError, match="singular"):
        pullback_system(canonical, T, w_domain=Rect(-1, 1, -1, 1))


def test_pullback_breaks_normal_form(canonical):
    T = Diffeo(lambda w: (w[0], w[1] + 0.1 * w[0] ** 2))
    pb = pullback_system(canonical, T)
    assert is_normal_form(canonical)
    assert not is_normal_form(pb)
    with pytest.raises(NormalFormError):
        classify_two_fold(pb, (0.0, 0.0))


def test_diffeo_numeric_jacobian_and_inverse():
    T = Diffeo(lambda w: (w[0] + 0.2 * w[1] ** 2, w[1] - 0.1 * w[0]))
    J = T.jac((0.3, 0.4))
    assert J[0, 0] == pytest.approx(1.0, abs=1e-8)
    assert J[0, 1] == pytest.approx(0.16, abs=1e-8)
    assert J[1, 0] == pytest.approx(-0.1, abs=1e-8)
    z = T.forward((0.3, 0.4))
    w = T.inv(z)
    assert np.allclose(w, (0.3, 0.4), atol=1e-12)


def test_time_reversal_swaps_sliding_stability(canonical):
    rev = time_reversed(canonical)
    assert (
        classify_boundary_point(rev, (-0.5, 0.0)).tag
        is BoundaryTag.UNSTABLE_SLIDING
    )
    assert (
        classify_boundary_point(rev, (0.5, 0.0)).tag is BoundaryTag.STABLE_SLIDING
    )


def test_positive_rescaling_preserves_classification(canonical):
    g = lambda x, y, lam=0.0: 2.0 + np.cos(x)
    scaled = scale_system(canonical, g)
    for x in (-0.5, 0.0, 0.5):
        assert (
            classify_boundary_point(scaled, (x, 0.0)).tag
            is classify_boundary_point(canonical, (x, 0.0)).tag
        )
    assert tau(scaled, (0.3, 0.0)) == pytest.approx(2.0 / 3.0, abs=1e-9)


def test_rescaling_rejects_sign_changing_multiplier(canonical):
    with pytest.raises(ValidationError, match="multiplier must be positive"):
        scale_system(canonical, -1.0)


# -- construction guards -----------------------------------------------------


def test_system_rejects_degenerate_boundary_function():
    h = PolyMap2([[0.0, 0.0, 1.0], [0.0, 0.0, 0.0], [1.0, 0.0, 0.0]])  # x^2 + y^2
    with pytest.raises(ValidationError, match="grad h vanishes"):
        PwsSystem(
            VectorField(1.0, 0.0), VectorField(-1.0, 0.0), h, Rect(-1, 1, -1, 1)
        )


def test_vector_field_call_and_side_lookup(canonical):
    v = canonical.field("plus")(0.5, 0.0)
    assert v[0] == 1.0
    assert v[1] == pytest.approx(0.5)
    with pytest.raises(ValueError, match="side must be"):
        canonical.field("up")
