"""Planar piecewise-smooth systems and boundary-point operations.

A system is a pair of smooth vector fields (one active above the switching
boundary {h = 0}, one below), the boundary function h, a rectangular domain
of interest and a frozen parameter value.  Operations here classify boundary
points, build the sliding vector field, locate pseudo-equilibria, and
transport systems through diffeomorphisms and positive rescalings.

Sign conventions (h increasing across the boundary toward the plus field):
the first Lie derivatives a = Z+(h), b = Z-(h) give crossing for a*b > 0,
stable sliding for a < 0 < b, unstable sliding for b < 0 < a.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from numpy.polynomial import polynomial as npoly
from scipy.optimize import brentq

from .errors import (
    CrossingRegionError,
    NormalFormError,
    NotOnBoundaryError,
    ValidationError,
)
from .smoothmap import FuncMap2, PolyMap2, SmoothMap2, as_map

__all__ = [
    "Rect",
    "VectorField",
    "PwsSystem",
    "BoundaryTag",
    "TangencyInfo",
    "BoundaryClassification",
    "TwoFoldType",
    "TwoFoldReport",
    "SlidingSegment",
    "Diffeo",
    "lie_derivative",
    "classify_boundary_point",
    "classify_two_fold",
    "tau",
    "filippov_sliding_vf",
    "det_z",
    "boundary_data",
    "pseudo_equilibria",
    "pullback_system",
    "scale_system",
    "time_reversed",
    "is_normal_form",
]

ON_BOUNDARY_TOL = 1e-10
TANGENCY_TOL = 1e-10
PSEUDO_EQ_TOL = 1e-12


@dataclass(frozen=True)
class Rect:
    xmin: float
    xmax: float
    ymin: float
    ymax: float

    def contains(self, x: float, y: float, pad: float = 0.0) -> bool:
        return (
            self.xmin - pad <= x <= self.xmax + pad
            and self.ymin - pad <= y <= self.ymax + pad
        )

    def grid(self, nx: int = 11, ny: int = 11):
        xs = np.linspace(self.xmin, self.xmax, nx)
        ys = np.linspace(self.ymin, self.ymax, ny)
        return xs, ys


class VectorField:
    """Pair of scalar fields forming a planar vector field."""

    def __init__(self, fx, fy):
        self.x = as_map(fx)
        self.y = as_map(fy)

    def __call__(self, x: float, y: float, lam: float = 0.0) -> np.ndarray:
        return np.array([self.x(x, y, lam), self.y(x, y, lam)], dtype=float)


class PwsSystem:
    """Piecewise-smooth system z' = Z+(z) for h > 0, Z-(z) for h < 0."""

    def __init__(self, zplus: VectorField, zminus: VectorField, h, domain: Rect,
                 lam: float = 0.0, check: bool = True):
        self.zplus = zplus
        self.zminus = zminus
        self.h = as_map(h)
        self.domain = domain
        self.lam = float(lam)
        if check:
            self._check_regular_boundary()

    def _check_regular_boundary(self, n: int = 21, tol: float = 1e-12):
        """Reject a boundary function with a vanishing gradient near {h=0}."""
        hx = self.h.partial(1, 0)
        hy = self.h.partial(0, 1)
        xs, ys = self.domain.grid(n, n)
        scale = max(
            self.domain.xmax - self.domain.xmin,
            self.domain.ymax - self.domain.ymin,
        )
        for x in xs:
            for y in ys:
                hv = self.h(x, y, self.lam)
                if abs(hv) > 0.1 * scale:
                    continue
                g = np.hypot(hx(x, y, self.lam), hy(x, y, self.lam))
                if g < tol:
                    raise ValidationError(
                        f"grad h vanishes near the boundary at ({x:.6g}, {y:.6g})"
                    )

    def field(self, side: str) -> VectorField:
        if side in ("+", "plus"):
            return self.zplus
        if side in ("-", "minus"):
            return self.zminus
        raise ValueError(f"side must be '+' or '-', got {side!r}")

    def with_lam(self, lam: float) -> "PwsSystem":
        return PwsSystem(self.zplus, self.zminus, self.h, self.domain, lam, check=False)


def is_normal_form(system: PwsSystem, tol: float = 1e-12) -> bool:
    """True when the boundary function is exactly the y coordinate."""
    h = system.h
    if isinstance(h, PolyMap2):
        ref = np.zeros_like(h.coeffs)
        if h.coeffs.shape[1] >= 2:
            ref[0, 1] = 1.0
        else:
            return False
        return (
            np.array_equal(h.coeffs, ref)
            and not np.any(h.lam_coeffs)
        )
    xs, ys = system.domain.grid(5, 5)
    return all(
        abs(h(x, y, system.lam) - y) <= tol * (1.0 + abs(y)) for x in xs for y in ys
    )


def _require_normal_form(system: PwsSystem, op: str):
    if not is_normal_form(system):
        raise NormalFormError(f"{op} requires the boundary in normal form h = y")


# ---------------------------------------------------------------------------
# Lie derivatives and pointwise classification


def _grad_h(system: PwsSystem, x: float, y: float) -> np.ndarray:
    return np.array(
        [
            system.h.partial(1, 0)(x, y, system.lam),
            system.h.partial(0, 1)(x, y, system.lam),
        ]
    )


def lie_derivative(system: PwsSystem, side: str, z: Sequence[float], order: int = 1) -> float:
    """First or second Lie derivative of h along the chosen field at z."""
    x, y = float(z[0]), float(z[1])
    lam = system.lam
    f = system.field(side)
    h = system.h
    hx = h.partial(1, 0)(x, y, lam)
    hy = h.partial(0, 1)(x, y, lam)
    fx = f.x(x, y, lam)
    fy = f.y(x, y, lam)
    first = hx * fx + hy * fy
    if order == 1:
        return first
    if order != 2:
        raise ValueError("order must be 1 or 2")
    hxx = h.partial(2, 0)(x, y, lam)
    hxy = h.partial(1, 1)(x, y, lam)
    hyy = h.partial(0, 2)(x, y, lam)
    dx_first = hxx * fx + hx * f.x.partial(1, 0)(x, y, lam) + hxy * fy + hy * f.y.partial(1, 0)(x, y, lam)
    dy_first = hxy * fx + hx * f.x.partial(0, 1)(x, y, lam) + hyy * fy + hy * f.y.partial(0, 1)(x, y, lam)
    return fx * dx_first + fy * dy_first


class BoundaryTag(enum.Enum):
    CROSSING = "crossing"
    STABLE_SLIDING = "stableSliding"
    UNSTABLE_SLIDING = "unstableSliding"
    TANGENCY = "tangency"


@dataclass(frozen=True)
class TangencyInfo:
    side: str  # 'plus', 'minus' or 'both'
    visibility_plus: Optional[str] = None  # 'visible' | 'invisible' | 'degenerate'
    visibility_minus: Optional[str] = None


@dataclass(frozen=True)
class BoundaryClassification:
    tag: BoundaryTag
    lie_plus: float
    lie_minus: float
    tangency: Optional[TangencyInfo] = None

    @property
    def is_sliding(self) -> bool:
        return self.tag in (BoundaryTag.STABLE_SLIDING, BoundaryTag.UNSTABLE_SLIDING)


def _field_scale(system: PwsSystem, side: str, x: float, y: float) -> float:
    f = system.field(side)
    v = np.hypot(f.x(x, y, system.lam), f.y(x, y, system.lam))
    g = np.linalg.norm(_grad_h(system, x, y))
    return v * g


def _on_boundary(system: PwsSystem, z, tol: float) -> None:
    x, y = float(z[0]), float(z[1])
    if abs(system.h(x, y, system.lam)) > tol * (1.0 + abs(x) + abs(y)):
        raise NotOnBoundaryError(
            f"point ({x:.6g}, {y:.6g}) is not on the switching boundary: "
            f"h = {system.h(x, y, system.lam):.3e}"
        )


def classify_boundary_point(
    system: PwsSystem, z, tol: float = TANGENCY_TOL
) -> BoundaryClassification:
    """Classify a boundary point as crossing, sliding or tangency.

    A first Lie derivative counts as zero when its magnitude is below
    ``tol * (1 + field scale)``; visibility of a fold comes from the sign of
    the second Lie derivative.
    """
    _on_boundary(system, z, ON_BOUNDARY_TOL)
    x, y = float(z[0]), float(z[1])
    a = lie_derivative(system, "+", z, 1)
    b = lie_derivative(system, "-", z, 1)
    tol_p = tol * (1.0 + _field_scale(system, "+", x, y))
    tol_m = tol * (1.0 + _field_scale(system, "-", x, y))
    tang_p = abs(a) <= tol_p
    tang_m = abs(b) <= tol_m

    if not tang_p and not tang_m:
        if a * b > 0.0:
            return BoundaryClassification(BoundaryTag.CROSSING, a, b)
        if a < 0.0 < b:
            return BoundaryClassification(BoundaryTag.STABLE_SLIDING, a, b)
        return BoundaryClassification(BoundaryTag.UNSTABLE_SLIDING, a, b)

    def _vis(side: str, positive_visible: bool) -> str:
        second = lie_derivative(system, side, z, 2)
        if abs(second) <= tol * (1.0 + _field_scale(system, side, x, y)):
            return "degenerate"
        visible = (second > 0.0) if positive_visible else (second < 0.0)
        return "visible" if visible else "invisible"

    if tang_p and tang_m:
        info = TangencyInfo("both", _vis("+", True), _vis("-", False))
    elif tang_p:
        info = TangencyInfo("plus", visibility_plus=_vis("+", True))
    else:
        info = TangencyInfo("minus", visibility_minus=_vis("-", False))
    return BoundaryClassification(BoundaryTag.TANGENCY, a, b, info)


# ---------------------------------------------------------------------------
# Restriction of the fields to the boundary (normal form)


class BoundaryData:
    """Evaluators for X±, Y± and det Z on the x-axis, exact for polynomials.

    det Z(x) = (X+ Y- - X- Y+)(x, 0); its low-order derivatives decide the
    type and integrability at a two-fold, so they are computed from exact
    polynomial arithmetic whenever the model is polynomial.
    """

    _FD_STEPS = {1: 1e-6, 2: 2e-4, 3: 1e-3}

    def __init__(self, system: PwsSystem):
        _require_normal_form(system, "boundary restriction")
        self.system = system
        lam = system.lam
        comps = [system.zplus.x, system.zplus.y, system.zminus.x, system.zminus.y]
        if all(isinstance(c, PolyMap2) for c in comps):
            xp, yp, xm, ym = (c.at_lam(lam)[:, 0] for c in comps)
            self._poly = {
                "Xp": xp,
                "Yp": yp,
                "Xm": xm,
                "Ym": ym,
                "detz": np.polynomial.polynomial.polysub(
                    npoly.polymul(xp, ym), npoly.polymul(xm, yp)
                ),
            }
        else:
            self._poly = None

    def _eval(self, name: str, x: float) -> float:
        if self._poly is not None:
            return float(npoly.polyval(x, self._poly[name]))
        s, lam = self.system, self.system.lam
        table = {
            "Xp": lambda: s.zplus.x(x, 0.0, lam),
            "Yp": lambda: s.zplus.y(x, 0.0, lam),
            "Xm": lambda: s.zminus.x(x, 0.0, lam),
            "Ym": lambda: s.zminus.y(x, 0.0, lam),
            "detz": lambda: s.zplus.x(x, 0.0, lam) * s.zminus.y(x, 0.0, lam)
            - s.zminus.x(x, 0.0, lam) * s.zplus.y(x, 0.0, lam),
        }
        return float(table[name]())

    def Xp(self, x):
        return self._eval("Xp", x)

    def Yp(self, x):
        return self._eval("Yp", x)

    def Xm(self, x):
        return self._eval("Xm", x)

    def Ym(self, x):
        return self._eval("Ym", x)

    def detz(self, x):
        return self._eval("detz", x)

    def der(self, name: str, x: float, k: int = 1) -> float:
        """k-th derivative of the named boundary function at x (k <= 3)."""
        if k == 0:
            return self._eval(name, x)
        if self._poly is not None:
            return float(npoly.polyval(x, npoly.polyder(self._poly[name], m=k)))
        if k > 3:
            raise ValueError("finite-difference boundary derivatives support k <= 3")
        h = self._FD_STEPS[k] * (1.0 + abs(x))
        from .smoothmap import _STENCIL  # central stencils

        offs, w = _STENCIL[k]
        return sum(
            wi * self._eval(name, x + oi * h) for oi, wi in zip(offs, w)
        ) / h**k

    def detz_multiplicity(self, x0: float, tol: float = 1e-9, max_order: int = 3):
        """Order of the first nonvanishing derivative of det Z at a zero x0.

        Returns (multiplicity, leading derivative value).  Multiplicity
        max_order + 1 means everything vanished to within tolerance.
        """
        scale = 1.0 + max(abs(self.der("detz", x0, k)) for k in range(max_order + 1))
        for k in range(max_order + 1):
            v = self.der("detz", x0, k)
            if abs(v) > tol * scale:
                return k, v
        return max_order + 1, 0.0


def boundary_data(system: PwsSystem) -> BoundaryData:
    return BoundaryData(system)


def det_z(system: PwsSystem, x: float) -> float:
    """det(Z+ | Z-) restricted to the boundary, normal form only."""
    return boundary_data(system).detz(x)


# ---------------------------------------------------------------------------
# Convex combination and sliding vector field


def tau(system: PwsSystem, z, tol: float = TANGENCY_TOL) -> float:
    """Convex coefficient tau = -Z-(h) / ((Z+ - Z-)(h)) with two-fold limit.

    At a generic two-fold (normal form) the removable-singularity value
    dY-/dx / d(Y- - Y+)/dx is returned.
    """
    _on_boundary(system, z, ON_BOUNDARY_TOL)
    a = lie_derivative(system, "+", z, 1)
    b = lie_derivative(system, "-", z, 1)
    x = float(z[0])
    tol_p = tol * (1.0 + _field_scale(system, "+", x, float(z[1])))
    tol_m = tol * (1.0 + _field_scale(system, "-", x, float(z[1])))
    denom = a - b
    if abs(denom) > tol * (1.0 + abs(a) + abs(b)):
        return -b / denom
    if abs(a) <= tol_p and abs(b) <= tol_m:
        bd = boundary_data(system)
        dYp = bd.der("Yp", x, 1)
        dYm = bd.der("Ym", x, 1)
        if abs(dYm - dYp) <= tol * (1.0 + abs(dYm) + abs(dYp)):
            raise ValidationError("degenerate two-fold: d(Y- - Y+)/dx vanishes")
        return dYm / (dYm - dYp)
    raise ValidationError(
        "tau undefined: (Z+ - Z-)(h) vanishes away from a two-fold"
    )


def filippov_sliding_vf(system: PwsSystem, z, tol: float = TANGENCY_TOL) -> np.ndarray:
    """Filippov sliding vector field at a sliding point.

    At a generic two-fold or a one-sided tangency adjacent to sliding (normal
    form) the removable-singularity extension is returned.  Crossing points
    raise CrossingRegionError.
    """
    _on_boundary(system, z, ON_BOUNDARY_TOL)
    x, y = float(z[0]), float(z[1])
    lam = system.lam
    a = lie_derivative(system, "+", z, 1)
    b = lie_derivative(system, "-", z, 1)
    tol_p = tol * (1.0 + _field_scale(system, "+", x, y))
    tol_m = tol * (1.0 + _field_scale(system, "-", x, y))
    tang_p = abs(a) <= tol_p
    tang_m = abs(b) <= tol_m

    if not tang_p and not tang_m:
        if a * b > 0.0:
            raise CrossingRegionError(
                f"({x:.6g}, {y:.6g}) lies in the crossing set: Z+(h)*Z-(h) > 0"
            )
        t = -b / (a - b)
        vp = system.zplus(x, y, lam)
        vm = system.zminus(x, y, lam)
        return t * vp + (1.0 - t) * vm

    # removable singularities on the closure of the sliding set (h = y)
    _require_normal_form(system, "sliding field extension at a tangency")
    bd = boundary_data(system)
    if tang_p and tang_m:
        d1 = bd.der("detz", x, 1)
        dYp = bd.der("Yp", x, 1)
        dYm = bd.der("Ym", x, 1)
        denom = dYm - dYp
        if abs(denom) <= tol * (1.0 + abs(dYm) + abs(dYp)):
            raise ValidationError("degenerate two-fold: d(Y- - Y+)/dx vanishes")
        if abs(bd.detz(x)) > tol * (1.0 + abs(d1)):
            raise ValidationError("two-fold extension expects det Z = 0 at the point")
        return np.array([d1 / denom, 0.0])
    # one-sided tangency: the limit is the non-vanishing transversal speed of
    # the tangent field, (X_tangent_side(z), 0)
    side = "+" if tang_p else "-"
    return np.array([system.field(side).x(x, 0.0, lam), 0.0])


# ---------------------------------------------------------------------------
# Two-fold classification


class TwoFoldType(enum.Enum):
    VV1 = "VV1"
    II1 = "II1"
    VI2 = "VI2"
    VI3 = "VI3"
    OTHER_GENERIC = "OtherGeneric"
    NON_GENERIC_SLIDING = "NonGenericSliding"
    DEGENERATE = "Degenerate"


@dataclass(frozen=True)
class TwoFoldReport:
    type: TwoFoldType
    visibility_plus: str
    visibility_minus: str
    nu: Optional[float]  # extended sliding speed through the fold, if defined
    tau_limit: Optional[float]
    detz_multiplicity: int


def classify_two_fold(system: PwsSystem, z, tol: float = TANGENCY_TOL) -> TwoFoldReport:
    """Classify a generic two-fold on the x-axis.

    Sliding two-folds (sliding on both sides, dY+/dx * dY-/dx < 0) are split
    into VV1/II1 by common visibility and, for opposite visibility, into VI3
    when the extended sliding flow runs from the stable onto the unstable
    branch (canard direction) and VI2 for the reverse.  Crossing-type generic
    two-folds are reported as OtherGeneric.  A double zero of det Z gives
    NonGenericSliding, deeper degeneracies give Degenerate.
    """
    _require_normal_form(system, "classify_two_fold")
    cls = classify_boundary_point(system, z, tol)
    if cls.tag is not BoundaryTag.TANGENCY or cls.tangency.side != "both":
        raise ValidationError("point is not a two-fold (both fields must be tangent)")

    x = float(z[0])
    bd = boundary_data(system)
    vis_p = cls.tangency.visibility_plus
    vis_m = cls.tangency.visibility_minus
    dYp = bd.der("Yp", x, 1)
    dYm = bd.der("Ym", x, 1)
    mult, lead = bd.detz_multiplicity(x, tol=1e-9)

    def report(tp, nu=None, tl=None):
        return TwoFoldReport(tp, vis_p, vis_m, nu, tl, mult)

    if vis_p == "degenerate" or vis_m == "degenerate":
        return report(TwoFoldType.DEGENERATE)
    denom = dYm - dYp
    if abs(denom) <= tol * (1.0 + abs(dYm) + abs(dYp)):
        return report(TwoFoldType.DEGENERATE)
    tau_l = dYm / denom
    if dYp * dYm > 0.0:
        # crossing on both sides of the fold: VV2/II2/VI1 territory
        return report(TwoFoldType.OTHER_GENERIC, tl=tau_l)

    if vis_p == vis_m:  # 'visible'/'visible' or 'invisible'/'invisible'
        nu = bd.der("detz", x, 1) / denom
        tp = TwoFoldType.VV1 if vis_p == "visible" else TwoFoldType.II1
        return report(tp, nu, tau_l)

    # opposite visibility
    if mult == 1:
        nu = lead / denom
        stable_on_left = dYp > 0.0
        canard = (stable_on_left and nu > 0.0) or (not stable_on_left and nu < 0.0)
        return report(TwoFoldType.VI3 if canard else TwoFoldType.VI2, nu, tau_l)
    if mult == 2:
        return report(TwoFoldType.NON_GENERIC_SLIDING, tl=tau_l)
    return report(TwoFoldType.DEGENERATE, tl=tau_l)


# ---------------------------------------------------------------------------
# Sliding segments and pseudo-equilibria


@dataclass
class SlidingSegment:
    """Parameterized arc inside the sliding set.

    ``path(v)`` must return boundary points for v in [v1, v2]; endpoint flags
    mark whether an end closes on a two-fold or a one-sided tangency (used by
    the improper-integral routines).
    """

    path: Callable[[float], Sequence[float]]
    v1: float
    v2: float
    path_deriv: Optional[Callable[[float], Sequence[float]]] = None
    endpoint_flags: tuple = ("regular", "regular")

    def __post_init__(self):
        if not self.v2 > self.v1:
            raise ValidationError("segment needs v1 < v2")

    @classmethod
    def on_axis(cls, a: float, b: float, flags=("regular", "regular")) -> "SlidingSegment":
        return cls(
            path=lambda v: (v, 0.0),
            v1=float(a),
            v2=float(b),
            path_deriv=lambda v: (1.0, 0.0),
            endpoint_flags=flags,
        )

    def deriv(self, v: float) -> np.ndarray:
        if self.path_deriv is not None:
            return np.asarray(self.path_deriv(v), dtype=float)
        h = 1e-7 * (1.0 + abs(v))
        p1 = np.asarray(self.path(v + h), dtype=float)
        p0 = np.asarray(self.path(v - h), dtype=float)
        return (p1 - p0) / (2.0 * h)

    def samples(self, n: int = 50, interior: bool = True) -> np.ndarray:
        vs = np.linspace(self.v1, self.v2, n + 2)
        return vs[1:-1] if interior else vs

    def validate(self, system: PwsSystem, n: int = 50, min_speed: float = 1e-9):
        """Check the interior is uniformly sliding with nonvanishing speed."""
        tags = set()
        for v in self.samples(n):
            z = self.path(v)
            cls = classify_boundary_point(system, z)
            if not cls.is_sliding:
                raise ValidationError(
                    f"segment leaves the sliding set at v = {v:.6g} ({cls.tag.value})"
                )
            tags.add(cls.tag)
            if np.linalg.norm(filippov_sliding_vf(system, z)) < min_speed:
                raise ValidationError(
                    f"pseudo-equilibrium inside segment near v = {v:.6g}"
                )
        if len(tags) > 1:
            raise ValidationError("segment mixes stable and unstable sliding")
        return tags.pop()


def pseudo_equilibria(system: PwsSystem, segment, n: int = 400,
                      tol: float = PSEUDO_EQ_TOL) -> list:
    """Zeros of the sliding vector field on a boundary interval or segment.

    ``segment`` may be an (a, b) interval on the x-axis (normal form) or a
    SlidingSegment.  Sign changes of the tangential sliding speed are
    bracketed on a grid and refined; the interval must stay inside the
    sliding set except possibly at pseudo-equilibria themselves.
    """
    if isinstance(segment, SlidingSegment):
        seg = segment
    else:
        a, b = segment
        _require_normal_form(system, "pseudo_equilibria on an interval")
        seg = SlidingSegment.on_axis(a, b)

    def speed(v: float) -> float:
        z = seg.path(v)
        cls = classify_boundary_point(system, z)
        if cls.tag is BoundaryTag.CROSSING:
            raise ValidationError(
                f"interval touches the crossing set at parameter {v:.6g}"
            )
        w = filippov_sliding_vf(system, z)
        dp = seg.deriv(v)
        return float(np.dot(w, dp) / np.dot(dp, dp))

    vs = seg.samples(n, interior=False)
    vals = np.array([speed(v) for v in vs])
    roots = []
    for k in range(len(vs) - 1):
        va, vb = vals[k], vals[k + 1]
        if va == 0.0:
            roots.append(vs[k])
        elif va * vb < 0.0:
            roots.append(brentq(speed, vs[k], vs[k + 1], xtol=tol, rtol=8.9e-16))
    if vals[-1] == 0.0:
        roots.append(vs[-1])
    out, seen = [], []
    for r in roots:
        if any(abs(r - s) < 10 * tol * (1 + abs(r)) for s in seen):
            continue
        seen.append(r)
        out.append(tuple(np.asarray(seg.path(r), dtype=float)))
    return out


# ---------------------------------------------------------------------------
# Coordinate changes and rescalings


@dataclass
class Diffeo:
    """Planar diffeomorphism w -> z with Jacobian and inverse.

    ``jacobian`` defaults to central differences of ``forward``; ``inverse``
    defaults to Newton iteration seeded at the target point, adequate for the
    near-identity changes used in invariance checks.
    """

    forward: Callable[[Sequence[float]], Sequence[float]]
    jacobian: Optional[Callable[[Sequence[float]], np.ndarray]] = None
    inverse: Optional[Callable[[Sequence[float]], Sequence[float]]] = None

    def jac(self, w) -> np.ndarray:
        if self.jacobian is not None:
            return np.asarray(self.jacobian(w), dtype=float)
        w = np.asarray(w, dtype=float)
        J = np.empty((2, 2))
        for k in range(2):
            h = 1e-6 * (1.0 + abs(w[k]))
            e = np.zeros(2)
            e[k] = h
            fp = np.asarray(self.forward(w + e), dtype=float)
            fm = np.asarray(self.forward(w - e), dtype=float)
            J[:, k] = (fp - fm) / (2.0 * h)
        return J

    def inv(self, z, tol: float = 1e-14, max_iter: int = 60) -> np.ndarray:
        if self.inverse is not None:
            return np.asarray(self.inverse(z), dtype=float)
        z = np.asarray(z, dtype=float)
        w = z.copy()
        for _ in range(max_iter):
            r = np.asarray(self.forward(w), dtype=float) - z
            if np.max(np.abs(r)) < tol * (1.0 + np.max(np.abs(z))):
                return w
            w = w - np.linalg.solve(self.jac(w), r)
        raise ValidationError("diffeomorphism inverse did not converge")


def pullback_system(system: PwsSystem, T: Diffeo, w_domain: Optional[Rect] = None,
                    check: bool = True) -> PwsSystem:
    """Pull the system back through z = T(w): fields DT^-1 (Z o T), boundary h o T.

    The first partials of the new boundary function use the exact chain rule
    through the supplied Jacobian, so Lie-derivative identities survive to
    finite-difference accuracy.
    """
    lam0 = system.lam

    if w_domain is None:
        xs, ys = system.domain.grid(9, 9)
        pts = np.array([T.inv((x, y)) for x in xs for y in ys])
        w_domain = Rect(
            float(pts[:, 0].min()), float(pts[:, 0].max()),
            float(pts[:, 1].min()), float(pts[:, 1].max()),
        )

    if check:
        xs, ys = w_domain.grid(9, 9)
        for x in xs:
            for y in ys:
                if abs(np.linalg.det(T.jac((x, y)))) < 1e-12:
                    raise ValidationError(
                        f"Jacobian of the coordinate change is singular at ({x:.6g}, {y:.6g})"
                    )

    def comp(side: str, row: int):
        f = system.field(side)

        def fn(x, y, lam=lam0):
            z = T.forward((x, y))
            v = np.array([f.x(z[0], z[1], lam), f.y(z[0], z[1], lam)])
            return float(np.linalg.solve(T.jac((x, y)), v)[row])

        return FuncMap2(fn)

    h = system.h

    def h_fn(x, y, lam=lam0):
        z = T.forward((x, y))
        return h(z[0], z[1], lam)

    def h_grad(which: int):
        def fn(x, y, lam=lam0):
            z = T.forward((x, y))
            g = np.array([h.partial(1, 0)(z[0], z[1], lam), h.partial(0, 1)(z[0], z[1], lam)])
            return float((T.jac((x, y)).T @ g)[which])

        return fn

    h_w = FuncMap2(h_fn, partials={(1, 0): h_grad(0), (0, 1): h_grad(1)})

    return PwsSystem(
        VectorField(comp("+", 0), comp("+", 1)),
        VectorField(comp("-", 0), comp("-", 1)),
        h_w,
        w_domain,
        lam0,
        check=False,
    )


def time_reversed(system: PwsSystem) -> PwsSystem:
    """System with both fields negated (t -> -t); swaps sliding stability."""

    def neg(m: SmoothMap2):
        if isinstance(m, PolyMap2):
            return -m
        return FuncMap2(lambda x, y, lam=system.lam, _m=m: -_m(x, y, lam))

    return PwsSystem(
        VectorField(neg(system.zplus.x), neg(system.zplus.y)),
        VectorField(neg(system.zminus.x), neg(system.zminus.y)),
        system.h,
        system.domain,
        system.lam,
        check=False,
    )


def scale_system(system: PwsSystem, g, check: bool = True, n: int = 15) -> PwsSystem:
    """Multiply both fields by a smooth positive function g(x, y, lam)."""
    if isinstance(g, SmoothMap2) or not callable(g):
        gm = as_map(g)
    else:
        gm = FuncMap2(g)
    if check:
        xs, ys = system.domain.grid(n, n)
        vals = np.array([gm(x, y, system.lam) for x in xs for y in ys])
        if vals.min() <= 0.0:
            raise ValidationError(
                f"multiplier must be positive on the domain; min = {vals.min():.3e}"
            )

    def times(m: SmoothMap2):
        def fn(x, y, lam=system.lam, _m=m):
            return gm(x, y, lam) * _m(x, y, lam)

        return FuncMap2(fn)

    return PwsSystem(
        VectorField(times(system.zplus.x), times(system.zplus.y)),
        VectorField(times(system.zminus.x), times(system.zminus.y)),
        system.h,
        system.domain,
        system.lam,
        check=False,
    )
