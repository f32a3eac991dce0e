"""Slow divergence integrals along sliding segments.

The integrand is the divergence weight E(z) = (Z+ - Z-)(h)(z) * q(tau(z)),
the nonzero eigenvalue a regularized trajectory accumulates while tracking
the sliding segment; dividing by the sliding speed turns it into an integral
over any regular parameterization.  On the x-axis (normal form h = y) the
weight over speed collapses to

    Phi(x) = |Y- - Y+| (Y+ - Y-) / |det Z| * q(-Y- / (Y+ - Y-)),

which is what the improper extensions to two-folds and one-sided tangencies
integrate.  Integrals are negative over stable sliding and positive over
unstable sliding, and do not depend on the parameterization.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy import integrate

from .errors import (
    DivergentIntegralError,
    NumericalError,
    ValidationError,
)
from .regularizers import Regularizer
from .system import (
    BoundaryTag,
    Diffeo,
    PwsSystem,
    SlidingSegment,
    boundary_data,
    classify_boundary_point,
    filippov_sliding_vf,
    is_normal_form,
    lie_derivative,
    pullback_system,
    scale_system,
    tau,
)

__all__ = [
    "SdiResult",
    "e_weight",
    "two_fold_integrand",
    "sdi_regular_segment",
    "sdi_to_two_fold",
    "sdi_to_tangency",
    "sdi_split_sum",
    "rescaled_divergence_crosscheck",
    "invariance_report",
    "fixed_node_sdi",
]

DEFAULT_TOL = 1e-10
MAX_SUBDIVISIONS = 10_000


@dataclass(frozen=True)
class SdiResult:
    value: float
    abs_error: float
    converged: bool
    subdivisions: int

    def __float__(self):
        return self.value


def _quad(f, a, b, tol, limit=MAX_SUBDIVISIONS):
    """Adaptive Gauss-Kronrod panel integration; returns (val, err, nsub, ok)."""
    out = integrate.quad(f, a, b, epsabs=tol, epsrel=1e-13, limit=limit,
                         full_output=True)
    if len(out) >= 4:  # warning message appended -> not fully converged
        val, err, info = out[0], out[1], out[2]
        return val, err, info.get("last", limit), False
    val, err, info = out
    return val, err, info.get("last", 0), True


@functools.lru_cache(maxsize=8)
def _leggauss(n):
    return np.polynomial.legendre.leggauss(n)


def _gauss_panel(f, a, b, n=80):
    """Fixed-node Gauss-Legendre integral of a smooth scalar f over [a, b]."""
    x, w = _leggauss(n)
    mid = 0.5 * (a + b)
    half = 0.5 * (b - a)
    return half * float(sum(wi * f(mid + half * xi) for xi, wi in zip(x, w)))


def e_weight(system: PwsSystem, reg: Regularizer, z) -> float:
    """Divergence weight E(z) = (Z+ - Z-)(h)(z) * q(tau(z)) at a sliding point."""
    a = lie_derivative(system, "+", z, 1)
    b = lie_derivative(system, "-", z, 1)
    return (a - b) * reg.q(tau(system, z))


def two_fold_integrand(system: PwsSystem, reg: Regularizer) -> Callable[[float], float]:
    """The x-axis integrand Phi; removably extended by 0 where both Y± vanish."""
    bd = boundary_data(system)

    def phi_int(x: float) -> float:
        yp = bd.Yp(x)
        ym = bd.Ym(x)
        if yp == 0.0 and ym == 0.0:
            return 0.0  # two-fold: continuous extension by the limit value
        diff = yp - ym
        det = bd.detz(x)
        if diff == 0.0:
            raise ValidationError(f"(Z+ - Z-)(h) vanishes at x = {x:.6g}")
        if det == 0.0:
            raise ValidationError(f"det Z vanishes inside the segment at x = {x:.6g}")
        t = -ym / diff
        return abs(diff) * diff / abs(det) * reg.q(t)

    return phi_int


def _two_fold_integrand_vec(system: PwsSystem, reg: Regularizer):
    """Vectorized axis integrand for polynomial models; None when unavailable.

    Skips the removable-singularity guards, so callers must keep their
    quadrature nodes strictly inside intervals where det Z is nonzero.
    """
    bd = boundary_data(system)
    poly = getattr(bd, "_poly", None)
    if poly is None:
        return None
    yp_c, ym_c, det_c = poly["Yp"], poly["Ym"], poly["detz"]
    pval = np.polynomial.polynomial.polyval

    def phi_vec(x):
        x = np.asarray(x, dtype=float)
        yp = pval(x, yp_c)
        ym = pval(x, ym_c)
        diff = yp - ym
        return np.abs(diff) * diff / np.abs(pval(x, det_c)) * reg.q(-ym / diff)

    return phi_vec


def _gauss_panel_vec(fvec, a, b, n: int = 80) -> float:
    """Gauss-Legendre panel for an array-vectorized integrand."""
    x, w = _leggauss(n)
    mid = 0.5 * (a + b)
    half = 0.5 * (b - a)
    return half * float(np.dot(w, fvec(mid + half * x)))


def _segment_integrand(system: PwsSystem, reg: Regularizer, seg: SlidingSegment):
    """E(p(v)) |p'(v)| / |Z_sl(p(v))| for a general parameterized segment."""

    def f(v: float) -> float:
        z = seg.path(v)
        w = filippov_sliding_vf(system, z)
        speed = float(np.hypot(w[0], w[1]))
        if speed == 0.0:
            raise ValidationError(f"sliding field vanishes at parameter {v:.6g}")
        dp = seg.deriv(v)
        return e_weight(system, reg, z) * float(np.hypot(dp[0], dp[1])) / speed

    return f


def _axis_segment(seg: SlidingSegment) -> Optional[tuple]:
    """Interval (a, b) when the segment is the identity chart of the x-axis."""
    for v in (seg.v1, 0.5 * (seg.v1 + seg.v2), seg.v2):
        p = np.asarray(seg.path(v), dtype=float)
        if p[1] != 0.0 or p[0] != v:
            return None
    return seg.v1, seg.v2


def sdi_regular_segment(
    system: PwsSystem,
    reg: Regularizer,
    segment,
    tol: float = DEFAULT_TOL,
    max_subdivisions: int = MAX_SUBDIVISIONS,
    validate: bool = True,
) -> SdiResult:
    """Slow divergence integral over a compact segment of the sliding set.

    ``segment`` is a SlidingSegment or an (a, b) interval on the x-axis.
    The value carries the sign of E: negative over stable sliding, positive
    over unstable sliding, independent of how the segment is parameterized.
    """
    if not isinstance(segment, SlidingSegment):
        a, b = segment
        segment = SlidingSegment.on_axis(a, b)
    if validate:
        segment.validate(system)

    axis = _axis_segment(segment)
    if axis is not None and is_normal_form(system):
        f = two_fold_integrand(system, reg)
        val, err, nsub, ok = _quad(f, axis[0], axis[1], tol, max_subdivisions)
    else:
        f = _segment_integrand(system, reg, segment)
        val, err, nsub, ok = _quad(f, segment.v1, segment.v2, tol, max_subdivisions)
    converged = ok and err <= tol * (1.0 + abs(val))
    if not converged and not ok:
        raise NumericalError(
            f"quadrature did not converge: error estimate {err:.3e} after {nsub} subdivisions"
        )
    return SdiResult(val, err, converged, nsub)


def _require_two_fold(system: PwsSystem, tol_mult: float = 1e-9):
    cls = classify_boundary_point(system, (0.0, 0.0))
    if cls.tag is not BoundaryTag.TANGENCY or cls.tangency.side != "both":
        raise ValidationError("origin is not a two-fold of the system")
    bd = boundary_data(system)
    mult, _ = bd.detz_multiplicity(0.0, tol=tol_mult)
    if mult > 2:
        raise DivergentIntegralError(
            f"det Z vanishes to order {mult} at the two-fold; the improper "
            "slow divergence integral diverges"
        )
    return mult


def sdi_to_two_fold(
    system: PwsSystem,
    reg: Regularizer,
    x1: float,
    tol: float = 1e-7,
    k_min: int = 4,
    k_max: int = 20,
    validate: bool = True,
) -> SdiResult:
    """Improper integral from a two-fold at the origin out to x1.

    Computes I([x0, x1]) at inner endpoints x0 = x1 * 2^-k, k = k_min..k_max,
    and accelerates the partial-sum sequence (Aitken); the limit exists when
    det Z vanishes to order at most 2 at the origin.  x1 < 0 integrates the
    mirrored segment [x1, 0).
    """
    if x1 == 0.0:
        raise ValidationError("outer endpoint must be nonzero")
    mult = _require_two_fold(system)
    phi_int = two_fold_integrand(system, reg)

    if validate:
        inner = SlidingSegment.on_axis(*sorted((x1 / 2**k_min, x1)))
        inner.validate(system)

    panel_tol = tol / (4 * (k_max - k_min + 2))
    partial = []
    errors = 0.0
    nsub_total = 0
    # base panel [x1/2^k_min, x1]
    lo, hi = sorted((x1 / 2**k_min, x1))
    val, err, nsub, ok = _quad(phi_int, lo, hi, panel_tol)
    acc = val
    errors += err
    nsub_total += nsub
    partial.append(acc)
    converged = False
    est = acc
    prev_est = None
    for k in range(k_min + 1, k_max + 1):
        lo, hi = sorted((x1 / 2**k, x1 / 2 ** (k - 1)))
        val, err, nsub, pok = _quad(phi_int, lo, hi, panel_tol)
        ok = ok and pok
        acc += val
        errors += err
        nsub_total += nsub
        partial.append(acc)
        if len(partial) >= 3:
            a0, a1, a2 = partial[-3], partial[-2], partial[-1]
            denom = a2 - 2.0 * a1 + a0
            est = a2 if denom == 0.0 else a2 - (a2 - a1) ** 2 / denom
            if prev_est is not None and abs(est - prev_est) < 0.5 * tol:
                converged = True
                break
            prev_est = est
    abs_error = errors + (abs(est - prev_est) if prev_est is not None else abs(est - acc))
    if not converged and mult > 2:
        raise DivergentIntegralError("partial integrals do not settle; divergent")
    return SdiResult(est, abs_error, converged and ok, nsub_total)


def _sdi_two_fold_direct(
    system: PwsSystem,
    reg: Regularizer,
    x_from: float,
    x_to: float,
    tol: float = 1e-12,
) -> SdiResult:
    """Integrate the continuously extended integrand straight through 0.

    Fast path for generic two-folds (det Z multiplicity 1), where the
    integrand is smooth across the origin; the improper one-sided limits
    then sum to an ordinary integral.  Used heavily by the balance and
    slow-relation solvers; sdi_to_two_fold remains the validating route.
    """
    f = two_fold_integrand(system, reg)
    lo, hi = sorted((x_from, x_to))
    sign = 1.0 if x_to >= x_from else -1.0
    val, err, nsub, ok = _quad(f, lo, hi, tol)
    return SdiResult(sign * val, err, ok, nsub)


def sdi_to_tangency(
    system: PwsSystem,
    reg: Regularizer,
    x1: float,
    tol: float = DEFAULT_TOL,
    validate: bool = True,
) -> SdiResult:
    """Integral from a one-sided tangency at the origin out to x1.

    Exactly one field is tangent at 0; tau runs to 0 or 1 there, so q and the
    whole integrand extend continuously by 0.  The sliding region must sit on
    the side of x1; a crossing-adjacent configuration has no sliding segment
    to integrate over and is rejected.
    """
    if x1 == 0.0:
        raise ValidationError("outer endpoint must be nonzero")
    cls = classify_boundary_point(system, (0.0, 0.0))
    if cls.tag is not BoundaryTag.TANGENCY:
        raise ValidationError("origin is not a tangency point")
    if cls.tangency.side == "both":
        raise ValidationError("origin is a two-fold; use sdi_to_two_fold")

    # the open interval toward x1 must slide
    probes = [x1 * t for t in (1e-4, 1e-2, 0.5, 1.0 - 1e-12)]
    for xp in probes:
        c = classify_boundary_point(system, (xp, 0.0))
        if c.tag is BoundaryTag.CROSSING:
            raise ValidationError(
                "tangency is adjacent to the crossing set on the integration "
                "side; the one-sided slow divergence integral is undefined"
            )
    phi_raw = two_fold_integrand(system, reg)

    def phi_int(x: float) -> float:
        if x == 0.0:
            return 0.0
        return phi_raw(x)

    lo, hi = sorted((0.0, x1))
    val, err, nsub, ok = _quad(phi_int, lo, hi, tol)
    converged = ok and err <= tol * (1.0 + abs(val))
    return SdiResult(val, err, converged, nsub)


def sdi_split_sum(
    system: PwsSystem,
    reg: Regularizer,
    a: float,
    b: float,
    tol: float = 1e-7,
) -> SdiResult:
    """Sum of the improper integrals [a, 0] and [0, b] through a two-fold."""
    if not (a < 0.0 < b):
        raise ValidationError("split integral needs a < 0 < b")
    left = sdi_to_two_fold(system, reg, a, tol=0.5 * tol)
    right = sdi_to_two_fold(system, reg, b, tol=0.5 * tol)
    return SdiResult(
        left.value + right.value,
        left.abs_error + right.abs_error,
        left.converged and right.converged,
        left.subdivisions + right.subdivisions,
    )


def rescaled_divergence_crosscheck(
    system: PwsSystem,
    reg: Regularizer,
    x: float,
    fd_step: float = 1e-4,
) -> dict:
    """Check E against the divergence of the assembled layer dynamics.

    At boundary point (x, 0) the fast layer is ydot = phi(y) * Z+(h) +
    (1 - phi(y)) * Z-(h) with equilibrium y* = phi_inv(tau); its linearization
    there is the nonzero eigenvalue of the rescaled system.  The central
    difference of the assembled right-hand side at y* must reproduce
    e_weight independently of the q shortcut.
    """
    z = (x, 0.0)
    t = tau(system, z)
    if not 0.0 < t < 1.0:
        raise ValidationError("crosscheck point must lie in the open sliding set")
    a = lie_derivative(system, "+", z, 1)
    b = lie_derivative(system, "-", z, 1)

    def layer_rhs(yt: float) -> float:
        return reg.phi(yt) * a + (1.0 - reg.phi(yt)) * b

    ystar = reg.phi_inv(t)
    h = fd_step * (1.0 + abs(ystar))
    div = (layer_rhs(ystar + h) - layer_rhs(ystar - h)) / (2.0 * h)
    ev = e_weight(system, reg, z)
    return {
        "x": x,
        "tau": t,
        "layer_equilibrium": ystar,
        "e_value": ev,
        "div_value": div,
        "abs_diff": abs(ev - div),
        "residual_at_equilibrium": layer_rhs(ystar),
    }


def invariance_report(
    system: PwsSystem,
    reg: Regularizer,
    segment,
    diffeo: Optional[Diffeo] = None,
    multiplier=None,
    tol: float = DEFAULT_TOL,
) -> dict:
    """Compare the integral with its pullback and positive-rescaling values."""
    if not isinstance(segment, SlidingSegment):
        segment = SlidingSegment.on_axis(*segment)
    base = sdi_regular_segment(system, reg, segment, tol=tol)
    report = {"base": base.value, "base_error": base.abs_error}
    if diffeo is not None:
        pulled = pullback_system(system, diffeo)

        def path_w(v, _p=segment.path, _T=diffeo):
            return tuple(_T.inv(_p(v)))

        seg_w = SlidingSegment(path_w, segment.v1, segment.v2)
        pb = sdi_regular_segment(pulled, reg, seg_w, tol=tol, validate=False)
        report["pullback"] = pb.value
        report["pullback_delta"] = abs(pb.value - base.value)
    if multiplier is not None:
        scaled = scale_system(system, multiplier)
        sc = sdi_regular_segment(scaled, reg, segment, tol=tol, validate=False)
        report["scaled"] = sc.value
        report["scaled_delta"] = abs(sc.value - base.value)
    return report


def fixed_node_sdi(
    system: PwsSystem,
    reg: Regularizer,
    segment,
    panels: int = 64,
    order: int = 10,
) -> float:
    """Composite Gauss-Legendre evaluation on a deterministic node set.

    Used for exact-antisymmetry checks (time reversal flips every integrand
    sample, so the composite sum negates bit-for-bit).
    """
    if not isinstance(segment, SlidingSegment):
        segment = SlidingSegment.on_axis(*segment)
    nodes, weights = np.polynomial.legendre.leggauss(order)
    f = _segment_integrand(system, reg, segment)
    edges = np.linspace(segment.v1, segment.v2, panels + 1)
    total = 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        mid = 0.5 * (a + b)
        half = 0.5 * (b - a)
        for xi, wi in zip(nodes, weights):
            total += wi * half * f(mid + half * xi)
    return total
