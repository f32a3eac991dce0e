"""Stiff simulation of the regularized switching flow and its return map.

The regularized field blends the two sides through the transition profile
evaluated in the layer variable y / eps^2,

    Z_eps(z) = phi(y eps^-2) Z+(z; lam) + (1 - phi(y eps^-2)) Z-(z; lam),

with the unfolding parameter split lam = eps * lamt.  Integration uses an
adaptive embedded Runge-Kutta pair with the absolute tolerance in y scaled
by eps^2, since that is the width of the boundary layer, and a clamped
maximal step so the layer cannot be jumped over.

The Poincare section is the same vertical segment the entry-exit analysis
uses: x = 0 below the two-fold, coordinatized by s = y - y_base.  Crossings
are counted with decreasing x.  The in-layer pass of a sliding orbit moves
rightward (its x-velocity is the positive Filippov speed), so orientation
alone separates the two families of section hits; the leftward hit is the
lower-field arc that closes a cycle.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import brentq

from .canard import CanardSetup
from .errors import NoReturnError, NumericalError, ValidationError

EPS_MAX = 0.2
EPS_COMFORT = 0.02
DEFAULT_RTOL = 1e-10
T_MAX_DEFAULT = 50.0


def _check_eps(eps: float):
    if not 0.0 < eps <= EPS_MAX:
        raise ValidationError(f"eps must lie in (0, {EPS_MAX}], got {eps}")
    if eps < EPS_COMFORT:
        warnings.warn(
            f"eps = {eps} below {EPS_COMFORT}: the layer becomes very stiff "
            "for an explicit integrator",
            stacklevel=3,
        )


def _reg_rhs(setup: CanardSetup, eps: float, lamt: float, sign: float = 1.0):
    system = setup.system
    lam = eps * lamt
    zp, zm = system.zplus, system.zminus
    phi = setup.reg.phi
    inv_e2 = 1.0 / (eps * eps)

    def rhs(t, z):
        x, y = z
        p = phi(y * inv_e2)
        fx = p * zp.x(x, y, lam) + (1.0 - p) * zm.x(x, y, lam)
        fy = p * zp.y(x, y, lam) + (1.0 - p) * zm.y(x, y, lam)
        return (sign * fx, sign * fy)

    return rhs


def _section_event(direction: float, t_guard: float = 1e-8):
    # orbits launched on the section start at x = 0 exactly and leave in
    # the counted direction, so x carries the sign of `direction` right
    # after start; holding that sign through the guard window keeps the
    # launch from registering as a crossing
    def ev(t, z):
        return z[0] if t > t_guard else direction

    ev.terminal = False
    ev.direction = direction
    return ev


def _escape_event(setup: CanardSetup):
    dom = setup.system.domain

    def ev(t, z):
        return min(
            z[0] - dom.xmin,
            dom.xmax - z[0],
            z[1] - dom.ymin,
            dom.ymax - z[1],
        )

    ev.terminal = True
    return ev


@dataclass(frozen=True)
class Crossing:
    t: float
    x: float
    y: float
    s: float


@dataclass(frozen=True)
class Trajectory:
    t: np.ndarray
    z: np.ndarray  # shape (n, 2)
    crossings: tuple
    diagnostics: dict
    eps: float
    lamt: float


def flow_regularized(
    setup: CanardSetup,
    eps: float,
    lamt: float,
    z0,
    t_max: float = T_MAX_DEFAULT,
    rtol: float = DEFAULT_RTOL,
    atol_base: float = 1e-10,
    max_step: float = 0.05,
) -> Trajectory:
    """Integrate the regularized field, logging leftward section crossings.

    The returned trajectory carries the solver's accepted steps plus an
    event log; crossing times are event-refined by the integrator's root
    bracketing (well below 1e-12 for these tolerances).
    """
    _check_eps(eps)
    z0 = np.asarray(z0, dtype=float)
    if not setup.system.domain.contains(z0[0], z0[1]):
        raise ValidationError(f"initial point {tuple(z0)} outside the domain")
    section = _section_event(-1.0)
    escape = _escape_event(setup)
    sol = solve_ivp(
        _reg_rhs(setup, eps, lamt),
        (0.0, t_max),
        z0,
        events=[section, escape],
        rtol=rtol,
        atol=(atol_base, atol_base * eps * eps),
        max_step=max_step,
        method="RK45",
    )
    if sol.status < 0:
        raise NumericalError(
            f"integration failed at t = {sol.t[-1]:.6g}, "
            f"z = ({sol.y[0, -1]:.6g}, {sol.y[1, -1]:.6g}): {sol.message}"
        )
    crossings = tuple(
        Crossing(float(t), float(z[0]), float(z[1]), float(z[1] - setup.y_base))
        for t, z in zip(sol.t_events[0], sol.y_events[0])
    )
    steps = len(sol.t) - 1
    rejected = max(0, (sol.nfev - 1 - 6 * steps) // 6)
    diag = {
        "nfev": int(sol.nfev),
        "steps": int(steps),
        "rejected_estimate": int(rejected),
        "min_step": float(np.min(np.diff(sol.t))) if steps > 0 else 0.0,
        "escaped": bool(sol.t_events[1].size),
        "t_final": float(sol.t[-1]),
    }
    return Trajectory(sol.t, sol.y.T, crossings, diag, eps, lamt)


def _first_return(
    setup: CanardSetup,
    eps: float,
    lamt: float,
    z0,
    rtol: float,
    t_max: float,
    sign: float = 1.0,
    atol_base: float = 1e-10,
    max_step: float = 0.05,
    dense: bool = False,
):
    """One section-to-section leg; returns (solution, crossing state)."""
    section = _section_event(-1.0 * sign)
    section.terminal = True
    escape = _escape_event(setup)
    sol = solve_ivp(
        _reg_rhs(setup, eps, lamt, sign),
        (0.0, t_max),
        np.asarray(z0, dtype=float),
        events=[section, escape],
        rtol=rtol,
        atol=(atol_base, atol_base * eps * eps),
        max_step=max_step,
        method="RK45",
        dense_output=dense,
    )
    if sol.status < 0:
        raise NumericalError(
            f"integration failed at t = {sol.t[-1]:.6g}: {sol.message}"
        )
    if sol.t_events[1].size:
        z = sol.y_events[1][0]
        raise NoReturnError(
            f"orbit escapes the domain at ({z[0]:.4g}, {z[1]:.4g}) before "
            "returning to the section"
        )
    if sol.t_events[0].size == 0:
        raise NoReturnError(f"no section return within t = {t_max:g}")
    return sol, sol.y_events[0][0]


def return_map(
    setup: CanardSetup,
    eps: float,
    lamt: float,
    s: float,
    rtol: float = DEFAULT_RTOL,
    t_max: float = T_MAX_DEFAULT,
) -> float:
    """First-return offset P(s) on the section, same crossing orientation."""
    _check_eps(eps)
    s = float(s)
    z0 = (0.0, setup.y_base + s)
    if not setup.system.domain.contains(*z0):
        raise ValidationError(f"section point for s = {s:g} outside the domain")
    _, zc = _first_return(setup, eps, lamt, z0, rtol, t_max)
    return float(zc[1] - setup.y_base)


@dataclass(frozen=True)
class LimitCycleReport:
    s_star: float
    multiplier: float
    classification: str  # hyperbolicAttracting | hyperbolicRepelling | nearDouble
    residual: float

    def __str__(self):
        return (
            f"cycle at s = {self.s_star:.6g}: multiplier {self.multiplier:.6f} "
            f"({self.classification}, residual {self.residual:.1e})"
        )


def _classify(mult: float, theta: float) -> str:
    if abs(mult - 1.0) <= theta:
        return "nearDouble"
    return "hyperbolicAttracting" if mult < 1.0 else "hyperbolicRepelling"


def find_limit_cycles(
    setup: CanardSetup,
    eps: float,
    lamt: float,
    s_grid: Sequence[float],
    rtol: float = DEFAULT_RTOL,
    refine_tol: float = 1e-10,
    theta: float = 0.05,
    t_max: float = T_MAX_DEFAULT,
) -> List[LimitCycleReport]:
    """Fixed points of the return map bracketed on a grid and refined.

    Grid points whose orbit escapes the domain are dropped (near the upper
    end of the cycle window the deepest entries eject through the broken
    sliding segment); brackets are formed between surviving neighbors only.
    Multipliers come from central differences with a relative step of 1e-5;
    classification uses the theta band around 1.
    """
    s_grid = np.asarray(sorted(float(s) for s in s_grid), dtype=float)
    if s_grid.size < 2:
        raise ValidationError("need at least two grid points")

    def gap(s):
        return return_map(setup, eps, lamt, s, rtol=rtol, t_max=t_max) - s

    samples = []
    for s in s_grid:
        try:
            samples.append((s, gap(s)))
        except NoReturnError:
            continue
    reports = []
    for (a, fa), (b, fb) in zip(samples, samples[1:]):
        if fa == 0.0:
            s_star = float(a)
        elif fa * fb < 0.0:
            s_star = brentq(gap, a, b, xtol=refine_tol, rtol=8.9e-16)
        else:
            continue
        h = 1e-5 * max(abs(s_star), 1e-3)
        p_plus = return_map(setup, eps, lamt, s_star + h, rtol=rtol, t_max=t_max)
        p_minus = return_map(setup, eps, lamt, s_star - h, rtol=rtol, t_max=t_max)
        mult = float((p_plus - p_minus) / (2.0 * h))
        resid = abs(return_map(setup, eps, lamt, s_star, rtol=rtol, t_max=t_max)
                    - s_star)
        reports.append(
            LimitCycleReport(float(s_star), mult, _classify(mult, theta),
                             float(resid))
        )
    return reports


def _count_cycles(setup, eps, lamt, s_grid, rtol, t_max):
    """Sign changes of P(s) - s among non-escaping grid points."""
    vals = []
    escaped = 0
    for s in s_grid:
        try:
            vals.append(return_map(setup, eps, lamt, s, rtol=rtol, t_max=t_max) - s)
        except NoReturnError:
            escaped += 1
    count = 0
    for i in range(len(vals) - 1):
        if vals[i] == 0.0 or vals[i] * vals[i + 1] < 0.0:
            count += 1
    return count, escaped


@dataclass(frozen=True)
class SweepResult:
    lamt_star: float
    bracket: tuple
    history: tuple  # (lamt, cycle count) pairs in evaluation order
    near_double: Optional[LimitCycleReport]
    diagnostics: dict

    def __str__(self):
        nd = "none" if self.near_double is None else str(self.near_double)
        return (
            f"saddle-node at lamt = {self.lamt_star:.8g} "
            f"(bracket width {self.bracket[1] - self.bracket[0]:.1e}); "
            f"near-double: {nd}"
        )


def saddle_node_sweep(
    setup: CanardSetup,
    eps: float,
    lamt_range: tuple,
    s_grid: Optional[Sequence[float]] = None,
    rtol: float = DEFAULT_RTOL,
    count_rtol: float = 1e-8,
    bracket_tol: float = 1e-6,
    t_max: float = T_MAX_DEFAULT,
) -> SweepResult:
    """Bisect the unfolding parameter on the fixed-point count of the map.

    The endpoints must disagree in count (2 vs 0 at the idealized fold; at
    desk-scale eps the observed drop is 1 vs 0, with the deepest entries
    escaping past the transition, so counting tolerates escapes).  Bisection
    keeps the invariant that the low edge always matches the low endpoint's
    count.  Counting runs at a coarser tolerance than refinement since only
    signs of P(s) - s matter; the cycle report closest to the transition is
    refined at the full tolerance just inside the cycle-bearing edge of the
    final bracket.
    """
    _check_eps(eps)
    lo, hi = float(lamt_range[0]), float(lamt_range[1])
    if not lo < hi:
        raise ValidationError(f"need lamt_range low < high, got {lamt_range}")
    if s_grid is None:
        top = min(1.3 * setup.sbar, 0.98 * (-setup.y_base))
        s_grid = np.linspace(0.1 * setup.sbar, top, 9)
    s_grid = np.asarray(sorted(float(s) for s in s_grid), dtype=float)

    history = []
    escapes = {}

    def count(lamt: float) -> int:
        c, esc = _count_cycles(setup, eps, lamt, s_grid, count_rtol, t_max)
        history.append((float(lamt), int(c)))
        escapes[float(lamt)] = esc
        return c

    c_lo = count(lo)
    c_hi = count(hi)
    if c_lo == c_hi:
        raise ValidationError(
            f"cycle count does not change across the range: {c_lo} at "
            f"{lo:g}, {c_hi} at {hi:g}"
        )
    a, b = lo, hi
    while b - a > bracket_tol:
        mid = 0.5 * (a + b)
        if count(mid) == c_lo:
            a = mid
        else:
            b = mid
    lamt_star = 0.5 * (a + b)

    # refine the cycle nearest the transition, just inside whichever edge
    # still carries more cycles
    inside = a if c_lo > c_hi else b
    reports = find_limit_cycles(setup, eps, inside, s_grid, rtol=rtol,
                                theta=0.05, t_max=t_max)
    near_double = None
    if reports:
        near_double = min(reports, key=lambda r: abs(r.multiplier - 1.0))
    diag = {
        "count_low": c_lo,
        "count_high": c_hi,
        "evaluations": len(history),
        "escaped_grid_points": dict(escapes),
        "inside_lamt": float(inside),
        "inside_reports": tuple(reports),
    }
    return SweepResult(
        float(lamt_star), (float(a), float(b)), tuple(history), near_double, diag
    )


def spiral_trajectory(
    setup: CanardSetup,
    eps: float,
    lamt: float,
    z0,
    n_returns: int,
    reverse: bool = False,
    rtol: float = DEFAULT_RTOL,
    t_max_leg: float = T_MAX_DEFAULT,
    resample_spacing: Optional[float] = None,
) -> np.ndarray:
    """Trajectory through n_returns section crossings, resampled uniformly.

    Integrate backward (reverse=True) to accumulate onto a repelling cycle.
    The concatenated polyline is resampled by arc length to a bounded
    spacing so box counts measure the curve rather than the solver's step
    distribution; default spacing is 1/2048 of the extent.
    """
    _check_eps(eps)
    if n_returns < 1:
        raise ValidationError("need n_returns >= 1")
    sign = -1.0 if reverse else 1.0
    z = np.asarray(z0, dtype=float)
    pieces = []
    for _ in range(int(n_returns)):
        sol, zc = _first_return(setup, eps, lamt, z, rtol, t_max_leg, sign=sign)
        pieces.append(sol.y.T)
        z = zc
    poly = np.vstack(pieces)
    return _resample_polyline(poly, resample_spacing)


def _resample_polyline(poly: np.ndarray, spacing: Optional[float]) -> np.ndarray:
    seg = np.linalg.norm(np.diff(poly, axis=0), axis=1)
    keep = np.concatenate([[True], seg > 0.0])
    poly = poly[keep]
    seg = np.linalg.norm(np.diff(poly, axis=0), axis=1)
    arc = np.concatenate([[0.0], np.cumsum(seg)])
    if arc[-1] == 0.0:
        raise NumericalError("degenerate trajectory (zero arc length)")
    if spacing is None:
        extent = float(np.max(poly.max(axis=0) - poly.min(axis=0)))
        spacing = extent / 2048.0
    n = max(int(math.ceil(arc[-1] / spacing)) + 1, 2)
    grid = np.linspace(0.0, arc[-1], n)
    return np.column_stack([np.interp(grid, arc, poly[:, k]) for k in (0, 1)])


def sliding_layer_speed(
    setup: CanardSetup,
    eps: float,
    x_window: tuple,
    lamt: float = 0.0,
    rtol: float = DEFAULT_RTOL,
) -> float:
    """Mean x-velocity of a layer-trapped orbit across a window; compares
    against the Filippov sliding speed in tests."""
    _check_eps(eps)
    x0, x1 = float(x_window[0]), float(x_window[1])
    if not x0 < x1:
        raise ValidationError("need x0 < x1")

    def reach(t, z):
        return z[0] - x1

    reach.terminal = True
    sol = solve_ivp(
        _reg_rhs(setup, eps, lamt),
        (0.0, T_MAX_DEFAULT),
        (x0, 0.0),
        events=[reach],
        rtol=rtol,
        atol=(1e-12, 1e-12 * eps * eps),
        max_step=0.05,
        method="RK45",
    )
    if sol.t_events[0].size == 0:
        raise NoReturnError(
            f"layer orbit did not traverse [{x0:g}, {x1:g}] in time"
        )
    return (x1 - x0) / float(sol.t_events[0][0])
