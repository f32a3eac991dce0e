"""Entry-exit analysis of sliding cycles through a balanced two-fold.

A vertical section sigma(s) = (0, y_base + s) sits below the two-fold at
the origin; the lower field carries each section point to two boundary
crossings psi_-(s) < 0 < psi_+(s), and the slow divergence integral over
[psi_-, psi_+] measures the net contraction of the regularized return near
the corresponding candidate cycle.  The slow relation G pairs entry and
exit offsets by balancing the incoming half of that integral against the
outgoing half; iterating G (or its inverse, depending on the sign of the
integral) produces a monotone orbit accumulating on the balanced cycle.
The accumulation rate - equivalently the Minkowski dimension of the orbit
tail - encodes the multiplicity of the zero of the integral and through it
a bound on how many limit cycles the regularized system can spawn.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import brentq

from .errors import (
    BracketError,
    NoReturnError,
    NumericalError,
    ValidationError,
)
from .fractal import dim_from_multiplicity, multiplicity_from_dim
from .regularizers import Regularizer, make_tanh_regularizer, regularizer_by_name
from .sdi import (
    _gauss_panel,
    _gauss_panel_vec,
    _sdi_two_fold_direct,
    _two_fold_integrand_vec,
    sdi_split_sum,
    two_fold_integrand,
)
from .smoothmap import PolyMap2
from .system import (
    PwsSystem,
    TwoFoldType,
    boundary_data,
    classify_two_fold,
    is_normal_form,
)

FLOOR_DEFAULT = 1e-9
MAX_ITER_DEFAULT = 100_000


@dataclass(frozen=True, eq=False)
class CanardSetup:
    """Section geometry for entry-exit analysis at a two-fold.

    The section is the vertical segment x = 0, y = y_base + s for
    |s| <= sbar, with y_base chosen so that s = 0 lands on the lower-field
    orbit through (p0, 0).  Larger s means closer to the two-fold.
    """

    system: PwsSystem
    reg: Regularizer
    eta_minus: float
    eta_plus: float
    p0: float
    sbar: float
    y_base: float

    def section_point(self, s: float) -> tuple:
        return (0.0, self.y_base + s)


def _lower_rhs(system: PwsSystem, sign: float = 1.0):
    f = system.zminus
    lam = system.lam

    def rhs(t, z):
        return sign * f(z[0], z[1], lam)

    return rhs


def _flow_lower_to_boundary(system: PwsSystem, z0, sign: float, t_max: float):
    """Integrate sign * Z- from z0 until the boundary y = 0 is crossed."""

    def hit(t, z):
        return z[1]

    hit.terminal = True
    hit.direction = 1.0  # approach from below

    dom = system.domain
    pad = 1e-9

    def escape(t, z):
        return min(
            z[0] - dom.xmin + pad,
            dom.xmax - z[0] + pad,
            z[1] - dom.ymin + pad,
        )

    escape.terminal = True

    sol = solve_ivp(
        _lower_rhs(system, sign),
        (0.0, t_max),
        np.asarray(z0, dtype=float),
        events=[hit, escape],
        rtol=1e-12,
        atol=1e-14,
        method="RK45",
    )
    if sol.status < 0:
        raise NumericalError(f"lower-field integration failed: {sol.message}")
    if sol.t_events[0].size == 0:
        if sol.t_events[1].size:
            raise NoReturnError(
                "lower-field orbit leaves the domain before returning to "
                "the boundary"
            )
        raise NoReturnError(
            f"lower-field orbit did not reach the boundary within t = {t_max:g}"
        )
    return float(sol.y_events[0][0][0])


def _section_base(system: PwsSystem, p0: float) -> float:
    """y-value where the lower orbit through (p0, 0) crosses x = 0."""

    def cross(t, z):
        return z[0]

    cross.terminal = True

    dom = system.domain
    t_max = 10.0 * (dom.xmax - dom.xmin + dom.ymax - dom.ymin + 1.0)
    for sign in (1.0, -1.0):
        sol = solve_ivp(
            _lower_rhs(system, sign),
            (0.0, t_max),
            [p0, 0.0],
            events=[cross],
            rtol=1e-12,
            atol=1e-14,
        )
        if sol.status >= 0 and sol.t_events[0].size:
            return float(sol.y_events[0][0][1])
    raise NoReturnError(
        f"lower-field orbit through ({p0}, 0) never crosses the section x = 0"
    )


def make_canard_setup(
    system: PwsSystem,
    reg: Optional[Regularizer] = None,
    eta: tuple = (-0.3, 0.3),
    p0: float = 0.2,
    sbar: Optional[float] = None,
) -> CanardSetup:
    """Build the section geometry; fails fast on gross misconfiguration.

    The deeper dynamical hypotheses (sliding structure, two-fold type,
    sign-definiteness of the integral) are checked separately by
    check_assumptions so that deliberately broken inputs can still be
    inspected.
    """
    if reg is None:
        reg = make_tanh_regularizer()
    eta_minus, eta_plus = float(eta[0]), float(eta[1])
    if not eta_minus < 0.0 < eta_plus:
        raise ValidationError(f"need eta_minus < 0 < eta_plus, got {eta}")
    if not is_normal_form(system):
        raise ValidationError(
            "canard setup expects the boundary in normal form h = y"
        )
    if not 0.0 < p0 < min(-eta_minus, eta_plus):
        raise ValidationError(
            f"need 0 < p0 < min(-eta_minus, eta_plus), got p0 = {p0}"
        )
    y_base = _section_base(system, p0)
    if y_base >= 0.0:
        raise ValidationError(
            f"section anchor must lie below the boundary, got y_base = {y_base:g}"
        )
    if sbar is None:
        sbar = 0.75 * (-y_base)
    sbar = float(sbar)
    if not 0.0 < sbar < -y_base:
        raise ValidationError(
            f"need 0 < sbar < {-y_base:g} so the section stays below the "
            f"boundary, got {sbar}"
        )
    return CanardSetup(system, reg, eta_minus, eta_plus, float(p0), sbar, y_base)


def setup_from_model(loaded, reg: Optional[Regularizer] = None) -> CanardSetup:
    """Canard setup from a loaded model using its metadata (p0, eta, sbar)."""
    meta = dict(getattr(loaded, "meta", {}) or {})
    if "p0" not in meta:
        raise ValidationError(
            "model metadata lacks 'p0'; pass the cycle anchor explicitly "
            "via make_canard_setup"
        )
    if reg is None:
        reg = regularizer_by_name(getattr(loaded, "regularizer", "tanh"))
    eta = tuple(meta.get("eta", (-0.3, 0.3)))
    return make_canard_setup(
        loaded.system, reg, eta=eta, p0=float(meta["p0"]), sbar=meta.get("sbar")
    )


# ---------------------------------------------------------------------------
# Connection endpoints


def _poly_boundary_crossings(system: PwsSystem, y0: float) -> Optional[tuple]:
    """Closed-form crossings when Z- is (const, polynomial in x).

    The lower orbit through (0, y0) is the graph of
    y0 + (1/X-) * antiderivative(Y-), so its boundary crossings are
    polynomial roots; returns (psi_minus, psi_plus) or None when the shape
    does not apply.
    """
    fx, fy = system.zminus.x, system.zminus.y
    if not (isinstance(fx, PolyMap2) and isinstance(fy, PolyMap2)):
        return None
    cx = fx.at_lam(system.lam)
    cy = fy.at_lam(system.lam)
    if cx.shape != (1, 1) or cx[0, 0] == 0.0 or cy.shape[1] != 1:
        return None
    c0 = float(cx[0, 0])
    anti = np.polynomial.polynomial.polyint(cy[:, 0]) / c0
    anti[0] = y0
    roots = np.polynomial.polynomial.polyroots(anti)
    real = roots[np.abs(roots.imag) < 1e-9].real
    dom = system.domain
    real = real[(real >= dom.xmin) & (real <= dom.xmax)]
    left = real[real < 0.0]
    right = real[real > 0.0]
    if left.size == 0 or right.size == 0:
        raise NoReturnError(
            f"lower orbit through (0, {y0:g}) does not cross the boundary "
            "on both sides"
        )
    return float(left.max()), float(right.min())


def connection_endpoints(
    setup: CanardSetup, s: float, method: str = "integrate"
) -> tuple:
    """Boundary crossings (psi_minus, psi_plus) of the lower orbit through
    the section point sigma(s).

    method "integrate" follows the orbit with event-located crossings;
    "closed" uses the polynomial potential when the lower field allows it
    and falls back to integration otherwise.
    """
    s = float(s)
    if abs(s) > setup.sbar:
        raise ValidationError(
            f"section offset |s| = {abs(s):g} exceeds sbar = {setup.sbar:g}"
        )
    y0 = setup.y_base + s
    if method == "closed":
        closed = _poly_boundary_crossings(setup.system, y0)
        if closed is not None:
            return closed
    elif method != "integrate":
        raise ValidationError(f"unknown endpoint method {method!r}")

    sys_ = setup.system
    dom = sys_.domain
    t_max = 10.0 * (dom.xmax - dom.xmin + dom.ymax - dom.ymin + 1.0)
    a = _flow_lower_to_boundary(sys_, (0.0, y0), 1.0, t_max)
    b = _flow_lower_to_boundary(sys_, (0.0, y0), -1.0, t_max)
    psi_minus, psi_plus = min(a, b), max(a, b)
    if not psi_minus < 0.0 < psi_plus:
        raise NumericalError(
            f"connection endpoints do not straddle the two-fold: "
            f"({psi_minus:g}, {psi_plus:g})"
        )
    if psi_minus < setup.eta_minus or psi_plus > setup.eta_plus:
        raise ValidationError(
            f"connection endpoints ({psi_minus:.4g}, {psi_plus:.4g}) leave "
            f"the sliding range [{setup.eta_minus:g}, {setup.eta_plus:g}]"
        )
    return psi_minus, psi_plus


def _endpoints_fast(setup: CanardSetup, s: float) -> tuple:
    out = _poly_boundary_crossings(setup.system, setup.y_base + s)
    if out is not None:
        return out
    return connection_endpoints(setup, s)


# ---------------------------------------------------------------------------
# The integral and the slow relation


def _half_integrals(setup: CanardSetup):
    """(I_minus(s), I_plus(s)) evaluators over the connection intervals."""
    phi_vec = _two_fold_integrand_vec(setup.system, setup.reg)
    if phi_vec is not None:
        panel = lambda a, b: _gauss_panel_vec(phi_vec, a, b)  # noqa: E731
    else:
        phi = two_fold_integrand(setup.system, setup.reg)
        panel = lambda a, b: _gauss_panel(phi, a, b)  # noqa: E731

    def i_minus(s: float) -> float:
        psi_m, _ = _endpoints_fast(setup, s)
        return panel(psi_m, 0.0)

    def i_plus(s: float) -> float:
        _, psi_p = _endpoints_fast(setup, s)
        return panel(0.0, psi_p)

    return i_minus, i_plus


def sdi_I(
    setup: CanardSetup, s: float, tol: float = 1e-9, method: str = "direct"
) -> float:
    """Slow divergence integral over the connection [psi_-(s), psi_+(s)].

    method "direct" integrates the continuously extended integrand through
    the two-fold (valid for simple det Z zeros); "split" runs the
    validating improper route from both sides.
    """
    psi_m, psi_p = _endpoints_fast(setup, float(s))
    if method == "direct":
        return float(_sdi_two_fold_direct(setup.system, setup.reg, psi_m, psi_p,
                                          tol=min(tol, 1e-10)))
    if method == "split":
        return float(sdi_split_sum(setup.system, setup.reg, psi_m, psi_p, tol=tol))
    raise ValidationError(f"unknown sdi_I method {method!r}")


def slow_relation_G(setup: CanardSetup, s: float, tol: float = 1e-12) -> float:
    """Exit offset g with I([psi_-(s), 0]) + I([0, psi_+(g)]) = 0.

    The balance residual is strictly decreasing in g, so the root is found
    by bracketed refinement on [-sbar, sbar].
    """
    s = float(s)
    if abs(s) > setup.sbar:
        raise ValidationError(f"|s| = {abs(s):g} exceeds sbar = {setup.sbar:g}")
    i_minus, i_plus = _half_integrals(setup)
    target = i_minus(s)

    def resid(g: float) -> float:
        return target + i_plus(g)

    return _bracketed_root(resid, setup.sbar, tol, "slow relation")


def slow_relation_G_inverse(setup: CanardSetup, s: float, tol: float = 1e-12) -> float:
    """Entry offset g with I([psi_-(g), 0]) + I([0, psi_+(s)]) = 0."""
    s = float(s)
    if abs(s) > setup.sbar:
        raise ValidationError(f"|s| = {abs(s):g} exceeds sbar = {setup.sbar:g}")
    i_minus, i_plus = _half_integrals(setup)
    target = i_plus(s)

    def resid(g: float) -> float:
        return i_minus(g) + target

    return _bracketed_root(resid, setup.sbar, tol, "inverse slow relation")


def _bracketed_root(resid, sbar: float, tol: float, what: str) -> float:
    ra = resid(-sbar)
    rb = resid(sbar)
    if ra == 0.0:
        return -sbar
    if rb == 0.0:
        return sbar
    if ra * rb > 0.0:
        raise BracketError(
            f"{what}: no sign change on [-sbar, sbar] = [{-sbar:g}, {sbar:g}] "
            f"(residuals {ra:.3e}, {rb:.3e})"
        )
    g = brentq(resid, -sbar, sbar, xtol=1e-15, rtol=8.9e-16, maxiter=200)
    r = abs(resid(g))
    if r > max(tol, 1e-11):
        raise NumericalError(f"{what} root poorly converged: residual {r:.3e}")
    return float(g)


# ---------------------------------------------------------------------------
# Orbits of the slow relation


@dataclass(frozen=True)
class OrbitSequence:
    """Monotone orbit of the slow relation (or a synthetic map)."""

    s0: float
    terms: tuple
    direction: str  # "forwardG" | "inverseG" | "map"
    stop_reason: str  # "floorReached" | "maxIter" | "rootFailure"

    def __len__(self):
        return len(self.terms)

    def __iter__(self):
        return iter(self.terms)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.terms, dtype=float)


def orbit_from_map(
    step: Callable[[float], float],
    s0: float,
    floor: float = FLOOR_DEFAULT,
    max_iter: int = MAX_ITER_DEFAULT,
    direction: str = "map",
) -> OrbitSequence:
    """Iterate a contraction toward 0, recording terms until the floor.

    Stops with reason "floorReached" once a term drops to the floor,
    "maxIter" at the iteration cap, or "rootFailure" when the step errors
    out or produces a non-decreasing or non-positive value.
    """
    s0 = float(s0)
    terms = [s0]
    if s0 <= floor:
        return OrbitSequence(s0, tuple(terms), direction, "floorReached")
    reason = "maxIter"
    s = s0
    for _ in range(int(max_iter)):
        try:
            nxt = float(step(s))
        except (NumericalError, ValidationError):
            reason = "rootFailure"
            break
        if not math.isfinite(nxt) or not 0.0 < nxt < s:
            reason = "rootFailure"
            break
        terms.append(nxt)
        s = nxt
        if s <= floor:
            reason = "floorReached"
            break
    return OrbitSequence(s0, tuple(terms), direction, reason)


def generate_orbit(
    setup: CanardSetup,
    s0: float,
    floor: float = FLOOR_DEFAULT,
    max_iter: int = MAX_ITER_DEFAULT,
) -> OrbitSequence:
    """Orbit of the slow relation starting at s0 > 0, iterated toward 0.

    Iterates G when the integral is negative on (0, sbar] (contracting
    side), and the inverse relation when it is positive, so the orbit is
    strictly decreasing either way.
    """
    s0 = float(s0)
    if not 0.0 <= s0 <= setup.sbar:
        raise ValidationError(f"s0 must lie in [0, sbar], got {s0}")
    i_mid = sdi_I(setup, 0.5 * setup.sbar)
    # quadrature noise, not a sign: exact-zero probes never fire in floats
    if abs(i_mid) <= 1e-12:
        raise ValidationError(
            "integral vanishes at the probe offset; no orbit direction "
            "(symmetric model?)"
        )
    if i_mid < 0.0:
        direction = "forwardG"
        step = lambda s: slow_relation_G(setup, s)  # noqa: E731
    else:
        direction = "inverseG"
        step = lambda s: slow_relation_G_inverse(setup, s)  # noqa: E731
    return orbit_from_map(step, s0, floor=floor, max_iter=max_iter,
                          direction=direction)


# ---------------------------------------------------------------------------
# Multiplicity and cyclicity


@dataclass(frozen=True)
class MultiplicityFit:
    """Power-law fit of |I(s)| ~ C s^m near s = 0."""

    m: object  # int when accepted, math.inf for identically small I, else None
    slope: float
    fit_quality: float
    window: tuple
    accepted: bool

    def __str__(self):
        if self.m == math.inf:
            return "multiplicity fit: I below noise floor (infinite-order candidate)"
        tag = str(self.m) if self.accepted else "indeterminate"
        return (
            f"multiplicity {tag} (slope {self.slope:.4f}, "
            f"fit quality {self.fit_quality:.2e})"
        )


def multiplicity_of_I(
    setup: CanardSetup,
    fit_window: Optional[tuple] = None,
    n_points: int = 50,
    noise_floor: float = 1e-12,
) -> MultiplicityFit:
    """Estimate the order of the zero of I at s = 0 from a log-log fit.

    The default window spans two decades ending at min(1e-2, sbar / 8);
    staying well inside sbar matters because I has a second zero where the
    connection degenerates, which would bend the fit.  Accepts integer m
    when the slope is within 0.15 and the residuals within 0.05.
    """
    if fit_window is None:
        hi = min(1e-2, setup.sbar / 8.0)
        lo = hi / 100.0
    else:
        lo, hi = float(fit_window[0]), float(fit_window[1])
    if not 0.0 < lo < hi <= setup.sbar:
        raise ValidationError(
            f"fit window ({lo:g}, {hi:g}) must satisfy 0 < lo < hi <= sbar"
        )
    ss = np.geomspace(lo, hi, int(n_points))
    vals = np.array([sdi_I(setup, s) for s in ss])
    if np.max(np.abs(vals)) < noise_floor:
        return MultiplicityFit(math.inf, float("nan"), float("nan"),
                               (lo, hi), True)
    if np.any(vals == 0.0) or np.min(vals) < 0.0 < np.max(vals):
        return MultiplicityFit(None, float("nan"), float("inf"), (lo, hi), False)

    t = np.log(ss)
    v = np.log(np.abs(vals))
    a = np.column_stack([np.ones_like(t), t])
    coef, *_ = np.linalg.lstsq(a, v, rcond=None)
    slope = float(coef[1])
    quality = float(np.sqrt(np.mean((v - a @ coef) ** 2)))
    k = int(round(slope))
    accepted = k >= 1 and abs(slope - k) < 0.15 and quality < 0.05
    return MultiplicityFit(k if accepted else None, slope, quality,
                           (lo, hi), accepted)


@dataclass(frozen=True)
class CyclicityPrediction:
    dim_b: float
    multiplicity: object
    bound: int
    scenarios: frozenset

    def __str__(self):
        sc = ", ".join(sorted(self.scenarios)) if self.scenarios else "none"
        return (
            f"cyclicity bound {self.bound} (dimension {self.dim_b:g}, "
            f"multiplicity {self.multiplicity}, scenarios: {sc})"
        )


def predict_cyclicity(
    dim_b: Optional[float] = None,
    multiplicity=None,
    i_sign: Optional[float] = None,
) -> CyclicityPrediction:
    """Cyclicity bound (2 - d)/(1 - d) = m + 1 from either invariant.

    Give exactly one of the dimension of the orbit tail or the multiplicity
    of the integral's zero; the other is filled in through the dictionary.
    The bound is computed as m + 1 so lattice dimensions give exact
    integers.  At d = 0 both one-parameter scenarios are flagged; the
    optional sign of I refines the unique-cycle scenario to attracting or
    repelling.
    """
    if (dim_b is None) == (multiplicity is None):
        raise ValidationError("give exactly one of dim_b or multiplicity")
    if multiplicity is not None:
        m = multiplicity
        if m != math.inf:
            if not float(m).is_integer() or m < 1:
                raise ValidationError(
                    f"multiplicity must be a positive integer or inf, got {m}"
                )
            m = int(m)
        d = dim_from_multiplicity(m)
    else:
        d = float(dim_b)
        if not 0.0 <= d <= 1.0:
            raise ValidationError(f"dimension must lie in [0, 1], got {d}")
        if d > 1.0 - 1e-12:
            m = math.inf
        else:
            m = multiplicity_from_dim(d)
    if m == math.inf:
        raise ValidationError(
            "no finite cyclicity bound at dimension 1 (infinite-order zero)"
        )
    bound = int(m) + 1
    scenarios = set()
    if m == 1:
        scenarios.update({"uniqueHyperbolic", "saddleNode"})
        if i_sign is not None and i_sign != 0.0:
            scenarios.add("attractingUnique" if i_sign < 0 else "repellingUnique")
    return CyclicityPrediction(d, m, bound, frozenset(scenarios))


# ---------------------------------------------------------------------------
# Assumption checks


@dataclass(frozen=True)
class CheckItem:
    name: str
    passed: bool
    witness: str


@dataclass(frozen=True)
class AssumptionReport:
    items: tuple

    @property
    def passed(self) -> bool:
        return all(item.passed for item in self.items)

    def item(self, name: str) -> CheckItem:
        for it in self.items:
            if it.name == name:
                return it
        raise KeyError(name)

    def __str__(self):
        lines = [f"assumptions: {'PASS' if self.passed else 'FAIL'}"]
        for it in self.items:
            lines.append(
                f"  {it.name:18s} {'ok  ' if it.passed else 'FAIL'}  {it.witness}"
            )
        return "\n".join(lines)


def _check_sliding_structure(setup: CanardSetup) -> CheckItem:
    bd = boundary_data(setup.system)
    pad = 1e-6 * (setup.eta_plus - setup.eta_minus)
    xs = np.concatenate(
        [
            np.linspace(setup.eta_minus, -pad, 30),
            np.linspace(pad, setup.eta_plus, 30),
        ]
    )
    for x in xs:
        yp, ym = bd.Yp(x), bd.Ym(x)
        if x < 0 and not (yp < 0.0 < ym):
            return CheckItem(
                "slidingStructure", False,
                f"expected stable sliding at x = {x:.4g} (Y+ = {yp:.3g}, "
                f"Y- = {ym:.3g})",
            )
        if x > 0 and not (ym < 0.0 < yp):
            return CheckItem(
                "slidingStructure", False,
                f"expected unstable sliding at x = {x:.4g} (Y+ = {yp:.3g}, "
                f"Y- = {ym:.3g})",
            )
        speed = bd.detz(x) / (ym - yp)
        if speed <= 0.0:
            return CheckItem(
                "slidingStructure", False,
                f"sliding speed {speed:.3g} not positive at x = {x:.4g}",
            )
    return CheckItem(
        "slidingStructure", True,
        f"stable on [{setup.eta_minus:g}, 0), unstable on (0, {setup.eta_plus:g}], "
        "rightward speed positive at 60 samples",
    )


def _check_two_fold(setup: CanardSetup) -> CheckItem:
    report = classify_two_fold(setup.system, (0.0, 0.0))
    bd = boundary_data(setup.system)
    d1 = bd.der("detz", 0.0, 1)
    ok = report.type is TwoFoldType.VI3 and d1 < 0.0
    return CheckItem(
        "twoFoldType", ok,
        f"type {report.type.value}, (det Z)'(0) = {d1:.4g}"
        + ("" if ok else " (need VI3 with negative slope)"),
    )


def _check_lambda_transversality(setup: CanardSetup) -> CheckItem:
    s = setup.system
    lam = s.lam
    vels = []
    for fld in (s.zplus, s.zminus):
        dx = fld.y.partial(1, 0)(0.0, 0.0, lam)
        dl = fld.y.dlam()(0.0, 0.0, lam)
        if dx == 0.0:
            return CheckItem(
                "foldTransversality", False,
                "fold equation degenerate: Y_x = 0 at the origin",
            )
        vels.append(-dl / dx)
    gap = abs(vels[0] - vels[1])
    ok = gap > 1e-8
    return CheckItem(
        "foldTransversality", ok,
        f"fold velocities in lambda: {vels[0]:.4g} vs {vels[1]:.4g}",
    )


def _check_regularizer_tails(setup: CanardSetup) -> CheckItem:
    q = setup.reg.q
    ps = np.geomspace(1e-4, 1e-2, 20)
    exps = []
    for grid in (ps, 1.0 - ps):
        vals = np.array([q(p) for p in grid])
        if np.any(vals <= 0.0):
            return CheckItem(
                "regularizerTails", False,
                "q not positive near the window edges",
            )
        x = np.log(np.minimum(grid, 1.0 - grid))
        slope = np.polyfit(x, np.log(vals), 1)[0]
        exps.append(float(slope))
    ok = (
        min(exps) >= 0.99
        and q(0.0) == 0.0
        and q(1.0) == 0.0
    )
    return CheckItem(
        "regularizerTails", ok,
        f"edge exponents {exps[0]:.3f}, {exps[1]:.3f} (need >= 1 and "
        "q(0) = q(1) = 0)",
    )


def _check_integral_sign(setup: CanardSetup) -> CheckItem:
    i0 = sdi_I(setup, 0.0)
    if abs(i0) > 1e-8:
        return CheckItem(
            "integralSign", False,
            f"cycle through p0 not balanced: I(0) = {i0:.3e}",
        )
    ss = np.geomspace(1e-3 * setup.sbar, setup.sbar, 17)
    vals = np.array([sdi_I(setup, s) for s in ss])
    if np.all(vals < 0.0):
        sign = "negative"
    elif np.all(vals > 0.0):
        sign = "positive"
    else:
        worst = float(np.min(np.abs(vals)))
        return CheckItem(
            "integralSign", False,
            f"I not sign-definite on (0, sbar] (smallest |I| = {worst:.3e})",
        )
    return CheckItem(
        "integralSign", True,
        f"I(0) = {i0:.2e}, I {sign} on (0, sbar] at 17 samples",
    )


def check_assumptions(setup: CanardSetup) -> AssumptionReport:
    """Run the five structural hypotheses behind the entry-exit analysis.

    Sliding structure on the working range, two-fold type with transverse
    det Z, fold transversality in the unfolding parameter, decay of the
    transition profile at the window edges, and balanced sign-definite
    integral on the section.
    """
    items = [
        _check_sliding_structure(setup),
        _check_two_fold(setup),
        _check_lambda_transversality(setup),
        _check_regularizer_tails(setup),
        _check_integral_sign(setup),
    ]
    return AssumptionReport(tuple(items))
