"""Model builders, balance tuning, and model-file serialization.

The polynomial family used throughout lives in normal form h = y:

    Z+ = (1,  x + a x^2 + b x^3 + e x^4 + f x^6 + lam)
    Z- = (-1, -c x)

with c = 2 by default, so the origin is a sliding two-fold whose canard
passes from the stable branch (x < 0) to the unstable one (x > 0).  With
a = b = e = f = 0 the boundary integrand under tanh regularization reduces
to 4x, giving the closed forms the tests pin down.

Balancing a cycle through +-p0 only constrains the odd part of the
perturbation u = a x + b x^2 + e x^3 + f x^5 (the integrand is
4x(1+u)/(1-u), so even powers of u drop out of symmetric integrals).  With
a alone the balance value is sign-definite, and with (a, b) the
second-order condition is sign-definite along the whole balance branch, so
the higher even-degree terms are not optional decoration: e makes a simple
balanced zero reachable, and f makes the double zero reachable.  Tuned
coefficients are computed on demand by root-finding on the balance
conditions, never hardcoded.
"""

from __future__ import annotations

import functools
import json
import math
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np
from scipy.optimize import brentq, root

from .errors import NumericalError, ValidationError
from .regularizers import Regularizer, make_tanh_regularizer
from .sdi import _gauss_panel, two_fold_integrand
from .smoothmap import PolyMap2
from .system import (
    PwsSystem,
    Rect,
    TwoFoldType,
    VectorField,
    classify_two_fold,
)

__all__ = [
    "DEFAULT_DOMAIN",
    "canonical_model",
    "tangency_model",
    "degenerate_two_fold_model",
    "TuneResult",
    "tune_simple_zero",
    "tune_double_zero",
    "LoadedModel",
    "builtin_names",
    "load_model",
    "save_model",
    "MODEL_SCHEMA",
]

DEFAULT_DOMAIN = Rect(-1.0, 1.0, -1.0, 1.0)
MODEL_SCHEMA = "pws-model/1"
MAX_DEGREE = 6


def canonical_model(
    a: float = 0.0,
    b: float = 0.0,
    e: float = 0.0,
    f: float = 0.0,
    c: float = 2.0,
    lam: float = 0.0,
    domain: Rect = DEFAULT_DOMAIN,
) -> PwsSystem:
    """Two-fold family above; a = b = e = f = 0 is the closed-form instance."""
    yplus = PolyMap2([[0.0], [1.0], [a], [b], [e], [0.0], [f]], lam_coeffs=[[1.0]])
    yminus = PolyMap2([[0.0], [-c]])
    zplus = VectorField(PolyMap2.constant(1.0), yplus)
    zminus = VectorField(PolyMap2.constant(-1.0), yminus)
    return PwsSystem(zplus, zminus, PolyMap2.coordinate("y"), domain, lam=lam)


def tangency_model(lam: float = 0.0, domain: Rect = DEFAULT_DOMAIN) -> PwsSystem:
    """One-sided tangency at the origin: Z+ folds, Z- is transverse."""
    zplus = VectorField(
        PolyMap2.constant(1.0), PolyMap2([[0.0], [1.0]], lam_coeffs=[[1.0]])
    )
    zminus = VectorField(PolyMap2.constant(-1.0), PolyMap2.constant(-1.0))
    return PwsSystem(zplus, zminus, PolyMap2.coordinate("y"), domain, lam=lam)


def degenerate_two_fold_model(
    order: int, g: float = 1.0, domain: Rect = DEFAULT_DOMAIN
) -> PwsSystem:
    """Two-fold with det Z = g x^order; order >= 3 makes the integral diverge.

    Built as Y+ = x, Y- = -x + g x^order so the tangential determinant on
    the axis telescopes to the single monomial.
    """
    if order < 2:
        raise ValidationError("contact order below 2 is the generic case")
    ym = [0.0, -1.0] + [0.0] * (order - 2) + [g]
    zplus = VectorField(PolyMap2.constant(1.0), PolyMap2([[0.0], [1.0]]))
    zminus = VectorField(PolyMap2.constant(-1.0), PolyMap2([[v] for v in ym]))
    return PwsSystem(zplus, zminus, PolyMap2.coordinate("y"), domain)


# ---------------------------------------------------------------------------
# Cycle balance tuning


def _balance_residuals(system: PwsSystem, reg: Regularizer, p0: float):
    """(cycle integral over [-p0, p0], its derivative in the endpoint radius)."""
    phi = two_fold_integrand(system, reg)
    val = _gauss_panel(phi, -p0, 0.0) + _gauss_panel(phi, 0.0, p0)
    slope = phi(p0) + phi(-p0)
    return val, slope


def _check_sliding_range(system: PwsSystem, eta: tuple, n: int = 400):
    """Uniform sliding with positive rightward speed on [eta-, eta+] off 0."""
    from .system import boundary_data

    bd = boundary_data(system)
    for x in np.linspace(eta[0], eta[1], n):
        if abs(x) < 1e-6:
            continue
        yp, ym, det = bd.Yp(x), bd.Ym(x), bd.detz(x)
        if yp * ym >= 0.0:
            raise ValidationError(
                f"tuned model loses sliding at x = {x:.4g}; shrink the range"
            )
        speed = det / (ym - yp)
        if speed <= 0.0:
            raise ValidationError(
                f"tuned model sliding speed nonpositive at x = {x:.4g}"
            )


@dataclass(frozen=True)
class TuneResult:
    system: PwsSystem
    params: dict
    residuals: dict
    diagnostics: dict


def tune_simple_zero(
    p0: float = 0.2,
    e0: float = 1.0,
    c: float = 2.0,
    eta: tuple = (-0.3, 0.3),
    reg: Optional[Regularizer] = None,
    tol: float = 1e-14,
) -> TuneResult:
    """Choose a so the canard cycle through +-p0 is balanced, simply.

    With e0 fixed nonzero the balance value I(0) is monotone in a near the
    seed -0.6 e0 p0^2 and the balanced cycle has a simple zero of the cycle
    integral, since the radius-derivative stays away from 0 there.
    """
    if e0 == 0.0:
        raise ValidationError(
            "the quartic coefficient must be nonzero: with e = 0 the cycle "
            "integral is sign-definite in a and no isolated balance exists"
        )
    if not 0.0 < p0 < min(-eta[0], eta[1]):
        raise ValidationError("need 0 < p0 inside the sliding range")
    reg = reg or make_tanh_regularizer()

    def value(a: float) -> float:
        sys_a = canonical_model(a=a, e=e0, c=c)
        return _balance_residuals(sys_a, reg, p0)[0]

    seed = -0.6 * e0 * p0 * p0
    lo, hi = sorted((0.0, 2.0 * seed))
    flo, fhi = value(lo), value(hi)
    widen = 0
    while flo * fhi > 0.0 and widen < 8:
        lo, hi = lo - (hi - lo), hi + (hi - lo)
        flo, fhi = value(lo), value(hi)
        widen += 1
    if flo * fhi > 0.0:
        raise NumericalError("no bracket for the balance equation in a")
    a_star = brentq(value, lo, hi, xtol=tol, rtol=8.9e-16)

    system = canonical_model(a=a_star, e=e0, c=c)
    bal, slope = _balance_residuals(system, reg, p0)
    _check_sliding_range(system, eta)
    report = classify_two_fold(system, (0.0, 0.0))
    if report.type is not TwoFoldType.VI3:
        raise NumericalError("tuned model lost the canard two-fold structure")
    # d/ds of the cycle integral at the balanced cycle, s the section offset
    dids0 = -slope / (2.0 * p0)
    return TuneResult(
        system=system,
        params={"a": a_star, "b": 0.0, "e": e0, "f": 0.0, "c": c, "p0": p0},
        residuals={"balance": bal, "slope_radial": slope},
        diagnostics={
            "dI_ds_at_0": dids0,
            "eta": eta,
            "two_fold": report.type.value,
            "multiplicity_target": 1,
        },
    )


def tune_double_zero(
    p0: float = 0.2,
    f0: float = -40.0,
    c: float = 2.0,
    eta: tuple = (-0.3, 0.3),
    reg: Optional[Regularizer] = None,
    tol: float = 1e-13,
) -> TuneResult:
    """Choose (a, e) so the cycle through +-p0 balances to second order.

    Solves I(0) = 0 and dI/dr(0) = 0 jointly at fixed sextic coefficient f0.
    Both conditions constrain the odd part a x + e x^3 + f0 x^5 of the
    perturbation; with f0 fixed the 2x2 system has the admissible solution
    near a = (3/7) f0 p0^4, e = -(10/7) f0 p0^2, where the cycle integral
    behaves like (8 f0 / 7) p0^3 s^2.  Negative f0 makes it negative on both
    sides, the sign the orbit iteration expects.
    """
    if f0 == 0.0:
        raise ValidationError(
            "the sextic coefficient must be nonzero: without it the "
            "second-order balance condition is sign-definite along the "
            "balance branch and no admissible double zero exists"
        )
    if not 0.0 < p0 < min(-eta[0], eta[1]):
        raise ValidationError("need 0 < p0 inside the sliding range")
    reg = reg or make_tanh_regularizer()

    def residuals(v) -> list:
        sys_v = canonical_model(a=v[0], e=v[1], f=f0, c=c)
        bal, slope = _balance_residuals(sys_v, reg, p0)
        return [bal, slope]

    seed = np.array([3.0 / 7.0 * f0 * p0**4, -10.0 / 7.0 * f0 * p0**2])
    sol = root(residuals, seed, method="hybr", tol=tol)
    if not sol.success:
        raise NumericalError(f"double balance solve failed: {sol.message}")
    a_star, e_star = float(sol.x[0]), float(sol.x[1])

    system = canonical_model(a=a_star, e=e_star, f=f0, c=c)
    bal, slope = _balance_residuals(system, reg, p0)
    _check_sliding_range(system, eta)
    report = classify_two_fold(system, (0.0, 0.0))
    if report.type is not TwoFoldType.VI3:
        raise NumericalError("tuned model lost the canard two-fold structure")

    # curvature of the cycle integral in the section offset: I(s) ~ C s^2
    phi = two_fold_integrand(system, reg)

    def cycle_integral(s: float) -> float:
        r = math.sqrt(p0 * p0 - s)
        return _gauss_panel(phi, -r, 0.0) + _gauss_panel(phi, 0.0, r)

    ds = p0 * p0 * 1e-2
    curv = 0.5 * (cycle_integral(ds) + cycle_integral(-ds)) / (ds * ds)
    if abs(curv) < 1e-6:
        raise NumericalError("double balance degenerate: vanishing curvature")
    return TuneResult(
        system=system,
        params={"a": a_star, "b": 0.0, "e": e_star, "f": f0, "c": c, "p0": p0},
        residuals={"balance": bal, "slope_radial": slope},
        diagnostics={
            "curvature": curv,
            "eta": eta,
            "two_fold": report.type.value,
            "multiplicity_target": 2,
        },
    )


# ---------------------------------------------------------------------------
# Model files


class LoadedModel(NamedTuple):
    system: PwsSystem
    name: str
    regularizer: str
    meta: dict
    source: str


def _as_table(node, where: str) -> np.ndarray:
    try:
        arr = np.asarray(node, dtype=float)
    except (TypeError, ValueError):
        raise ValidationError(f"{where}: coefficient table must be numeric") from None
    if arr.ndim == 1:
        arr = arr[:, None]
    if arr.ndim != 2:
        raise ValidationError(f"{where}: coefficient table must be 2-dimensional")
    if not np.all(np.isfinite(arr)):
        raise ValidationError(f"{where}: coefficient table contains non-finite values")
    return arr


def _component(node, where: str) -> PolyMap2:
    if not isinstance(node, dict) or "x" not in node or "y" not in node:
        raise ValidationError(f"{where}: expected an object with 'x' and 'y' tables")
    out = {}
    for key in ("x", "y"):
        coeffs = _as_table(node[key], f"{where}.{key}")
        lam_key = f"{key}_lam"
        lam_coeffs = (
            _as_table(node[lam_key], f"{where}.{lam_key}") if lam_key in node else None
        )
        m = PolyMap2(coeffs, lam_coeffs=lam_coeffs)
        if m.degree() > MAX_DEGREE:
            raise ValidationError(
                f"{where}.{key}: polynomial degree {m.degree()} exceeds {MAX_DEGREE}"
            )
        out[key] = m
    return VectorField(out["x"], out["y"])


def _parse_model(doc: dict, source: str) -> LoadedModel:
    if not isinstance(doc, dict):
        raise ValidationError(f"{source}: model document must be a JSON object")
    schema = doc.get("schema")
    if schema != MODEL_SCHEMA:
        raise ValidationError(
            f"{source}: unsupported schema {schema!r}, expected {MODEL_SCHEMA!r}"
        )
    for req in ("zplus", "zminus"):
        if req not in doc:
            raise ValidationError(f"{source}: missing required field {req!r}")
    dom = doc.get("domain", [-1.0, 1.0, -1.0, 1.0])
    if isinstance(dom, dict):
        try:
            domain = Rect(dom["xmin"], dom["xmax"], dom["ymin"], dom["ymax"])
        except KeyError as k:
            raise ValidationError(f"{source}: domain missing {k.args[0]!r}") from None
    else:
        if len(dom) != 4:
            raise ValidationError(f"{source}: domain must have 4 entries")
        domain = Rect(*[float(v) for v in dom])
    if not (domain.xmin < domain.xmax and domain.ymin < domain.ymax):
        raise ValidationError(f"{source}: empty domain")

    zplus = _component(doc["zplus"], "zplus")
    zminus = _component(doc["zminus"], "zminus")
    if "h" in doc:
        h = PolyMap2(_as_table(doc["h"], "h"))
        if h.degree() > MAX_DEGREE:
            raise ValidationError(f"h: polynomial degree exceeds {MAX_DEGREE}")
    else:
        h = PolyMap2.coordinate("y")
    lam = float(doc.get("lam", 0.0))
    regname = doc.get("regularizer", "tanh")
    if regname not in ("tanh", "arctan", "custom"):
        raise ValidationError(
            f"{source}: unknown regularizer {regname!r} (use tanh/arctan/custom)"
        )
    meta = doc.get("meta", {})
    if not isinstance(meta, dict):
        raise ValidationError(f"{source}: meta must be an object")
    system = PwsSystem(zplus, zminus, h, domain, lam=lam)
    return LoadedModel(
        system=system,
        name=str(doc.get("name", "unnamed")),
        regularizer=regname,
        meta=meta,
        source=source,
    )


@functools.lru_cache(maxsize=None)
def _builtin(name: str) -> LoadedModel:
    if name == "canonical":
        return LoadedModel(
            canonical_model(), "canonical", "tanh",
            {"p0": 0.2, "eta": [-0.3, 0.3], "sbar": 0.03}, "builtin:canonical",
        )
    if name == "tangency":
        return LoadedModel(
            tangency_model(), "tangency", "tanh", {}, "builtin:tangency"
        )
    if name == "tuned-simple":
        t = tune_simple_zero()
        meta = {
            "p0": t.params["p0"],
            "eta": list(t.diagnostics["eta"]),
            "sbar": 0.75 * t.params["p0"] ** 2,
            "tuned": t.params,
        }
        return LoadedModel(t.system, "tuned-simple", "tanh", meta, "builtin:tuned-simple")
    if name == "tuned-double":
        t = tune_double_zero()
        meta = {
            "p0": t.params["p0"],
            "eta": list(t.diagnostics["eta"]),
            "sbar": 0.75 * t.params["p0"] ** 2,
            "tuned": t.params,
        }
        return LoadedModel(t.system, "tuned-double", "tanh", meta, "builtin:tuned-double")
    if name == "contact2":
        return LoadedModel(
            degenerate_two_fold_model(2), "contact2", "tanh", {}, "builtin:contact2"
        )
    if name == "contact3":
        return LoadedModel(
            degenerate_two_fold_model(3), "contact3", "tanh", {}, "builtin:contact3"
        )
    raise ValidationError(
        f"unknown builtin model {name!r}; available: {', '.join(builtin_names())}"
    )


def builtin_names() -> list:
    return ["canonical", "tangency", "tuned-simple", "tuned-double",
            "contact2", "contact3"]


def load_model(ref) -> LoadedModel:
    """Load from a dict, a 'builtin:<name>' reference, or a JSON file path."""
    if isinstance(ref, dict):
        return _parse_model(ref, "<dict>")
    ref = str(ref)
    if ref.startswith("builtin:"):
        return _builtin(ref.split(":", 1)[1])
    try:
        with open(ref) as fh:
            doc = json.load(fh)
    except FileNotFoundError:
        raise ValidationError(f"model file not found: {ref}") from None
    except json.JSONDecodeError as err:
        raise ValidationError(
            f"{ref}: malformed JSON at line {err.lineno} column {err.colno}: {err.msg}"
        ) from None
    return _parse_model(doc, ref)


def save_model(
    loaded_or_system,
    path: str,
    name: Optional[str] = None,
    regularizer: str = "tanh",
    meta: Optional[dict] = None,
) -> None:
    """Serialize a polynomial model; callable components are rejected."""
    if isinstance(loaded_or_system, LoadedModel):
        system = loaded_or_system.system
        name = name or loaded_or_system.name
        regularizer = loaded_or_system.regularizer
        meta = meta if meta is not None else loaded_or_system.meta
    else:
        system = loaded_or_system
    comps = {
        "zplus": system.zplus,
        "zminus": system.zminus,
    }
    doc = {
        "schema": MODEL_SCHEMA,
        "name": name or "unnamed",
        "regularizer": regularizer,
        "domain": [system.domain.xmin, system.domain.xmax,
                   system.domain.ymin, system.domain.ymax],
        "lam": system.lam,
    }
    for key, vf in comps.items():
        entry = {}
        for axis in ("x", "y"):
            m = getattr(vf, axis)
            if not isinstance(m, PolyMap2):
                raise ValidationError(
                    f"{key}.{axis}: only polynomial components can be saved"
                )
            entry[axis] = m.coeffs.tolist()
            if np.any(m.lam_coeffs):
                entry[f"{axis}_lam"] = m.lam_coeffs.tolist()
        doc[key] = entry
    if not isinstance(system.h, PolyMap2):
        raise ValidationError("h: only polynomial boundary functions can be saved")
    doc["h"] = system.h.coeffs.tolist()
    if meta:
        doc["meta"] = meta
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2)
        fh.write("\n")
