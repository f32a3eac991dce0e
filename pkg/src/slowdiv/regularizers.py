"""Monotone transition functions and their slope-at-level profiles.

A regularizer smooths the switching: phi is strictly increasing with limits
0 at -inf and 1 at +inf and flat tails (phi' -> 0).  The quantity that feeds
every divergence integral is the composite q(p) = phi'(phi^-1(p)), the slope
of the transition at level p, which extends continuously to q(0) = q(1) = 0
for admissible phi.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy.optimize import brentq

from .errors import ValidationError

__all__ = [
    "Regularizer",
    "make_tanh_regularizer",
    "make_arctan_regularizer",
    "make_custom_regularizer",
    "verify_regularizer",
    "RegularizerReport",
]


@dataclass(frozen=True)
class Regularizer:
    name: str
    phi: Callable[[float], float]
    dphi: Callable[[float], float]
    phi_inv: Callable[[float], float]
    q: Callable[[float], float]

    def __repr__(self):  # keep run summaries readable
        return f"Regularizer({self.name!r})"


def make_tanh_regularizer() -> Regularizer:
    """phi(u) = (1 + tanh u)/2, with q(p) = 2 p (1 - p) in closed form."""

    def phi(u):
        return 0.5 * (1.0 + np.tanh(u))

    def dphi(u):
        u = np.asarray(u, dtype=float)
        out = np.where(np.abs(u) > 350.0, 0.0, 0.5 / np.cosh(np.minimum(np.abs(u), 350.0)) ** 2)
        return out if out.ndim else float(out)

    def phi_inv(p):
        return np.arctanh(2.0 * p - 1.0)

    def q(p):
        return 2.0 * p * (1.0 - p)

    return Regularizer("tanh", phi, dphi, phi_inv, q)


def make_arctan_regularizer() -> Regularizer:
    """phi(u) = 1/2 + arctan(u)/pi, with q(p) = sin(pi p)^2 / pi."""

    def phi(u):
        return 0.5 + np.arctan(u) / np.pi

    def dphi(u):
        return 1.0 / (np.pi * (1.0 + u * u))

    def phi_inv(p):
        return np.tan(np.pi * (p - 0.5))

    def q(p):
        s = np.sin(np.pi * p)
        return s * s / np.pi

    return Regularizer("arctan", phi, dphi, phi_inv, q)


def _bracketed_inverse(phi: Callable, p: float, tol: float = 1e-14) -> float:
    """Invert a strictly increasing phi by expanding a bracket, then brentq."""
    if not 0.0 < p < 1.0:
        raise ValidationError("phi_inv defined on the open interval (0, 1)")
    lo, hi = -1.0, 1.0
    for _ in range(200):
        if phi(lo) < p:
            break
        lo *= 2.0
    for _ in range(200):
        if phi(hi) > p:
            break
        hi *= 2.0
    if not phi(lo) < p < phi(hi):
        raise ValidationError("could not bracket phi_inv; is phi monotone onto (0,1)?")
    return brentq(lambda u: phi(u) - p, lo, hi, xtol=tol, rtol=8.9e-16)


def make_custom_regularizer(
    phi: Callable,
    dphi: Callable,
    phi_inv: Optional[Callable] = None,
    q: Optional[Callable] = None,
    name: str = "custom",
) -> Regularizer:
    """Wrap user-supplied phi / phi'; missing pieces are derived numerically.

    phi_inv falls back to bracketed root refinement (tolerance 1e-14); q falls
    back to dphi(phi_inv(p)) with the boundary values pinned to zero.
    """
    if phi_inv is None:
        phi_inv = lambda p: _bracketed_inverse(phi, p)  # noqa: E731
    if q is None:

        def q(p, _inv=phi_inv, _d=dphi):
            if p <= 0.0 or p >= 1.0:
                return 0.0
            return _d(_inv(p))

    return Regularizer(name, phi, dphi, phi_inv, q)


def regularizer_by_name(name: str) -> Regularizer:
    """Look up a builtin transition profile; custom ones must be constructed."""
    table = {"tanh": make_tanh_regularizer, "arctan": make_arctan_regularizer}
    try:
        return table[name]()
    except KeyError:
        raise ValidationError(
            f"unknown regularizer {name!r}; builtins are {sorted(table)}"
        ) from None


@dataclass(frozen=True)
class RegularizerReport:
    passed: bool
    checks: dict

    def __str__(self):
        lines = [f"regularizer verification: {'PASS' if self.passed else 'FAIL'}"]
        for k, (ok, worst) in self.checks.items():
            lines.append(f"  {k:28s} {'ok' if ok else 'FAIL'}  worst={worst:.3e}")
        return "\n".join(lines)


def verify_regularizer(reg: Regularizer, n: int = 1000) -> RegularizerReport:
    """Diagnostic sweep: monotonicity, limits, inverse and q consistency.

    Checks phi' > 0 on a wide grid, phi(+-10^k) approaching the limits for
    k = 1..6, phi(phi_inv(p)) = p and q(p) = phi'(phi_inv(p)) on an interior
    grid, and the boundary values q(0) = q(1) = 0.
    """
    checks = {}

    us = np.concatenate([-np.logspace(2, -3, 60), [0.0], np.logspace(-3, 2, 60)])
    dvals = np.array([reg.dphi(u) for u in us])
    checks["phi' positive"] = (bool(np.all(dvals > 0.0)), float(dvals.min()))

    worst = 0.0
    ok = True
    for k in range(1, 7):
        hi = abs(reg.phi(10.0**k) - 1.0)
        lo = abs(reg.phi(-(10.0**k)))
        worst = max(worst, hi, lo)
        if k == 6 and max(hi, lo) > 1e-5:
            ok = False
    checks["limits 0/1 at +-10^k"] = (ok, worst)

    ps = np.linspace(0.0, 1.0, n + 2)[1:-1]
    inv_err = max(abs(reg.phi(reg.phi_inv(p)) - p) for p in ps)
    checks["phi(phi_inv(p)) = p"] = (inv_err <= 1e-12, inv_err)

    q_err = max(abs(reg.q(p) - reg.dphi(reg.phi_inv(p))) for p in ps)
    checks["q = phi' o phi_inv"] = (q_err <= 1e-12, q_err)

    q_end = max(abs(reg.q(0.0)), abs(reg.q(1.0)))
    checks["q(0) = q(1) = 0"] = (q_end <= 1e-12, q_end)

    q_int = min(reg.q(p) for p in ps)
    checks["q > 0 inside"] = (q_int > 0.0, q_int)

    passed = all(ok for ok, _ in checks.values())
    return RegularizerReport(passed, checks)
