"""Scalar fields on the plane with partial derivatives.

Two representations share one interface: bivariate polynomials whose
coefficients depend affinely on a scalar parameter ``lam`` (exact partials),
and arbitrary callables ``f(x, y, lam)`` (central-difference partials).  The
polynomial route is the workhorse; the callable route exists so pulled-back
and rescaled systems can flow through the same operations.
"""

from __future__ import annotations

import numpy as np
from numpy.polynomial import polynomial as npoly

__all__ = ["SmoothMap2", "PolyMap2", "FuncMap2", "as_map"]

# Central-difference steps by total derivative order.  First order follows the
# documented 1e-6 relative step; higher orders need coarser steps or round-off
# dominates the stencil.
_FD_STEP = {1: 1e-6, 2: 2e-4, 3: 1e-3}

# offsets and weights for central stencils of derivative order 1..3
_STENCIL = {
    0: ((0,), (1.0,)),
    1: ((-1, 1), (-0.5, 0.5)),
    2: ((-1, 0, 1), (1.0, -2.0, 1.0)),
    3: ((-2, -1, 1, 2), (-0.5, 1.0, -1.0, 0.5)),
}


def _polymul2(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    out = np.zeros((a.shape[0] + b.shape[0] - 1, a.shape[1] + b.shape[1] - 1))
    for i in range(a.shape[0]):
        for j in range(a.shape[1]):
            if a[i, j] != 0.0:
                out[i : i + b.shape[0], j : j + b.shape[1]] += a[i, j] * b
    return out


def _pad_to(c: np.ndarray, shape) -> np.ndarray:
    out = np.zeros(shape)
    out[: c.shape[0], : c.shape[1]] = c
    return out


class SmoothMap2:
    """Interface: ``f(x, y, lam)`` plus partials in (x, y) and in lam."""

    def __call__(self, x: float, y: float, lam: float = 0.0) -> float:
        raise NotImplementedError

    def partial(self, i: int, j: int) -> "SmoothMap2":
        """Map representing the partial derivative d^(i+j) f / dx^i dy^j."""
        raise NotImplementedError

    def dlam(self) -> "SmoothMap2":
        """Map representing df/dlam."""
        raise NotImplementedError


class PolyMap2(SmoothMap2):
    """Polynomial map ``sum_{ij} (c0[i,j] + lam * c1[i,j]) x^i y^j``.

    ``coeffs`` and the optional ``lam_coeffs`` are 2-d arrays indexed by the
    x-degree (rows) and y-degree (columns).  Partials are exact.
    """

    def __init__(self, coeffs, lam_coeffs=None):
        c0 = np.atleast_2d(np.asarray(coeffs, dtype=float))
        if lam_coeffs is None:
            c1 = np.zeros_like(c0)
        else:
            c1 = np.atleast_2d(np.asarray(lam_coeffs, dtype=float))
        shape = (max(c0.shape[0], c1.shape[0]), max(c0.shape[1], c1.shape[1]))
        self.coeffs = _pad_to(c0, shape)
        self.lam_coeffs = _pad_to(c1, shape)

    @classmethod
    def constant(cls, value: float) -> "PolyMap2":
        return cls([[float(value)]])

    @classmethod
    def coordinate(cls, which: str) -> "PolyMap2":
        if which == "x":
            return cls([[0.0], [1.0]])
        if which == "y":
            return cls([[0.0, 1.0]])
        raise ValueError(f"unknown coordinate {which!r}")

    def __call__(self, x, y, lam: float = 0.0):
        v = npoly.polyval2d(x, y, self.coeffs)
        if np.any(self.lam_coeffs):
            v = v + lam * npoly.polyval2d(x, y, self.lam_coeffs)
        return v

    def _der(self, c: np.ndarray, i: int, j: int) -> np.ndarray:
        if i >= c.shape[0] or j >= c.shape[1]:
            return np.zeros((1, 1))
        if i:
            c = npoly.polyder(c, m=i, axis=0)
        if j:
            c = npoly.polyder(c, m=j, axis=1)
        return np.atleast_2d(c)

    def partial(self, i: int, j: int) -> "PolyMap2":
        return PolyMap2(self._der(self.coeffs, i, j), self._der(self.lam_coeffs, i, j))

    def dlam(self) -> "PolyMap2":
        return PolyMap2(self.lam_coeffs)

    def degree(self) -> int:
        nz = np.argwhere((self.coeffs != 0) | (self.lam_coeffs != 0))
        if nz.size == 0:
            return 0
        return int(max(i + j for i, j in nz))

    # -- exact arithmetic at a frozen parameter value ----------------------

    def at_lam(self, lam: float) -> np.ndarray:
        """Coefficient table with lam substituted (plain 2-d polynomial)."""
        return self.coeffs + lam * self.lam_coeffs

    def __add__(self, other: "PolyMap2") -> "PolyMap2":
        shape = (
            max(self.coeffs.shape[0], other.coeffs.shape[0]),
            max(self.coeffs.shape[1], other.coeffs.shape[1]),
        )
        return PolyMap2(
            _pad_to(self.coeffs, shape) + _pad_to(other.coeffs, shape),
            _pad_to(self.lam_coeffs, shape) + _pad_to(other.lam_coeffs, shape),
        )

    def __neg__(self) -> "PolyMap2":
        return PolyMap2(-self.coeffs, -self.lam_coeffs)

    def __sub__(self, other: "PolyMap2") -> "PolyMap2":
        return self + (-other)


class FuncMap2(SmoothMap2):
    """Callable-backed map; partials fall back to central differences.

    The callable must accept ``(x, y, lam)``.  Explicit partial callables can
    be supplied via ``partials={(i, j): fn}`` to bypass differencing (used by
    pullbacks, where first derivatives follow from the chain rule).
    """

    def __init__(self, fn, partials=None, dlam_fn=None):
        self.fn = fn
        self._partials = dict(partials or {})
        self._dlam_fn = dlam_fn

    def __call__(self, x, y, lam: float = 0.0):
        return self.fn(x, y, lam)

    def partial(self, i: int, j: int) -> "FuncMap2":
        if (i, j) in self._partials:
            return FuncMap2(self._partials[(i, j)])
        order = i + j
        if order == 0:
            return self
        if order > 3:
            raise ValueError("central-difference partials supported to order 3")
        step = _FD_STEP[order]
        offs_x, w_x = _STENCIL[i]
        offs_y, w_y = _STENCIL[j]
        fn = self.fn

        def diff(x, y, lam=0.0, _f=fn):
            hx = step * (1.0 + abs(x))
            hy = step * (1.0 + abs(y))
            acc = 0.0
            for ox, wx in zip(offs_x, w_x):
                for oy, wy in zip(offs_y, w_y):
                    if wx == 0.0 or wy == 0.0:
                        continue
                    acc += wx * wy * _f(x + ox * hx, y + oy * hy, lam)
            return acc / (hx**i * hy**j)

        return FuncMap2(diff)

    def dlam(self) -> "FuncMap2":
        if self._dlam_fn is not None:
            return FuncMap2(self._dlam_fn)
        fn = self.fn

        def diff(x, y, lam=0.0, _f=fn):
            h = 1e-6 * (1.0 + abs(lam))
            return (_f(x, y, lam + h) - _f(x, y, lam - h)) / (2.0 * h)

        return FuncMap2(diff)


def as_map(obj) -> SmoothMap2:
    """Coerce numbers, coefficient tables and callables to a SmoothMap2."""
    if isinstance(obj, SmoothMap2):
        return obj
    if isinstance(obj, (int, float)):
        return PolyMap2.constant(float(obj))
    if isinstance(obj, (list, tuple, np.ndarray)):
        return PolyMap2(obj)
    if callable(obj):
        return FuncMap2(obj)
    raise TypeError(f"cannot interpret {type(obj).__name__} as a scalar field")


# Exact product of two frozen coefficient tables, exposed for reuse by the
# boundary-function algebra (det Z and friends).
def polymul2(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return _polymul2(np.atleast_2d(a), np.atleast_2d(b))
