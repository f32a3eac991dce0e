"""Closed-form anchors for the slow divergence integral.

On the canonical model the axis integrand collapses to 4x, so every value
below can be checked by hand.  The script evaluates regular
segments, the improper integral into the two-fold, a genuinely divergent
variant, and the invariance of the value under coordinate changes, field
rescaling and time reversal.
"""

import numpy as np

from slowdiv.errors import DivergentIntegralError
from slowdiv.models import canonical_model, load_model
from slowdiv.regularizers import make_tanh_regularizer
from slowdiv.sdi import (
    fixed_node_sdi,
    invariance_report,
    sdi_regular_segment,
    sdi_split_sum,
    sdi_to_two_fold,
)
from slowdiv.system import Diffeo, time_reversed

reg = make_tanh_regularizer()
system = canonical_model()

print("== regular segments (integrand 4x) ==")
res = sdi_regular_segment(system, reg, (0.1, 0.3))
print(f"[0.1, 0.3]  -> {res.value:+.12f}   expected +0.16 = 2(0.3^2 - 0.1^2)")
res = sdi_regular_segment(system, reg, (-0.3, -0.1))
print(f"[-0.3,-0.1] -> {res.value:+.12f}   expected -0.16 (stable side)")

print()
print("== improper integral into the two-fold ==")
res = sdi_to_two_fold(system, reg, 0.3)
print(f"(0, 0.3]    -> {res.value:+.12f}   expected +0.18 = 2*0.3^2")
print(f"converged extrapolation: {res.converged} "
      f"(error estimate {res.abs_error:.1e}, {res.subdivisions} stages)")
split = sdi_split_sum(system, reg, -0.3, 0.3)
print(f"balanced split through the fold [-0.3, 0.3] -> {split.value:+.1e}")

print()
print("== a divergent contact order ==")
contact3 = load_model("builtin:contact3").system
try:
    sdi_to_two_fold(contact3, reg, 0.2)
except DivergentIntegralError as err:
    print(f"cubic contact: {err}")

print()
print("== invariance ==")
shear = Diffeo(
    lambda w: (w[0], w[1] * (1.0 + 0.2 * w[0]) + 0.1 * w[0] ** 2),
    jacobian=lambda w: np.array(
        [[1.0, 0.0], [0.2 * (w[0] + w[1]), 1.0 + 0.2 * w[0]]]
    ),
    inverse=lambda z: np.array(
        [z[0], (z[1] - 0.1 * z[0] ** 2) / (1.0 + 0.2 * z[0])]
    ),
)
rep = invariance_report(
    system, reg, (0.1, 0.3), diffeo=shear,
    multiplier=lambda x, y, lam=0.0: 2.0 + np.cos(x),
)
print(f"base value                  {rep['base']:+.12f}")
print(f"after a shear pullback      {rep['pullback']:+.12f} "
      f"(delta {rep['pullback_delta']:.1e})")
print(f"after rescaling the fields  {rep['scaled']:+.12f} "
      f"(delta {rep['scaled_delta']:.1e})")

base = fixed_node_sdi(system, reg, (0.1, 0.3))
flipped = fixed_node_sdi(time_reversed(system), reg, (0.1, 0.3))
print(f"time reversal flips the sign bit-exactly: {flipped == -base}")
