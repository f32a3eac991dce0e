"""From the cycle integral to a cyclicity bound on the tuned models.

The tuned simple-zero model balances the two-fold so that the cycle
integral I has a simple zero at the origin; the double-zero variant
flattens the next order too.  The script checks the structural
assumptions, tabulates I and the slow relation G, runs the entry-exit
orbit down to its floor, estimates the dimension of the resulting
sequence, and turns both invariants into the same cyclicity bound.
"""

import numpy as np

from slowdiv.canard import (
    check_assumptions,
    generate_orbit,
    multiplicity_of_I,
    predict_cyclicity,
    sdi_I,
    setup_from_model,
    slow_relation_G,
)
from slowdiv.fractal import dim_sequence
from slowdiv.models import load_model
from slowdiv.regularizers import make_tanh_regularizer

reg = make_tanh_regularizer()
setup = setup_from_model(load_model("builtin:tuned-simple"), reg)

print("== structural assumptions (tuned simple zero) ==")
print(check_assumptions(setup))

print()
print("== cycle integral and slow relation ==")
print(f"{'s':>8}  {'I(s)':>13}  {'G(s)':>10}")
for s in (0.005, 0.010, 0.015, 0.020, 0.025):
    print(f"{s:8.3f}  {sdi_I(setup, s):13.6e}  {slow_relation_G(setup, s):10.6f}")
print("I < 0 for s > 0, so successive cycles shrink: G(s) < s.")

print()
print("== entry-exit orbit ==")
orbit = generate_orbit(setup, 0.02)
print(f"start 0.02, {len(orbit)} terms, stopped: {orbit.stop_reason}")
print(f"first terms {np.round(orbit.terms[:4], 6)}, last {orbit.terms[-1]:.2e}")

fit = dim_sequence(orbit.as_array())
print(f"dimension of the orbit sequence: {fit.d:.4f} ({fit.fit_kind} fit)")

mfit = multiplicity_of_I(setup)
print(str(mfit))

print()
print("== cyclicity ==")
from_dim = predict_cyclicity(dim_b=round(fit.d, 2))
from_mult = predict_cyclicity(multiplicity=mfit.m, i_sign=-1.0)
print(f"from the dimension:     bound {from_dim.bound}")
print(f"from the multiplicity:  bound {from_mult.bound}, "
      f"scenarios {sorted(from_mult.scenarios)}")

print()
print("== the double-zero variant ==")
setup2 = setup_from_model(load_model("builtin:tuned-double"), reg)
mfit2 = multiplicity_of_I(setup2)
print(str(mfit2))
pred2 = predict_cyclicity(multiplicity=mfit2.m)
print(f"multiplicity {mfit2.m} maps to dimension {pred2.dim_b:.4f} "
      f"and bound {pred2.bound}")
