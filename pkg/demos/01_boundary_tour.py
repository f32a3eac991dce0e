"""Tour of the switching boundary: classification, sliding, two-folds.

Walks the canonical model's boundary point by point, then perturbs it to
show how the classification machinery reports crossing regions, fold
tangencies and pseudo-equilibria.  Everything prints; nothing is written.
"""

import numpy as np

from slowdiv.models import canonical_model, load_model
from slowdiv.smoothmap import PolyMap2
from slowdiv.system import (
    PwsSystem,
    Rect,
    VectorField,
    classify_boundary_point,
    classify_two_fold,
    filippov_sliding_vf,
    pseudo_equilibria,
    tau,
)

system = canonical_model()

print("== canonical model ==")
print("upper field (1, x), lower field (-1, -2x), boundary y = 0")
print()
print(f"{'x':>6}  {'tag':<16} {'extras'}")
for x in np.linspace(-0.3, 0.3, 7):
    cls = classify_boundary_point(system, (float(x), 0.0))
    extra = ""
    if cls.tangency is not None:
        extra = f"side={cls.tangency.side}"
    print(f"{x:6.2f}  {cls.tag.value:<16} {extra}")

print()
print("inside the stable sliding region the Filippov convex combination")
print("gives the drift along the boundary:")
for x in (-0.3, -0.1):
    vx, vy = filippov_sliding_vf(system, (x, 0.0))
    print(f"  x = {x:5.2f}: sliding speed {vx:.6f} (vertical {vy:.1e})")

print()
report = classify_two_fold(system, (0.0, 0.0))
print(f"the origin is a two-fold of type {report.type.value}")
print(f"  extended drift through the fold nu = {report.nu:.6f}")
print(f"  sliding fraction limit tau         = {tau(system, (0.0, 0.0)):.6f}")
print("tau in (0, 1) means the sliding orbit crosses the two-fold and the")
print("slow divergence integral over a neighbourhood is improper but finite.")

print()
print("== a crossing variant ==")
crossing = canonical_model(c=-1.0)
cls = classify_boundary_point(crossing, (-0.2, 0.0))
print(f"flip the lower field's slope: x = -0.2 is now '{cls.tag.value}'")

print()
print("== pseudo-equilibria ==")
loaded = load_model("builtin:tuned-simple")
eq = pseudo_equilibria(loaded.system, (-0.9, -0.05))
print(f"tuned-simple on [-0.9, -0.05]: {eq!r} (clean sliding, none expected)")

# opposing drifts with a sign change in the sliding speed pin one down
custom = PwsSystem(
    VectorField(1.0, PolyMap2([[1.5], [-1.0]])),
    VectorField(-1.0, PolyMap2([[-0.5], [-1.0]])),
    PolyMap2.coordinate("y"),
    Rect(-1.0, 1.0, -1.0, 1.0),
)
eq = pseudo_equilibria(custom, (0.0, 0.9))
print("hand-built system on [0.0, 0.9]: pseudo-equilibrium at "
      + ", ".join(f"x = {float(x):.6f}" for x, _ in eq))
