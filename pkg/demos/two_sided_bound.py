"""How close h stays to the envelope E, and where the constants drift with k."""

import math

from a1heat.envelope import log_envelope_E_rank1
from a1heat.verify import log_heat_kernel, preset_grid, ratio_sweep

grid = preset_grid("default")
for k in (0.5, 1.0, 2.0, 3.5):
    rep = ratio_sweep(k, grid)
    print(f"k={k}: h/E in [{rep.inf_ratio:.3g}, {rep.sup_ratio:.3g}]"
          f"  min at ({rep.argmin.r:g}, {rep.argmin.s:g}, {rep.argmin.t:g}), max at ({rep.argmax.r:g}, {rep.argmax.s:g}, {rep.argmax.t:g})")

# On the diagonal at small t the ratio scales like R^(k-1).
print("\nh/E at (R, R, 0.1), divided by R^(k-1)")
for k in (0.5, 2.0, 3.5):
    row = []
    for R in (5.0, 20.0, 80.0):
        p = (R, R, 0.1)
        ratio = math.exp(log_heat_kernel(k, p)[0] - log_envelope_E_rank1(k, p))
        row.append(f"R={R:g}: {ratio / R ** (k - 1):.3f}")
    print(f"  k={k}: " + ", ".join(row))
