"""Region constants, sign checks of the comparison functions and gluing remainders."""

from a1heat.regions import derive_params
from a1heat.supersolutions import STAGES, sign_sweep
from a1heat.verify import remainder_sweep

k = 2.0
rp = derive_params(k)
print(f"k={k}: K0={rp.K0:.4f} H={rp.H:.4f} R0={rp.R0:.4f} R={rp.R:.4f} T={rp.T:.1f} M={rp.M:.1f}")

print("\nsign of D h / h (plus: >= 0, minus: <= 0) on 8^3 region grids")
for region in ("Zero", "A", "B", "C", "D1", "D2"):
    for sign in ("+", "-"):
        rep = sign_sweep(region, sign, k, grid=8)
        print(f"  {region:>4}{sign}: extremum {rep.extremum:+.3e} at ({rep.location.r:.3g}, {rep.location.s:.3g}, {rep.location.t:.3g})"
              f"  {'ok' if rep.passed else 'FAIL'}")

print("\nsup t^2 |R| / h on each gluing strip, coarse vs refined grid")
for stage in STAGES:
    rep = remainder_sweep(stage, "+", k, n=4)
    print(f"  {stage:>4}+: {rep.sup_coarse:.3e} -> {rep.sup_fine:.3e}  ratio {rep.ratio:.2f}")
