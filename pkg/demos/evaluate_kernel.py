"""Evaluate h(r, s, t) three ways and check the total mass."""

from a1heat.kernels import heat_kernel_closed_k1, heat_kernel_spectral
from a1heat.verify import mass_check, oracle_crosscheck

print("k = 1: spectral vs closed form")
for p in [(0.5, 0.25, 0.2), (2.0, 1.0, 1.0), (6.0, 3.0, 5.0)]:
    a, b = heat_kernel_spectral(1.0, p), heat_kernel_closed_k1(p)
    print(f"  {p}: {a:.12e}  {b:.12e}  rel {abs(a - b) / b:.1e}")

print("\nspectral vs Crank-Nicolson")
for k in (0.5, 2.5):
    cc = oracle_crosscheck(k, (3.0, 2.0, 1.0))
    vals = ", ".join(f"{m} {v:.6e}" for m, v in cc.values.items())
    print(f"  k={k}: {vals}  max rel dev {cc.max_rel_dev:.1e}")

print("\nmass of h(r, ., t) against sinh(s)^2k ds")
for k in (0.5, 1.0, 2.0):
    print(f"  k={k}: {mass_check(k, 1.0, 1.0):.12f}")
