"""
Exact increment identities on the catenoid
==========================================

The increments J(r_hi) - J(r_lo) and I(r_hi) - I(r_lo) are equal to explicit
band (and radial) integrals of manifestly nonnegative quantities; that is why
J and I are monotone.  Here we verify both identities numerically on a
catenoid band against the reflection in S((0,0,3), 2).

Note: the weight f has a positive minimum (about 2.15) on this patch, so the
region is empty until r is roughly 1.78; the interesting radii live just
below r_max = 1.9.
"""

from mobius_mono import volume_identity_residual, weighted_identity_residual
from mobius_mono.scenarios import catenoid_scenario

scn = catenoid_scenario()

pairs = [(1.80, 1.85), (1.85, 1.90)]
print("volume identity   J(r_hi) - J(r_lo) = band integral:")
for r_lo, r_hi in pairs:
    res = volume_identity_residual(scn, r_lo, r_hi, tol=1e-7, max_depth=12)
    print(f"  ({r_lo}, {r_hi}):  lhs = {res.lhs:.9f}  rhs = {res.rhs:.9f}"
          f"  residual = {res.residual:+.2e}  budget = {res.budget:.2e}"
          f"  -> {'pass' if res.passed else 'FAIL'}")

print("\nweighted identity I(r_hi) - I(r_lo) = band + radial integral:")
for r_lo, r_hi in pairs:
    res = weighted_identity_residual(scn, r_lo, r_hi, tol=1e-7, max_depth=12)
    print(f"  ({r_lo}, {r_hi}):  lhs = {res.lhs:.9f}  rhs = {res.rhs:.9f}"
          f"  residual = {res.residual:+.2e}  budget = {res.budget:.2e}"
          f"  -> {'pass' if res.passed else 'FAIL'}")
