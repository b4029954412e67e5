"""
The equality case: a flat disk through the moving center
=========================================================

For the disk through a = sigma(0) orthogonal to b, the normalized volume
J(r) and its weighted companion I(r) are constant in r -- this is the
equality case of the monotonicity statement.  Tilting the disk breaks the
equality and J increases strictly.
"""

import numpy as np

from mobius_mono import I_of_r, J_of_r
from mobius_mono.scenarios import flat_disk_scenario, tilted_disk_scenario

disk = flat_disk_scenario()
print("flat disk through a, orthogonal to b  (expected J = I = pi/4):")
print(f"  pi/4 = {np.pi / 4.0:.12f}")
for r in (0.3, 0.8, 1.4):
    j = J_of_r(disk, r, tol=1e-7, max_depth=12)
    i = I_of_r(disk, r, tol=1e-7, max_depth=12)
    print(f"  r = {r}:  J = {j.value:.12f} (+-{j.error_estimate:.1e})"
          f"   I = {i.value:.12f} (+-{i.error_estimate:.1e})")

tilted = tilted_disk_scenario(tilt=0.2)
print("\nsame plane tilted by 0.2 against b  (J strictly increases):")
prev = None
for r in (0.3, 0.6, 0.9, 1.2):
    j = J_of_r(tilted, r, tol=1e-6, max_depth=11)
    arrow = "" if prev is None else ("  (+%.3e)" % (j.value - prev))
    print(f"  r = {r}:  J = {j.value:.10f}{arrow}")
    prev = j.value
