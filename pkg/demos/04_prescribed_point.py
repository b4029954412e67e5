"""
The prescribed-point area bound
===============================

A minimal surface passing through a point a inside the unit ball has area at
least pi (1 - |a|^2) inside the ball.  The flat disk through a orthogonal to
a attains equality; any tilt produces strictly positive slack.
"""

import numpy as np

from mobius_mono import Frame, flat_disk, prescribed_point_bound

a = np.array([0.5, 0.0, 0.0])

frame = Frame(np.array([[0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]))
equality = flat_disk(a, frame, extent=1.0)
area, bound, slack, budget = prescribed_point_bound(equality, a, tol=1e-7,
                                                    max_depth=12)
print("equality disk (orthogonal to a):")
print(f"  area inside B_1 = {area.value:.10f}")
print(f"  bound pi(1-|a|^2) = {bound:.10f}")
print(f"  slack = {slack:+.2e}  (budget {budget:.1e})")

print("\ntilted planes through a:")
for tilt in (0.2, 0.4, 0.6):
    fr = Frame(np.array([[0.0, 1.0, 0.0],
                         [tilt, 0.0, np.sqrt(1.0 - tilt**2)]]))
    patch = flat_disk(a, fr, extent=1.3)
    area, bound, slack, budget = prescribed_point_bound(patch, a, tol=1e-6,
                                                        max_depth=11)
    print(f"  tilt {tilt}:  area = {area.value:.8f}  slack = {slack:+.6f}")
