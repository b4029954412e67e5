"""
A tour of sphere reflections and the isometric-sphere decomposition
===================================================================

Every Moebius transformation that moves the point at infinity factors as an
Euclidean isometry following a single sphere reflection.  This script walks
through that factorization on a small example and shows that round balls map
to round balls.
"""

import numpy as np

from mobius_mono import (
    INFINITY,
    HalfSpace,
    Hyperplane,
    MobiusMap,
    Reflection,
    Sphere,
    ball_image,
    extended,
    isometric_decomposition,
    reflect,
)

# Reflection in the sphere S(b, R) with b = (2, 0, 0), R = 1.
sigma = Reflection(Sphere(np.array([2.0, 0.0, 0.0]), 1.0))

print("sigma swaps its center with infinity:")
print("  sigma(b)   =", reflect(sigma, extended([2.0, 0.0, 0.0])))
print("  sigma(inf) =", reflect(sigma, INFINITY).vec)

# Points on the sphere stay put; everything else is inverted.
print("  sigma((1,0,0)) =", reflect(sigma, extended([1.0, 0.0, 0.0])).vec)
print("  sigma((0,1,0)) =", reflect(sigma, extended([0.0, 1.0, 0.0])).vec)

# Compose with a mirror to get a genuinely non-trivial word.
mirror = Reflection(Hyperplane(np.array([1.0, 0.0, 0.0]), 0.0))
phi = MobiusMap([mirror, sigma])  # applied right-to-left

dec = isometric_decomposition(phi)
print("\nisometric-sphere decomposition of mirror o sigma:")
print("  b =", dec.b, " R =", dec.R)
print("  psi linear part:\n", dec.psi.linear_part)
print("  moving center a = sigma(0) =", dec.a)
print("  direction phi(inf) - phi(a) =", dec.direction)

# Sanity: phi = psi o (reflection in S(b, R)) pointwise.
rng = np.random.default_rng(7)
worst = 0.0
for _ in range(200):
    x = rng.normal(size=3) * 2.0
    lhs = phi.apply(extended(x)).vec
    rhs = dec.psi.apply(reflect(Reflection(Sphere(dec.b, dec.R)), extended(x)).vec)
    worst = max(worst, float(np.linalg.norm(lhs - rhs)))
print(f"\nmax |phi(x) - psi(sigma(x))| over 200 random points: {worst:.2e}")

# Images of centered balls are again balls (or a half-space at r = |b|).
print("\nimages of centered balls B_r under phi:")
for r in (0.5, 1.0, 1.5, 2.0):
    img = ball_image(dec, r)
    if isinstance(img, (Hyperplane, HalfSpace)):
        print(f"  r = {r}: half-space boundary, normal {img.unit_normal}, "
              f"offset {img.offset:.6f}")
    else:
        print(f"  r = {r}: ball, center {np.round(img.center, 6)}, "
              f"radius {img.radius:.6f}")
