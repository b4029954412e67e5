"""Built-in regression scenarios with pinned parameters.

These are the concrete configurations exercised by the test suite and the
CLI selftest: the flat-disk equality case, a tilted disk (strict increase),
the catenoid scenario, its mirrored Moebius variant, and the prescribed-point
sigma_a disk.
"""

from __future__ import annotations

import numpy as np

from .geometry import Frame, Hyperplane, Isometry, Sphere
from .mobius import MobiusMap, Reflection, make_sigma_a
from .monotonicity import MobiusScenario, ReflectionScenario
from .surfaces import catenoid, flat_disk, transform_patch


def flat_disk_scenario(validate: bool = True) -> ReflectionScenario:
    """Equality case: disk through a = (1.5, 0, 0) orthogonal to b = (2, 0, 0).

    J(r) = I(r) = pi/4 for every admissible radius.
    """
    frame = Frame(np.array([[0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]))
    patch = flat_disk(np.array([1.5, 0.0, 0.0]), frame, extent=0.6)
    return ReflectionScenario(
        b=np.array([2.0, 0.0, 0.0]), R=1.0, patch=patch, r_max=1.5,
        validate=validate,
    )


def tilted_disk_scenario(tilt: float = 0.2, validate: bool = True) -> ReflectionScenario:
    """Plane through a = (1.5, 0, 0) tilted against b; J increases strictly."""
    c = float(np.sqrt(1.0 - tilt**2))
    frame = Frame(np.array([[0.0, 1.0, 0.0], [tilt, 0.0, c]]))
    patch = flat_disk(np.array([1.5, 0.0, 0.0]), frame, extent=0.6)
    return ReflectionScenario(
        b=np.array([2.0, 0.0, 0.0]), R=1.0, patch=patch, r_max=1.3,
        validate=validate,
    )


def catenoid_scenario(validate: bool = True) -> ReflectionScenario:
    """The core regression scenario: catenoid against b = (0, 0, 3), R = 2."""
    patch = catenoid(scale=1.0, v_range=(-0.9, 0.9))
    return ReflectionScenario(
        b=np.array([0.0, 0.0, 3.0]), R=2.0, patch=patch, r_max=1.9,
        validate=validate,
    )


def _mirror_isometry() -> Isometry:
    lin = np.diag([-1.0, 1.0, 1.0])
    return Isometry(lin, np.zeros(3))


def mirrored_catenoid_scenario(validate: bool = True) -> MobiusScenario:
    """phi = (mirror in x1 = 0) o (reflection in S((0,0,3), 2)); the patch is
    the mirrored catenoid, so every quantity must match the reflection case."""
    mirror = Reflection(Hyperplane(np.array([1.0, 0.0, 0.0]), 0.0))
    sigma = Reflection(Sphere(np.array([0.0, 0.0, 3.0]), 2.0))
    phi = MobiusMap([mirror, sigma])  # applied right-to-left
    patch = transform_patch(catenoid(scale=1.0, v_range=(-0.9, 0.9)), _mirror_isometry())
    return MobiusScenario(phi, patch, r_max=1.9, validate=validate)


def sigma_a_disk_scenario(validate: bool = True) -> ReflectionScenario:
    """Remark-style scenario: sigma_a for a = (0.5, 0, 0), equality-case disk.

    b = a/|a|^2 = (2,0,0), R = sqrt(|b|^2 - 1) = sqrt(3); the moving center
    sigma(0) recovers a itself.
    """
    a = np.array([0.5, 0.0, 0.0])
    word = make_sigma_a(a).word[0]
    frame = Frame(np.array([[0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]))
    patch = flat_disk(a, frame, extent=1.0)
    return ReflectionScenario(
        b=word.surface.center, R=word.surface.radius, patch=patch, r_max=1.0,
        validate=validate,
    )


BUILTIN_SCENARIOS = {
    "flat-disk": flat_disk_scenario,
    "tilted-disk": tilted_disk_scenario,
    "catenoid": catenoid_scenario,
    "catenoid-mirrored": mirrored_catenoid_scenario,
    "sigma-a-disk": sigma_a_disk_scenario,
}
