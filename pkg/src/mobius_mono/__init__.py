"""Moebius-transformation geometry and moving-center monotonicity checks.

Library layout:

- geometry: dimension-generic Euclidean primitives (vectors, spheres,
  isometries, tangent frames).
- mobius: reflections, composition words, the isometric-sphere decomposition
  and closed-form ball images.
- surfaces: analytic minimal patches and the mean-curvature checker.
- quadrature: adaptive region quadrature, radial quadrature and level-curve
  line integrals.
- monotonicity: the weight f, the quantities J, I, Q_A, Q_I, both increment
  identities, the proof machinery and the prescribed-point bound.
- scenarios: pinned regression scenarios.
- cli: the `mobius-mono` command-line front end.
"""

from .errors import (
    ConfigError,
    Degenerate,
    FixesInfinity,
    InvalidParameter,
    InvalidPrescribedPoint,
    MobiusMonoError,
    NonFiniteIntegrand,
    NonRegularLevel,
    OriginIsPole,
    OutsideDomain,
    OutsideHalfSpace,
    PointNotOnSurface,
    PoleEncountered,
    RankDeficient,
    StepTooLarge,
    TolNotMetWarning,
    ValidationFailed,
)
from .geometry import (
    Ball,
    ExtendedPoint,
    Frame,
    HalfSpace,
    Hyperplane,
    INFINITY,
    Isometry,
    Sphere,
    as_vec,
    extended,
    fit_sphere,
    orthonormal_frame,
    project,
)
from .mobius import (
    Decomposition,
    MobiusMap,
    Reflection,
    ball_image,
    ball_image_reflection,
    conformal_factor,
    isometric_decomposition,
    make_phi_a,
    make_sigma_a,
    phi_a_closed_form,
    reflect,
)
from .monotonicity import (
    IdentityResult,
    MobiusScenario,
    MonotonicityReport,
    ReflectionScenario,
    I_of_r,
    J_of_r,
    Q_A,
    Q_I,
    coarea_check,
    div_w_check,
    f_mobius,
    f_reflection,
    flux_identity_check,
    monotone_sweep,
    prescribed_point_bound,
    r_of_s,
    s_of_r,
    surface_gradient_f,
    volume_identity_residual,
    w_field,
    weighted_identity_residual,
)
from .quadrature import (
    QuadratureResult,
    RegionSpec,
    integrate_region,
    level_curve_integral,
    radial_integral,
)
from .surfaces import (
    ParametricPatch,
    SampleBatch,
    SurfaceSample,
    catenoid,
    complex_parabola,
    enneper,
    flat_disk,
    helicoid,
    mean_curvature_norm,
    minimality_grid_check,
    sample,
    sample_batch,
    sphere_patch,
    transform_patch,
)

__version__ = "0.1.0"
