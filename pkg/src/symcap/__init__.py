"""Symplectic size of randomly rotated centrally symmetric convex bodies.

Convex-body oracles, Haar rotation sampling, the alpha operator norm with
its capacity sandwich, geometric functionals, and the rotation-ensemble
estimators built on them.
"""

__version__ = "0.1.0"

from .bodies import (
    BodyError,
    BracketError,
    ConvexBody,
    Family,
    FamilySpec,
    MissingOracleError,
    make_body,
    parse_body,
    polar,
    rotate_body,
    scale_body,
    section_support,
)
from .rotations import (
    PushforwardIdentityError,
    RngStream,
    RotationMatrix,
    conjugate,
    conjugated_J,
    haar_rotation,
    pushforward_identities,
    pushforward_uniformity_test,
    sphere_coordinate_cdf,
    standard_J,
)
from .alpha import (
    AlphaMethod,
    AlphaResult,
    CapacityInterval,
    SpectralPurityError,
    alpha,
    ehz_ellipsoid,
    ehz_sandwich,
    lipschitz_gap,
)
from .functionals import (
    ContactPoint,
    EstimatorResult,
    circumradius,
    contact_point,
    inradius,
    mean_width,
    nondeg_functional,
    scaling_summary_row,
    section_mean_width,
    volume_radius_sq,
)
from .ensembles import (
    EnsembleConfig,
    HeuristicAlphaError,
    TailProfile,
    alpha_ensemble,
    ball_product_growth_sweep,
    capacity_expectation_sandwich,
    concentration_profile,
    ellipsoid_capacity_expectation,
    expect_alpha_moment,
    mean_identity_experiment,
    psi2_norm_estimate,
)
