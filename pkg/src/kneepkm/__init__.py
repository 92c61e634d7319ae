"""Kinematic analysis of 2T2R parallel robots for knee rehabilitation.

Two architectures are modelled: RPU+3UPS (a central revolute-prismatic-
universal limb plus three universal-prismatic-spherical legs) and PRU+3PUS
(the same limb topology driven by sliders on parallel rails).
"""

from kneepkm.errors import (
    GridTooLarge,
    InvalidGeometry,
    InvalidParams,
    KinematicsError,
    NoConvergence,
    SingularJacobian,
    Unreachable,
)
from kneepkm.geometry import (
    Architecture,
    JointViolation,
    MechanismGeometry,
    Pose,
    ViolationKind,
    load_geometry,
    platform_points_world,
    reference_geometry,
    rot_y,
    rot_z,
    rotation_from_pose,
    validate_geometry,
)
from kneepkm.kinematics import (
    ActuatorSolution,
    JacobianReport,
    fk,
    ik,
    jacobian,
    singularity_margin,
)
from kneepkm.workspace import (
    ComparisonReport,
    GridSpec,
    OrientationMap,
    WorkspaceMap,
    WorkspaceMetrics,
    compare,
    metrics,
    orientation_sweep,
    sweep,
)
from kneepkm.exercises import (
    ExerciseKind,
    ExerciseTrajectory,
    FeasibilityReport,
    check_feasibility,
    gen_cpm_flexion,
    gen_gait,
    gen_lachman,
    gen_pivot_shift,
)

__version__ = "0.1.0"
