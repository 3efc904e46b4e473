"""Kinematics toolkit for a partially-decoupled 3-DOF translational parallel manipulator."""
from .differential import JacobianPair, SingularityReport, classify, finite_difference_jacobian, jacobians, velocity_forward
from .estimators import ForwardKinematics, InverseKinematics, SingularityClassifier
from .kinematics import FkSolution, IkSolution, forward, forward_all, inverse, inverse_all, residuals
from .model import ActuatedJoints, AngleState, PlatformPose, StructuralParams, load_params
from .topology import PocSet, tpm_topology
from .workspace import GridSpec, WorkspaceLimits, scan_workspace, singular_surface

__version__ = "0.1.0"

__all__ = [
    "ActuatedJoints",
    "AngleState",
    "FkSolution",
    "ForwardKinematics",
    "GridSpec",
    "IkSolution",
    "InverseKinematics",
    "JacobianPair",
    "PlatformPose",
    "PocSet",
    "SingularityClassifier",
    "SingularityReport",
    "StructuralParams",
    "WorkspaceLimits",
    "classify",
    "finite_difference_jacobian",
    "forward",
    "forward_all",
    "inverse",
    "inverse_all",
    "jacobians",
    "load_params",
    "residuals",
    "scan_workspace",
    "singular_surface",
    "tpm_topology",
    "velocity_forward",
]
