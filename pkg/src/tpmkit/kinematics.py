"""Closed-form forward and inverse position kinematics.

Forward: the five-bar on rail I fixes alpha directly (its coupler cannot
rotate), which fixes y; the remaining loop through rail II reduces to
``G1 sin(beta) + G2 cos(beta) + G3 = 0``.  Two signs (m, n) give four
assembly modes.

Inverse: x alone fixes cos(beta); each slider then follows from one
link-length equation, giving sign choices (v, w1, w2, w3) and sixteen
candidate solutions.

The core routines accept numpy arrays so that grid scans run vectorised; the
public scalar API wraps them.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

from .exceptions import CosOutOfRange, DegenerateDenominator, DiscriminantNegative
from .model import (
    FK_BRANCHES,
    IK_BRANCHES,
    ActuatedJoints,
    AngleState,
    FkBranch,
    IkBranch,
    PlatformPose,
    StructuralParams,
    chain_points_from_pose,
)

EPS_CLAMP = 1e-12
EPS_DISC = 1e-9

OK = "ok"
COS_OUT_OF_RANGE = "cos_out_of_range"
DISCRIMINANT_NEGATIVE = "discriminant_negative"
DEGENERATE = "degenerate"
BETA_COS_OUT_OF_RANGE = "beta_cos_out_of_range"
COMPLEX_DISCRIMINANT = "complex_discriminant"
ORDERING_VIOLATION = "ordering_violation"

FK_STATUS = (OK, COS_OUT_OF_RANGE, DISCRIMINANT_NEGATIVE, DEGENERATE)
IK_STATUS = (OK, BETA_COS_OUT_OF_RANGE, COMPLEX_DISCRIMINANT, ORDERING_VIOLATION)


def _cos_sin(c, sign):
    """Clamp a cosine within EPS_CLAMP of +-1 and pair it with a signed sine."""
    c = np.asarray(c, dtype=float)
    valid = np.abs(c) <= 1.0 + EPS_CLAMP
    c = np.clip(c, -1.0, 1.0)
    s = sign * np.sqrt((1.0 - c) * (1.0 + c))
    return c, s, valid


def _alpha_terms(yA1, yA2, p: StructuralParams, m):
    B = np.asarray(yA2, dtype=float) - yA1 - p.l3
    return _cos_sin(B / (2.0 * p.l2), m)


def _beta_terms(yA1, yA3, cos_a, sin_a, p: StructuralParams, n):
    """Root ``n`` of G1 sin(beta) + G2 cos(beta) + G3 = 0 via the half-angle form.

    Returns (beta, real_mask, degenerate_mask).  The conjugate expression
    t = (G2 + G3) / (-G1 - n sqrt(disc)) is algebraically the same root and
    is used whenever the direct numerator would cancel; it also covers
    G3 == G2, where the direct form's root sits at beta = pi.
    """
    F1 = 2.0 * p.b - 2.0 * p.d
    F2 = np.asarray(yA1, dtype=float) - yA3 + p.l2 * cos_a + p.l3 / 2.0
    F3 = p.l4 + p.l7 - p.l8 + p.l2 * sin_a
    G1 = 2.0 * F3 * p.l6
    G2 = np.broadcast_to(-2.0 * F1 * p.l6, np.shape(G1)).astype(float)
    G3 = F1**2 + F2**2 + F3**2 + p.l6**2 - p.l9**2
    scale = G1**2 + G2**2
    disc = scale - G3**2
    real = disc >= -EPS_DISC * np.maximum(scale, np.finfo(float).tiny)
    root = n * np.sqrt(np.maximum(disc, 0.0))

    num, den = -G1 + root, G3 - G2
    alt_num, alt_den = G2 + G3, -G1 - root
    use_alt = (G1 * n > 0) | ((num == 0) & (den == 0))
    half = np.where(use_alt, np.arctan2(alt_num, alt_den), np.arctan2(num, den))
    beta = 2.0 * half
    beta = np.where(beta > np.pi, beta - 2 * np.pi, np.where(beta <= -np.pi, beta + 2 * np.pi, beta))
    degenerate = (scale == 0) & (G3 == 0)
    return beta, real & ~degenerate, degenerate


class FkArrays(NamedTuple):
    pose: np.ndarray  # (..., 3), NaN where infeasible
    cos_alpha: np.ndarray
    sin_alpha: np.ndarray
    beta: np.ndarray
    status: np.ndarray  # index into FK_STATUS


def forward_arrays(yA1, yA2, yA3, params: StructuralParams, m: int = 1, n: int = 1) -> FkArrays:
    p = params
    yA1, yA2, yA3 = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (yA1, yA2, yA3)))
    ca, sa, ok_alpha = _alpha_terms(yA1, yA2, p, m)
    with np.errstate(invalid="ignore"):
        beta, ok_beta, degenerate = _beta_terms(yA1, yA3, ca, sa, p, n)
    x = p.b - p.l6 * np.cos(beta) - p.d
    y = yA1 + p.l2 * ca + p.l3 / 2.0
    z = p.l1 + p.l4 + p.l7 + p.l2 * sa + p.l6 * np.sin(beta)
    status = np.where(
        ~ok_alpha,
        FK_STATUS.index(COS_OUT_OF_RANGE),
        np.where(degenerate, FK_STATUS.index(DEGENERATE), np.where(ok_beta, 0, FK_STATUS.index(DISCRIMINANT_NEGATIVE))),
    )
    pose = np.stack([x, y, z], axis=-1)
    pose = np.where((status == 0)[..., None], pose, np.nan)
    return FkArrays(pose, ca, sa, beta, status)


class IkArrays(NamedTuple):
    joints: np.ndarray  # (..., 3), NaN where complex
    cos_alpha: np.ndarray
    sin_alpha: np.ndarray
    cos_beta: np.ndarray
    sin_beta: np.ndarray
    status: np.ndarray  # index into IK_STATUS


def slider_discriminants(x, y, z, params: StructuralParams, v=1):
    """Unclamped (disc12, disc3, beta_ok): squared slider offsets |yA_i - yC_i|^2.

    Negative values mean the slider position is complex.  disc12 == 0 is the
    locus where u11 = u22 = 0, disc3 == 0 the locus where u33 = 0.
    """
    p = params
    x, y, z = np.broadcast_arrays(*(np.asarray(c, dtype=float) for c in (x, y, z)))
    cb, sb, ok_beta = _cos_sin((p.b - p.d - x) / p.l6, v)
    h12 = np.abs(z - p.l7 - p.l6 * sb - p.l4 - p.l1)
    disc12 = (p.l2 - h12) * (p.l2 + h12) - (x + p.d + p.l6 * cb - p.b) ** 2
    h3 = np.abs(z - p.l8 - p.l1)
    disc3 = (p.l9 - h3) * (p.l9 + h3) - (x - p.d + p.b) ** 2
    return disc12, disc3, ok_beta


def inverse_arrays(x, y, z, params: StructuralParams, v=1, w1=1, w2=1, w3=1) -> IkArrays:
    p = params
    x, y, z = np.broadcast_arrays(*(np.asarray(c, dtype=float) for c in (x, y, z)))
    cb, sb, _ = _cos_sin((p.b - p.d - x) / p.l6, v)
    disc12, disc3, ok_beta = slider_discriminants(x, y, z, p, v)
    # near-zero discriminants are clamped so boundary poses stay real
    real12 = disc12 >= -EPS_DISC * p.l2**2
    real3 = disc3 >= -EPS_DISC * p.l9**2
    root12 = np.sqrt(np.maximum(disc12, 0.0))
    yA1 = y - p.l3 / 2.0 + w1 * root12
    yA2 = y + p.l3 / 2.0 + w2 * root12
    yA3 = y + w3 * np.sqrt(np.maximum(disc3, 0.0))

    real = ok_beta & real12 & real3
    status = np.where(
        ~ok_beta,
        IK_STATUS.index(BETA_COS_OUT_OF_RANGE),
        np.where(~(real12 & real3), IK_STATUS.index(COMPLEX_DISCRIMINANT), np.where(yA2 > yA1, 0, IK_STATUS.index(ORDERING_VIOLATION))),
    )
    joints = np.where(real[..., None], np.stack([yA1, yA2, yA3], axis=-1), np.nan)
    # alpha is the direction of B1C1
    link_y = -w1 * root12
    link_z = z - p.l7 - p.l6 * sb - p.l4 - p.l1
    norm = np.hypot(link_y, link_z)
    with np.errstate(invalid="ignore", divide="ignore"):
        ca = np.where(real, link_y / norm, np.nan)
        sa = np.where(real, link_z / norm, np.nan)
    return IkArrays(joints, ca, sa, cb, sb, status)


@dataclass(frozen=True)
class FkSolution:
    pose: Optional[PlatformPose]
    angles: Optional[AngleState]
    branch: FkBranch
    status: str

    @property
    def ok(self) -> bool:
        return self.status == OK


@dataclass(frozen=True)
class IkSolution:
    joints: Optional[ActuatedJoints]
    branch: IkBranch
    status: str
    angles: Optional[AngleState] = None

    @property
    def ok(self) -> bool:
        return self.status == OK

    @property
    def real(self) -> bool:
        return self.joints is not None


def solve_alpha(joints: ActuatedJoints, params: StructuralParams, m: int = 1):
    """(cos alpha, sin alpha) of the rail-I five-bar; sin alpha carries sign ``m``."""
    FkBranch.checked(m, 1)
    c, s, valid = _alpha_terms(joints.yA1, joints.yA2, params, m)
    if not valid:
        raise CosOutOfRange(f"cos(alpha) = {float(joints.yA2 - joints.yA1 - params.l3) / (2 * params.l2):.6g} outside [-1, 1]")
    return float(c), float(s)


def solve_beta_fk(joints: ActuatedJoints, params: StructuralParams, alpha, n: int = 1) -> float:
    FkBranch.checked(1, n)
    cos_a, sin_a = alpha
    beta, real, degenerate = _beta_terms(joints.yA1, joints.yA3, cos_a, sin_a, params, n)
    if degenerate:
        raise DegenerateDenominator("beta equation vanishes identically")
    if not real:
        raise DiscriminantNegative("G1^2 + G2^2 - G3^2 < 0: rail-II link cannot reach the platform")
    return float(beta)


def forward(joints: ActuatedJoints, params: StructuralParams, m: int = 1, n: int = 1) -> FkSolution:
    joints = ActuatedJoints(*map(float, joints))
    branch = FkBranch.checked(m, n)
    res = forward_arrays(*joints, params, branch.m, branch.n)
    status = FK_STATUS[int(res.status)]
    if status != OK:
        return FkSolution(None, None, branch, status)
    beta = float(res.beta)
    angles = AngleState(float(res.cos_alpha), float(res.sin_alpha), float(np.cos(beta)), float(np.sin(beta)))
    return FkSolution(PlatformPose(*map(float, res.pose)), angles, branch, status)


def forward_all(joints: ActuatedJoints, params: StructuralParams) -> list:
    """All four assembly modes in the order (+,+), (+,-), (-,+), (-,-)."""
    return [forward(joints, params, br.m, br.n) for br in FK_BRANCHES]


def inverse_beta(pose: PlatformPose, params: StructuralParams, v: int = 1):
    IkBranch.checked(v, 1, 1, 1)
    c, s, valid = _cos_sin((params.b - params.d - pose.x) / params.l6, v)
    if not valid:
        raise CosOutOfRange(f"|b - d - x| = {abs(params.b - params.d - pose.x):.6g} exceeds l6")
    return float(c), float(s)


def inverse(pose: PlatformPose, params: StructuralParams, v=1, w1=1, w2=1, w3=1) -> IkSolution:
    pose = PlatformPose(*map(float, pose))
    branch = IkBranch.checked(v, w1, w2, w3)
    res = inverse_arrays(*pose, params, *branch)
    status = IK_STATUS[int(res.status)]
    if status in (BETA_COS_OUT_OF_RANGE, COMPLEX_DISCRIMINANT):
        return IkSolution(None, branch, status)
    angles = AngleState(float(res.cos_alpha), float(res.sin_alpha), float(res.cos_beta), float(res.sin_beta))
    return IkSolution(ActuatedJoints(*map(float, res.joints)), branch, status, angles)


def inverse_all(pose: PlatformPose, params: StructuralParams) -> list:
    """All sixteen sign combinations, lexicographic over (v, w1, w2, w3) with +1 first."""
    return [inverse(pose, params, *br) for br in IK_BRANCHES]


def residuals(pose: PlatformPose, joints: ActuatedJoints, params: StructuralParams, v: int = 1) -> np.ndarray:
    """Squared-length errors |C_i - B_i|^2 - l^2 of the three driven links (mm^2)."""
    cb, sb = inverse_beta(pose, params, v)
    pts = chain_points_from_pose(pose, joints, params, AngleState(0.0, 0.0, cb, sb))
    return np.array(
        [
            np.sum((pts.C1 - pts.B1) ** 2) - params.l2**2,
            np.sum((pts.C2 - pts.B2) ** 2) - params.l2**2,
            np.sum((pts.C3 - pts.B3) ** 2) - params.l9**2,
        ]
    )
