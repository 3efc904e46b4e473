"""Velocity-level analysis: A xdot + B udot = 0 and singularity classification.

Rows of A come from differentiating the three link-length constraints:

    row 1: (cot(beta) dz1, -dy1, -dz1)     with (dy1, dz1) = C1 - B1
    row 2: (cot(beta) dz2, -dy2, -dz2)     with (dy2, dz2) = C2 - B2
    row 3: (dx3, dy3, dz3)                 with C3 - B3

and ``B = diag(dy1, dy2, -dy3)``.  Determinants used for classification are
normalised so they are unit free: each row of A is scaled to unit length and
each diagonal entry of B is divided by the length of its link.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .exceptions import (
    BetaDegenerate,
    BranchFlip,
    InconsistentConfiguration,
    CosOutOfRange,
    NearParallelSingularity,
)
from .kinematics import forward, inverse_beta, residuals
from .model import ActuatedJoints, AngleState, FkBranch, PlatformPose, StructuralParams, chain_points_from_pose

SINGULARITY_TOL = 1e-8
EPS_BETA = 1e-9


@dataclass(frozen=True, eq=False)
class JacobianPair:
    A: np.ndarray
    B: np.ndarray
    detA: float
    detB: float
    link_lengths: np.ndarray = field(repr=False)

    @property
    def normalized_A(self) -> np.ndarray:
        return self.A / np.linalg.norm(self.A, axis=1, keepdims=True)

    @property
    def normalized_detA(self) -> float:
        return float(np.linalg.det(self.normalized_A))

    @property
    def normalized_serial_factors(self) -> np.ndarray:
        """u_ii divided by the length of link i; each is a direction cosine."""
        return np.diag(self.B) / self.link_lengths

    @property
    def normalized_detB(self) -> float:
        return float(np.prod(self.normalized_serial_factors))

    def jacobian(self) -> np.ndarray:
        """d(pose)/d(joints) = -A^-1 B."""
        return -np.linalg.solve(self.A, self.B)


def jacobians(
    joints: ActuatedJoints,
    pose: PlatformPose,
    params: StructuralParams,
    angles: AngleState,
    check_tol: float | None = 1e-6,
) -> JacobianPair:
    """Evaluate A and B at a configuration; ``angles`` supplies beta only.

    ``check_tol`` bounds the link-length residuals (mm^2) the configuration
    may carry; pass None to skip the check.
    """
    if abs(angles.sin_beta) <= EPS_BETA:
        raise BetaDegenerate(f"sin(beta) = {angles.sin_beta:.3g}; cot(beta) undefined")
    if check_tol is not None:
        v = 1 if angles.sin_beta > 0 else -1
        res = residuals(pose, joints, params, v)
        if np.max(np.abs(res)) > check_tol:
            raise InconsistentConfiguration(f"link-length residuals {res} exceed {check_tol}")
    pts = chain_points_from_pose(pose, joints, params, angles)
    cot = angles.cos_beta / angles.sin_beta
    _, dy1, dz1 = pts.C1 - pts.B1
    _, dy2, dz2 = pts.C2 - pts.B2
    dx3, dy3, dz3 = pts.C3 - pts.B3
    A = np.array(
        [
            [cot * dz1, -dy1, -dz1],
            [cot * dz2, -dy2, -dz2],
            [dx3, dy3, dz3],
        ]
    )
    B = np.diag([dy1, dy2, -dy3])
    lengths = np.array(
        [np.linalg.norm(pts.C1 - pts.B1), np.linalg.norm(pts.C2 - pts.B2), np.linalg.norm(pts.C3 - pts.B3)]
    )
    return JacobianPair(A, B, float(np.linalg.det(A)), float(dy1 * dy2 * -dy3), lengths)


def velocity_forward(jp: JacobianPair, joint_rates, threshold: float = SINGULARITY_TOL) -> np.ndarray:
    if abs(jp.normalized_detA) < threshold:
        raise NearParallelSingularity(f"normalised det(A) = {jp.normalized_detA:.3g}")
    rates = np.asarray(joint_rates, dtype=float).reshape(3)
    return -np.linalg.solve(jp.A, jp.B @ rates)


@dataclass(frozen=True)
class SingularityReport:
    kind: str  # regular | serial | parallel | mixed
    serial_cases: frozenset
    parallel_cases: frozenset
    margins: dict

    @property
    def is_serial(self) -> bool:
        return self.kind in ("serial", "mixed")

    @property
    def is_parallel(self) -> bool:
        return self.kind in ("parallel", "mixed")

    def lines(self):
        yield f"kind: {self.kind}"
        yield "serial cases: " + (", ".join(sorted(self.serial_cases)) or "none")
        yield "parallel cases: " + (", ".join(sorted(self.parallel_cases)) or "none")
        for key, value in self.margins.items():
            yield f"{key}: {value:.6e}"


def _row_dependence(a, b) -> float:
    """|a x b| / (|a||b|): sine of the angle between two rows."""
    return float(np.linalg.norm(np.cross(a, b)) / (np.linalg.norm(a) * np.linalg.norm(b)))


def classify(jp: JacobianPair, tol: float = SINGULARITY_TOL) -> SingularityReport:
    factors = jp.normalized_serial_factors
    serial = frozenset(name for name, f in zip(("u11_zero", "u22_zero", "u33_zero"), factors) if abs(f) < tol)

    rows = jp.A
    pairs = {
        "rows12_dependent": _row_dependence(rows[0], rows[1]),
        "rows13_dependent": _row_dependence(rows[0], rows[2]),
        "rows23_dependent": _row_dependence(rows[1], rows[2]),
    }
    ndet = jp.normalized_detA
    parallel = {name for name, s in pairs.items() if s < tol}
    if abs(ndet) < tol and not parallel:
        parallel.add("three_row_dependent")
    is_parallel = abs(ndet) < tol or bool(parallel)

    if serial and is_parallel:
        kind = "mixed"
    elif serial:
        kind = "serial"
    elif is_parallel:
        kind = "parallel"
    else:
        kind = "regular"
    margins = {
        "abs_detA": abs(jp.detA),
        "abs_detB": abs(jp.detB),
        "abs_normalized_detA": abs(ndet),
        "abs_normalized_detB": abs(jp.normalized_detB),
        "u11": abs(factors[0]),
        "u22": abs(factors[1]),
        "u33": abs(factors[2]),
        **pairs,
    }
    return SingularityReport(kind, serial, frozenset(parallel), margins)


def classify_configuration(joints, pose, params, angles, tol: float = SINGULARITY_TOL) -> SingularityReport:
    return classify(jacobians(joints, pose, params, angles), tol)


def finite_difference_jacobian(
    joints: ActuatedJoints,
    params: StructuralParams,
    branch=(1, 1),
    step: float = 1e-6,
) -> np.ndarray:
    """Central-difference d(pose)/d(joints) of ``forward`` on a fixed branch."""
    branch = FkBranch.checked(*branch)
    base = forward(joints, params, *branch)
    if not base.ok:
        raise BranchFlip(f"forward kinematics infeasible at the centre ({base.status})")
    J = np.empty((3, 3))
    for k in range(3):
        plus = np.array(joints, dtype=float)
        minus = plus.copy()
        plus[k] += step
        minus[k] -= step
        sp = forward(ActuatedJoints(*plus), params, *branch)
        sm = forward(ActuatedJoints(*minus), params, *branch)
        if not (sp.ok and sm.ok):
            raise BranchFlip(f"stencil along joint {k + 1} leaves the feasible set")
        # beta wrapping through +-pi means the half-angle root switched sheets
        if abs(sp.angles.beta - sm.angles.beta) > np.pi:
            raise BranchFlip(f"beta wraps within the stencil along joint {k + 1}")
        J[:, k] = (np.array(sp.pose) - np.array(sm.pose)) / (2 * step)
    return J


def configuration_from_pose(joints: ActuatedJoints, pose: PlatformPose, params: StructuralParams, tol: float = 1e-6):
    """Recover the passive angles for a (joints, pose) pair by trying both sin(beta) signs."""
    best = None
    for v in (1, -1):
        try:
            res = residuals(pose, joints, params, v)
        except CosOutOfRange:
            continue
        err = float(np.max(np.abs(res)))
        if best is None or err < best[0]:
            best = (err, v)
    if best is None or best[0] > tol:
        raise InconsistentConfiguration("joints and pose do not satisfy the link-length constraints")
    cb, sb = inverse_beta(pose, params, best[1])
    pts = chain_points_from_pose(pose, joints, params, AngleState(0.0, 0.0, cb, sb))
    link = pts.C1 - pts.B1
    norm = np.hypot(link[1], link[2])
    return AngleState(float(link[1] / norm), float(link[2] / norm), cb, sb)


def normalized_determinants(pose, joints, cos_beta, sin_beta, params: StructuralParams):
    """Vectorised (normalised det A, normalised u_ii factors) for stacked configurations.

    ``pose`` and ``joints`` are (..., 3) arrays; the result matches
    ``jacobians(...).normalized_detA`` and ``normalized_serial_factors``.
    """
    p = params
    pose = np.asarray(pose, dtype=float)
    joints = np.asarray(joints, dtype=float)
    x, y, z = pose[..., 0], pose[..., 1], pose[..., 2]
    with np.errstate(divide="ignore", invalid="ignore"):
        cot = cos_beta / sin_beta
        dz12 = z - p.l7 - p.l6 * sin_beta - p.l4 - p.l1
        dx12 = x + p.d + p.l6 * cos_beta - p.b
        dy1 = y - p.l3 / 2 - joints[..., 0]
        dy2 = y + p.l3 / 2 - joints[..., 1]
        dx3, dy3, dz3 = x - p.d + p.b, y - joints[..., 2], z - p.l8 - p.l1
        A = np.stack(
            [
                np.stack([cot * dz12, -dy1, -dz12], axis=-1),
                np.stack([cot * dz12, -dy2, -dz12], axis=-1),
                np.stack([dx3, dy3, dz3], axis=-1),
            ],
            axis=-2,
        )
        A = A / np.linalg.norm(A, axis=-1, keepdims=True)
        ndet = np.linalg.det(np.nan_to_num(A))
        ndet = np.where(np.isfinite(cot), ndet, np.nan)
        lengths = np.stack(
            [np.sqrt(dx12**2 + dy1**2 + dz12**2), np.sqrt(dx12**2 + dy2**2 + dz12**2), np.sqrt(dx3**2 + dy3**2 + dz3**2)],
            axis=-1,
        )
        factors = np.stack([dy1, dy2, -dy3], axis=-1) / lengths
    return ndet, factors
