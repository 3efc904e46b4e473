"""Geometry of the partially-decoupled 3-DOF translational parallel manipulator.

Frames and naming
-----------------
The global frame O-XYZ sits at the centre of the rectangular base, X across
the base (half-width ``b``), Y along the two parallel rails, Z up.  Rail I
(x = +b) carries the actuated sliders A1 and A2, rail II (x = -b) carries A3.

Hybrid chain A: A1-B1-C1 and A2-B2-C2 form a planar five-bar with coupler
C1C2 (length ``l3``) that stays parallel to the rails.  Its midpoint D1
carries a parallelogram link D2E2 (length ``l6``) swinging in the XZ plane.
Hybrid chain B: A3-B3-C3 with B3C3 of length ``l9`` reaching the platform at
T.  The platform centre O' lies midway between S and T (``ST = 2 d``).

``alpha`` is the angle between B1C1 and +Y; ``beta`` is the angle between
D2E2 and -X.  All lengths in millimetres, all angles in radians.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, fields
from pathlib import Path
from typing import NamedTuple

import numpy as np

from .exceptions import ParamsError

REQUIRED_KEYS = ("b", "d", "l1", "l2", "l3", "l4", "l6", "l7", "l8", "l9")
OPTIONAL_KEYS = ("a", "l5", "l10")


@dataclass(frozen=True)
class StructuralParams:
    """Link lengths and platform dimensions; defaults are the prototype values.

    ``a``, ``l5`` and ``l10`` are carried for round-tripping parameter files
    but are not used by any kinematic formula.  ``a`` doubles as the default
    rail length for workspace limits.
    """

    a: float = 360.0
    b: float = 90.0
    d: float = 45.0
    l1: float = 70.0
    l2: float = 160.0
    l3: float = 120.0
    l4: float = 0.0
    l5: float = 90.0
    l6: float = 180.0
    l7: float = 0.0
    l8: float = 0.0
    l9: float = 300.0
    l10: float = 150.0

    def __post_init__(self):
        for f in fields(self):
            value = getattr(self, f.name)
            if not math.isfinite(value) or value < 0:
                raise ParamsError(f"{f.name} must be a finite non-negative length, got {value!r}")
        for name in ("l2", "l6", "l9"):
            if getattr(self, name) <= 0:
                raise ParamsError(f"{name} must be strictly positive")

    def scaled(self, factor: float) -> "StructuralParams":
        return StructuralParams(**{k: v * factor for k, v in asdict(self).items()})

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_mapping(cls, mapping) -> "StructuralParams":
        unknown = set(mapping) - set(REQUIRED_KEYS) - set(OPTIONAL_KEYS)
        if unknown:
            raise ParamsError(f"unknown parameter keys: {sorted(unknown)}")
        missing = [k for k in REQUIRED_KEYS if k not in mapping]
        if missing:
            raise ParamsError(f"missing required parameter keys: {missing}")
        values = {}
        for key, raw in mapping.items():
            if isinstance(raw, bool):
                raise ParamsError(f"{key} must be a number")
            try:
                values[key] = float(raw)
            except (TypeError, ValueError):
                raise ParamsError(f"{key} must be a number, got {raw!r}") from None
        return cls(**values)


def load_params(path) -> StructuralParams:
    """Read a flat key -> number map from a JSON or YAML file."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ParamsError(f"cannot read parameter file {path}: {exc}") from exc
    if path.suffix.lower() in (".yaml", ".yml"):
        import yaml

        data = yaml.safe_load(text)
    else:
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ParamsError(f"{path}: invalid JSON ({exc})") from exc
    if not isinstance(data, dict):
        raise ParamsError(f"{path}: expected a flat mapping of parameter names to numbers")
    return StructuralParams.from_mapping(data)


def dump_params(params: StructuralParams, path) -> None:
    Path(path).write_text(json.dumps(params.to_dict(), indent=2) + "\n")


class ActuatedJoints(NamedTuple):
    """Slider positions along the rails (mm)."""

    yA1: float
    yA2: float
    yA3: float


class PlatformPose(NamedTuple):
    """Position of the platform centre O' in the global frame (mm)."""

    x: float
    y: float
    z: float


def _check_sign(name, value):
    if value not in (1, -1):
        raise ValueError(f"branch sign {name} must be +1 or -1, got {value!r}")
    return int(value)


class FkBranch(NamedTuple):
    """``m`` picks the sign of sin(alpha), ``n`` the root of the beta equation."""

    m: int = 1
    n: int = 1

    @classmethod
    def checked(cls, m, n) -> "FkBranch":
        return cls(_check_sign("m", m), _check_sign("n", n))


class IkBranch(NamedTuple):
    """``v`` picks the sign of sin(beta); ``w1..w3`` the root for each slider."""

    v: int = 1
    w1: int = 1
    w2: int = 1
    w3: int = 1

    @classmethod
    def checked(cls, v, w1, w2, w3) -> "IkBranch":
        return cls(*(_check_sign(k, s) for k, s in zip(("v", "w1", "w2", "w3"), (v, w1, w2, w3))))


FK_BRANCHES = tuple(FkBranch(m, n) for m in (1, -1) for n in (1, -1))
IK_BRANCHES = tuple(
    IkBranch(v, w1, w2, w3) for v in (1, -1) for w1 in (1, -1) for w2 in (1, -1) for w3 in (1, -1)
)
# assembly mode of the prototype
PHYSICAL_FK_BRANCH = FkBranch(1, 1)
PHYSICAL_IK_BRANCH = IkBranch(1, -1, 1, 1)


@dataclass(frozen=True)
class AngleState:
    """Passive angles stored as (cos, sin) pairs to avoid trig round trips."""

    cos_alpha: float
    sin_alpha: float
    cos_beta: float
    sin_beta: float

    @classmethod
    def from_angles(cls, alpha: float, beta: float) -> "AngleState":
        return cls(math.cos(alpha), math.sin(alpha), math.cos(beta), math.sin(beta))

    @property
    def alpha(self) -> float:
        return math.atan2(self.sin_alpha, self.cos_alpha)

    @property
    def beta(self) -> float:
        return math.atan2(self.sin_beta, self.cos_beta)


POINT_NAMES = ("A1", "A2", "A3", "B1", "B2", "B3", "C1", "C2", "C3", "D1", "D2", "E2", "S", "T", "Oprime")


@dataclass(frozen=True, eq=False)
class ChainPoints:
    A1: np.ndarray
    A2: np.ndarray
    A3: np.ndarray
    B1: np.ndarray
    B2: np.ndarray
    B3: np.ndarray
    C1: np.ndarray
    C2: np.ndarray
    C3: np.ndarray
    D1: np.ndarray
    D2: np.ndarray
    E2: np.ndarray
    S: np.ndarray
    T: np.ndarray
    Oprime: np.ndarray

    def as_dict(self) -> dict:
        return {name: getattr(self, name) for name in POINT_NAMES}

    def length_residuals(self, params: StructuralParams) -> dict:
        """Signed deviation of every rigid link from its nominal length (mm)."""
        dist = lambda p, q: float(np.linalg.norm(getattr(self, p) - getattr(self, q)))  # noqa: E731
        return {
            "A1B1": dist("B1", "A1") - params.l1,
            "A2B2": dist("B2", "A2") - params.l1,
            "A3B3": dist("B3", "A3") - params.l1,
            "B1C1": dist("C1", "B1") - params.l2,
            "B2C2": dist("C2", "B2") - params.l2,
            "B3C3": dist("C3", "B3") - params.l9,
            "C1C2": dist("C2", "C1") - params.l3,
            "D1D2": dist("D2", "D1") - params.l4,
            "D2E2": dist("E2", "D2") - params.l6,
            "E2S": dist("S", "E2") - params.l7,
            "ST": dist("T", "S") - 2 * params.d,
            "TC3": dist("C3", "T") - params.l8,
        }


def _base_points(joints: ActuatedJoints, params: StructuralParams):
    b, l1 = params.b, params.l1
    A1 = np.array([b, joints.yA1, 0.0])
    A2 = np.array([b, joints.yA2, 0.0])
    A3 = np.array([-b, joints.yA3, 0.0])
    up = np.array([0.0, 0.0, l1])
    return A1, A2, A3, A1 + up, A2 + up, A3 + up


def chain_points_from_fk(joints: ActuatedJoints, params: StructuralParams, angles: AngleState) -> ChainPoints:
    """Build every labelled point outward from the rails, given solved angles."""
    p = params
    A1, A2, A3, B1, B2, B3 = _base_points(joints, p)
    C1 = np.array([p.b, joints.yA1 + p.l2 * angles.cos_alpha, p.l1 + p.l2 * angles.sin_alpha])
    C2 = C1 + [0.0, p.l3, 0.0]
    D1 = C1 + [0.0, p.l3 / 2, 0.0]
    D2 = D1 + [0.0, 0.0, p.l4]
    E2 = D2 + [-p.l6 * angles.cos_beta, 0.0, p.l6 * angles.sin_beta]
    S = E2 + [0.0, 0.0, p.l7]
    Oprime = S - [p.d, 0.0, 0.0]
    T = Oprime - [p.d, 0.0, 0.0]
    C3 = T - [0.0, 0.0, p.l8]
    return ChainPoints(A1, A2, A3, B1, B2, B3, C1, C2, C3, D1, D2, E2, S, T, Oprime)


def chain_points_from_pose(
    pose: PlatformPose, joints: ActuatedJoints, params: StructuralParams, angles: AngleState
) -> ChainPoints:
    """Build every labelled point inward from the platform (only beta is read)."""
    p = params
    A1, A2, A3, B1, B2, B3 = _base_points(joints, p)
    Oprime = np.array([pose.x, pose.y, pose.z], dtype=float)
    S = Oprime + [p.d, 0.0, 0.0]
    T = Oprime - [p.d, 0.0, 0.0]
    E2 = S - [0.0, 0.0, p.l7]
    D2 = E2 + [p.l6 * angles.cos_beta, 0.0, -p.l6 * angles.sin_beta]
    D1 = D2 - [0.0, 0.0, p.l4]
    C1 = D1 - [0.0, p.l3 / 2, 0.0]
    C2 = D1 + [0.0, p.l3 / 2, 0.0]
    C3 = T - [0.0, 0.0, p.l8]
    return ChainPoints(A1, A2, A3, B1, B2, B3, C1, C2, C3, D1, D2, E2, S, T, Oprime)
