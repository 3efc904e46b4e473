"""Discrete workspace determination and numerical singularity-surface sampling.

Workspace: every node of a pose grid is pushed through all sixteen inverse
solutions and kept when at least one survives the joint and passive-angle
limits.  Singular surfaces: a determinant (or serial factor) is sampled on a
grid, grid edges whose endpoints differ in sign are bisected down to the
zero crossing.
"""
from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .differential import normalized_determinants
from .exceptions import IoFailure
from .kinematics import forward_arrays, inverse_arrays, slider_discriminants
from .model import IK_BRANCHES, PHYSICAL_FK_BRANCH, PHYSICAL_IK_BRANCH, PlatformPose, StructuralParams

NOMINAL_BOUNDS = ((-150.0, 150.0), (-200.0, 200.0), (380.0, 550.0))
DEFAULT_RESOLUTION = (61, 81, 35)
SURFACE_TOL = 1e-6
EPS_SIN_BETA = 1e-9


@dataclass(frozen=True)
class GridSpec:
    """Axis-aligned lattice: ``axes`` holds (min, max, count) per axis."""

    axes: tuple
    space: str = "pose"

    def __post_init__(self):
        if self.space not in ("pose", "joint"):
            raise ValueError(f"space must be 'pose' or 'joint', got {self.space!r}")
        if len(self.axes) != 3:
            raise ValueError("a grid needs exactly three axes")
        axes = []
        for lo, hi, count in self.axes:
            if int(count) < 2:
                raise ValueError("each axis needs at least two nodes")
            if not lo < hi:
                raise ValueError(f"axis bounds must satisfy min < max, got ({lo}, {hi})")
            axes.append((float(lo), float(hi), int(count)))
        object.__setattr__(self, "axes", tuple(axes))

    @classmethod
    def from_bounds(cls, bounds, resolution, space="pose") -> "GridSpec":
        return cls(tuple((lo, hi, n) for (lo, hi), n in zip(bounds, resolution)), space)

    @classmethod
    def from_pitch(cls, bounds, pitch, space="pose") -> "GridSpec":
        counts = [int(round((hi - lo) / pitch)) + 1 for lo, hi in bounds]
        return cls.from_bounds(bounds, counts, space)

    @property
    def shape(self):
        return tuple(n for _, _, n in self.axes)

    @property
    def pitch(self):
        return tuple((hi - lo) / (n - 1) for lo, hi, n in self.axes)

    def axis_values(self, i) -> np.ndarray:
        lo, hi, n = self.axes[i]
        return np.linspace(lo, hi, n)

    def nodes(self) -> np.ndarray:
        """All nodes as an (N, 3) array in C (row-major) grid-index order."""
        mesh = np.meshgrid(*(self.axis_values(i) for i in range(3)), indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=-1)


def nominal_grid(resolution=DEFAULT_RESOLUTION) -> GridSpec:
    return GridSpec.from_bounds(NOMINAL_BOUNDS, resolution)


@dataclass(frozen=True)
class WorkspaceLimits:
    """Filters applied to inverse solutions; ``None`` disables a filter.

    Angle ranges are open intervals in radians.  Link interference is not
    modelled.
    """

    joint_range: tuple | None = (-180.0, 180.0)
    alpha_range: tuple | None = (0.0, math.pi)
    beta_range: tuple | None = (0.0, math.pi)

    @classmethod
    def from_params(cls, params: StructuralParams, **overrides) -> "WorkspaceLimits":
        half = params.a / 2.0
        kwargs = {"joint_range": (-half, half)}
        kwargs.update(overrides)
        return cls(**kwargs)


@dataclass(frozen=True)
class WorkspacePoint:
    pose: PlatformPose
    feasible_ik_count: int
    min_abs_detA: float
    min_abs_detB: float
    inside: bool


def _in_open_range(angle, bounds):
    lo, hi = bounds
    return (angle > lo) & (angle < hi)


def _admissible(ik, limits: WorkspaceLimits):
    keep = ik.status == 0
    if limits.joint_range is not None:
        lo, hi = limits.joint_range
        with np.errstate(invalid="ignore"):
            keep &= np.all((ik.joints >= lo) & (ik.joints <= hi), axis=-1)
    if limits.alpha_range is not None:
        keep &= _in_open_range(np.arctan2(ik.sin_alpha, ik.cos_alpha), limits.alpha_range)
    if limits.beta_range is not None:
        keep &= _in_open_range(np.arctan2(ik.sin_beta, ik.cos_beta), limits.beta_range)
    return keep


def _evaluate_poses(poses: np.ndarray, params: StructuralParams, limits: WorkspaceLimits):
    count = np.zeros(len(poses), dtype=int)
    min_a = np.full(len(poses), np.inf)
    min_b = np.full(len(poses), np.inf)
    x, y, z = poses.T
    for branch in IK_BRANCHES:
        ik = inverse_arrays(x, y, z, params, *branch)
        keep = _admissible(ik, limits)
        if not keep.any():
            continue
        ndet, factors = normalized_determinants(poses[keep], ik.joints[keep], ik.cos_beta[keep], ik.sin_beta[keep], params)
        count[keep] += 1
        min_a[keep] = np.fmin(min_a[keep], np.abs(ndet))
        min_b[keep] = np.fmin(min_b[keep], np.abs(np.prod(factors, axis=-1)))
    min_a[count == 0] = np.nan
    min_b[count == 0] = np.nan
    return count, min_a, min_b


@dataclass(frozen=True, eq=False)
class WorkspaceScan:
    """Column-oriented scan result; iterating yields WorkspacePoint records."""

    poses: np.ndarray
    feasible_ik_count: np.ndarray
    min_abs_detA: np.ndarray
    min_abs_detB: np.ndarray
    grid: GridSpec | None = None

    @property
    def inside(self) -> np.ndarray:
        return self.feasible_ik_count > 0

    def __len__(self):
        return len(self.poses)

    def __getitem__(self, i) -> WorkspacePoint:
        return WorkspacePoint(
            PlatformPose(*map(float, self.poses[i])),
            int(self.feasible_ik_count[i]),
            float(self.min_abs_detA[i]),
            float(self.min_abs_detB[i]),
            bool(self.feasible_ik_count[i] > 0),
        )

    def __iter__(self):
        return (self[i] for i in range(len(self)))

    def inside_poses(self) -> np.ndarray:
        return self.poses[self.inside]


def evaluate_pose(pose, params: StructuralParams, limits: WorkspaceLimits | None = None) -> WorkspacePoint:
    limits = WorkspaceLimits() if limits is None else limits
    poses = np.asarray(pose, dtype=float).reshape(1, 3)
    count, min_a, min_b = _evaluate_poses(poses, params, limits)
    return WorkspaceScan(poses, count, min_a, min_b)[0]


def scan_workspace(
    params: StructuralParams,
    grid: GridSpec,
    limits: WorkspaceLimits | None = None,
    chunk_size: int = 50_000,
    n_jobs: int = 1,
) -> WorkspaceScan:
    """Evaluate every node of a pose grid.

    Nodes are processed in independent shards (optionally on ``n_jobs``
    threads); results are stored in grid-index order either way.
    """
    if grid.space != "pose":
        raise ValueError("workspace scans need a pose-space grid")
    limits = WorkspaceLimits() if limits is None else limits
    poses = grid.nodes()
    shards = [slice(i, min(i + chunk_size, len(poses))) for i in range(0, len(poses), chunk_size)]
    count = np.zeros(len(poses), dtype=int)
    min_a = np.full(len(poses), np.nan)
    min_b = np.full(len(poses), np.nan)

    def work(sl):
        return sl, _evaluate_poses(poses[sl], params, limits)

    if n_jobs > 1:
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            results = list(pool.map(work, shards))
    else:
        results = [work(sl) for sl in shards]
    for sl, (c, a, b) in results:
        count[sl], min_a[sl], min_b[sl] = c, a, b
    return WorkspaceScan(poses, count, min_a, min_b, grid)


# ---------------------------------------------------------------------------
# singular surfaces

SERIAL_FACTORS = ("u11", "u22", "u33")


@dataclass(frozen=True, eq=False)
class SurfacePatch:
    points: np.ndarray
    surface_kind: str
    space: str
    labels: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=object))
    residuals: np.ndarray = field(default_factory=lambda: np.zeros(0))
    skipped: int = 0
    rejected: int = 0

    def __len__(self):
        return len(self.points)

    def select(self, label) -> np.ndarray:
        return self.points[self.labels == label]


def _configurations(nodes, params, space, branch):
    """(pose, joints, cos_beta, sin_beta, evaluable) for stacked grid nodes."""
    if space == "jointspace":
        m, n = branch
        fk = forward_arrays(nodes[:, 0], nodes[:, 1], nodes[:, 2], params, m, n)
        ok = fk.status == 0
        return fk.pose, nodes, np.cos(fk.beta), np.sin(fk.beta), ok
    ik = inverse_arrays(nodes[:, 0], nodes[:, 1], nodes[:, 2], params, *branch)
    ok = ik.status == 0
    return nodes, ik.joints, ik.cos_beta, ik.sin_beta, ok


def surface_functions(nodes, params, kind, space, branch, labels):
    """Signed functions whose zero sets make up the requested surface.

    Returns {label: (values, evaluable)} for each requested label.  On a fixed
    inverse branch the serial factors never change sign (u_ii = +-sqrt of a
    discriminant), so workspace serial labels use the signed discriminants,
    which share the zero set and do cross it.
    """
    if kind not in ("serial", "parallel"):
        raise ValueError(f"kind must be 'serial' or 'parallel', got {kind!r}")
    out = {}
    if kind == "serial" and space == "workspace":
        disc12, disc3, ok_beta = slider_discriminants(nodes[:, 0], nodes[:, 1], nodes[:, 2], params, branch[0])
        signed = {"u11": disc12 / params.l2**2, "u22": disc12 / params.l2**2, "u33": disc3 / params.l9**2}
        for label in labels:
            out[label] = (signed[label], ok_beta)
        return out
    pose, joints, cb, sb, ok = _configurations(nodes, params, space, branch)
    ok = ok & (np.abs(sb) > EPS_SIN_BETA)
    ndet, fac = normalized_determinants(pose, joints, cb, sb, params)
    for label in labels:
        f = ndet if label == "detA" else fac[:, SERIAL_FACTORS.index(label)]
        out[label] = (f, ok & np.isfinite(f))
    return out


def surface_determinant(points, params, kind, space, branch):
    """Normalised |det| the postcondition is checked on, with an evaluability mask."""
    pose, joints, cb, sb, ok = _configurations(points, params, space, branch)
    ok = ok & (np.abs(sb) > EPS_SIN_BETA)
    ndet, fac = normalized_determinants(pose, joints, cb, sb, params)
    det = ndet if kind == "parallel" else np.prod(fac, axis=-1)
    return np.abs(det), ok & np.isfinite(det)


def _bisect(lo, hi, label, params, kind, space, branch, iterations):
    """Vectorised bisection of ``label``'s function along segments lo -> hi."""
    f_lo = surface_functions(lo, params, kind, space, branch, (label,))[label][0]
    alive = np.ones(len(lo), dtype=bool)
    for _ in range(iterations):
        mid = 0.5 * (lo + hi)
        f_mid, ok = surface_functions(mid, params, kind, space, branch, (label,))[label]
        alive &= ok
        same = np.sign(f_mid) == np.sign(f_lo)
        lo = np.where(same[:, None], mid, lo)
        f_lo = np.where(same, f_mid, f_lo)
        hi = np.where(same[:, None], hi, mid)
    return 0.5 * (lo + hi), alive


def singular_surface(
    params: StructuralParams,
    grid: GridSpec,
    kind: str = "parallel",
    space: str = "workspace",
    branch=None,
    factors=SERIAL_FACTORS,
    iterations: int = 60,
    tol: float = SURFACE_TOL,
) -> SurfacePatch:
    """Sample a singularity locus by sign changes along grid edges plus bisection.

    Joint-space surfaces use the forward branch ``branch`` (default (+1, +1)),
    workspace surfaces the inverse branch (default (+1, -1, +1, +1)).  A
    serial surface is the union of the zero sets of the factors u11, u22,
    u33 of det(B), each sampled separately because their product does not
    change sign where u11 and u22 vanish together.
    """
    if space not in ("workspace", "jointspace"):
        raise ValueError(f"space must be 'workspace' or 'jointspace', got {space!r}")
    expected = "joint" if space == "jointspace" else "pose"
    if grid.space != expected:
        raise ValueError(f"{space} surfaces need a {expected}-space grid")
    if branch is None:
        branch = PHYSICAL_FK_BRANCH if space == "jointspace" else PHYSICAL_IK_BRANCH
    branch = tuple(branch)

    nodes = grid.nodes()
    labels_wanted = ("detA",) if kind == "parallel" else tuple(factors)
    values = surface_functions(nodes, params, kind, space, branch, labels_wanted)
    shape = grid.shape
    flat_index = np.arange(len(nodes)).reshape(shape)

    points, labels = [], []
    skipped = np.zeros(len(nodes), dtype=bool)
    for label, (f, ok) in values.items():
        skipped |= ~ok
        okg = ok.reshape(shape)
        fg = f.reshape(shape)
        exact = ok & (f == 0)
        points.append(nodes[exact])
        labels.extend([label] * int(exact.sum()))
        for axis in range(3):
            a = [slice(None)] * 3
            b = [slice(None)] * 3
            a[axis] = slice(0, -1)
            b[axis] = slice(1, None)
            a, b = tuple(a), tuple(b)
            cross = okg[a] & okg[b] & (np.sign(fg[a]) * np.sign(fg[b]) < 0)
            if not cross.any():
                continue
            ia = flat_index[a][cross]
            ib = flat_index[b][cross]
            refined, alive = _bisect(nodes[ia], nodes[ib], label, params, kind, space, branch, iterations)
            points.append(refined[alive])
            labels.extend([label] * int(alive.sum()))

    pts = np.vstack(points) if points else np.zeros((0, 3))
    labels = np.array(labels, dtype=object)
    if len(pts):
        det, ok_pts = surface_determinant(pts, params, kind, space, branch)
        good = ok_pts & (det < tol)
    else:
        det = np.zeros(0)
        good = np.zeros(0, dtype=bool)
    return SurfacePatch(
        points=pts[good],
        surface_kind=kind,
        space=space,
        labels=labels[good],
        residuals=det[good],
        skipped=int(skipped.sum()),
        rejected=int((~good).sum()),
    )


# ---------------------------------------------------------------------------
# projection and export

PLANES = {"XZ": (0, 2), "YZ": (1, 2), "XY": (0, 1)}


def project(points, plane: str, resolution: float | None = None) -> np.ndarray:
    """Drop one coordinate and remove duplicates on a 2D lattice of spacing ``resolution``."""
    cols = PLANES[plane.upper()]
    pts = np.asarray(points, dtype=float).reshape(-1, 3)
    if len(pts) == 0:
        return np.zeros((0, 2))
    flat = pts[:, cols]
    if resolution:
        keys = np.round((flat - flat.min(axis=0)) / resolution).astype(np.int64)
    else:
        keys = flat
    _, first = np.unique(keys, axis=0, return_index=True)
    return flat[np.sort(first)]


WORKSPACE_COLUMNS = ("x", "y", "z", "inside", "ik_count", "min_abs_detA", "min_abs_detB")
PATCH_COLUMNS = ("x", "y", "z", "surface_kind", "space", "label")


def _records(data):
    """Normalise exportable data to (columns, list of row tuples)."""
    if isinstance(data, SurfacePatch):
        rows = [
            (*map(float, p), data.surface_kind, data.space, str(lab)) for p, lab in zip(data.points, data.labels)
        ]
        return PATCH_COLUMNS, rows
    if isinstance(data, WorkspaceScan) or (isinstance(data, (list, tuple)) and data and isinstance(data[0], WorkspacePoint)):
        rows = [
            (*map(float, pt.pose), int(pt.inside), int(pt.feasible_ik_count), float(pt.min_abs_detA), float(pt.min_abs_detB))
            for pt in data
        ]
        return WORKSPACE_COLUMNS, rows
    arr = np.asarray(data, dtype=float)
    if arr.size == 0:
        return WORKSPACE_COLUMNS, []
    cols = ("x", "y", "z") if arr.shape[-1] == 3 else ("u", "v")
    return cols, [tuple(map(float, row)) for row in arr.reshape(-1, len(cols))]


def _fmt(value):
    if isinstance(value, float):
        return repr(value)
    return str(value)


def export(data, fmt: str = "csv", columns=None) -> bytes:
    """Serialise workspace points, a surface patch, or a bare point array.

    ``columns`` renames the columns of a bare point array (e.g. ("y", "z")
    for a YZ projection).
    """
    cols, rows = _records(data)
    if columns is not None:
        cols = tuple(columns)
    fmt = fmt.lower()
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(cols)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])
        return buf.getvalue().encode()
    if fmt in ("json-lines", "jsonl", "json"):
        lines = [json.dumps(dict(zip(cols, row))) for row in rows]
        return ("\n".join(lines) + ("\n" if lines else "")).encode()
    if fmt == "ply":
        if cols[:3] != ("x", "y", "z"):
            raise ValueError("PLY export needs 3D points")
        header = ["ply", "format ascii 1.0", f"element vertex {len(rows)}"]
        for name, sample in zip(cols, rows[0] if rows else [0.0] * len(cols)):
            if isinstance(sample, str):
                continue
            ptype = "int" if isinstance(sample, int) else "double"
            header.append(f"property {ptype} {name}")
        header.append("end_header")
        body = [" ".join(_fmt(v) for v in row if not isinstance(v, str)) for row in rows]
        return ("\n".join(header + body) + "\n").encode()
    raise ValueError(f"unknown export format {fmt!r}")


def write_export(data, fmt: str, path, columns=None) -> None:
    payload = export(data, fmt, columns)
    try:
        with open(path, "wb") as fh:
            fh.write(payload)
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from exc


def read_workspace_csv(payload) -> list:
    """Parse CSV produced by ``export`` for workspace points."""
    text = payload.decode() if isinstance(payload, bytes) else payload
    reader = csv.DictReader(io.StringIO(text))
    if tuple(reader.fieldnames or ()) != WORKSPACE_COLUMNS:
        raise ValueError(f"unexpected columns {reader.fieldnames}")
    return [
        WorkspacePoint(
            PlatformPose(float(r["x"]), float(r["y"]), float(r["z"])),
            int(r["ik_count"]),
            float(r["min_abs_detA"]),
            float(r["min_abs_detB"]),
            bool(int(r["inside"])),
        )
        for r in reader
    ]
