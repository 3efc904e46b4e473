"""POC-set calculus, mobility and coupling degree.

A POC set is modelled as a pair of linear subspaces of R^3: the span of the
independent translation directions and the span of the rotation axes.  Serial
composition is the span of the union; parallel composition is the subspace
intersection.  Ranks are taken by Gaussian elimination on unit-normalised
spanning vectors.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import reduce

import numpy as np

from .exceptions import NotAnSkc

RANK_TOL = 1e-10

X_AXIS = (1.0, 0.0, 0.0)
Y_AXIS = (0.0, 1.0, 0.0)
Z_AXIS = (0.0, 0.0, 1.0)


def _normalized_rows(vectors) -> np.ndarray:
    arr = np.asarray(vectors, dtype=float).reshape(-1, 3)
    norms = np.linalg.norm(arr, axis=1)
    keep = norms > RANK_TOL
    return arr[keep] / norms[keep, None]


def _rref(matrix: np.ndarray, tol: float = RANK_TOL):
    """Reduced row-echelon form with partial pivoting; returns (R, pivot_columns)."""
    R = np.array(matrix, dtype=float, copy=True)
    n_rows, n_cols = R.shape
    pivots = []
    row = 0
    for col in range(n_cols):
        if row >= n_rows:
            break
        best = row + int(np.argmax(np.abs(R[row:, col])))
        if abs(R[best, col]) <= tol:
            R[row:, col] = 0.0
            continue
        R[[row, best]] = R[[best, row]]
        R[row] /= R[row, col]
        for other in range(n_rows):
            if other != row and R[other, col] != 0.0:
                R[other] -= R[other, col] * R[row]
        pivots.append(col)
        row += 1
    return R, pivots


def span_basis(vectors) -> np.ndarray:
    """Orthonormal-free basis (k x 3, unit rows) of the span of ``vectors``."""
    rows = _normalized_rows(vectors)
    if rows.size == 0:
        return np.zeros((0, 3))
    R, pivots = _rref(rows)
    return _normalized_rows(R[: len(pivots)])


def rank(vectors) -> int:
    return len(span_basis(vectors))


def nullspace(matrix) -> np.ndarray:
    """Basis of the right null space, one vector per row."""
    M = np.asarray(matrix, dtype=float)
    n_cols = M.shape[1]
    if M.shape[0] == 0:
        return np.eye(n_cols)
    R, pivots = _rref(M)
    free = [c for c in range(n_cols) if c not in pivots]
    basis = []
    for f in free:
        vec = np.zeros(n_cols)
        vec[f] = 1.0
        for i, p in enumerate(pivots):
            vec[p] = -R[i, f]
        basis.append(vec)
    return np.array(basis).reshape(-1, n_cols)


def subspace_intersection(U, V) -> np.ndarray:
    U = span_basis(U)
    V = span_basis(V)
    if len(U) == 0 or len(V) == 0:
        return np.zeros((0, 3))
    # a @ U == c @ V  <=>  [U; -V]^T [a; c] = 0
    null = nullspace(np.vstack([U, -V]).T)
    if len(null) == 0:
        return np.zeros((0, 3))
    return span_basis(null[:, : len(U)] @ U)


def _axis_label(vec) -> str:
    for name, axis in (("X", X_AXIS), ("Y", Y_AXIS), ("Z", Z_AXIS)):
        if abs(abs(float(np.dot(vec, axis))) - 1.0) < 1e-9:
            return f"||{name}"
    return "||(" + ",".join(f"{c:.3g}" for c in vec) + ")"


def _plane_label(basis) -> str:
    normal = np.cross(basis[0], basis[1])
    for name, axis in (("X", X_AXIS), ("Y", Y_AXIS), ("Z", Z_AXIS)):
        if abs(abs(float(np.dot(normal, axis)) / np.linalg.norm(normal)) - 1.0) < 1e-9:
            return f"perp {name}"
    return "plane"


@dataclass(frozen=True, eq=False)
class PocSet:
    """Translation and rotation subspaces produced by a link."""

    translation: np.ndarray = field(default_factory=lambda: np.zeros((0, 3)))
    rotation: np.ndarray = field(default_factory=lambda: np.zeros((0, 3)))

    def __post_init__(self):
        object.__setattr__(self, "translation", span_basis(self.translation))
        object.__setattr__(self, "rotation", span_basis(self.rotation))

    @property
    def dim_translation(self) -> int:
        return len(self.translation)

    @property
    def dim_rotation(self) -> int:
        return len(self.rotation)

    @property
    def dim(self) -> int:
        return self.dim_translation + self.dim_rotation

    def __eq__(self, other):
        if not isinstance(other, PocSet):
            return NotImplemented
        return _same_span(self.translation, other.translation) and _same_span(self.rotation, other.rotation)

    def __hash__(self):
        return hash((self.dim_translation, self.dim_rotation))

    def _part(self, symbol, basis):
        k = len(basis)
        if k == 1:
            return f"{symbol}1({_axis_label(basis[0])})"
        if k == 2:
            return f"{symbol}2({_plane_label(basis)})"
        return f"{symbol}{k}"

    def __str__(self):
        return f"[{self._part('t', self.translation)}; {self._part('r', self.rotation)}]"

    __repr__ = __str__


def _same_span(U, V) -> bool:
    return len(U) == len(V) == rank(np.vstack([U, V]).reshape(-1, 3))


def poc(translation=(), rotation=()) -> PocSet:
    return PocSet(np.asarray(translation, dtype=float).reshape(-1, 3), np.asarray(rotation, dtype=float).reshape(-1, 3))


def poc_union(a: PocSet, b: PocSet) -> PocSet:
    """Serial composition: spans of the combined generators."""
    return PocSet(np.vstack([a.translation, b.translation]), np.vstack([a.rotation, b.rotation]))


def poc_intersect(a: PocSet, b: PocSet) -> PocSet:
    """Parallel composition: component-wise subspace intersection."""
    return PocSet(
        subspace_intersection(a.translation, b.translation),
        subspace_intersection(a.rotation, b.rotation),
    )


def independent_displacement_count(partial_poc: PocSet, next_branch: PocSet) -> int:
    return poc_union(partial_poc, next_branch).dim


@dataclass(frozen=True)
class LoopSpec:
    name: str
    joint_dof_sum: int
    actuated_count: int
    poc_terms: tuple

    def __post_init__(self):
        if self.joint_dof_sum < 1:
            raise ValueError("a loop needs at least one joint freedom")
        if self.actuated_count < 0:
            raise ValueError("actuated_count must be non-negative")
        if not self.poc_terms:
            raise ValueError("a loop needs at least one POC term")

    def xi(self) -> int:
        """Number of independent displacement equations of the loop."""
        terms = list(self.poc_terms)
        if len(terms) == 1:
            return terms[0].dim
        return independent_displacement_count(reduce(poc_union, terms[:-1]), terms[-1])


def dof(loops, total_joint_dof: int) -> int:
    return int(total_joint_dof) - sum(loop.xi() for loop in loops)


def constraint_degree(loop: LoopSpec, xi: int) -> int:
    return loop.joint_dof_sum - loop.actuated_count - xi


def coupling_degree(deltas) -> int:
    deltas = [int(d) for d in deltas]
    if sum(deltas) != 0:
        raise NotAnSkc(f"constraint degrees {deltas} do not sum to zero")
    total = sum(abs(d) for d in deltas)
    return total // 2


@dataclass(frozen=True)
class TopologyReport:
    xi_per_loop: tuple
    F: int
    delta_per_loop: tuple
    kappa: int
    poc_platform: PocSet
    loop_names: tuple = ()

    def lines(self):
        yield f"platform POC: {self.poc_platform}"
        for name, xi, delta in zip(self.loop_names, self.xi_per_loop, self.delta_per_loop):
            yield f"{name}: xi={xi} delta={delta:+d}"
        yield f"DOF F={self.F}"
        yield f"coupling degree kappa={self.kappa}"

    def to_dict(self) -> dict:
        return {
            "loops": list(self.loop_names),
            "xi": list(self.xi_per_loop),
            "F": self.F,
            "delta": list(self.delta_per_loop),
            "kappa": self.kappa,
            "platform_poc": {"t": self.poc_platform.dim_translation, "r": self.poc_platform.dim_rotation},
        }


# The parallelogram links swing about axes parallel to Y, so their output
# translation lies in the XZ plane; any direction off the YZ plane serves.
PARALLELOGRAM_DIRECTION = (1.0 / np.sqrt(2.0), 0.0, 1.0 / np.sqrt(2.0))


def tpm_branches():
    """POC sets of the building blocks of both hybrid chains."""
    planar = poc(translation=[Y_AXIS, Z_AXIS], rotation=[X_AXIS])
    pa1 = poc(translation=[PARALLELOGRAM_DIRECTION])
    chain_b_head = poc(translation=[X_AXIS, Y_AXIS, Z_AXIS], rotation=[Y_AXIS])
    pa2 = poc(translation=[PARALLELOGRAM_DIRECTION])
    return {
        "planar_2P4R": planar,
        "parallelogram_1": pa1,
        "HC_A": poc_union(planar, pa1),
        "HC_B_head": chain_b_head,
        "parallelogram_2": pa2,
        "HC_B": poc_union(chain_b_head, pa2),
    }


def tpm_loops():
    br = tpm_branches()
    loop1 = LoopSpec("LOOP1", joint_dof_sum=6, actuated_count=2, poc_terms=(br["planar_2P4R"],))
    loop2 = LoopSpec(
        "LOOP2",
        joint_dof_sum=5,
        actuated_count=1,
        poc_terms=(br["planar_2P4R"], br["parallelogram_1"], br["HC_B"]),
    )
    return [loop1, loop2]


def analyze(loops, chains) -> TopologyReport:
    """Topological report for a mechanism given its loops and its limb POC sets."""
    xis = tuple(loop.xi() for loop in loops)
    total = sum(loop.joint_dof_sum for loop in loops)
    deltas = tuple(constraint_degree(loop, xi) for loop, xi in zip(loops, xis))
    return TopologyReport(
        xi_per_loop=xis,
        F=dof(loops, total),
        delta_per_loop=deltas,
        kappa=coupling_degree(deltas),
        poc_platform=reduce(poc_intersect, chains),
        loop_names=tuple(loop.name for loop in loops),
    )


def tpm_topology() -> TopologyReport:
    br = tpm_branches()
    return analyze(tpm_loops(), [br["HC_A"], br["HC_B"]])
