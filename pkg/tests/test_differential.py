import numpy as np
import pytest

from conftest import MEASURED_JOINTS, MEASURED_POSE, random_feasible_joints
from tpmkit.differential import (
    classify,
    classify_configuration,
    configuration_from_pose,
    finite_difference_jacobian,
    jacobians,
    normalized_determinants,
    velocity_forward,
)
from tpmkit.exceptions import BetaDegenerate, BranchFlip, InconsistentConfiguration, NearParallelSingularity
from tpmkit.kinematics import forward, inverse_all, inverse_beta
from tpmkit.model import IK_BRANCHES, ActuatedJoints, AngleState, PlatformPose, StructuralParams


def _fk_config(joints, params, branch=(1, 1)):
    sol = forward(ActuatedJoints(*joints), params, *branch)
    assert sol.ok
    return ActuatedJoints(*map(float, joints)), sol.pose, sol.angles


def _regular(jp, margin=1e-3):
    return abs(jp.normalized_detA) > margin and abs(jp.normalized_detB) > margin


def _regular_sample(params, rng, count):
    J = random_feasible_joints(rng, params, 4 * count)
    out = []
    for row in J:
        joints, pose, angles = _fk_config(row, params)
        if abs(angles.sin_beta) < 1e-2:
            continue
        jp = jacobians(joints, pose, params, angles)
        if _regular(jp):
            out.append((joints, pose, angles, jp))
        if len(out) == count:
            break
    return out


def test_measured_configuration_matches_finite_differences(params):
    joints, pose, angles = _fk_config(MEASURED_JOINTS, params)
    jp = jacobians(joints, pose, params, angles)
    assert np.all(np.isfinite(jp.A)) and np.all(np.isfinite(jp.B))
    fd = finite_difference_jacobian(joints, params, (1, 1), 1e-6)
    assert np.linalg.norm(jp.jacobian() - fd) / np.linalg.norm(fd) < 1e-6
    for k in range(3):
        u = np.eye(3)[k]
        assert np.allclose(velocity_forward(jp, u), fd[:, k], rtol=1e-6, atol=1e-9)


def test_b_is_diagonal_product(params, rng):
    for joints, pose, angles, jp in _regular_sample(params, rng, 50):
        assert np.count_nonzero(jp.B - np.diag(np.diag(jp.B))) == 0
        assert jp.detB == np.prod(np.diag(jp.B))
        assert jp.normalized_detB == pytest.approx(np.prod(np.diag(jp.B) / jp.link_lengths), rel=1e-12)


def test_consistency_identity(params, rng):
    # A xdot + B udot = 0 with the finite-difference xdot for unit udot
    for joints, pose, angles, jp in _regular_sample(params, rng, 100):
        fd = finite_difference_jacobian(joints, params)
        for k in range(3):
            xdot = fd[:, k]
            lhs = jp.A @ xdot + jp.B[:, k]
            assert np.linalg.norm(lhs) / (np.linalg.norm(jp.A, 2) * np.linalg.norm(xdot)) < 1e-6


def test_decoupling_entry(params, rng):
    for joints, pose, angles, jp in _regular_sample(params, rng, 100):
        assert abs(jp.jacobian()[1, 2]) < 1e-9
        fd = finite_difference_jacobian(joints, params)
        assert fd[1, 2] == 0.0


def test_zero_rates_zero_velocity(params):
    joints, pose, angles = _fk_config(MEASURED_JOINTS, params)
    jp = jacobians(joints, pose, params, angles)
    assert np.array_equal(velocity_forward(jp, np.zeros(3)), np.zeros(3))


def test_second_order_convergence(params):
    joints, pose, angles = _fk_config(MEASURED_JOINTS, params)
    exact = jacobians(joints, pose, params, angles).jacobian()
    e1 = np.linalg.norm(finite_difference_jacobian(joints, params, step=1e-1) - exact)
    e2 = np.linalg.norm(finite_difference_jacobian(joints, params, step=5e-2) - exact)
    assert 3.0 < e1 / e2 < 5.0


def test_branch_flip_at_reach_boundary(params):
    edge = ActuatedJoints(0.0, params.l3 + 2 * params.l2 - 1e-9, 50.0)
    with pytest.raises(BranchFlip):
        finite_difference_jacobian(edge, params, step=1e-6)
    with pytest.raises(BranchFlip):
        finite_difference_jacobian(ActuatedJoints(0.0, 1000.0, 0.0), params)


def test_beta_degenerate(params):
    pose = PlatformPose(params.b - params.d - params.l6, 0.0, 200.0)
    angles = AngleState(1.0, 0.0, 1.0, 0.0)
    with pytest.raises(BetaDegenerate):
        jacobians(ActuatedJoints(0, 0, 0), pose, params, angles)


def test_inconsistent_configuration(params):
    joints, pose, angles = _fk_config(MEASURED_JOINTS, params)
    with pytest.raises(InconsistentConfiguration):
        jacobians(joints._replace(yA3=joints.yA3 + 5), pose, params, angles)
    with pytest.raises(InconsistentConfiguration):
        configuration_from_pose(joints._replace(yA3=joints.yA3 + 5), pose, params)


def test_configuration_from_pose_recovers_angles(params):
    joints, pose, angles = _fk_config(MEASURED_JOINTS, params)
    rec = configuration_from_pose(joints, pose, params)
    assert np.allclose(
        [rec.cos_alpha, rec.sin_alpha, rec.cos_beta, rec.sin_beta],
        [angles.cos_alpha, angles.sin_alpha, angles.cos_beta, angles.sin_beta],
        atol=1e-9,
    )


# -- classification of the inverse solutions of the measured pose ------------------

def _ik_reports(params, tol=1e-8):
    reports = {}
    for col, sol in enumerate(inverse_all(MEASURED_POSE, params)[:8], start=1):
        jp = jacobians(sol.joints, MEASURED_POSE, params, sol.angles)
        reports[col] = classify(jp, tol)
    return reports


@pytest.mark.parametrize("col", [1, 2, 7, 8])
def test_parallel_links_are_parallel_singular(params, col):
    rep = _ik_reports(params)[col]
    assert rep.kind == "parallel"
    assert "rows12_dependent" in rep.parallel_cases
    assert rep.margins["abs_normalized_detA"] < 1e-8


@pytest.mark.parametrize("col", [5, 6])
def test_mirror_links_regular(params, col):
    rep = _ik_reports(params)[col]
    assert rep.kind == "regular"
    assert not rep.serial_cases and not rep.parallel_cases
    assert rep.margins["abs_normalized_detA"] > 1e-3


def test_table_joints_classify_the_same(params):
    # the 4-decimal table joints are consistent to ~1e-3 mm; rows 1-2 are still exactly parallel
    cb, sb = inverse_beta(MEASURED_POSE, params, 1)
    jp = jacobians(ActuatedJoints(124.6992, 244.6992, 246.9229), MEASURED_POSE, params, AngleState(0, 0, cb, sb), None)
    rep = classify(jp)
    assert "rows12_dependent" in rep.parallel_cases


def _quarter_alpha(params):
    joints = ActuatedJoints(-40.0, -40.0 + params.l3, 60.0)
    return _fk_config(joints, params)


def test_vertical_links_serial(params):
    joints, pose, angles = _quarter_alpha(params)
    assert abs(angles.cos_alpha) < 1e-15
    jp = jacobians(joints, pose, params, angles)
    assert jp.B[0, 0] == 0.0 and jp.B[1, 1] == 0.0 and jp.detB == 0.0
    rep = classify(jp)
    assert rep.is_serial
    assert rep.serial_cases == {"u11_zero", "u22_zero"}
    # both links vertical also makes rows 1 and 2 of A equal
    assert rep.kind == "mixed" and "rows12_dependent" in rep.parallel_cases
    assert set(rep.margins) >= {"abs_detA", "abs_detB", "u11", "u22", "u33"}


def test_vertical_links_velocity_map(params):
    joints, pose, angles = _quarter_alpha(params)
    jp = jacobians(joints, pose, params, angles)
    with pytest.raises(NearParallelSingularity):
        velocity_forward(jp, (1.0, 0.0, 0.0))
    # forward stays smooth there, so differences still evaluate
    fd = finite_difference_jacobian(joints, params, step=1e-4)
    assert np.all(np.isfinite(fd))


def test_regular_velocity_near_vertical_links(params):
    # slightly off the vertical configuration the map evaluates and matches differences
    joints = ActuatedJoints(-40.0, -40.0 + params.l3 + 20.0, 60.0)
    joints, pose, angles = _fk_config(joints, params)
    jp = jacobians(joints, pose, params, angles)
    fd = finite_difference_jacobian(joints, params)
    assert np.allclose(velocity_forward(jp, (1.0, 0.0, 0.0)), fd[:, 0], rtol=1e-6, atol=1e-8)


@pytest.mark.parametrize("scale", [0.01, 0.5, 3.0, 1000.0])
def test_classification_scale_consistent(scale):
    base = StructuralParams()
    scaled = base.scaled(scale)
    for col, sol in enumerate(inverse_all(MEASURED_POSE, base)[:8], start=1):
        if not sol.real:
            continue
        ref = classify(jacobians(sol.joints, MEASURED_POSE, base, sol.angles))
        pose = PlatformPose(*(scale * np.array(MEASURED_POSE)))
        joints = ActuatedJoints(*(scale * np.array(sol.joints)))
        rep = classify(jacobians(joints, pose, scaled, sol.angles, check_tol=1e-6 * scale**2))
        assert (rep.kind, rep.serial_cases, rep.parallel_cases) == (ref.kind, ref.serial_cases, ref.parallel_cases)
        assert rep.margins["abs_normalized_detA"] == pytest.approx(ref.margins["abs_normalized_detA"], abs=1e-12)


def test_vectorised_determinants_match(params, rng):
    for joints, pose, angles, jp in _regular_sample(params, rng, 30):
        ndet, factors = normalized_determinants(np.array(pose), np.array(joints), angles.cos_beta, angles.sin_beta, params)
        assert ndet == pytest.approx(jp.normalized_detA, abs=1e-12)
        assert np.allclose(factors, jp.normalized_serial_factors, atol=1e-12)


def test_report_lines(params):
    joints, pose, angles = _fk_config(MEASURED_JOINTS, params)
    lines = list(classify_configuration(joints, pose, params, angles).lines())
    assert lines[0] == "kind: regular"
    assert any(line.startswith("abs_detA:") for line in lines)


def test_ik_branch_order_matches_columns():
    assert IK_BRANCHES[4] == (1, -1, 1, 1)
