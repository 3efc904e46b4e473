import numpy as np
import pytest

from tpmkit.model import ActuatedJoints, PlatformPose, StructuralParams

# measured slider positions of the prototype and its physical-branch pose
MEASURED_JOINTS = ActuatedJoints(-111.24, 244.70, 246.92)
MEASURED_POSE = PlatformPose(-80.3862, 66.7300, 307.2328)


@pytest.fixture
def params():
    return StructuralParams()


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_feasible_joints(rng, params, count, branch=(1, 1), low=-180.0, high=180.0):
    """Uniform joints in [low, high]^3 kept only where the forward branch is real."""
    from tpmkit.kinematics import forward_arrays

    out = []
    while sum(len(o) for o in out) < count:
        J = rng.uniform(low, high, size=(4 * count, 3))
        fk = forward_arrays(J[:, 0], J[:, 1], J[:, 2], params, *branch)
        out.append(J[fk.status == 0])
    return np.vstack(out)[:count]
