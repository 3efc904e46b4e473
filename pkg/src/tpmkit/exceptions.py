"""Exception hierarchy shared by the kinematics, differential and workspace layers."""


class KinematicsError(ValueError):
    """Base class for configurations the closed-form solvers cannot handle."""


class CosOutOfRange(KinematicsError):
    pass


class DiscriminantNegative(KinematicsError):
    pass


class DegenerateDenominator(KinematicsError):
    pass


class BetaDegenerate(KinematicsError):
    """sin(beta) is zero, so the cot(beta) Jacobian entries are undefined."""


class NearParallelSingularity(KinematicsError):
    pass


class BranchFlip(KinematicsError):
    """A finite-difference stencil left the requested solution branch."""


class InconsistentConfiguration(KinematicsError):
    """Joints and pose do not satisfy the link-length constraints."""


class NotAnSkc(ValueError):
    """Constraint degrees of a sub-kinematic chain must sum to zero."""


class ParamsError(ValueError):
    pass


class IoFailure(OSError):
    pass
