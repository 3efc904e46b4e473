"""scikit-learn compatible wrappers so the solvers drop into pipelines.

Nothing is learned: ``fit`` only validates the structural parameters and
branch selection.  Rows that have no real solution on the selected branch
come back as NaN.
"""
import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import check_params, check_signs, check_triplets
from .differential import SINGULARITY_TOL, normalized_determinants
from .kinematics import forward_arrays, inverse_arrays
from .model import IK_BRANCHES, PHYSICAL_FK_BRANCH, PHYSICAL_IK_BRANCH


class ForwardKinematics(TransformerMixin, BaseEstimator):
    """Map slider positions (yA1, yA2, yA3) to platform positions (x, y, z).

    Parameters
    ----------
    params : StructuralParams, dict or None
        Geometry; None means the prototype defaults.
    branch : tuple of int
        Assembly mode (m, n).
    match_tol : float
        Tolerance (mm) used by ``inverse_transform`` to pick the inverse
        solution that lies on this assembly mode.
    """

    def __init__(self, params=None, branch=tuple(PHYSICAL_FK_BRANCH), match_tol=1e-6):
        self.params = params
        self.branch = branch
        self.match_tol = match_tol

    def fit(self, X=None, y=None):
        self.params_ = check_params(self.params)
        self.branch_ = check_signs(self.branch, 2)
        self.n_features_in_ = 3
        return self

    def transform(self, X):
        check_is_fitted(self, "params_")
        X = check_triplets(X)
        return forward_arrays(X[:, 0], X[:, 1], X[:, 2], self.params_, *self.branch_).pose

    def inverse_transform(self, X):
        """Slider values that reproduce each pose on this assembly mode.

        The forward map is not injective (the rail-I five-bar has two working
        modes on one assembly mode); the first match in inverse-branch order
        is returned.
        """
        check_is_fitted(self, "params_")
        X = check_triplets(X)
        out = np.full_like(X, np.nan)
        found = np.zeros(len(X), dtype=bool)
        for br in IK_BRANCHES:
            ik = inverse_arrays(X[:, 0], X[:, 1], X[:, 2], self.params_, *br)
            cand = ik.joints
            with np.errstate(invalid="ignore"):
                back = forward_arrays(cand[:, 0], cand[:, 1], cand[:, 2], self.params_, *self.branch_).pose
                hit = ~found & (ik.status == 0) & (np.max(np.abs(back - X), axis=1) < self.match_tol)
            out[hit] = cand[hit]
            found |= hit
        return out


class InverseKinematics(TransformerMixin, BaseEstimator):
    """Map platform positions to slider positions on one sign branch (v, w1, w2, w3)."""

    def __init__(self, params=None, branch=tuple(PHYSICAL_IK_BRANCH)):
        self.params = params
        self.branch = branch

    def fit(self, X=None, y=None):
        self.params_ = check_params(self.params)
        self.branch_ = check_signs(self.branch, 4)
        self.n_features_in_ = 3
        return self

    def transform(self, X):
        check_is_fitted(self, "params_")
        X = check_triplets(X)
        ik = inverse_arrays(X[:, 0], X[:, 1], X[:, 2], self.params_, *self.branch_)
        return np.where((ik.status == 0)[:, None], ik.joints, np.nan)

    def inverse_transform(self, X):
        check_is_fitted(self, "params_")
        X = check_triplets(X)
        m, n = PHYSICAL_FK_BRANCH
        return forward_arrays(X[:, 0], X[:, 1], X[:, 2], self.params_, m, n).pose


class SingularityClassifier(BaseEstimator):
    """Label slider configurations as regular / serial / parallel / mixed / infeasible."""

    def __init__(self, params=None, branch=tuple(PHYSICAL_FK_BRANCH), tol=SINGULARITY_TOL):
        self.params = params
        self.branch = branch
        self.tol = tol

    def fit(self, X=None, y=None):
        self.params_ = check_params(self.params)
        self.branch_ = check_signs(self.branch, 2)
        self.n_features_in_ = 3
        self.classes_ = np.array(["infeasible", "mixed", "parallel", "regular", "serial"])
        return self

    def decision_function(self, X):
        """(|normalised det A|, smallest |normalised u_ii|) per row."""
        check_is_fitted(self, "params_")
        X = check_triplets(X)
        fk = forward_arrays(X[:, 0], X[:, 1], X[:, 2], self.params_, *self.branch_)
        ndet, factors = normalized_determinants(fk.pose, X, np.cos(fk.beta), np.sin(fk.beta), self.params_)
        return np.column_stack([np.abs(ndet), np.min(np.abs(factors), axis=1)])

    def predict(self, X):
        scores = self.decision_function(X)
        par = scores[:, 0] < self.tol
        ser = scores[:, 1] < self.tol
        labels = np.where(par & ser, "mixed", np.where(par, "parallel", np.where(ser, "serial", "regular")))
        return np.where(np.isnan(scores).any(axis=1), "infeasible", labels).astype(object)
