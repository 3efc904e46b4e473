"""Input checks shared by the estimator wrappers and the CLI."""
import numpy as np
from sklearn.utils import check_array

from .exceptions import ParamsError
from .model import StructuralParams


def check_params(params) -> StructuralParams:
    if params is None:
        return StructuralParams()
    if isinstance(params, StructuralParams):
        return params
    if isinstance(params, dict):
        return StructuralParams.from_mapping(params)
    raise ParamsError(f"params must be StructuralParams, a mapping or None, got {type(params).__name__}")


def check_triplets(X, what="X") -> np.ndarray:
    """Coerce to a finite float (n_samples, 3) array; a single triplet is promoted."""
    arr = np.asarray(X, dtype=float) if not hasattr(X, "iloc") else X
    if getattr(arr, "ndim", 2) == 1:
        arr = np.asarray(arr).reshape(1, -1)
    arr = check_array(arr, dtype=np.float64, input_name=what)
    if arr.shape[1] != 3:
        raise ValueError(f"{what} must have 3 columns, got {arr.shape[1]}")
    return arr


def check_signs(signs, count, what="branch") -> tuple:
    signs = tuple(int(s) for s in signs)
    if len(signs) != count or any(s not in (1, -1) for s in signs):
        raise ValueError(f"{what} must be {count} signs from {{+1, -1}}, got {signs}")
    return signs
