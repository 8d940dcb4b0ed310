"""K-fold splitting shared by threshold and model-size selection."""

import numpy as np

from .errors import ParameterError
from .rng import as_rng


def kfold_indices(m, k, rng):
    """Split ``range(m)`` into ``k`` folds by a seeded permutation.

    Fold sizes differ by at most one. Returns a list of sorted index arrays.
    """
    m, k = int(m), int(k)
    if k < 2:
        raise ParameterError("at least two folds are required")
    if m < k:
        raise ParameterError(f"cannot split {m} observations into {k} folds")
    perm = as_rng(rng).permutation(m)
    return [np.sort(part) for part in np.array_split(perm, k)]


def complement(m, fold):
    mask = np.ones(m, dtype=bool)
    mask[fold] = False
    return np.flatnonzero(mask)
