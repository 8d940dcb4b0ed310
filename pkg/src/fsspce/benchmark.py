"""Gram-Schmidt + least-angle regression sparse PCE (the comparison method).

Every monomial of total degree <= p is orthonormalized up front; LAR then
orders the orthonormal members, the number of members kept is chosen by
K-fold cross-validation (each fold rebuilds the basis and the path on its
own training rows), and the kept members are refit by least squares.
Under-sampled designs (m < P + 1) are run anyway, with dependent members
dropped, so that the method's failure modes can be observed.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from math import comb

import numpy as np
from scipy.linalg import solve_triangular

from .crossval import complement, kfold_indices
from .errors import ConditioningError, ParameterError
from .fss import CV_TIE_RTOL, TraceRow
from .polybasis import DEPENDENCE_TOL, gram_schmidt_basis, total_degree_indices
from .regression import RANK_RCOND, fit_on_basis, lar_path
from .rng import as_rng

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class BenchmarkConfig:
    order: int
    cv_folds: int = 5
    dependence_tolerance: float = DEPENDENCE_TOL

    def __post_init__(self):
        if int(self.order) < 0:
            raise ParameterError("order must be >= 0")
        if int(self.cv_folds) < 2:
            raise ParameterError("cv_folds must be >= 2")

    def basis_size(self, n):
        return comb(n + int(self.order), n)


@dataclass
class BenchmarkResult:
    model: object
    trace: list
    steps: int
    cv_curve: list
    dropped: list = field(default_factory=list)
    warnings: list = field(default_factory=list)
    undersampled: bool = False

    @property
    def selected(self):
        return [row.multi_index for row in self.trace]


def prefix_errors(train_design, train_y, test_design, test_y, rcond=RANK_RCOND):
    """Held-out SSE of least-squares fits on growing column prefixes.

    Entry t uses the first t + 1 columns of the designs. Prefixes whose
    training design is rank deficient get an infinite error.
    """
    a = np.asarray(train_design, dtype=float)
    k = min(a.shape[1], a.shape[0])
    a = a[:, :k]
    b = np.asarray(test_design, dtype=float)[:, :k]
    q, r = np.linalg.qr(a)
    qty = q.T @ train_y
    diag = np.abs(np.diag(r))
    ok = diag > rcond * max(diag.max(initial=0.0), 1e-300)
    errors = np.full(k, np.inf)
    with np.errstate(over="ignore", invalid="ignore"):
        for t in range(k):
            if not ok[t]:
                break
            theta = solve_triangular(r[: t + 1, : t + 1], qty[: t + 1])
            resid = test_y - b[:, : t + 1] @ theta
            sse = resid @ resid
            errors[t] = sse if np.isfinite(sse) else np.inf
    return errors


def lar_fold_errors(train_features, train_y, test_features, test_y):
    """LAR on one training fold, then held-out errors along its entry order.

    Returns (errors, path); ``errors[t]`` is the SSE with the intercept plus
    the first ``t`` entered columns.
    """
    path = lar_path(train_features, train_y)
    order = list(path.entry_order)
    ones_train = np.ones((len(train_y), 1))
    ones_test = np.ones((len(test_y), 1))
    train_design = np.hstack([ones_train, np.asarray(train_features)[:, order]])
    test_design = np.hstack([ones_test, np.asarray(test_features)[:, order]])
    return prefix_errors(train_design, train_y, test_design, test_y), path


def _choose_steps(fold_errors, scale=0.0):
    """Smallest step count whose summed CV error is minimal.

    Errors within ``CV_TIE_RTOL * scale`` of the minimum are ties (rounding
    noise between exact fits).
    """
    depth = min(len(e) for e in fold_errors)
    total = np.sum([e[:depth] for e in fold_errors], axis=0)
    finite = np.isfinite(total)
    if not finite.any():
        return 0, total
    best = np.flatnonzero(total <= total[finite].min() + CV_TIE_RTOL * scale)
    return int(best[0]), total


def select_lar_model_size(features, response, folds):
    """Cross-validated number of LAR steps for a fixed feature matrix.

    Returns (steps, cv_errors, path) where ``path`` is the LAR path on all
    rows and the chosen model is the intercept plus its first ``steps``
    entries, refit by least squares.
    """
    x = np.asarray(features, dtype=float)
    y = np.asarray(response, dtype=float)
    m = len(y)
    fold_errors = []
    for fold in folds:
        train = complement(m, fold)
        errs, _ = lar_fold_errors(x[train], y[train], x[fold], y[fold])
        fold_errors.append(errs)
    steps, total = _choose_steps(fold_errors, float(y @ y))
    return steps, total, lar_path(x, y)


def fit_benchmark_sparse_pce(data, config, rng=None):
    x, y = data.inputs, data.outputs
    m, n = x.shape
    indices = total_degree_indices(n, config.order)
    warnings = []
    undersampled = m < len(indices)
    if undersampled:
        warnings.append(f"under-sampled: {m} observations for {len(indices)} basis polynomials")
        log.warning("benchmark: %s", warnings[-1])

    folds = kfold_indices(m, config.cv_folds, as_rng(0 if rng is None else rng))
    fold_errors = []
    for fold in folds:
        train = complement(m, fold)
        basis, _ = gram_schmidt_basis(x[train], indices, tol=config.dependence_tolerance, drop_dependent=True)
        features = basis.values[:, 1:]
        test_features = basis.evaluate(x[fold])[:, 1:]
        errs, _ = lar_fold_errors(features, y[train], test_features, y[fold])
        fold_errors.append(errs)
    steps, total = _choose_steps(fold_errors, float(y @ y))

    basis, dropped = gram_schmidt_basis(x, indices, tol=config.dependence_tolerance, drop_dependent=True)
    if dropped:
        warnings.append(f"{len(dropped)} monomials numerically dependent; dropped")
    # member b of the basis was built from monomial kept[b]
    dropped_set = set(dropped)
    kept = [i for i in range(len(indices)) if i not in dropped_set]
    path = lar_path(basis.values[:, 1:], y)
    warnings.extend(path.warnings)
    entries = list(path.entry_order[:steps])
    members = [0] + [1 + j for j in entries]
    scores = list(path.entry_scores[:steps])

    while True:
        try:
            model = fit_on_basis(basis.subset(members), y)
            break
        except ConditioningError as err:
            col = max(int(err.column), 1)
            warnings.append(f"member {members[col]} rank deficient in refit; removed")
            del members[col]
            del scores[col - 1]

    fitted_rss = []
    design = basis.values[:, members]
    qmat, _ = np.linalg.qr(design)
    qty = qmat.T @ y
    rss0 = y @ y
    for t in range(1, len(members)):
        fitted_rss.append(float(rss0 - qty[: t + 1] @ qty[: t + 1]))
    trace = [
        TraceRow(
            iteration=t + 1,
            multi_index=tuple(int(v) for v in indices[kept[members[t + 1]]]),
            score=float(scores[t]),
            surviving_count=int(basis.size - 1 - t),
            residual_rss=max(fitted_rss[t], 0.0),
        )
        for t in range(len(members) - 1)
    ]
    model = type(model)(model.basis.compact(), model.coefficients)
    curve = [(t, float(e)) for t, e in enumerate(total)]
    return BenchmarkResult(model, trace, len(members) - 1, curve, [tuple(indices[i]) for i in dropped],
                           warnings, undersampled)
