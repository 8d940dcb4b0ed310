"""Forward-selection sparse PCE.

Starting from the constant, monomials of total degree <= p are screened by
the absolute Pearson correlation between their values and the current
residual. Candidates scoring below the threshold are discarded for good; the
best remaining one is orthonormalized against the selected basis and
appended, and the residual is updated. The loop ends when no candidate
survives screening. Coefficients of the final sparse basis come from a
least-squares fit, and the threshold itself is chosen by K-fold
cross-validation over a grid.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .crossval import complement, kfold_indices
from .errors import ParameterError, ShapeError
from .polybasis import DEPENDENCE_TOL, OrthonormalBasis, Rescaling, evaluate_monomials, total_degree_indices
from .regression import PceModel, fit_on_basis
from .rng import as_rng

log = logging.getLogger(__name__)

DEFAULT_THRESHOLD_GRID = tuple(float(v) for v in np.geomspace(0.01, 0.8, 40))

# a residual this small relative to the centered output counts as exhausted
_RESIDUAL_FLOOR = 1e-12


@dataclass(frozen=True)
class FssConfig:
    order: int
    threshold: float | str = "auto"
    cv_folds: int = 5
    threshold_grid: tuple = DEFAULT_THRESHOLD_GRID
    dependence_tolerance: float = DEPENDENCE_TOL
    score_target: str = "residual"

    def __post_init__(self):
        if int(self.order) < 0:
            raise ParameterError("order must be >= 0")
        if self.threshold != "auto":
            check_threshold(self.threshold)
        if int(self.cv_folds) < 2:
            raise ParameterError("cv_folds must be >= 2")
        grid = tuple(float(v) for v in self.threshold_grid)
        if not grid:
            raise ParameterError("threshold grid is empty")
        for v in grid:
            check_threshold(v)
        object.__setattr__(self, "threshold_grid", grid)
        if self.score_target not in ("residual", "raw"):
            raise ParameterError("score_target must be 'residual' or 'raw'")


def check_threshold(eps):
    if not (isinstance(eps, (int, float, np.floating)) and 0.0 < float(eps) < 1.0):
        raise ParameterError(f"threshold must lie in (0, 1), got {eps!r}")
    return float(eps)


@dataclass(frozen=True)
class TraceRow:
    iteration: int
    multi_index: tuple
    score: float
    surviving_count: int
    residual_rss: float


@dataclass
class FssResult:
    model: PceModel
    trace: list
    threshold: float
    warnings: list = field(default_factory=list)
    cv_curve: list | None = None

    @property
    def selected(self):
        """Selected multi-indices in selection order."""
        return [row.multi_index for row in self.trace]


def pearson_correlation(a, b):
    """Empirical Pearson correlation; 0 when either vector is constant."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise ShapeError(f"length mismatch: {a.shape} vs {b.shape}")
    if a.shape[0] < 2:
        raise ParameterError("need at least two observations")
    ac = a - a.mean()
    bc = b - b.mean()
    den = np.sqrt((ac @ ac) * (bc @ bc))
    if den == 0:
        return 0.0
    return float(np.clip((ac @ bc) / den, -1.0, 1.0))


class CandidatePool:
    """Monomial candidates evaluated on one training set.

    Built once per training set and reused for every threshold tried on it.
    """

    def __init__(self, inputs, outputs, order):
        x = np.asarray(inputs, dtype=float)
        self.outputs = np.asarray(outputs, dtype=float)
        self.m = x.shape[0]
        self.rescaling = Rescaling.fit(x)
        self.indices = total_degree_indices(x.shape[1], int(order))
        values = evaluate_monomials(self.indices, self.rescaling.apply(x))
        self.values = values  # column 0 is the constant
        cand = values[:, 1:]
        self.means = cand.mean(axis=0)
        self.centered = (cand - self.means).T.copy()  # one row per candidate
        self.centered_norms = np.sqrt(np.einsum("ij,ij->i", self.centered, self.centered))
        self.initial_norms = np.sqrt(np.einsum("ij,ij->j", cand, cand) / self.m)
        # columns that are constant on the data cannot be scored
        self.degenerate = self.centered_norms <= 1e-14 * np.maximum(self.initial_norms, 1e-300) * np.sqrt(self.m)

    def select(self, eps, score_target="residual", tol=DEPENDENCE_TOL):
        """Run the forward selection at threshold ``eps``.

        Returns (basis, trace, warnings).
        """
        m = self.m
        y = self.outputs
        n_cand = self.centered.shape[0]
        n_mono = self.indices.shape[0]

        y_centered = y - y.mean()
        y_scale = np.sqrt(y_centered @ y_centered)
        residual = y_centered.copy()
        target = y_centered

        ids = np.flatnonzero(~self.degenerate)
        scored_rows = self.centered[ids]
        scored_norms = self.centered_norms[ids]
        # running Gram-Schmidt remainders of the live candidates (already
        # orthogonal to the constant, so they start as the centered values)
        phi = scored_rows.copy()
        proj = np.zeros((len(ids), min(n_cand, m) + 1))
        proj[:, 0] = self.means[ids]

        basis_values = [np.ones(m)]
        first = np.zeros(n_mono)
        first[0] = 1.0
        basis_coefs = [first]
        trace, warnings = [], []
        if self.degenerate.any():
            warnings.append(f"{int(self.degenerate.sum())} candidates constant on the data; pruned")

        while ids.size:
            rss = residual @ residual
            if score_target == "residual":
                target = residual
                if not np.sqrt(rss) > _RESIDUAL_FLOOR * y_scale:
                    break
            elif y_scale == 0:
                break
            scores = np.abs(scored_rows @ target) / (scored_norms * np.sqrt(target @ target))
            keep = scores >= eps
            if not keep.all():
                ids, scored_rows, scored_norms, phi, proj, scores = (
                    ids[keep], scored_rows[keep], scored_norms[keep], phi[keep], proj[keep], scores[keep])
            if not ids.size:
                break
            surviving = ids.size
            pick = int(np.argmax(scores))  # first maximum = lowest graded position
            cand_id = int(ids[pick])
            score = float(scores[pick])
            phi_pick = phi[pick]
            proj_pick = proj[pick]
            rest = np.arange(ids.size) != pick
            ids, scored_rows, scored_norms, phi, proj = (
                ids[rest], scored_rows[rest], scored_norms[rest], phi[rest], proj[rest])

            norm = np.sqrt(phi_pick @ phi_pick / m)
            if not norm > tol * self.initial_norms[cand_id]:
                warnings.append(f"candidate {tuple(self.indices[cand_id + 1])} numerically dependent; skipped")
                continue
            psi = phi_pick / norm
            level = len(basis_values)
            coef = -proj_pick[:level] @ np.array(basis_coefs)
            coef[cand_id + 1] += 1.0
            coef /= norm
            basis_values.append(psi)
            basis_coefs.append(coef)

            residual = residual - (residual @ psi / m) * psi
            if ids.size:
                p = phi @ psi / m
                phi -= np.outer(p, psi)
                proj[:, level] = p
            trace.append(TraceRow(
                iteration=len(trace) + 1,
                multi_index=tuple(int(v) for v in self.indices[cand_id + 1]),
                score=score,
                surviving_count=int(surviving),
                residual_rss=float(residual @ residual),
            ))

        basis = OrthonormalBasis(self.indices, np.array(basis_coefs), np.column_stack(basis_values),
                                 self.rescaling).compact()
        return basis, trace, warnings

    def fit(self, eps, score_target="residual", tol=DEPENDENCE_TOL):
        basis, trace, warnings = self.select(eps, score_target, tol)
        return fit_on_basis(basis, self.outputs), trace, warnings


def fit_fss_pce(data, config, rng=None):
    """Fit a forward-selection sparse PCE.

    With ``config.threshold == "auto"`` the threshold is first chosen by
    :func:`cross_validate_threshold` using ``rng`` for the fold split.
    """
    if data.size < 2:
        raise ParameterError("need at least two observations")
    curve = None
    if config.threshold == "auto":
        eps, curve = cross_validate_threshold(data, config, rng)
    else:
        eps = check_threshold(config.threshold)
    pool = CandidatePool(data.inputs, data.outputs, config.order)
    model, trace, warnings = pool.fit(eps, config.score_target, config.dependence_tolerance)
    if not trace:
        warnings.append("no candidate passed screening; constant-only model")
        log.warning("fit_fss_pce: constant-only model at threshold %g", eps)
    return FssResult(model, trace, eps, warnings, curve)


CV_TIE_RTOL = 1e-12


def cross_validate_threshold(data, config, rng=None):
    """Choose the threshold minimizing the K-fold held-out squared error.

    Returns ``(threshold, curve)`` where ``curve`` lists ``(threshold, error)``
    in grid order. Ties go to the largest threshold; errors within
    ``CV_TIE_RTOL * sum(y**2)`` of the minimum count as ties so that rounding
    noise between exact fits does not decide.
    """
    m = data.size
    if m < config.cv_folds:
        raise ParameterError(f"cannot split {m} observations into {config.cv_folds} folds")
    rng = as_rng(0 if rng is None else rng)
    folds = kfold_indices(m, config.cv_folds, rng)
    grid = config.threshold_grid
    errors = np.zeros(len(grid))
    for fold in folds:
        train = complement(m, fold)
        pool = CandidatePool(data.inputs[train], data.outputs[train], config.order)
        x_test = data.inputs[fold]
        y_test = data.outputs[fold]
        cache = {}
        for g, eps in enumerate(grid):
            basis, _, _ = pool.select(eps, config.score_target, config.dependence_tolerance)
            key = basis.coefficients.shape, basis.indices.tobytes(), basis.coefficients.tobytes()
            if key not in cache:
                model = fit_on_basis(basis, pool.outputs)
                resid = y_test - model.predict(x_test)
                cache[key] = float(resid @ resid)
            errors[g] += cache[key]
    slack = CV_TIE_RTOL * float(data.outputs @ data.outputs)
    best = np.flatnonzero(errors <= errors.min() + slack)
    choice = int(best[-1])
    return grid[choice], [(float(e), float(v)) for e, v in zip(grid, errors)]


def trace_rows(trace):
    """Trace as plain dictionaries (CSV/JSON friendly)."""
    return [
        {
            "iteration": r.iteration,
            "multi_index": ";".join(str(v) for v in r.multi_index),
            "score": r.score,
            "surviving_count": r.surviving_count,
            "residual_rss": r.residual_rss,
        }
        for r in trace
    ]
