"""Coefficient estimation, least-angle regression and moment recovery."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solve_triangular

from .errors import ConditioningError, ParameterError, ShapeError
from .polybasis import Dataset, OrthonormalBasis

log = logging.getLogger(__name__)

RANK_RCOND = 1e-12


@dataclass(frozen=True)
class PceModel:
    basis: OrthonormalBasis
    coefficients: np.ndarray

    def __post_init__(self):
        theta = np.array(self.coefficients, dtype=float).reshape(-1)
        if theta.shape[0] != self.basis.size:
            raise ShapeError(f"{theta.shape[0]} coefficients for {self.basis.size} basis members")
        theta.flags.writeable = False
        object.__setattr__(self, "coefficients", theta)

    @property
    def size(self):
        return self.coefficients.shape[0]

    @property
    def mean(self):
        return float(self.coefficients[0])

    @property
    def variance(self):
        return float(np.sum(self.coefficients[1:] ** 2))

    @property
    def sd(self):
        return float(np.sqrt(self.variance))

    def monomial_coefficients(self):
        """The expansion collapsed onto the basis' monomial list."""
        return self.basis.coefficients.T @ self.coefficients

    def predict(self, inputs):
        return predict(self, inputs)

    def fitted_values(self):
        return self.basis.values @ self.coefficients


def solve_least_squares(design, response, rcond=RANK_RCOND):
    """QR solve of ``design @ theta ~= response``; raises on rank deficiency."""
    a = np.asarray(design, dtype=float)
    y = np.asarray(response, dtype=float)
    m, q = a.shape
    if m < q:
        raise ParameterError(f"{m} observations cannot determine {q} coefficients")
    qmat, r = np.linalg.qr(a)
    diag = np.abs(np.diag(r))
    if q:
        bad = np.flatnonzero(diag <= rcond * diag.max())
        if diag.max() == 0 or bad.size:
            raise ConditioningError(int(bad[0]) if bad.size else 0)
    return solve_triangular(r, qmat.T @ y)


def least_squares_fit(basis, data):
    """Coefficients minimizing the squared residual on the training data."""
    if basis.values is not None and basis.values.shape[0] != data.size:
        raise ShapeError("basis was built on a different dataset")
    return fit_on_basis(basis, data.outputs)


def fit_on_basis(basis, outputs):
    """Least-squares coefficients for ``outputs`` on the basis' training values."""
    if basis.values is None:
        raise ParameterError("basis carries no training evaluations")
    return PceModel(basis, solve_least_squares(basis.values, outputs))


def predict(model, inputs):
    x = np.atleast_2d(np.asarray(inputs, dtype=float))
    if x.shape[1] != model.basis.dimension:
        raise ShapeError(f"model has {model.basis.dimension} inputs, got {x.shape[1]}")
    return model.basis.evaluate(x) @ model.coefficients


def moments_from_coefficients(model):
    """(mean, variance) read off the coefficients of an orthonormal expansion."""
    return model.mean, model.variance


# ---------------------------------------------------------------------------
# least-angle regression


@dataclass(frozen=True)
class LarPath:
    """Result of :func:`lar_path`.

    ``coefficients[t]`` holds the coefficients (original feature scale) after
    ``t`` steps, with exactly the first ``t`` entries of ``entry_order`` active;
    ``intercepts[t]`` is the matching intercept and ``entry_scores[t]`` the
    absolute correlation between the entering column and the residual.
    """

    entry_order: list
    coefficients: np.ndarray
    intercepts: np.ndarray
    entry_scores: list = field(default_factory=list)
    excluded: list = field(default_factory=list)
    warnings: list = field(default_factory=list)

    @property
    def steps(self):
        return len(self.entry_order)


def lar_path(features, response, max_steps=None):
    """Least-angle regression path (no lasso modification).

    Columns are centered and scaled to unit Euclidean norm internally and the
    response is centered. The path runs for ``min(q, m - 1)`` steps (fewer if
    ``max_steps`` is given or columns turn out collinear); the last step moves
    all the way to the least-squares fit on the active set.
    """
    x = np.asarray(features, dtype=float)
    y = np.asarray(response, dtype=float).reshape(-1)
    if x.ndim != 2 or x.shape[0] != y.shape[0]:
        raise ShapeError(f"features {x.shape} and response {y.shape} disagree")
    m, q = x.shape
    warnings = []

    x_mean = x.mean(axis=0)
    xc = x - x_mean
    norms = np.sqrt(np.einsum("ij,ij->j", xc, xc))
    scale_ref = max(norms.max(initial=0.0), 1e-300)
    usable = norms > 1e-12 * scale_ref
    excluded = [int(j) for j in np.flatnonzero(~usable)]
    if excluded:
        warnings.append(f"zero-variance columns excluded: {excluded}")
        log.warning("lar_path: zero-variance columns excluded: %s", excluded)
    cols = np.flatnonzero(usable)
    xs = xc[:, cols] / norms[cols]
    y_mean = y.mean()
    yc = y - y_mean

    limit = min(len(cols), m - 1)
    if max_steps is not None:
        limit = min(limit, int(max_steps))

    beta = np.zeros(len(cols))
    path = [beta.copy()]
    active = []
    signs = []
    chol = np.zeros((0, 0))
    inactive = np.ones(len(cols), dtype=bool)
    mu = np.zeros(m)

    c = xs.T @ yc
    scores = []
    while len(active) < limit:
        if not active:
            cand = np.flatnonzero(inactive)
            j = int(cand[np.argmax(np.abs(c[cand]))])
        # add j to the active set, growing the Cholesky factor of X_A^T X_A
        xj = xs[:, j]
        if active:
            b = xs[:, active].T @ xj
            l = solve_triangular(chol, b, lower=True)
            d2 = xj @ xj - l @ l
        else:
            l = np.zeros(0)
            d2 = xj @ xj
        inactive[j] = False
        if d2 <= 1e-12:
            warnings.append(f"column {int(cols[j])} collinear with the active set; skipped")
            excluded.append(int(cols[j]))
            limit = min(limit, len(active) + int(inactive.sum()))
            cand = np.flatnonzero(inactive)
            if not cand.size:
                break
            j = int(cand[np.argmax(np.abs(c[cand]))])
            continue
        k = len(active)
        new = np.zeros((k + 1, k + 1))
        new[:k, :k] = chol
        new[k, :k] = l
        new[k, k] = np.sqrt(d2)
        chol = new
        active.append(j)
        signs.append(np.sign(c[j]) if c[j] != 0 else 1.0)
        res_norm = np.sqrt((yc - mu) @ (yc - mu))
        scores.append(float(abs(c[j]) / res_norm) if res_norm > 0 else 0.0)

        s = np.array(signs)
        z = solve_triangular(chol, solve_triangular(chol, s, lower=True), lower=True, trans="T")
        aa = 1.0 / np.sqrt(s @ z)
        u = xs[:, active] @ z * aa
        big_c = np.abs(c[active]).max()

        cand = np.flatnonzero(inactive)
        if len(active) >= limit or not cand.size:
            gamma = big_c / aa
            nxt = None
        else:
            a = xs[:, cand].T @ u
            cj = c[cand]
            with np.errstate(divide="ignore", invalid="ignore"):
                g = np.concatenate([(big_c - cj) / (aa - a), (big_c + cj) / (aa + a)])
            g[~np.isfinite(g) | (g <= 1e-14 * max(big_c, 1e-300) / aa)] = np.inf
            pos = int(np.argmin(g))
            gamma = min(g[pos], big_c / aa)
            nxt = int(cand[pos % len(cand)])
        mu += gamma * u
        beta[active] += gamma * aa * z
        path.append(beta.copy())
        c = xs.T @ (yc - mu)
        if nxt is None:
            break
        j = nxt

    coef = np.zeros((len(path), q))
    coef[:, cols] = np.array(path) / norms[cols]
    intercepts = y_mean - coef @ x_mean
    return LarPath([int(cols[j]) for j in active], coef, intercepts, scores, excluded, warnings)
