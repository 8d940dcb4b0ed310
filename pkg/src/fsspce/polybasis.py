"""Monomial candidate sets and orthonormalization under the empirical measure.

All inner products are sample averages, ``<a, b> = (1/m) sum_j a_j b_j``, so
the constant polynomial has unit norm. Polynomials are carried in two forms:
their values on the training inputs (for inner products) and coefficient
vectors over a list of monomials (for evaluation on new inputs). Gram-Schmidt
updates both forms in lockstep.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from math import comb

import numpy as np

from .errors import DependenceError, ParameterError, ShapeError

DEPENDENCE_TOL = 1e-10


def total_degree_indices(n, p):
    """All exponent vectors of length ``n`` with total degree <= ``p``.

    Ordered by total degree; within a degree, by decreasing exponents read
    left to right, so ``(1, 0)`` comes before ``(0, 1)``.

    Returns
    -------
    ndarray of shape (C(n + p, n), n), dtype int
    """
    if n < 1:
        raise ParameterError("number of inputs must be >= 1")
    if p < 0:
        raise ParameterError("order must be >= 0")
    rows = []
    for degree in range(p + 1):
        # stars and bars; reversed so higher exponents on earlier inputs come first
        level = []
        for bars in combinations(range(degree + n - 1), n - 1):
            edges = (-1,) + bars + (degree + n - 1,)
            level.append(tuple(edges[k + 1] - edges[k] - 1 for k in range(n)))
        level.sort(reverse=True)
        rows.extend(level)
    out = np.array(rows, dtype=int).reshape(-1, n)
    assert len(out) == comb(n + p, n)
    return out


def evaluate_monomials(indices, inputs):
    """Column t is prod_k inputs[:, k] ** indices[t, k]."""
    indices = np.atleast_2d(np.asarray(indices, dtype=int))
    x = np.atleast_2d(np.asarray(inputs, dtype=float))
    if indices.shape[1] != x.shape[1]:
        raise ShapeError(f"multi-indices have {indices.shape[1]} inputs, data has {x.shape[1]}")
    m = x.shape[0]
    out = np.ones((m, indices.shape[0]))
    for k in range(x.shape[1]):
        top = int(indices[:, k].max(initial=0))
        if top == 0:
            continue
        powers = np.ones((m, top + 1))
        for d in range(1, top + 1):
            powers[:, d] = powers[:, d - 1] * x[:, k]
        out *= powers[:, indices[:, k]]
    return out


def empirical_inner_product(a, b):
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise ShapeError(f"length mismatch: {a.shape} vs {b.shape}")
    return float(a @ b) / a.shape[0]


def empirical_norm(a):
    return np.sqrt(empirical_inner_product(a, a))


@dataclass(frozen=True)
class Dataset:
    inputs: np.ndarray
    outputs: np.ndarray

    def __post_init__(self):
        x = np.array(self.inputs, dtype=float)
        if x.ndim == 1:
            x = x[:, None]
        y = np.array(self.outputs, dtype=float).reshape(-1)
        if x.ndim != 2 or x.shape[0] != y.shape[0]:
            raise ShapeError(f"inputs {x.shape} and outputs {y.shape} disagree")
        if x.shape[0] < 1 or x.shape[1] < 1:
            raise ShapeError("dataset needs at least one observation and one input")
        if not (np.isfinite(x).all() and np.isfinite(y).all()):
            raise ParameterError("dataset contains non-finite values")
        x.flags.writeable = False
        y.flags.writeable = False
        object.__setattr__(self, "inputs", x)
        object.__setattr__(self, "outputs", y)

    @property
    def size(self):
        return self.inputs.shape[0]

    @property
    def dimension(self):
        return self.inputs.shape[1]

    def subset(self, rows):
        return Dataset(self.inputs[rows], self.outputs[rows])


@dataclass(frozen=True)
class Rescaling:
    """Per-column affine map of [lower, upper] onto [-1, 1]."""

    lower: np.ndarray
    upper: np.ndarray

    @classmethod
    def fit(cls, inputs):
        """Pure scaling by the column's largest magnitude: [-s, s] -> [-1, 1].

        Keeping zero fixed means every monomial is only multiplied by a
        constant, so correlation scores (and hence sparse selections) are the
        ones of the raw monomials. A shifting map would turn x^2 into a mix of
        x^2, x and 1 and change which terms a sparse fit needs.
        """
        x = np.asarray(inputs, dtype=float)
        s = np.abs(x).max(axis=0)
        return cls(-s, s)

    @classmethod
    def fit_range(cls, inputs):
        """Min/max map of each column onto [-1, 1] (shifts as well as scales)."""
        x = np.asarray(inputs, dtype=float)
        return cls(x.min(axis=0), x.max(axis=0))

    @classmethod
    def identity(cls, n):
        return cls(-np.ones(n), np.ones(n))

    def apply(self, inputs):
        x = np.atleast_2d(np.asarray(inputs, dtype=float))
        lower = np.asarray(self.lower, dtype=float)
        if x.shape[1] != lower.shape[0]:
            raise ShapeError(f"expected {lower.shape[0]} inputs, got {x.shape[1]}")
        span = np.asarray(self.upper, dtype=float) - lower
        # a degenerate span (all-zero column) maps to a constant
        span = np.where(span > 0, span, 1.0)
        return 2.0 * (x - lower) / span - 1.0


def _frozen(a):
    a = np.array(a, dtype=float)
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class OrthonormalBasis:
    """Empirically orthonormal polynomials.

    Attributes
    ----------
    indices : (K, n) int array
        Monomials the members are written in; row 0 is the constant.
    coefficients : (B, K) array
        Member b equals ``sum_k coefficients[b, k] * monomial_k(rescale(x))``.
    values : (m, B) array or None
        Members evaluated on the training inputs (absent for deserialized bases).
    rescaling : Rescaling
    """

    indices: np.ndarray
    coefficients: np.ndarray
    values: np.ndarray | None
    rescaling: Rescaling

    def __post_init__(self):
        idx = np.array(self.indices, dtype=int)
        idx.flags.writeable = False
        object.__setattr__(self, "indices", idx)
        object.__setattr__(self, "coefficients", _frozen(np.atleast_2d(self.coefficients)))
        if self.values is not None:
            object.__setattr__(self, "values", _frozen(self.values))

    @property
    def size(self):
        return self.coefficients.shape[0]

    @property
    def dimension(self):
        return self.indices.shape[1]

    def evaluate(self, inputs):
        """Members evaluated at new inputs, shape (k, B)."""
        monomials = evaluate_monomials(self.indices, self.rescaling.apply(inputs))
        return monomials @ self.coefficients.T

    def gram(self):
        v = self.values
        return v.T @ v / v.shape[0]

    def subset(self, members):
        members = list(members)
        values = None if self.values is None else self.values[:, members]
        return OrthonormalBasis(self.indices, self.coefficients[members], values, self.rescaling)

    def compact(self):
        """Drop monomials that no member uses (the constant is always kept)."""
        used = np.any(self.coefficients != 0, axis=0)
        used[0] = True
        return OrthonormalBasis(self.indices[used], self.coefficients[:, used], self.values, self.rescaling)


def modified_gram_schmidt(values, coefficients=None, *, tol=DEPENDENCE_TOL, drop_dependent=False):
    """Orthonormalize the columns of ``values`` in order.

    Each column has the projections on all previously accepted members
    removed one at a time, then is divided by its empirical norm. The
    coefficient rows (default: identity) receive the same operations.

    A column whose remaining norm falls to ``tol`` times its initial norm or
    below is numerically dependent: a :class:`DependenceError` is raised, or
    with ``drop_dependent`` the column is skipped.

    Returns
    -------
    q_values : (m, B) array
    q_coefficients : (B, K) array
    kept : list of int
        Positions of the accepted columns.
    dropped : list of int
    """
    w = np.array(values, dtype=float).T.copy()  # one row per vector
    count, m = w.shape
    # with identity coefficients row i only has entries in columns 0..i
    triangular = coefficients is None
    c = np.eye(count) if triangular else np.array(coefficients, dtype=float)
    if c.shape[0] != count:
        raise ShapeError("one coefficient row per vector is required")
    initial = np.sqrt(np.einsum("ij,ij->i", w, w) / m)
    kept, dropped = [], []
    for i in range(count):
        norm = np.sqrt(w[i] @ w[i] / m)
        if not norm > tol * initial[i]:
            if not drop_dependent:
                raise DependenceError(i)
            dropped.append(i)
            continue
        w[i] /= norm
        c[i] /= norm
        kept.append(i)
        if i + 1 < count:
            proj = w[i + 1 :] @ w[i] / m
            w[i + 1 :] -= np.outer(proj, w[i])
            width = i + 1 if triangular else c.shape[1]
            c[i + 1 :, :width] -= np.outer(proj, c[i, :width])
    return w[kept].T, c[kept], kept, dropped


def gram_schmidt_basis(data_inputs, indices, *, rescale=True, tol=DEPENDENCE_TOL, drop_dependent=False):
    """Orthonormal basis from a monomial list (row 0 must be the constant).

    Returns the basis and the positions of dropped monomials.
    """
    indices = np.asarray(indices, dtype=int)
    if indices.shape[0] == 0 or indices[0].any():
        raise ParameterError("the first multi-index must be the constant")
    x = np.asarray(data_inputs, dtype=float)
    rescaling = Rescaling.fit(x) if rescale else Rescaling.identity(x.shape[1])
    e = evaluate_monomials(indices, rescaling.apply(x))
    q, coef, kept, dropped = modified_gram_schmidt(e, tol=tol, drop_dependent=drop_dependent)
    if kept[:1] != [0]:
        raise DependenceError(0, "constant polynomial vanishes on the data")
    return OrthonormalBasis(indices, coef, q, rescaling), dropped


@dataclass(frozen=True)
class Orthogonalized:
    values: np.ndarray
    coefficients: np.ndarray
    residual_norm: float
    initial_norm: float


def orthogonalize_against(candidate_values, candidate_coefficients, basis_values, basis_coefficients,
                          *, tol=DEPENDENCE_TOL):
    """Remove the projections of one candidate on every basis member, then normalize.

    Returns an :class:`Orthogonalized` member, or ``None`` when the residual
    norm is at most ``tol`` times the candidate's initial norm.
    """
    phi = np.array(candidate_values, dtype=float)
    coef = np.array(candidate_coefficients, dtype=float)
    q = np.asarray(basis_values, dtype=float)
    qc = np.asarray(basis_coefficients, dtype=float)
    m = phi.shape[0]
    if q.shape[0] != m:
        raise ShapeError(f"candidate has {m} values, basis has {q.shape[0]}")
    initial = np.sqrt(phi @ phi / m)
    for k in range(q.shape[1]):
        proj = phi @ q[:, k] / m
        phi -= proj * q[:, k]
        coef -= proj * qc[k]
    norm = np.sqrt(phi @ phi / m)
    if not norm > tol * initial:
        return None
    return Orthogonalized(phi / norm, coef / norm, float(norm), float(initial))
