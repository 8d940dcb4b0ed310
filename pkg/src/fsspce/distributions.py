"""Input distributions for the experiment generators.

Marginals (uniform, normal, lognormal, Gumbel), correlated Gaussian vectors,
the Gumbel-Hougaard pair copula with a single-root C-vine sampler, and
bivariate uniforms with a prescribed Pearson correlation through a Gaussian
copula.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import ndtr, ndtri

from .errors import CovarianceError, DomainError, NumericError, ParameterError
from .rng import as_rng

EULER_GAMMA = 0.57721566490153286061

# open interval used for copula arguments and the h-inverse bracket
_U_MIN = 1e-12
_U_MAX = 1.0 - 1e-12


def open_uniform(rng, shape):
    """Uniform draws on the open interval (0, 1)."""
    u = rng.random(shape)
    return np.clip(u, _U_MIN, _U_MAX)


# ---------------------------------------------------------------------------
# marginals


@dataclass(frozen=True)
class MarginalSpec:
    """A univariate marginal distribution.

    ``kind`` is one of ``uniform(a, b)``, ``normal(mean, sd)``,
    ``lognormal(mean, sd)`` or ``gumbel(alpha, beta)``. Lognormal parameters
    are the mean and standard deviation of the lognormal variable itself.
    """

    kind: str
    params: tuple

    def __post_init__(self):
        p = tuple(float(v) for v in self.params)
        object.__setattr__(self, "params", p)
        if len(p) != 2 or not all(math.isfinite(v) for v in p):
            raise ParameterError(f"{self.kind} needs two finite parameters, got {self.params}")
        a, b = p
        if self.kind == "uniform":
            if not a < b:
                raise ParameterError(f"uniform requires a < b, got ({a}, {b})")
        elif self.kind == "normal":
            if b <= 0:
                raise ParameterError("normal requires sd > 0")
        elif self.kind == "lognormal":
            if a <= 0 or b <= 0:
                raise ParameterError("lognormal requires mean > 0 and sd > 0")
        elif self.kind == "gumbel":
            if b <= 0:
                raise ParameterError("gumbel requires beta > 0")
        else:
            raise ParameterError(f"unknown marginal kind {self.kind!r}")

    @classmethod
    def uniform(cls, a, b):
        return cls("uniform", (a, b))

    @classmethod
    def normal(cls, mean, sd):
        return cls("normal", (mean, sd))

    @classmethod
    def lognormal(cls, mean, sd):
        return cls("lognormal", (mean, sd))

    @classmethod
    def gumbel(cls, alpha, beta):
        return cls("gumbel", (alpha, beta))

    @classmethod
    def gumbel_from_moments(cls, mean, sd):
        return cls("gumbel", gumbel_params_from_moments(mean, sd))

    @property
    def mean(self):
        a, b = self.params
        if self.kind == "uniform":
            return 0.5 * (a + b)
        if self.kind == "gumbel":
            return a + EULER_GAMMA * b
        return a

    @property
    def sd(self):
        a, b = self.params
        if self.kind == "uniform":
            return (b - a) / math.sqrt(12.0)
        if self.kind == "gumbel":
            return math.pi * b / math.sqrt(6.0)
        return b

    def lognormal_underlying(self):
        """(mu_N, sigma_N) of log X for a lognormal marginal."""
        mean, sd = self.params
        s2 = math.log1p((sd / mean) ** 2)
        return math.log(mean) - 0.5 * s2, math.sqrt(s2)

    def ppf(self, u):
        """Inverse CDF."""
        u = np.asarray(u, dtype=float)
        a, b = self.params
        if self.kind == "uniform":
            return a + (b - a) * u
        if self.kind == "normal":
            return a + b * ndtri(u)
        if self.kind == "lognormal":
            mu, sigma = self.lognormal_underlying()
            return np.exp(mu + sigma * ndtri(u))
        return a - b * np.log(-np.log(u))

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        a, b = self.params
        if self.kind == "uniform":
            return np.clip((x - a) / (b - a), 0.0, 1.0)
        if self.kind == "normal":
            return ndtr((x - a) / b)
        if self.kind == "lognormal":
            mu, sigma = self.lognormal_underlying()
            with np.errstate(divide="ignore"):
                return np.where(x > 0, ndtr((np.log(np.maximum(x, 1e-300)) - mu) / sigma), 0.0)
        return np.exp(-np.exp(-(x - a) / b))


def gumbel_params_from_moments(mean, sd):
    """Gumbel location/scale with the given mean and standard deviation.

    >>> alpha, beta = gumbel_params_from_moments(0.0, math.pi / math.sqrt(6))
    >>> round(beta, 12), round(alpha, 12) == round(-EULER_GAMMA, 12)
    (1.0, True)
    """
    if not sd > 0:
        raise ParameterError(f"standard deviation must be positive, got {sd}")
    beta = math.sqrt(6.0) * sd / math.pi
    return mean - EULER_GAMMA * beta, beta


def sample_marginal(spec, count, rng):
    """Draw ``count`` i.i.d. values from ``spec``."""
    if int(count) < 1:
        raise ParameterError("count must be >= 1")
    rng = as_rng(rng)
    return spec.ppf(open_uniform(rng, int(count)))


# ---------------------------------------------------------------------------
# Gaussian vectors


@dataclass(frozen=True)
class GaussianCovariance:
    matrix: np.ndarray

    def __post_init__(self):
        cov = np.array(self.matrix, dtype=float)
        if cov.ndim != 2 or cov.shape[0] != cov.shape[1]:
            raise CovarianceError(f"covariance must be square, got shape {cov.shape}")
        if not np.allclose(cov, cov.T, rtol=0, atol=1e-12 * max(1.0, np.abs(cov).max())):
            raise CovarianceError("covariance is not symmetric")
        cov.flags.writeable = False
        object.__setattr__(self, "matrix", cov)

    @property
    def dimension(self):
        return self.matrix.shape[0]

    def factor(self):
        """Lower factor L with L @ L.T == matrix."""
        try:
            return np.linalg.cholesky(self.matrix)
        except np.linalg.LinAlgError:
            pass
        # singular but PSD matrices fall back to an eigen factor
        w, v = np.linalg.eigh(self.matrix)
        if w.min() < -1e-10 * max(1.0, abs(w).max()):
            raise CovarianceError(f"covariance is not positive semi-definite (eigenvalue {w.min():.3g})")
        return v * np.sqrt(np.clip(w, 0.0, None))


def sample_mvn(cov, mean, count, rng):
    """Rows are i.i.d. draws from N(mean, cov)."""
    if not isinstance(cov, GaussianCovariance):
        cov = GaussianCovariance(cov)
    mean = np.broadcast_to(np.asarray(mean, dtype=float), (cov.dimension,))
    L = cov.factor()
    rng = as_rng(rng)
    z = rng.standard_normal((int(count), cov.dimension))
    return z @ L.T + mean


# ---------------------------------------------------------------------------
# Gumbel-Hougaard copula


def _check_open_unit(name, x):
    x = np.asarray(x, dtype=float)
    if np.any(~(x > 0.0)) or np.any(~(x < 1.0)):
        raise DomainError(f"{name} must lie strictly inside (0, 1)")
    return x


@dataclass(frozen=True)
class GumbelHougaardCopula:
    """Bivariate Gumbel-Hougaard copula with dependence parameter theta >= 1."""

    theta: float

    def __post_init__(self):
        if not (math.isfinite(self.theta) and self.theta >= 1.0):
            raise ParameterError(f"theta must be >= 1, got {self.theta}")

    @property
    def kendall_tau(self):
        return 1.0 - 1.0 / self.theta

    def cdf(self, u, v):
        u = _check_open_unit("u", u)
        v = _check_open_unit("v", v)
        t = self.theta
        a = (-np.log(u)) ** t + (-np.log(v)) ** t
        return np.exp(-(a ** (1.0 / t)))

    def _log_h(self, v, u):
        t = self.theta
        x = -np.log(u)
        y = -np.log(v)
        a = x**t + y**t
        return -(a ** (1.0 / t)) + (1.0 / t - 1.0) * np.log(a) + (t - 1.0) * np.log(x) + x

    def h(self, v, u):
        """Conditional distribution P(V <= v | U = u), i.e. dC/du."""
        u = _check_open_unit("u", u)
        v = _check_open_unit("v", v)
        return np.exp(self._log_h(v, u))

    def density(self, u, v):
        u = _check_open_unit("u", u)
        v = _check_open_unit("v", v)
        return np.exp(self._log_density(u, v))

    def _log_density(self, u, v):
        t = self.theta
        x = -np.log(u)
        y = -np.log(v)
        a = x**t + y**t
        a1t = a ** (1.0 / t)
        return (
            -a1t + x + y + (t - 1.0) * (np.log(x) + np.log(y))
            + (1.0 / t - 2.0) * np.log(a) + np.log(a1t + t - 1.0)
        )

    def h_inverse(self, w, u, tol=1e-10, max_iter=200):
        """Solve h(v | u) = w for v.

        h is strictly increasing in v; the root is bracketed on
        (1e-12, 1 - 1e-12) and refined by Newton steps (derivative = copula
        density) that fall back to bisection whenever they leave the bracket.
        A root outside the bracket is returned as the nearer bracket end.
        """
        w = _check_open_unit("w", w)
        u = _check_open_unit("u", u)
        w, u = np.broadcast_arrays(w, u)
        scalar = w.ndim == 0
        w = np.atleast_1d(w).astype(float).copy()
        u = np.atleast_1d(u).astype(float).copy()
        if self.theta == 1.0:
            v = w.copy()
            return v[0] if scalar else v

        lo = np.full_like(w, _U_MIN)
        hi = np.full_like(w, _U_MAX)
        v = w.copy()
        # roots beyond the bracket (extreme w with extreme u) clamp to its ends
        under = self.h(lo, u) >= w
        over = self.h(hi, u) <= w
        v[under] = _U_MIN
        v[over] = _U_MAX
        active = ~(under | over)
        for _ in range(max_iter):
            va, ua, wa = v[active], u[active], w[active]
            f = np.exp(self._log_h(va, ua)) - wa
            done = np.abs(f) <= tol
            below = f < 0
            lo_a = np.where(below, va, lo[active])
            hi_a = np.where(below, hi[active], va)
            dens = np.exp(self._log_density(ua, va))
            with np.errstate(divide="ignore", invalid="ignore"):
                step = va - f / dens
            bad = ~np.isfinite(step) | (step <= lo_a) | (step >= hi_a)
            step = np.where(bad, 0.5 * (lo_a + hi_a), step)
            step = np.where(done, va, step)
            lo[active], hi[active], v[active] = lo_a, hi_a, step
            idx = np.flatnonzero(active)
            active[idx[done | (hi_a - lo_a <= 4 * np.spacing(step))]] = False
            if not active.any():
                break
        if active.any():
            raise NumericError("h-inverse did not converge")
        return v[0] if scalar else v


def gh_copula_cdf(c, u, v):
    return c.cdf(u, v)


def gh_h_inverse(c, w, u_cond):
    return c.h_inverse(w, u_cond)


@dataclass(frozen=True)
class CVineSpec:
    """Single-root C-vine: pair copulas c_{1j}, j = 2..d, all attached to variable 1."""

    pair_copulas: tuple = field(default_factory=tuple)

    def __post_init__(self):
        pcs = tuple(
            c if isinstance(c, GumbelHougaardCopula) else GumbelHougaardCopula(float(c))
            for c in self.pair_copulas
        )
        object.__setattr__(self, "pair_copulas", pcs)

    @classmethod
    def uniform_theta(cls, dimension, theta):
        if dimension < 1:
            raise ParameterError("dimension must be >= 1")
        return cls(tuple(GumbelHougaardCopula(theta) for _ in range(dimension - 1)))

    @property
    def dimension(self):
        return len(self.pair_copulas) + 1


def sample_cvine(spec, count, rng):
    """Uniform samples from the C-vine; column 0 is the root."""
    rng = as_rng(rng)
    count = int(count)
    u = np.empty((count, spec.dimension))
    u[:, 0] = open_uniform(rng, count)
    w = open_uniform(rng, (count, spec.dimension - 1))
    for j, cop in enumerate(spec.pair_copulas, start=1):
        u[:, j] = cop.h_inverse(w[:, j - 1], u[:, 0])
    return u


# ---------------------------------------------------------------------------
# Gaussian copula for correlated uniforms


def gaussian_rho_for_uniform_pearson(target):
    """Gaussian correlation whose copula gives uniforms with Pearson ``target``."""
    return 2.0 * math.sin(math.pi * target / 6.0)


def sample_correlated_uniforms(pearson_target, count, rng):
    """Bivariate uniforms with Pearson correlation ``pearson_target``."""
    if not abs(pearson_target) < 1:
        raise ParameterError(f"target correlation must lie in (-1, 1), got {pearson_target}")
    rho = gaussian_rho_for_uniform_pearson(pearson_target)
    z = sample_mvn(GaussianCovariance(np.array([[1.0, rho], [rho, 1.0]])), 0.0, count, rng)
    return np.clip(ndtr(z), _U_MIN, _U_MAX)
