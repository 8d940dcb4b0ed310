"""The four experiment generators and their reference standard deviations.

Each :class:`TestModel` pairs an input sampler with a deterministic response
and a reference sigma_Y tagged with where it comes from (closed form,
published value, or an in-repo Monte Carlo estimate).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .distributions import (
    CVineSpec,
    GaussianCovariance,
    MarginalSpec,
    sample_correlated_uniforms,
    sample_cvine,
    sample_marginal,
    sample_mvn,
)
from .errors import ParameterError
from .metrics import summarize_runs
from .polybasis import Dataset
from .rng import as_rng, mix64

# ---------------------------------------------------------------------------
# Ishigami

ISHIGAMI_A = 7.0
ISHIGAMI_B = 0.1
ISHIGAMI_SD = math.sqrt(ISHIGAMI_A**2 / 8 + ISHIGAMI_B * math.pi**4 / 5
                        + ISHIGAMI_B**2 * math.pi**8 / 18 + 0.5)


def ishigami(x):
    x = np.atleast_2d(np.asarray(x, dtype=float))
    s1 = np.sin(x[:, 0])
    return s1 + ISHIGAMI_A * np.sin(x[:, 1]) ** 2 + ISHIGAMI_B * x[:, 2] ** 4 * s1


def ishigami_inputs(count, rng):
    return as_rng(rng).uniform(-math.pi, math.pi, (int(count), 3))


# ---------------------------------------------------------------------------
# dependent-input synthetic model

EXAMPLE2_THETA = (0.4, 0.6, 1.0)
EXAMPLE2_COV = np.array([
    [1.0, 0.0, 0.0, 0.0],
    [0.0, 1.0, 0.0, 0.0],
    [0.0, 0.0, 1.0, 0.3],
    [0.0, 0.0, 0.3, 1.0],
])
EXAMPLE2_PUBLISHED_SD = 1.655
# exact sigma_Y of the generator below (rational variance 489733/196875)
EXAMPLE2_EXACT_SD = math.sqrt(489733 / 196875)


def example2_inputs(count, rng):
    """X1..X6; the latent uniform behind X5 and X6 is not returned."""
    rng = as_rng(rng)
    count = int(count)
    t1, t2, t3 = EXAMPLE2_THETA
    gauss = sample_mvn(GaussianCovariance(EXAMPLE2_COV), 0.0, count, rng)
    latent, noise5, noise6 = rng.random((3, count))
    x5 = t1 * latent + noise5
    x6 = t2 * latent + t3 * latent**2 + noise6
    return np.column_stack([gauss, x5, x6])


def example2_response(x):
    x = np.atleast_2d(np.asarray(x, dtype=float))
    return x[:, 0] * x[:, 1] + x[:, 2] * x[:, 3] + x[:, 4] * x[:, 5]


# ---------------------------------------------------------------------------
# 23-bar truss response surface

TRUSS_NAMES = ("E1", "E2", "A1", "A2", "P1", "P2", "P3", "P4", "P5", "P6")
TRUSS_MARGINALS = (
    MarginalSpec.lognormal(2.1e11, 2.1e10),
    MarginalSpec.lognormal(2.1e11, 2.1e10),
    MarginalSpec.lognormal(2.0e-3, 2.0e-4),
    MarginalSpec.lognormal(1.0e-3, 1.0e-4),
) + tuple(MarginalSpec.gumbel_from_moments(5.0e4, 7.5e3) for _ in range(6))
TRUSS_THETA = 1.1
TRUSS_INTERCEPT = 2.8070
TRUSS_PUBLISHED_SD = 2.169
# mean over 100 runs of 1e5 draws each (seed 20240601), see scripts/truss_reference.py
TRUSS_MC_SD = 2.167505
TRUSS_MC_SE = 0.000636

_E1, _E2, _A1, _A2, _P1, _P2, _P3, _P4, _P5, _P6 = range(10)

# coefficients in standardized inputs; cross terms as (i, j, coefficient)
TRUSS_LINEAR = (1.2598, 0.2147, 1.2559, 0.2133, -0.1510, -0.4238, -0.6100, -0.6100, -0.4238, -0.1510)
TRUSS_SQUARE = (-0.1978, -0.0362, -0.2016, -0.0346, 0.0023, 0.0008, 0.0036, 0.0036, 0.0008, 0.0023)
TRUSS_CROSS = (
    (_E1, _E2, -0.0042),
    (_E1, _A1, -0.3022),
    (_E1, _A2, -0.0110),
    (_E1, _P1, 0.0381),
    (_E1, _P2, 0.0871),
    (_E1, _P3, 0.1232),
    (_E1, _P4, 0.1232),
    (_E1, _P5, 0.0871),
    (_E1, _P6, 0.0346),
    (_E2, _A1, 0.0041),
    (_A1, _A2, 0.0110),
    (_A1, _P1, 0.0261),
    (_A1, _P2, 0.0831),
    (_A1, _P3, 0.1172),
    (_A1, _P4, 0.1172),
    (_A1, _P5, 0.0832),
    (_A1, _P6, 0.0296),
)


def truss_standardize(x):
    x = np.atleast_2d(np.asarray(x, dtype=float))
    mean = np.array([s.mean for s in TRUSS_MARGINALS])
    sd = np.array([s.sd for s in TRUSS_MARGINALS])
    return (x - mean) / sd


def truss_response(x):
    """Quadratic response surface of the mid-span displacement (physical inputs)."""
    z = truss_standardize(x)
    y = TRUSS_INTERCEPT + z @ np.array(TRUSS_LINEAR) + z**2 @ np.array(TRUSS_SQUARE)
    for i, j, c in TRUSS_CROSS:
        y = y + c * z[:, i] * z[:, j]
    return y


def truss_inputs(count, rng):
    rng = as_rng(rng)
    count = int(count)
    out = np.empty((count, 10))
    for k in range(4):
        out[:, k] = sample_marginal(TRUSS_MARGINALS[k], count, rng)
    u = sample_cvine(CVineSpec.uniform_theta(6, TRUSS_THETA), count, rng)
    for k in range(6):
        out[:, 4 + k] = TRUSS_MARGINALS[4 + k].ppf(u[:, k])
    return out


# ---------------------------------------------------------------------------
# HIV basic reproduction number

HIV_NAMES = ("Q0", "beta0", "gamma", "beta1", "beta2", "n1", "n2", "theta_d", "alpha", "kappa")
HIV_RANGES = (
    (0.0261, 0.0319),
    (0.027, 0.033),
    (0.36, 0.44),
    (0.18, 0.22),
    (0.072, 0.088),
    (1.8, 2.2),
    (1.8, 2.2),
    (0.018, 0.022),
    (0.54, 0.66),
    (0.09, 0.11),
)
HIV_CORRELATIONS = ((3, 5, 0.3), (4, 6, 0.5))  # (beta1, n1), (beta2, n2)
HIV_PUBLISHED_SD = 0.252


def hiv_r0(x):
    """Basic reproduction number; the ``n_d`` factor is read as theta_d."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    q0, b0, g, b1, b2, n1, n2, td, al, ka = x.T
    num = (b0 * (1 - g) * td**2 + b1 * n1 * q0 * (td - ka) + b2 * n2 * al * q0
           + (1 - g) * (ka + al) * b0 * td)
    return num / (td * (td + ka) * (td + al))


def hiv_inputs(count, rng):
    rng = as_rng(rng)
    count = int(count)
    u = rng.random((count, 10))
    for i, j, rho in HIV_CORRELATIONS:
        pair = sample_correlated_uniforms(rho, count, rng)
        u[:, i], u[:, j] = pair[:, 0], pair[:, 1]
    lo = np.array([r[0] for r in HIV_RANGES])
    hi = np.array([r[1] for r in HIV_RANGES])
    return lo + (hi - lo) * u


# ---------------------------------------------------------------------------
# registry


@dataclass(frozen=True)
class TestModel:
    """An experiment: input sampler, response and reference sigma_Y."""

    __test__ = False  # not a pytest class

    name: str
    dimension: int
    inputs: Callable
    response: Callable
    reference_sd: float
    reference_source: str

    def sample(self, count, rng):
        if int(count) < 1:
            raise ParameterError("count must be >= 1")
        x = self.inputs(count, rng)
        return Dataset(x, self.response(x))


ISHIGAMI = TestModel("ishigami", 3, ishigami_inputs, ishigami, ISHIGAMI_SD, "analytic")
EXAMPLE2 = TestModel("example2", 6, example2_inputs, example2_response, EXAMPLE2_PUBLISHED_SD, "published")
TRUSS = TestModel("truss", 10, truss_inputs, truss_response, TRUSS_MC_SD, "monte-carlo")
HIV = TestModel("hiv", 10, hiv_inputs, hiv_r0, HIV_PUBLISHED_SD, "published")

MODELS = {m.name: m for m in (ISHIGAMI, EXAMPLE2, TRUSS, HIV)}


def get_model(name):
    try:
        return MODELS[name]
    except KeyError:
        raise ParameterError(f"unknown example {name!r}; choose from {sorted(MODELS)}") from None


def example2_sample(count, rng):
    return EXAMPLE2.sample(count, rng)


def truss_sample(count, rng):
    return TRUSS.sample(count, rng)


def hiv_sample(count, rng):
    return HIV.sample(count, rng)


def ishigami_sample(count, rng):
    return ISHIGAMI.sample(count, rng)


def monte_carlo_reference(model, runs, samples_per_run, seed=0):
    """Mean and standard error of per-run sample standard deviations.

    Run r draws from its own stream seeded with ``mix64(seed, r)``.
    """
    if int(runs) < 1 or int(samples_per_run) < 2:
        raise ParameterError("need runs >= 1 and samples_per_run >= 2")
    sds = []
    for r in range(int(runs)):
        y = model.sample(samples_per_run, mix64(seed, r)).outputs
        sds.append(float(np.std(y, ddof=1)))
    agg = summarize_runs(sds)
    return agg.mean, agg.se
