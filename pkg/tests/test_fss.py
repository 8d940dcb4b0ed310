import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fsspce.errors import ParameterError, ShapeError
from fsspce.fss import (
    DEFAULT_THRESHOLD_GRID,
    CandidatePool,
    FssConfig,
    cross_validate_threshold,
    fit_fss_pce,
    pearson_correlation,
    trace_rows,
)
from fsspce.models import EXAMPLE2, HIV, ISHIGAMI, ISHIGAMI_SD, TRUSS
from fsspce.polybasis import Dataset
from fsspce.rng import make_rng


def test_pearson_examples():
    assert pearson_correlation([1, 2, 3], [2, 4, 6]) == pytest.approx(1.0)
    assert pearson_correlation([1, 2, 3], [3, 2, 1]) == pytest.approx(-1.0)
    assert pearson_correlation([1, 2, 3, 4], [1, 3, 2, 4]) == pytest.approx(0.8, rel=1e-14)
    assert pearson_correlation([1, 1, 1], [1, 2, 3]) == 0.0
    with pytest.raises(ShapeError):
        pearson_correlation([1, 2], [1, 2, 3])


def test_config_validation():
    for bad in (0.0, 1.0, -0.2, 1.5):
        with pytest.raises(ParameterError):
            FssConfig(2, threshold=bad)
    with pytest.raises(ParameterError):
        FssConfig(2, cv_folds=1)
    with pytest.raises(ParameterError):
        FssConfig(2, threshold_grid=(0.1, 1.2))
    with pytest.raises(ParameterError):
        FssConfig(2, score_target="signed")


def test_default_grid():
    g = np.array(DEFAULT_THRESHOLD_GRID)
    assert len(g) == 40 and g[0] == pytest.approx(0.01) and g[-1] == pytest.approx(0.8)
    assert np.allclose(np.diff(np.log(g)), np.log(80) / 39)


def test_single_term_target():
    x = np.random.default_rng(0).uniform(-1, 1, (50, 3))
    y = x[:, 0]
    res = fit_fss_pce(Dataset(x, y), FssConfig(2, threshold=0.1))
    assert res.selected == [(1, 0, 0)]
    assert res.trace[0].residual_rss < 1e-20
    assert res.model.variance == pytest.approx(y.var(), rel=1e-8)


def test_constant_only_warning():
    rng = np.random.default_rng(1)
    x = rng.uniform(size=(30, 2))
    y = rng.standard_normal(30)
    res = fit_fss_pce(Dataset(x, y), FssConfig(1, threshold=0.99))
    assert res.selected == [] and res.model.size == 1
    assert res.model.mean == pytest.approx(y.mean())
    assert any("constant-only" in w for w in res.warnings)


def test_raw_mode_scores_against_output():
    x = np.random.default_rng(2).uniform(-1, 1, (60, 2))
    y = x[:, 0] + 0.5 * x[:, 1]
    raw = fit_fss_pce(Dataset(x, y), FssConfig(2, threshold=0.05, score_target="raw"))
    for row in raw.trace:
        # scores of raw monomials: the input scaling does not change them
        e = x[:, 0] ** row.multi_index[0] * x[:, 1] ** row.multi_index[1]
        assert row.score == pytest.approx(abs(pearson_correlation(e, y)), rel=1e-10)


def test_trace_invariants_ishigami():
    d = ISHIGAMI.sample(300, make_rng(3))
    pool = CandidatePool(d.inputs, d.outputs, 8)
    basis, trace, _ = pool.select(0.02)
    assert np.abs(basis.gram() - np.eye(basis.size)).max() < 1e-8
    counts = [r.surviving_count for r in trace]
    assert all(a > b for a, b in zip(counts, counts[1:]))
    rss = [r.residual_rss for r in trace]
    assert all(b <= a * (1 + 1e-12) for a, b in zip(rss, rss[1:]))
    assert len({r.multi_index for r in trace}) == len(trace)
    assert basis.size == len(trace) + 1
    rows = trace_rows(trace)
    assert rows[0]["multi_index"].count(";") == 2


def test_gram_identity_at_every_iteration():
    d = EXAMPLE2.sample(60, make_rng(4))
    pool = CandidatePool(d.inputs, d.outputs, 3)
    full, trace, _ = pool.select(0.05)
    for eps in (0.05, 0.1, 0.2, 0.4):
        basis, _, _ = pool.select(eps)
        assert np.abs(basis.gram() - np.eye(basis.size)).max() < 1e-8


@pytest.mark.parametrize("model,order", [(ISHIGAMI, 6), (EXAMPLE2, 2), (TRUSS, 2), (HIV, 2)])
@pytest.mark.parametrize("seed", [5, 6, 7])
def test_term_count_non_increasing_in_threshold_raw_scores(model, order, seed):
    # scores against the fixed output: the surviving set only shrinks as eps grows
    d = model.sample(80, make_rng(seed))
    pool = CandidatePool(d.inputs, d.outputs, order)
    counts = [len(pool.select(eps, "raw")[1]) for eps in DEFAULT_THRESHOLD_GRID]
    assert all(a >= b for a, b in zip(counts, counts[1:]))


@pytest.mark.parametrize("model,order", [(ISHIGAMI, 6), (EXAMPLE2, 2), (TRUSS, 2), (HIV, 2)])
def test_term_count_ends_of_grid_residual_scores(model, order):
    d = model.sample(80, make_rng(5))
    pool = CandidatePool(d.inputs, d.outputs, order)
    grid = DEFAULT_THRESHOLD_GRID
    assert len(pool.select(grid[0])[1]) >= len(pool.select(grid[-1])[1])


@pytest.mark.xfail(strict=True, reason="residual scoring is path dependent: a larger threshold can prune a "
                                       "term whose removal later lets two others through")
def test_term_count_non_increasing_in_threshold_residual_scores():
    d = ISHIGAMI.sample(80, make_rng(6))
    pool = CandidatePool(d.inputs, d.outputs, 6)
    counts = [len(pool.select(eps)[1]) for eps in DEFAULT_THRESHOLD_GRID]
    assert all(a >= b for a, b in zip(counts, counts[1:]))


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**32 - 1), st.lists(st.floats(0.01, 1000.0), min_size=3, max_size=3))
def test_selection_scale_invariant(seed, scales):
    d = ISHIGAMI.sample(60, make_rng(seed))
    a = fit_fss_pce(d, FssConfig(4, threshold=0.05))
    b = fit_fss_pce(Dataset(d.inputs * np.array(scales), d.outputs), FssConfig(4, threshold=0.05))
    assert a.selected == b.selected


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(5, 40), st.integers(1, 4), st.sampled_from([0.01, 0.05, 0.3]))
def test_sparsity_bound(seed, m, p, eps):
    rng = np.random.default_rng(seed)
    x = rng.uniform(size=(m, 3))
    y = rng.standard_normal(m)
    res = fit_fss_pce(Dataset(x, y), FssConfig(p, threshold=eps))
    assert len(res.trace) <= min(m - 1, math.comb(3 + p, 3) - 1)


def test_cv_zero_noise_picks_largest_exact_threshold():
    x = np.random.default_rng(6).uniform(-1, 1, (60, 2))
    y = 1 + x[:, 0] + x[:, 0] * x[:, 1]
    grid = (0.01, 0.05, 0.1, 0.2, 0.95)
    eps, curve = cross_validate_threshold(Dataset(x, y), FssConfig(2, threshold_grid=grid), make_rng(0))
    errors = dict(curve)
    exact = [e for e in grid if errors[e] < 1e-20]
    assert exact and eps == max(exact)


def test_cv_needs_enough_rows():
    d = Dataset(np.arange(4.0), np.arange(4.0))
    with pytest.raises(ParameterError):
        cross_validate_threshold(d, FssConfig(1, cv_folds=5), make_rng(0))


def test_cv_reproducible():
    d = ISHIGAMI.sample(100, make_rng(7))
    a = fit_fss_pce(d, FssConfig(5), make_rng(1))
    b = fit_fss_pce(d, FssConfig(5), make_rng(1))
    assert a.threshold == b.threshold and a.selected == b.selected
    assert np.array_equal(a.model.coefficients, b.model.coefficients)


def test_ishigami_accuracy_single_fit():
    d = ISHIGAMI.sample(1000, make_rng(8))
    res = fit_fss_pce(d, FssConfig(8), make_rng(9))
    assert abs(res.model.sd - ISHIGAMI_SD) / ISHIGAMI_SD < 0.05


def _min_cv(order, seed):
    d = ISHIGAMI.sample(200, make_rng(seed))
    _, curve = cross_validate_threshold(d, FssConfig(order), make_rng(seed + 1))
    return min(e for _, e in curve)


def test_cv_error_lower_at_order_four_than_three():
    assert _min_cv(4, 10) < _min_cv(3, 10)


def test_cv_error_order_nine_not_worse_than_eight():
    # higher order achieves smaller (or equal) minimum CV error, 5 seeds on average
    e8 = np.mean([_min_cv(8, s) for s in range(20, 25)])
    e9 = np.mean([_min_cv(9, s) for s in range(20, 25)])
    assert e9 <= e8 * 1.05
