import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fsspce.benchmark import (
    BenchmarkConfig,
    fit_benchmark_sparse_pce,
    prefix_errors,
    select_lar_model_size,
)
from fsspce.crossval import complement, kfold_indices
from fsspce.errors import ParameterError
from fsspce.fss import FssConfig, fit_fss_pce
from fsspce.models import EXAMPLE2, HIV
from fsspce.polybasis import Dataset, evaluate_monomials, gram_schmidt_basis, total_degree_indices
from fsspce.regression import fit_on_basis, lar_path
from fsspce.rng import make_rng


def test_config_validation():
    with pytest.raises(ParameterError):
        BenchmarkConfig(-1)
    with pytest.raises(ParameterError):
        BenchmarkConfig(2, cv_folds=1)
    assert BenchmarkConfig(2).basis_size(6) == 28
    assert BenchmarkConfig(4).basis_size(10) == 1001


def test_prefix_errors_match_direct_fits():
    rng = np.random.default_rng(0)
    a, b = rng.standard_normal((30, 4)), rng.standard_normal((10, 4))
    ya, yb = rng.standard_normal(30), rng.standard_normal(10)
    errs = prefix_errors(a, ya, b, yb)
    for t in range(4):
        theta = np.linalg.lstsq(a[:, : t + 1], ya, rcond=None)[0]
        r = yb - b[:, : t + 1] @ theta
        assert errs[t] == pytest.approx(r @ r, rel=1e-10)


def test_prefix_errors_rank_deficient_prefix_is_infinite():
    a = np.ones((6, 3))
    a[:, 2] = np.arange(6)
    errs = prefix_errors(a, np.arange(6.0), a[:2], np.zeros(2))
    assert np.isfinite(errs[0]) and np.isinf(errs[1]) and np.isinf(errs[2])


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 3), st.integers(1, 3))
def test_full_path_ols_equals_direct_least_squares(seed, n, p):
    # all LAR steps + refit spans the full basis: same model as plain OLS
    rng = np.random.default_rng(seed)
    idx = total_degree_indices(n, p)
    m = 2 * len(idx) + 5
    x = rng.uniform(-1, 1, (m, n))
    y = rng.standard_normal(m) + x.sum(axis=1) ** 2
    basis, dropped = gram_schmidt_basis(x, idx)
    assert not dropped
    path = lar_path(basis.values[:, 1:], y)
    members = [0] + [1 + j for j in path.entry_order]
    assert sorted(members) == list(range(len(idx)))
    lar_model = fit_on_basis(basis.subset(members), y)
    direct = fit_on_basis(basis, y)
    # coefficients of the same member agree regardless of order
    by_member = dict(zip(members, lar_model.coefficients))
    assert np.allclose([by_member[j] for j in range(len(idx))], direct.coefficients, atol=1e-6)
    raw = np.linalg.lstsq(evaluate_monomials(idx, x), y, rcond=None)[0]
    x_new = rng.uniform(-1, 1, (7, n))
    assert np.allclose(lar_model.predict(x_new), evaluate_monomials(idx, x_new) @ raw, atol=1e-6)


@pytest.mark.parametrize("seed", range(4))
def test_identical_term_sets_give_identical_sd(seed):
    rng = np.random.default_rng(seed)
    x = rng.uniform(-1, 1, (40, 2))
    y = 1 + 2 * x[:, 0] - x[:, 1] + 0.05 * rng.standard_normal(40)
    d = Dataset(x, y)
    a = fit_fss_pce(d, FssConfig(1), make_rng(seed, 1))
    b = fit_benchmark_sparse_pce(d, BenchmarkConfig(1), make_rng(seed, 1))
    assert sorted(a.selected) == sorted(b.selected) == [(0, 1), (1, 0)]
    assert abs(a.model.sd - b.model.sd) < 1e-8


def test_identical_term_sets_one_input():
    rng = np.random.default_rng(9)
    x = rng.uniform(-1, 1, (60, 1))
    y = 0.5 + x[:, 0] - 2 * x[:, 0] ** 2
    d = Dataset(x, y)
    a = fit_fss_pce(d, FssConfig(3, threshold=0.1))
    b = fit_benchmark_sparse_pce(d, BenchmarkConfig(3), make_rng(0))
    assert sorted(a.selected) == sorted(b.selected) == [(1,), (2,)]
    assert abs(a.model.sd - b.model.sd) < 1e-8
    assert a.model.sd == pytest.approx(np.std(y), rel=1e-10)


def test_trace_and_result_shape():
    d = EXAMPLE2.sample(100, make_rng(3))
    res = fit_benchmark_sparse_pce(d, BenchmarkConfig(2), make_rng(4))
    assert not res.undersampled and not res.dropped
    assert res.steps == len(res.trace) == res.model.size - 1
    assert [r.iteration for r in res.trace] == list(range(1, res.steps + 1))
    rss = [r.residual_rss for r in res.trace]
    assert all(a >= b - 1e-9 for a, b in zip(rss, rss[1:]))
    assert len({r.multi_index for r in res.trace}) == res.steps
    gram = res.model.basis.evaluate(d.inputs)
    assert np.allclose(gram.T @ gram / d.size, np.eye(res.model.size), atol=1e-8)


def test_cv_chooses_smallest_minimizer():
    d = EXAMPLE2.sample(100, make_rng(3))
    res = fit_benchmark_sparse_pce(d, BenchmarkConfig(2), make_rng(4))
    errors = np.array([e for _, e in res.cv_curve])
    assert res.steps <= int(np.flatnonzero(errors == errors.min())[0])


def test_undersampled_run_is_flagged_not_fatal():
    d = HIV.sample(60, make_rng(1))
    res = fit_benchmark_sparse_pce(d, BenchmarkConfig(3), make_rng(2))
    assert res.undersampled
    assert any("under-sampled" in w for w in res.warnings)
    assert res.dropped
    assert np.isfinite(res.model.sd)


def test_deterministic_given_fold_stream():
    d = EXAMPLE2.sample(50, make_rng(8))
    a = fit_benchmark_sparse_pce(d, BenchmarkConfig(2), make_rng(1, 1))
    b = fit_benchmark_sparse_pce(d, BenchmarkConfig(2), make_rng(1, 1))
    assert a.selected == b.selected
    assert a.model.sd == b.model.sd


def _orthonormal_design(rng, m, q):
    z = rng.standard_normal((m, q))
    z -= z.mean(axis=0)
    qm, _ = np.linalg.qr(z)
    return qm * np.sqrt(m)


def _best_subset_cv(features, y, folds):
    m, q = features.shape
    best = np.inf
    for k in range(q + 1):
        for subset in itertools.combinations(range(q), k):
            total = 0.0
            for fold in folds:
                train = complement(m, fold)
                a = np.hstack([np.ones((len(train), 1)), features[train][:, list(subset)]])
                theta = np.linalg.lstsq(a, y[train], rcond=None)[0]
                b = np.hstack([np.ones((len(fold), 1)), features[fold][:, list(subset)]])
                r = y[fold] - b @ theta
                total += r @ r
            best = min(best, total)
    return best / m


@pytest.mark.parametrize("seed", range(6))
def test_lar_cv_matches_brute_force_noise_free(seed):
    # exactly sparse response: the true subset has zero held-out error and
    # LAR reaches it as a path prefix
    rng = np.random.default_rng(seed)
    f = _orthonormal_design(rng, 50, 6)
    c = np.array([3.0, 0, -2.0, 0, 1.0, 0])
    y = 1 + f @ c
    folds = kfold_indices(50, 5, make_rng(seed, 1))
    steps, total, _ = select_lar_model_size(f, y, folds)
    assert steps == 3
    assert total[steps] / 50 <= _best_subset_cv(f, y, folds) + 1e-6
