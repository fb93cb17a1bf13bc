"""Tests for standardization, the transformation, pair scoring and grouping."""

import numpy as np
import pytest

from matseg import (
    DegenerateColumn,
    DegenerateVariance,
    FixedThreshold,
    InvalidInput,
    MatrixSeries,
    NoThreshold,
    SegmentationConfig,
    classify_segmentation,
    cross_corr,
    estimate_gamma,
    gen_example,
    group_columns,
    max_cross_corr,
    pair_score_matrix,
    ratio_select,
    row_autocov,
    run_experiment,
    segment,
    standardize,
)
from oracles import brute_pair_scores, brute_univariate_corr, dfs_components


def _random_series(rng, n, p, q):
    return MatrixSeries(rng.standard_normal((n, p, q)))


def test_standardize_identity_covariance_is_noop():
    root2 = np.sqrt(2.0)
    data = np.array([[[root2, 0.0]], [[-root2, 0.0]], [[0.0, root2]], [[0.0, -root2]]])
    series = MatrixSeries(data)
    assert np.max(np.abs(row_autocov(series, 0) - np.eye(2))) <= 1e-12
    out, standardizer = standardize(series)
    assert np.max(np.abs(out.data - data)) <= 1e-10
    assert np.max(np.abs(standardizer - np.eye(2))) <= 1e-10


def test_standardize_scalar_variance_four_halves_values():
    series = MatrixSeries(np.array([[[0.0]], [[4.0]]]))
    out, standardizer = standardize(series)
    assert np.allclose(standardizer, [[0.5]], atol=1e-12)
    assert np.allclose(out.data.ravel(), [0.0, 2.0], atol=1e-12)


def test_standardize_output_has_identity_lag0_covariance():
    rng = np.random.default_rng(30)
    for _ in range(20):
        n = int(rng.integers(8, 40))
        p = int(rng.integers(1, 4))
        q = int(rng.integers(1, min(5, n)))
        series = _random_series(rng, n, p, q)
        out, standardizer = standardize(series)
        assert np.max(np.abs(row_autocov(out, 0) - np.eye(q))) <= 1e-8
        assert np.max(np.abs(series.data @ standardizer - out.data)) == 0.0


def test_standardize_warns_when_series_is_short():
    series = MatrixSeries(np.random.default_rng(0).standard_normal((3, 2, 4)))
    with pytest.warns(UserWarning):
        standardize(series)


def test_standardize_zero_variance_column():
    data = np.random.default_rng(0).standard_normal((10, 2, 3))
    data[:, :, 1] = 7.0
    with pytest.raises(DegenerateColumn):
        standardize(MatrixSeries(data))


def test_standardize_threshold_keeps_diagonal():
    rng = np.random.default_rng(31)
    series = _random_series(rng, 50, 2, 3)
    out, standardizer = standardize(series, threshold=FixedThreshold(u=1e9, v=1e9))
    cov = row_autocov(series, 0)
    expected = np.diag(1.0 / np.sqrt(np.diag(cov)))
    assert np.max(np.abs(standardizer - expected)) <= 1e-10
    assert np.max(np.abs(np.diag(row_autocov(out, 0)) - 1.0)) <= 1e-10


def test_estimate_gamma_is_orthogonal():
    rng = np.random.default_rng(32)
    cfg = SegmentationConfig()
    for _ in range(110):
        n = int(rng.integers(8, 30))
        p = int(rng.integers(1, 4))
        q = int(rng.integers(2, 6))
        std, _ = standardize(_random_series(rng, n, p, q))
        gamma = estimate_gamma(std, cfg)
        assert np.max(np.abs(gamma.T @ gamma - np.eye(q))) <= 1e-8


def test_estimate_gamma_recovers_permutation_when_mixing_is_identity():
    rng = np.random.default_rng((100, 1))
    series, truth = gen_example(1, 5000, rng)
    unmixed = MatrixSeries(series.data @ np.linalg.inv(truth.a).T)
    std, _ = standardize(unmixed)
    gamma = estimate_gamma(std, SegmentationConfig())
    # every transformed column concentrates on one original column
    assert np.min(np.max(np.abs(gamma), axis=0)) > 0.95


def test_cross_corr_self_pair_lag0_has_unit_diagonal():
    rng = np.random.default_rng(33)
    std, _ = standardize(_random_series(rng, 25, 3, 4))
    gamma = estimate_gamma(std, SegmentationConfig())
    for i in (1, 3):
        out = cross_corr(std, gamma, i, i, 0)
        assert np.max(np.abs(np.diag(out) - 1.0)) <= 1e-10


def test_cross_corr_p1_matches_univariate_correlation():
    rng = np.random.default_rng(34)
    for _ in range(20):
        n = int(rng.integers(10, 30))
        q = int(rng.integers(2, 5))
        std, _ = standardize(_random_series(rng, n, 1, q))
        gamma = estimate_gamma(std, SegmentationConfig())
        z = std.data[:, 0, :] @ gamma
        for h in range(3):
            got = cross_corr(std, gamma, 1, 2, h)
            want = brute_univariate_corr(z[:, 0], z[:, 1], h)
            assert got.shape == (1, 1)
            assert abs(got[0, 0] - want) <= 1e-12


def test_cross_corr_entries_bounded_without_threshold():
    rng = np.random.default_rng(35)
    for _ in range(100):
        n = int(rng.integers(6, 25))
        p = int(rng.integers(1, 4))
        q = int(rng.integers(2, 5))
        std, _ = standardize(_random_series(rng, n, p, q))
        gamma = estimate_gamma(std, SegmentationConfig())
        i = int(rng.integers(1, q + 1))
        j = int(rng.integers(1, q + 1))
        h = int(rng.integers(0, 3))
        out = cross_corr(std, gamma, i, j, h)
        assert np.max(np.abs(out)) <= 1.0 + 1e-6


def test_cross_corr_white_noise_entries_are_small():
    rng = np.random.default_rng((200, 0))
    std, _ = standardize(MatrixSeries(rng.standard_normal((10000, 2, 3))))
    gamma = np.eye(3)
    for i in range(1, 4):
        for j in range(1, 4):
            if i == j:
                continue
            for h in range(0, 6):
                assert np.max(np.abs(cross_corr(std, gamma, i, j, h))) < 0.05


def test_cross_corr_huge_threshold_zeroes_lagged_numerator():
    rng = np.random.default_rng(36)
    std, _ = standardize(_random_series(rng, 40, 2, 3))
    out = cross_corr(std, np.eye(3), 1, 2, 1, v=1e9)
    assert np.array_equal(out, np.zeros((2, 2)))


def test_cross_corr_zero_threshold_matches_none():
    rng = np.random.default_rng(37)
    std, _ = standardize(_random_series(rng, 40, 2, 3))
    gamma = estimate_gamma(std, SegmentationConfig())
    a = cross_corr(std, gamma, 1, 3, 2, v=None)
    b = cross_corr(std, gamma, 1, 3, 2, v=0.0)
    assert np.array_equal(a, b)


def test_cross_corr_degenerate_variance():
    series = MatrixSeries(np.zeros((10, 2, 2)))
    with pytest.raises(DegenerateVariance):
        cross_corr(series, np.eye(2), 1, 2, 0)


def test_pair_score_matrix_matches_brute_force():
    rng = np.random.default_rng(38)
    for _ in range(20):
        n = int(rng.integers(8, 16))
        p = int(rng.integers(1, 4))
        q = int(rng.integers(2, 5))
        std, _ = standardize(_random_series(rng, n, p, q))
        gamma = estimate_gamma(std, SegmentationConfig())
        m = int(rng.integers(0, 4))
        got = pair_score_matrix(std, gamma, m)
        want = brute_pair_scores(std.data, gamma, m)
        assert np.max(np.abs(got - want)) <= 1e-12
        assert np.array_equal(got, got.T)


def test_pair_score_matrix_v_per_lag_length():
    rng = np.random.default_rng(39)
    std, _ = standardize(_random_series(rng, 20, 2, 3))
    with pytest.raises(InvalidInput):
        pair_score_matrix(std, np.eye(3), 2, v_per_lag=[0.1, 0.1])


def test_max_cross_corr_exact_copy_scores_one():
    rng = np.random.default_rng(40)
    data = rng.standard_normal((30, 2, 4))
    data[:, :, 3] = data[:, :, 0]
    series = MatrixSeries(data)
    score = max_cross_corr(series, np.eye(4), 1, 4, SegmentationConfig())
    assert abs(score - 1.0) <= 1e-8


def test_max_cross_corr_symmetric_in_pair_order():
    rng = np.random.default_rng(41)
    std, _ = standardize(_random_series(rng, 30, 2, 4))
    gamma = estimate_gamma(std, SegmentationConfig())
    matrix = pair_score_matrix(std, gamma, 10)
    assert np.array_equal(matrix, matrix.T)
    with pytest.raises(InvalidInput):
        max_cross_corr(std, gamma, 3, 2, SegmentationConfig())


def test_max_cross_corr_independent_columns_stay_small():
    rng = np.random.default_rng((300, 1))
    std, _ = standardize(MatrixSeries(rng.standard_normal((10000, 2, 4))))
    cfg = SegmentationConfig()
    for i in range(1, 5):
        for j in range(i + 1, 5):
            assert max_cross_corr(std, np.eye(4), i, j, cfg) < 0.06


def test_ratio_select_hand_cases():
    assert ratio_select([0.9, 0.8, 0.5, 0.05, 0.04, 0.03], c0=0.75) == 3
    assert ratio_select([0.5, 0.5, 0.5, 0.5], c0=0.75) == 1
    assert ratio_select([0.8, 0.4, 0.2, 0.1], shift=0.2) == 1


def test_ratio_select_zero_tail_is_infinite_ratio():
    assert ratio_select([0.6, 0.3, 0.0, 0.0], c0=0.9) == 2


def test_ratio_select_errors():
    with pytest.raises(InvalidInput):
        ratio_select([0.5])
    with pytest.raises(InvalidInput):
        ratio_select([0.3, 0.5, 0.1])
    with pytest.raises(InvalidInput):
        ratio_select([0.5, -0.1])
    with pytest.raises(InvalidInput):
        ratio_select([0.5, 0.4], c0=1.5)
    # c0 * q0 <= 1 leaves no admissible index
    with pytest.raises(InvalidInput):
        ratio_select([0.5, 0.4], c0=0.4)


def _plain_ratio_oracle(scores, c0):
    q0 = len(scores)
    j_count = int(np.ceil(c0 * q0)) - 1
    best_j, best_ratio = 1, -np.inf
    for j in range(1, j_count + 1):
        if scores[j] == 0.0:
            return j
        ratio = scores[j - 1] / scores[j]
        if ratio > best_ratio:
            best_j, best_ratio = j, ratio
    return best_j


def _shift_ratio_oracle(scores, s):
    best_j, best_ratio = 1, -np.inf
    for j in range(1, len(scores)):
        ratio = (scores[j - 1] + s) / (scores[j] + s)
        if ratio > best_ratio:
            best_j, best_ratio = j, ratio
    return best_j


def test_ratio_select_matches_loop_oracle():
    rng = np.random.default_rng(42)
    for _ in range(120):
        q0 = int(rng.integers(2, 12))
        scores = np.sort(rng.uniform(0.0, 1.0, size=q0))[::-1].tolist()
        c0 = float(rng.uniform(0.55, 0.95))
        assert ratio_select(scores, c0=c0) == _plain_ratio_oracle(scores, c0)
        s = float(rng.uniform(0.01, 0.5))
        assert ratio_select(scores, shift=s) == _shift_ratio_oracle(scores, s)


def test_group_columns_hand_cases():
    assert group_columns([(1, 3), (3, 6), (2, 4)], 6) == [[1, 3, 6], [2, 4], [5]]
    assert group_columns([], 4) == [[1], [2], [3], [4]]
    clique = [(i, j) for i in range(1, 5) for j in range(i + 1, 5)]
    assert group_columns(clique, 4) == [[1, 2, 3, 4]]


def test_group_columns_index_errors():
    with pytest.raises(InvalidInput):
        group_columns([(0, 1)], 3)
    with pytest.raises(InvalidInput):
        group_columns([(1, 4)], 3)
    with pytest.raises(InvalidInput):
        group_columns([(2, 2)], 3)


def test_group_columns_matches_dfs_oracle():
    rng = np.random.default_rng(43)
    for _ in range(120):
        q = int(rng.integers(2, 10))
        n_edges = int(rng.integers(0, 12))
        edges = []
        for _ in range(n_edges):
            i = int(rng.integers(1, q + 1))
            j = int(rng.integers(1, q + 1))
            if i != j:
                edges.append((i, j))
        assert group_columns(edges, q) == dfs_components(edges, q)


def test_segment_single_column_is_trivial():
    rng = np.random.default_rng(44)
    res = segment(MatrixSeries(rng.standard_normal((20, 3, 1))))
    assert res.groups == [[1]]
    assert res.scores == []
    assert res.selected_edges == 0
    assert res.gamma.shape == (1, 1)


def test_segment_two_independent_columns_stay_apart():
    hits = 0
    for rep in range(20):
        rng = np.random.default_rng((400, rep))
        res = segment(MatrixSeries(rng.standard_normal((5000, 3, 2))))
        if res.groups == [[1], [2]]:
            hits += 1
    assert hits >= 18


def test_segment_result_internal_consistency():
    rng = np.random.default_rng(45)
    for _ in range(10):
        n = int(rng.integers(20, 40))
        series = _random_series(rng, n, 2, int(rng.integers(3, 6)))
        res = segment(series)
        q = series.q
        assert np.max(np.abs(res.gamma.T @ res.gamma - np.eye(q))) <= 1e-8
        assert len(res.scores) == q * (q - 1) // 2
        values = [s for (_, _, s) in res.scores]
        assert values == sorted(values, reverse=True)
        pairs = {(i, j) for (i, j, _) in res.scores}
        assert pairs == {(i, j) for i in range(1, q + 1) for j in range(i + 1, q + 1)}
        top = [(i, j) for (i, j, _) in res.scores[: res.selected_edges]]
        assert res.groups == dfs_components(top, q)
        flat = sorted(c for g in res.groups for c in g)
        assert flat == list(range(1, q + 1))
        # transformed series is the standardized series rotated by gamma
        rebuilt = series.data @ res.standardizer @ res.gamma
        assert np.max(np.abs(rebuilt - res.transformed.data)) <= 1e-12
        # a_hat blocks collect gamma columns group by group
        assert len(res.a_hat) == len(res.groups)
        for block, group in zip(res.a_hat, res.groups):
            cols = [c - 1 for c in group]
            assert np.array_equal(block, res.gamma[:, cols])


def test_segment_scores_recompute_bit_stably():
    rng = np.random.default_rng(46)
    series = _random_series(rng, 30, 2, 4)
    for threshold in (NoThreshold(), FixedThreshold(u=0.1, v=0.05)):
        cfg = SegmentationConfig(threshold=threshold)
        res = segment(series, cfg)
        std = MatrixSeries(series.data @ res.standardizer)
        for i, j, score in res.scores:
            again = max_cross_corr(std, res.gamma, i, j, cfg)
            assert again == score


def test_segment_recovers_known_grouping():
    rng = np.random.default_rng((500, 1))
    series, truth = gen_example(1, 1500, rng)
    res = segment(series)
    assert classify_segmentation(res, truth) == "correct"
    assert sorted(len(g) for g in res.groups) == [1, 2, 3]


def test_segment_permutation_equivariance():
    rng = np.random.default_rng(47)
    for _ in range(100):
        n = int(rng.integers(15, 35))
        q = int(rng.integers(3, 6))
        series = _random_series(rng, n, 2, q)
        perm = rng.permutation(q)
        permuted = MatrixSeries(series.data[:, :, perm])
        res = segment(series)
        res_p = segment(permuted)
        sizes = sorted(len(g) for g in res.groups)
        sizes_p = sorted(len(g) for g in res_p.groups)
        assert sizes == sizes_p
        values = np.array([s for (_, _, s) in res.scores])
        values_p = np.array([s for (_, _, s) in res_p.scores])
        assert np.max(np.abs(values - values_p)) <= 1e-8


def test_segment_error_estimate_shrinks_with_sample_size():
    report = run_experiment(1, [200, 1500], 30, seed=0)
    medians = [row.d_bar_median for row in report.rows]
    assert medians[0] > medians[1]


def test_config_validation():
    with pytest.raises(InvalidInput):
        SegmentationConfig(k0=0)
    with pytest.raises(InvalidInput):
        SegmentationConfig(c0=1.0)
    with pytest.raises(InvalidInput):
        SegmentationConfig(m=-1)
    with pytest.raises(InvalidInput):
        FixedThreshold(u=-0.5, v=0.1)
