"""Tests for ranking, intersection, clustering, importance and PCA."""

import numpy as np
import pytest

from cropemu.discovery import (
    Environment,
    PredictionTable,
    cluster_summary,
    genotype_matrix,
    genotype_names,
    intersect_resilient,
    kmeans,
    pca_project,
    permutation_importance,
    rank_topk_per_env,
)
from cropemu.errors import ConfigurationError, InputError
from cropemu.sampling import default_space, design_batch

ENVS = (
    Environment("Mason", "control", "v0"),
    Environment("Mason", "ssp245-like", "v0"),
    Environment("Randolph", "control", "v0"),
    Environment("Randolph", "ssp245-like", "v0"),
)


def random_table(n_configs, envs=ENVS, n_outputs=3, seed=0,
                 labels=("GrainTotalWt", "TotalWt", "GrainN")):
    rng = np.random.default_rng(seed)
    ids = np.arange(n_configs, dtype=np.int64)
    means = rng.uniform(0.0, 10.0, (len(envs), n_configs, n_outputs))
    cvs = rng.uniform(0.0, 1.2, (len(envs), n_configs, n_outputs))
    return PredictionTable(ids, tuple(envs), labels, means, cvs)


# ---------------------------------------------------------------- table

def test_environment_key():
    env = Environment("Mason", "control", "v1")
    assert env.key == "Mason/control/v1"
    assert env == Environment("Mason", "control", "v1")
    assert len({ENVS[0], ENVS[0], ENVS[1]}) == 2


def test_table_shape_validation():
    ids = np.arange(4)
    good = np.zeros((2, 4, 3))
    with pytest.raises(InputError, match="does not match"):
        PredictionTable(ids, ENVS[:2], ("a", "b", "c"), np.zeros((2, 3, 3)),
                        good)
    with pytest.raises(InputError, match="cvs"):
        PredictionTable(ids, ENVS[:2], ("a", "b", "c"), good,
                        np.zeros((2, 4, 2)))
    with pytest.raises(InputError, match="duplicate environment"):
        PredictionTable(ids, (ENVS[0], ENVS[0]), ("a", "b", "c"), good, good)
    with pytest.raises(InputError, match="duplicate config"):
        PredictionTable(np.array([1, 1, 2, 3]), ENVS[:2], ("a", "b", "c"),
                        good, good)


def test_table_from_rows_round_trip():
    envs = ENVS[:2]
    rows = []
    rng = np.random.default_rng(3)
    for cid in (7, 3, 5):
        for env in envs:
            rows.append((cid, env, rng.uniform(0, 1, 2), rng.uniform(0, 1, 2)))
    table = PredictionTable.from_rows(rows, ("GrainTotalWt", "TotalWt"))
    assert table.config_ids.tolist() == [3, 5, 7]
    assert table.environments == envs
    assert table.means.shape == (2, 3, 2)
    # cell values land at the right (env, config) coordinates
    for cid, env, mean_vec, _ in rows:
        e = envs.index(env)
        i = table.config_ids.tolist().index(cid)
        assert np.array_equal(table.means[e, i], mean_vec)


def test_table_from_rows_incomplete_grid():
    rows = [(0, ENVS[0], [1.0], [0.1]),
            (1, ENVS[0], [2.0], [0.1]),
            (0, ENVS[1], [3.0], [0.1])]
    with pytest.raises(InputError, match=r"missing cells \(1, Mason/ssp245"):
        PredictionTable.from_rows(rows, ("GrainTotalWt",))


def test_table_from_rows_duplicate_and_bad_width():
    rows = [(0, ENVS[0], [1.0], [0.1]), (0, ENVS[0], [2.0], [0.2])]
    with pytest.raises(InputError, match="duplicate cell"):
        PredictionTable.from_rows(rows, ("GrainTotalWt",))
    with pytest.raises(InputError, match="expected 2 outputs"):
        PredictionTable.from_rows([(0, ENVS[0], [1.0], [0.1])],
                                  ("GrainTotalWt", "TotalWt"))


# ---------------------------------------------------------------- ranking

def test_topk_selects_largest_means():
    ids = np.arange(5)
    means = np.array([[1.0, 5.0, 3.0, 2.0, 4.0]]).reshape(1, 5, 1)
    cvs = np.zeros((1, 5, 1))
    table = PredictionTable(ids, (ENVS[0],), ("GrainTotalWt",), means, cvs)
    top = rank_topk_per_env(table, 2)
    assert top[ENVS[0]] == {1, 4}


def test_topk_tie_breaks_on_cv_then_id():
    ids = np.arange(4)
    means = np.full((1, 4, 1), 7.0)
    cvs = np.array([[0.3, 0.1, 0.3, 0.3]]).reshape(1, 4, 1)
    table = PredictionTable(ids, (ENVS[0],), ("GrainTotalWt",), means, cvs)
    assert rank_topk_per_env(table, 1)[ENVS[0]] == {1}
    # equal mean and cv: smaller id wins
    assert rank_topk_per_env(table, 2)[ENVS[0]] == {0, 1}


def test_topk_k_equals_total_and_bounds():
    table = random_table(6)
    top = rank_topk_per_env(table, 6)
    for env in table.environments:
        assert top[env] == set(range(6))
    with pytest.raises(InputError):
        rank_topk_per_env(table, 0)
    with pytest.raises(InputError):
        rank_topk_per_env(table, 7)
    with pytest.raises(InputError, match="unknown output"):
        rank_topk_per_env(table, 2, target_output="Nope")


def test_topk_uses_requested_output_column():
    ids = np.arange(3)
    means = np.zeros((1, 3, 2))
    means[0, :, 0] = [9.0, 1.0, 1.0]
    means[0, :, 1] = [1.0, 1.0, 9.0]
    table = PredictionTable(ids, (ENVS[0],), ("GrainTotalWt", "TotalWt"),
                            means, np.zeros((1, 3, 2)))
    assert rank_topk_per_env(table, 1)[ENVS[0]] == {0}
    assert rank_topk_per_env(table, 1, "TotalWt")[ENVS[0]] == {2}


# ---------------------------------------------------------------- intersect

def test_intersection_single_env_and_disjoint():
    env = ENVS[0]
    top = {env: frozenset({1, 2, 3})}
    kept = {env: frozenset({2, 3, 9})}
    res = intersect_resilient(top, kept, total_configs=10)
    assert res.resilient_ids.tolist() == [2, 3]
    assert res.fraction_of_space == pytest.approx(0.2)

    two = {ENVS[0]: frozenset({1, 2}), ENVS[1]: frozenset({3, 4})}
    keep_all = {ENVS[0]: frozenset({1, 2, 3, 4}),
                ENVS[1]: frozenset({1, 2, 3, 4})}
    assert intersect_resilient(two, keep_all, 4).resilient_ids.size == 0


def test_intersection_requires_matching_envs():
    with pytest.raises(InputError):
        intersect_resilient({ENVS[0]: frozenset({1})},
                            {ENVS[1]: frozenset({1})}, 5)
    with pytest.raises(InputError):
        intersect_resilient({}, {}, 5)
    with pytest.raises(InputError):
        intersect_resilient({ENVS[0]: frozenset({1})},
                            {ENVS[0]: frozenset({1})}, 0)


def test_intersection_order_independent():
    rng = np.random.default_rng(4)
    top = {env: frozenset(rng.choice(50, 20, replace=False).tolist())
           for env in ENVS}
    kept = {env: frozenset(rng.choice(50, 35, replace=False).tolist())
            for env in ENVS}
    forward = intersect_resilient(top, kept, 50)
    reversed_top = dict(reversed(list(top.items())))
    reversed_kept = dict(reversed(list(kept.items())))
    backward = intersect_resilient(reversed_top, reversed_kept, 50)
    assert np.array_equal(forward.resilient_ids, backward.resilient_ids)


def test_fraction_text_two_significant_figures():
    res = intersect_resilient({ENVS[0]: frozenset(range(181))},
                              {ENVS[0]: frozenset(range(181))},
                              total_configs=100_000)
    assert res.fraction_of_space == pytest.approx(0.00181)
    assert res.fraction_text == "0.18%"


def test_ranking_intersection_matches_brute_force():
    # independent reimplementation with python sorts on small random tables
    for seed in range(5):
        table = random_table(40, seed=seed)
        k = 10
        top = rank_topk_per_env(table, k)
        kept = {}
        for e, env in enumerate(table.environments):
            cv = table.cvs[e, :, 0]
            kept[env] = frozenset(np.flatnonzero(cv <= 0.5).tolist())
        got = intersect_resilient(top, kept, 40)

        survivors = None
        for e, env in enumerate(table.environments):
            rows = [(float(-table.means[e, i, 0]), float(table.cvs[e, i, 0]),
                     int(table.config_ids[i]))
                    for i in range(40)]
            chosen = {cid for _, _, cid in sorted(rows)[:k]}
            assert chosen == top[env]
            filtered = {cid for _, cv, cid in rows
                        if cid in chosen and cv <= 0.5}
            survivors = filtered if survivors is None else survivors & filtered
        assert sorted(survivors) == got.resilient_ids.tolist()


# ---------------------------------------------------------------- kmeans

def test_kmeans_recovers_separated_blobs():
    rng = np.random.default_rng(6)
    a = rng.normal(0.0, 0.4, (30, 3))
    b = rng.normal(8.0, 0.4, (25, 3))
    points = np.vstack([a, b])
    result = kmeans(points, 2, seed=0, restarts=4)
    first, second = result.assignments[:30], result.assignments[30:]
    assert len(set(first.tolist())) == 1
    assert len(set(second.tolist())) == 1
    assert first[0] != second[0]


def test_kmeans_single_cluster_is_dataset_mean():
    rng = np.random.default_rng(7)
    points = rng.normal(2.0, 1.0, (40, 4))
    result = kmeans(points, 1, seed=0, restarts=2)
    assert np.allclose(result.centers[0], points.mean(axis=0), atol=1e-12)
    assert np.all(result.assignments == 0)


def test_kmeans_duplicate_rows_share_assignment():
    rng = np.random.default_rng(8)
    base = rng.normal(0.0, 1.0, (10, 3))
    points = np.vstack([base, base[3], base[7]])
    result = kmeans(points, 3, seed=1, restarts=4)
    assert result.assignments[10] == result.assignments[3]
    assert result.assignments[11] == result.assignments[7]


def test_kmeans_sse_nonincreasing_every_restart():
    rng = np.random.default_rng(9)
    points = rng.normal(0.0, 1.0, (60, 5))
    for seed in range(4):
        result = kmeans(points, 4, seed=seed, restarts=1)
        trace = np.array(result.sse_trace)
        assert np.all(np.diff(trace) <= 1e-9)


def test_kmeans_determinism_and_validation():
    rng = np.random.default_rng(10)
    points = rng.normal(0.0, 1.0, (30, 2))
    a = kmeans(points, 3, seed=5, restarts=3)
    b = kmeans(points, 3, seed=5, restarts=3)
    assert np.array_equal(a.assignments, b.assignments)
    assert np.array_equal(a.centers, b.centers)
    with pytest.raises(ConfigurationError):
        kmeans(points, 31)
    with pytest.raises(ConfigurationError):
        kmeans(points, 0)
    with pytest.raises(ConfigurationError):
        kmeans(points, 2, restarts=0)
    with pytest.raises(InputError):
        kmeans(np.empty((0, 2)), 1)


# ---------------------------------------------------------------- summary

def test_cluster_summary_hand_case():
    # two tight 1-D blobs; location A favors the low blob, B the high one
    traits = np.array([[0.0], [0.1], [-0.1], [5.0], [5.1], [4.9]])
    yields_a = np.array([10.0, 11.0, 12.0, 1.0, 2.0, 3.0])
    yields_b = np.array([1.0, 2.0, 3.0, 10.0, 11.0, 12.0])
    summary = cluster_summary(traits, ("t",), {"A": yields_a, "B": yields_b},
                              k=2, seed=0, restarts=4)
    low = summary.assignments[0]
    high = summary.assignments[3]
    assert low != high
    assert np.all(summary.assignments[:3] == low)
    assert np.all(summary.assignments[3:] == high)
    assert summary.trait_means[low, 0] == pytest.approx(0.0, abs=1e-9)
    assert summary.trait_means[high, 0] == pytest.approx(5.0, abs=1e-9)
    assert summary.best_cluster_per_location == {"A": low, "B": high}
    # pooled yield stats cover both locations
    assert summary.yield_mean[low] == pytest.approx(
        np.concatenate([yields_a[:3], yields_b[:3]]).mean())


def test_cluster_summary_validation():
    traits = np.zeros((5, 2))
    with pytest.raises(InputError):
        cluster_summary(traits, ("a",), {"A": np.zeros(5)}, k=2)
    with pytest.raises(InputError):
        cluster_summary(traits, ("a", "b"), {}, k=2)
    with pytest.raises(InputError):
        cluster_summary(traits, ("a", "b"), {"A": np.zeros(4)}, k=2)
    with pytest.raises(ConfigurationError):
        cluster_summary(np.random.default_rng(0).normal(size=(3, 2)),
                        ("a", "b"), {"A": np.zeros(3)}, k=4)


def test_genotype_matrix_within_bounds():
    space = default_space()
    names = genotype_names(space)
    assert len(names) == 12
    assert "RUE" in names and "FinalNconc" in names
    batch = design_batch(space, 16)
    traits = genotype_matrix(space, batch.configs)
    assert traits.shape == (16, 12)
    by_name = {v.name: v for v in space.variables}
    for j, name in enumerate(names):
        v = by_name[name]
        assert np.all(traits[:, j] >= v.lower - 1e-9)
        assert np.all(traits[:, j] <= v.upper + 1e-9)


def test_cluster_summary_trait_means_stay_in_trait_box():
    space = default_space()
    names = genotype_names(space)
    batch = design_batch(space, 60)
    traits = genotype_matrix(space, batch.configs)
    rng = np.random.default_rng(1)
    yields = {"Mason": rng.uniform(100, 200, 60),
              "Randolph": rng.uniform(100, 200, 60)}
    summary = cluster_summary(traits, names, yields, k=4, seed=0)
    by_name = {v.name: v for v in space.variables}
    for j, name in enumerate(names):
        v = by_name[name]
        assert np.all(summary.trait_means[:, j] >= v.lower - 1e-9)
        assert np.all(summary.trait_means[:, j] <= v.upper + 1e-9)
    # assignment is a partition of the resilient set
    assert summary.assignments.shape == (60,)
    assert set(summary.assignments.tolist()) <= set(range(4))


# ---------------------------------------------------------------- importance

def test_importance_ignored_feature_is_exactly_zero():
    rng = np.random.default_rng(11)
    x = rng.normal(0.0, 1.0, (200, 3))
    y = 3.0 * x[:, 0] + 0.5 * x[:, 1] + rng.normal(0.0, 0.05, 200)

    def predictor(mat):
        return 3.0 * mat[:, 0] + 0.5 * mat[:, 1]

    rep = permutation_importance(predictor, x, y, ("a", "b", "unused"),
                                 repeats=10, seed=0)
    assert rep.importance[2] == 0.0
    assert rep.importance_std[2] == 0.0
    assert rep.rank[0] == 1
    assert rep.rank[2] == 3
    assert rep.baseline_r2 > 0.99
    # dominant feature takes most of the positive share
    assert rep.percent[0] > rep.percent[1] > 0.0
    assert rep.percent[2] == 0.0


def test_importance_null_feature_statistically_zero():
    # feature enters the matrix but not the data-generating process;
    # a fitted linear map gives it a tiny, noise-level coefficient
    rng = np.random.default_rng(12)
    x = rng.normal(0.0, 1.0, (300, 3))
    y = 2.0 * x[:, 0] - 1.0 * x[:, 1] + rng.normal(0.0, 0.1, 300)
    coef, *_ = np.linalg.lstsq(np.column_stack([x, np.ones(300)]), y,
                               rcond=None)

    def predictor(mat):
        return mat @ coef[:3] + coef[3]

    rep = permutation_importance(predictor, x, y, repeats=10, seed=1)
    stderr = rep.importance_std[2] / np.sqrt(10)
    assert abs(rep.importance[2]) < 2 * stderr + 1e-4


def test_importance_percent_and_determinism():
    rng = np.random.default_rng(13)
    x = rng.normal(0.0, 1.0, (150, 4))
    y = x[:, 0] + x[:, 2]

    def predictor(mat):
        return mat[:, 0] + mat[:, 2]

    a = permutation_importance(predictor, x, y, repeats=5, seed=3)
    b = permutation_importance(predictor, x, y, repeats=5, seed=3)
    assert np.array_equal(a.importance, b.importance)
    positive = a.percent[a.importance > 0]
    assert positive.sum() == pytest.approx(100.0)
    assert sorted(a.rank.tolist()) == [1, 2, 3, 4]


def test_importance_validation():
    def predictor(mat):
        return mat[:, 0]

    x = np.random.default_rng(0).normal(0.0, 1.0, (10, 2))
    y = x[:, 0]
    with pytest.raises(ConfigurationError):
        permutation_importance(predictor, x, y, repeats=0)
    with pytest.raises(InputError):
        permutation_importance(predictor, np.empty((0, 2)), np.empty(0))
    with pytest.raises(InputError):
        permutation_importance(predictor, x, y[:5])
    with pytest.raises(InputError):
        permutation_importance(predictor, x, np.ones(10))  # zero variance
    with pytest.raises(InputError):
        permutation_importance(predictor, x, y, feature_names=("only",))


def test_importance_oracle_ignores_padding_column():
    # the simulator is the predictor; the second input column never
    # reaches it, so its importance is identically zero
    from cropemu.cropsim import simulate, soil_by_name
    from cropemu.sampling import default_space, design_batch
    from cropemu.weather import make_synthetic_series
    from dataclasses import replace

    space = default_space()
    base = design_batch(space, 1).configs[0]
    weather = make_synthetic_series(np.random.default_rng(0), "Mason",
                                    40.0, -89.0, 2020)
    soil = soil_by_name("Mason")

    def predictor(mat):
        out = np.empty(mat.shape[0])
        for i in range(mat.shape[0]):
            cfg = replace(base, rue=float(mat[i, 0]))
            out[i] = simulate(cfg, weather, soil).grain_total_wt
        return out

    rng = np.random.default_rng(14)
    x = np.column_stack([rng.uniform(1.6, 2.2, 24),
                         rng.normal(0.0, 1.0, 24)])
    y = predictor(x) + rng.normal(0.0, 5.0, 24)
    rep = permutation_importance(predictor, x, y, ("RUE", "padding"),
                                 repeats=10, seed=2)
    assert rep.importance[1] == 0.0
    assert rep.rank[0] == 1


# ---------------------------------------------------------------- pca

def test_pca_line_in_five_dims():
    rng = np.random.default_rng(15)
    t = rng.normal(0.0, 2.0, 100)
    direction = np.array([1.0, -0.5, 0.25, 2.0, 0.0])
    points = np.outer(t, direction) + 3.0
    result = pca_project(points, components=2)
    assert result.explained[0] >= 0.999
    assert result.coordinates.shape == (100, 2)
    # constant column contributes nothing and breaks nothing
    assert np.all(np.isfinite(result.coordinates))


def test_pca_isotropic_gaussian_spreads_evenly():
    rng = np.random.default_rng(16)
    points = rng.normal(0.0, 1.0, (10_000, 4))
    result = pca_project(points, components=4)
    assert np.allclose(result.explained, 0.25, atol=0.02)
    assert result.explained.sum() == pytest.approx(1.0, abs=1e-9)


def test_pca_row_order_invariance_and_sign_convention():
    rng = np.random.default_rng(17)
    points = rng.normal(0.0, 1.0, (200, 6)) @ rng.normal(0.0, 1.0, (6, 6))
    result = pca_project(points)
    perm = rng.permutation(200)
    shuffled = pca_project(points[perm])
    assert np.allclose(shuffled.loadings, result.loadings, atol=1e-9)
    assert np.allclose(shuffled.explained, result.explained, atol=1e-12)
    assert np.allclose(shuffled.coordinates, result.coordinates[perm],
                       atol=1e-9)
    for c in range(result.loadings.shape[1]):
        peak = np.abs(result.loadings[:, c]).argmax()
        assert result.loadings[peak, c] > 0.0


def test_pca_validation():
    with pytest.raises(InputError):
        pca_project(np.zeros((1, 3)))
    with pytest.raises(ConfigurationError):
        pca_project(np.zeros((5, 3)), components=4)
    with pytest.raises(ConfigurationError):
        pca_project(np.zeros((5, 3)), components=0)
