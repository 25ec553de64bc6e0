"""Tests for the SGD-snapshot posterior and ensemble prediction."""

import numpy as np
import pytest

from cropemu.emulator import EmulatorDataset, EmulatorModel, Standardizer, emulator_spec
from cropemu.errors import ConfigurationError, InputError, ParseError
from cropemu.nncore.layers import NetworkSpec, dense
from cropemu.nncore.network import Network
from cropemu.swag import (
    CalibrationReport,
    EnsemblePrediction,
    SwagConfig,
    SwagPosterior,
    calibration_metrics,
    cv_filter,
    ensemble_predict,
    finetune_collect,
    load_posterior,
    rank_environments_by_cv,
    save_posterior,
    swag_sample,
)


def linear_problem(n_train=200, n_test=100, d=4, seed=5):
    """Small linear regression dataset plus a matching one-layer model."""
    rng = np.random.default_rng(seed)
    w = rng.normal(0.0, 1.0, d)
    x = rng.normal(0.0, 1.0, (n_train + n_test, d))
    y = (x @ w + 0.3 + rng.normal(0.0, 0.05, n_train + n_test))[:, None]
    data = EmulatorDataset(
        features=x, targets=y,
        train_indices=np.arange(n_train),
        test_indices=np.arange(n_train, n_train + n_test),
        feature_labels=tuple(f"f{i}" for i in range(d)),
        target_labels=("y",))
    std = Standardizer.fit(x[:n_train], y[:n_train])
    net = Network(NetworkSpec([dense(d, 1)]), (d,))
    params = net.init_params(np.random.default_rng(0))
    model = EmulatorModel(net, params, std, (), data.feature_labels,
                          data.target_labels)
    return data, model


def fitted_linear_model(data, model, epochs=40):
    from cropemu.nncore.optim import OptimizerConfig, OptimizerState, optimizer_step
    x = model.standardizer.transform_features(data.features[data.train_indices])
    t = model.standardizer.transform_targets(data.targets[data.train_indices])
    cfg = OptimizerConfig("sgd-momentum", 0.05, momentum=0.9)
    state = OptimizerState.fresh(model.params.size)
    params = model.params
    for epoch in range(epochs):
        order = np.random.default_rng(100 + epoch).permutation(x.shape[0])
        for start in range(0, x.shape[0], 64):
            rows = order[start:start + 64]
            _, grads = model.network.gradients(params, x[rows], t[rows], "mse")
            params = optimizer_step(cfg, params, grads, state)
    model.params = params
    return model


# ---------------------------------------------------------------- moments

def test_two_snapshot_moments_by_hand():
    post = SwagPosterior.empty(1)
    post.update(np.array([1.0]))
    post.update(np.array([3.0]))
    assert post.snapshot_count == 2
    assert post.mean[0] == 2.0
    assert post.second_moment[0] == 5.0
    assert post.diagonal_variance[0] == 1.0
    # deviations are taken against the running mean at update time
    assert post.deviations[0][0] == 0.0   # 1 - 1
    assert post.deviations[1][0] == 1.0   # 3 - 2


def test_running_moments_match_batch_moments():
    rng = np.random.default_rng(11)
    n = 7
    post = SwagPosterior.empty(n, max_rank=100)
    snaps = []
    expected_dev = []
    for _ in range(20):
        s = rng.normal(0.0, 2.0, n)
        snaps.append(s)
        post.update(s)
        expected_dev.append(s - np.mean(snaps, axis=0))
    stacked = np.stack(snaps)
    assert np.allclose(post.mean, stacked.mean(axis=0), atol=1e-12)
    assert np.allclose(post.second_moment, (stacked ** 2).mean(axis=0),
                       atol=1e-12)
    assert np.allclose(post.diagonal_variance,
                       stacked.var(axis=0), atol=1e-12)
    for got, want in zip(post.deviations, expected_dev):
        assert np.allclose(got, want, atol=1e-12)


def test_deviation_eviction_keeps_newest():
    rng = np.random.default_rng(3)
    post = SwagPosterior.empty(2, max_rank=3)
    means = []
    snaps = []
    for _ in range(5):
        s = rng.normal(0.0, 1.0, 2)
        snaps.append(s)
        post.update(s)
        means.append(np.mean(snaps, axis=0))
    assert len(post.deviations) == 3
    assert post.deviation_matrix.shape == (2, 3)
    for j, i in enumerate((2, 3, 4)):
        assert np.allclose(post.deviations[j], snaps[i] - means[i], atol=1e-12)


def test_diagonal_variance_never_negative():
    # identical snapshots make second_moment - mean^2 cancel exactly;
    # float rounding may leave a tiny negative which must be clamped
    post = SwagPosterior.empty(3)
    s = np.array([0.1, -7.3, 2.2])
    for _ in range(6):
        post.update(s.copy())
    assert np.all(post.diagonal_variance >= 0.0)
    assert np.allclose(post.diagonal_variance, 0.0, atol=1e-12)


# ---------------------------------------------------------------- sampling

def test_sample_needs_two_snapshots():
    post = SwagPosterior.empty(2)
    post.update(np.array([1.0, 2.0]))
    with pytest.raises(ConfigurationError):
        swag_sample(post, seed=0)


def test_sample_matches_closed_form_stream():
    post = SwagPosterior.empty(1)
    post.update(np.array([1.0]))
    post.update(np.array([3.0]))
    w = swag_sample(post, seed=42)
    rng = np.random.default_rng(42)
    z1 = rng.standard_normal(1)
    z2 = rng.standard_normal(2)
    d = post.deviation_matrix
    want = 2.0 + np.sqrt(0.5 * 1.0) * z1 + (d @ z2) / np.sqrt(2.0)
    assert np.allclose(w, want, atol=1e-15)


def test_sample_determinism_per_seed():
    rng = np.random.default_rng(9)
    post = SwagPosterior.empty(6)
    for _ in range(5):
        post.update(rng.normal(0.0, 1.0, 6))
    a = swag_sample(post, seed=7)
    b = swag_sample(post, seed=7)
    c = swag_sample(post, seed=8)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)


def test_identical_snapshots_sample_at_mean():
    post = SwagPosterior.empty(4)
    s = np.array([1.0, -2.0, 0.5, 3.0])
    for _ in range(4):
        post.update(s.copy())
    for seed in range(10):
        assert np.allclose(swag_sample(post, seed), s, atol=1e-9)


def test_empirical_covariance_matches_closed_form():
    rng = np.random.default_rng(21)
    n, k = 10, 6
    post = SwagPosterior.empty(n, max_rank=k)
    base = rng.normal(0.0, 1.0, n)
    for _ in range(k):
        post.update(base + rng.normal(0.0, 0.5, n))
    want = post.covariance()

    draws = np.empty((50_000, n))
    for i in range(draws.shape[0]):
        draws[i] = swag_sample(post, seed=1_000 + i)
    got = np.cov(draws, rowvar=False)
    rel = np.linalg.norm(got - want) / np.linalg.norm(want)
    assert rel < 0.05


def test_single_deviation_column_logs_and_stays_diagonal(caplog):
    # two snapshots but rank capped at 1: only the diagonal term is used
    post = SwagPosterior.empty(2, max_rank=1)
    post.update(np.array([0.0, 0.0]))
    post.update(np.array([2.0, 2.0]))
    assert post.deviation_matrix.shape == (2, 1)
    with caplog.at_level("WARNING"):
        w = swag_sample(post, seed=3)
    assert "diagonal-only" in caplog.text
    rng = np.random.default_rng(3)
    z1 = rng.standard_normal(2)
    assert np.allclose(w, post.mean + np.sqrt(0.5 * post.diagonal_variance) * z1,
                       atol=1e-15)


# ---------------------------------------------------------------- config

def test_config_validation():
    with pytest.raises(ConfigurationError):
        SwagConfig(collect_from_epoch=0)
    with pytest.raises(ConfigurationError):
        SwagConfig(total_epochs=10, collect_from_epoch=11)
    with pytest.raises(ConfigurationError):
        SwagConfig(sample_count=1)
    with pytest.raises(ConfigurationError):
        SwagConfig(max_rank=0)
    with pytest.raises(ConfigurationError):
        SwagConfig(learning_rate=0.0)
    assert SwagConfig(total_epochs=30, collect_from_epoch=21).snapshot_count == 10


# ---------------------------------------------------------------- finetune

def test_finetune_snapshot_and_column_counts():
    data, model = linear_problem()
    model = fitted_linear_model(data, model, epochs=10)
    cfg = SwagConfig(learning_rate=0.02, total_epochs=12, collect_from_epoch=3,
                     max_rank=10, batch_size=64)
    post = finetune_collect(model, data, cfg, seed=1)
    assert post.snapshot_count == 10
    assert post.deviation_matrix.shape == (model.params.size, 10)
    assert np.all(np.isfinite(post.mean))
    assert np.all(post.diagonal_variance >= 0.0)


def test_finetune_window_too_short():
    data, model = linear_problem()
    cfg = SwagConfig(total_epochs=5, collect_from_epoch=5)
    with pytest.raises(ConfigurationError):
        finetune_collect(model, data, cfg, seed=0)


def test_finetune_determinism():
    data, model = linear_problem()
    model = fitted_linear_model(data, model, epochs=10)
    cfg = SwagConfig(learning_rate=0.02, total_epochs=8, collect_from_epoch=4,
                     batch_size=64)
    a = finetune_collect(model, data, cfg, seed=6)
    b = finetune_collect(model, data, cfg, seed=6)
    c = finetune_collect(model, data, cfg, seed=7)
    assert np.array_equal(a.mean, b.mean)
    assert np.array_equal(a.deviation_matrix, b.deviation_matrix)
    assert not np.array_equal(a.mean, c.mean)


def test_finetune_leaves_model_params_untouched():
    data, model = linear_problem()
    model = fitted_linear_model(data, model, epochs=10)
    before = model.params.copy()
    cfg = SwagConfig(learning_rate=0.02, total_epochs=6, collect_from_epoch=3,
                     batch_size=64)
    finetune_collect(model, data, cfg, seed=0)
    assert np.array_equal(model.params, before)


# ---------------------------------------------------------------- ensemble

def test_ensemble_prediction_shapes_and_bounds():
    data, model = linear_problem()
    model = fitted_linear_model(data, model, epochs=20)
    cfg = SwagConfig(learning_rate=0.05, total_epochs=10, collect_from_epoch=3,
                     batch_size=64)
    post = finetune_collect(model, data, cfg, seed=2)
    xte = data.features[data.test_indices]
    pred = ensemble_predict(post, model, xte, data.features[data.train_indices],
                            sample_count=16, seed=0)
    n = xte.shape[0]
    assert pred.mean.shape == (n, 1)
    assert np.all(pred.variance >= 0.0)
    assert np.all(pred.interval_low <= pred.mean)
    assert np.all(pred.mean <= pred.interval_high)
    assert np.all(pred.cv >= 0.0)
    assert np.allclose(pred.interval_high - pred.mean,
                       1.96 * pred.std, atol=1e-12)

    again = ensemble_predict(post, model, xte,
                             data.features[data.train_indices],
                             sample_count=16, seed=0)
    assert np.array_equal(pred.mean, again.mean)
    assert np.array_equal(pred.variance, again.variance)


def test_ensemble_matches_manual_member_stats():
    # no batch-norm layer here, so members depend only on the sampled weights
    data, model = linear_problem()
    model = fitted_linear_model(data, model, epochs=20)
    cfg = SwagConfig(learning_rate=0.05, total_epochs=10, collect_from_epoch=3,
                     batch_size=64)
    post = finetune_collect(model, data, cfg, seed=2)
    xte = data.features[data.test_indices][:20]
    pred = ensemble_predict(post, model, xte, np.empty((0, 4)),
                            sample_count=8, seed=5)

    std = model.standardizer
    xs = std.transform_features(xte)
    members = np.stack([
        std.inverse_targets(model.network.forward(swag_sample(post, 5 + m),
                                                  xs, training=False))
        for m in range(8)])
    assert np.allclose(pred.mean, members.mean(axis=0), atol=1e-12)
    assert np.allclose(pred.variance, members.var(axis=0, ddof=1), atol=1e-12)


def test_ensemble_sample_count_floor():
    data, model = linear_problem()
    model = fitted_linear_model(data, model, epochs=5)
    cfg = SwagConfig(learning_rate=0.02, total_epochs=6, collect_from_epoch=3,
                     batch_size=64)
    post = finetune_collect(model, data, cfg, seed=0)
    with pytest.raises(ConfigurationError):
        ensemble_predict(post, model, data.features[:5], np.empty((0, 4)),
                         sample_count=1)


def test_ensemble_empty_bn_subset_rejected():
    # model with batch-norm layers must refresh on a nonempty subset
    rng = np.random.default_rng(0)
    x = rng.normal(0.0, 1.0, (64, 3))
    y = rng.normal(0.0, 1.0, (64, 2))
    net = Network(emulator_spec(3, (8,), 2), (3,))
    params = net.init_params(np.random.default_rng(1))
    std = Standardizer.fit(x, y)
    model = EmulatorModel(net, params, std, (8,), ("a", "b", "c"), ("u", "v"))
    post = SwagPosterior.empty(params.size)
    post.update(params.copy())
    post.update(params + 0.01)
    with pytest.raises(ConfigurationError):
        ensemble_predict(post, model, x[:4], np.empty((0, 3)), sample_count=4)
    pred = ensemble_predict(post, model, x[:4], x, sample_count=4, seed=0)
    assert pred.mean.shape == (4, 2)


def test_degenerate_posterior_collapses_intervals():
    data, model = linear_problem()
    model = fitted_linear_model(data, model, epochs=20)
    post = SwagPosterior.empty(model.params.size)
    for _ in range(4):
        post.update(model.params.copy())
    xte = data.features[data.test_indices][:10]
    pred = ensemble_predict(post, model, xte, np.empty((0, 4)),
                            sample_count=6, seed=0)
    assert np.allclose(pred.variance, 0.0, atol=1e-18)
    assert np.allclose(pred.cv, 0.0, atol=1e-9)
    assert np.allclose(pred.interval_low, pred.mean, atol=1e-9)
    assert np.allclose(pred.interval_high, pred.mean, atol=1e-9)


# ---------------------------------------------------------------- calibration

def manual_prediction(mean, variance):
    sd = np.sqrt(variance)
    return EnsemblePrediction(mean, variance, mean - 1.96 * sd,
                              mean + 1.96 * sd,
                              sd / np.maximum(np.abs(mean), 1e-9))


def test_calibration_shape_mismatch():
    pred = manual_prediction(np.zeros((5, 1)), np.ones((5, 1)))
    with pytest.raises(InputError):
        calibration_metrics(pred, np.zeros((4, 1)))


def test_calibration_known_gaussian_coverage():
    # intervals with the exact noise scale must cover ~95%
    rng = np.random.default_rng(17)
    n = 5000
    targets = rng.normal(0.0, 1.0, (n, 1))
    pred = manual_prediction(np.zeros((n, 1)), np.ones((n, 1)))
    rep = calibration_metrics(pred, targets, ("y",))
    assert abs(rep.coverage95[0] - 0.95) < 0.02
    assert np.allclose(rep.mean_interval_width, 2 * 1.96, atol=1e-12)
    assert rep.target_labels == ("y",)


def test_calibration_infinite_intervals_cover_everything():
    rng = np.random.default_rng(2)
    targets = rng.normal(0.0, 10.0, (50, 2))
    mean = np.zeros((50, 2))
    var = np.full((50, 2), 1.0)
    pred = EnsemblePrediction(mean, var, np.full((50, 2), -np.inf),
                              np.full((50, 2), np.inf), np.sqrt(var))
    rep = calibration_metrics(pred, targets)
    assert np.all(rep.coverage95 == 1.0)


def test_calibration_zero_variance_correlation_is_none():
    targets = np.ones((20, 1))
    pred = manual_prediction(np.ones((20, 1)), np.full((20, 1), 0.5))
    rep = calibration_metrics(pred, targets)
    # squared error is identically zero, so the correlation is undefined
    assert rep.corr_var_sqerr is None

    pred2 = manual_prediction(np.zeros((20, 1)), np.full((20, 1), 0.5))
    rng = np.random.default_rng(0)
    rep2 = calibration_metrics(pred2, rng.normal(0, 1, (20, 1)))
    assert rep2.corr_var_sqerr is None  # variance constant across points


def test_calibration_coverage_monotone_in_width():
    rng = np.random.default_rng(31)
    n = 2000
    targets = rng.normal(0.0, 2.0, (n, 1))
    narrow = manual_prediction(np.zeros((n, 1)), np.full((n, 1), 0.25))
    wide = manual_prediction(np.zeros((n, 1)), np.full((n, 1), 4.0))
    cov_narrow = calibration_metrics(narrow, targets).coverage95[0]
    cov_wide = calibration_metrics(wide, targets).coverage95[0]
    assert cov_wide > cov_narrow


def test_calibration_positive_correlation_when_variance_tracks_noise():
    rng = np.random.default_rng(13)
    n = 4000
    sigma = np.where(np.arange(n) < n // 2, 0.2, 2.0)[:, None]
    targets = rng.normal(0.0, 1.0, (n, 1)) * sigma
    pred = manual_prediction(np.zeros((n, 1)), sigma ** 2)
    rep = calibration_metrics(pred, targets)
    assert rep.corr_var_sqerr > 0.2


# ---------------------------------------------------------------- cv filter

def test_rank_environments_by_cv():
    cv = np.array([0.1, 0.5, 0.2, 0.2, 0.9])
    tags = ["dry", "dry", "wet", "wet", "hot"]
    assert rank_environments_by_cv(cv, tags) == ["hot", "dry", "wet"]
    # equal means fall back to name order
    cv2 = np.array([0.3, 0.3])
    assert rank_environments_by_cv(cv2, ["b", "a"]) == ["a", "b"]
    with pytest.raises(InputError):
        rank_environments_by_cv(np.array([0.1]), ["a", "b"])


def test_cv_filter_two_tier_rule():
    ranking = ["e1", "e2", "e3", "e4", "e5", "e6"]
    # cv 0.8 passes only in the four most-uncertain environments
    cv = np.array([0.8, 0.8, 0.8, 0.8, 0.8, 0.8])
    tags = ["e1", "e2", "e3", "e4", "e5", "e6"]
    mask = cv_filter(cv, tags, ranking)
    assert mask.tolist() == [True, True, True, True, False, False]

    # cv at/below the default threshold passes everywhere
    low = np.array([0.4, 0.5, 0.0])
    assert cv_filter(low, ["e5", "e6", "e5"], ranking).tolist() == [True, True, True]

    # above the relaxed threshold fails everywhere
    high = np.array([1.2, 1.01])
    assert cv_filter(high, ["e1", "e2"], ranking).tolist() == [False, False]

    # boundary values are inclusive
    edge = np.array([1.0, 0.5])
    assert cv_filter(edge, ["e1", "e5"], ranking).tolist() == [True, True]


def test_cv_filter_unknown_environment():
    with pytest.raises(InputError):
        cv_filter(np.array([0.1]), ["mystery"], ["e1", "e2"])
    with pytest.raises(InputError):
        cv_filter(np.array([0.1, 0.2]), ["e1"], ["e1"])


# ---------------------------------------------------------------- io

def test_posterior_save_load_round_trip(tmp_path):
    rng = np.random.default_rng(8)
    post = SwagPosterior.empty(5, max_rank=3)
    for _ in range(6):
        post.update(rng.normal(0.0, 1.0, 5))
    path = tmp_path / "post.bin"
    save_posterior(path, post)
    back = load_posterior(path)
    assert np.array_equal(back.mean, post.mean)
    assert np.array_equal(back.second_moment, post.second_moment)
    assert np.array_equal(back.deviation_matrix, post.deviation_matrix)
    assert back.snapshot_count == post.snapshot_count
    assert back.max_rank == post.max_rank
    # samples from the reloaded posterior are identical
    assert np.array_equal(swag_sample(back, 4), swag_sample(post, 4))


def test_posterior_load_rejects_garbage(tmp_path):
    path = tmp_path / "bad.bin"
    path.write_bytes(b"NOPE" + b"\x00" * 40)
    with pytest.raises(ParseError):
        load_posterior(path)

    import struct
    path2 = tmp_path / "vers.bin"
    path2.write_bytes(b"CSWG" + struct.pack("<I", 99))
    with pytest.raises(ParseError):
        load_posterior(path2)
