"""Shared test helpers: small random networks and a finite-difference oracle."""

import numpy as np

from cropemu import nncore as nn
from cropemu.nncore.network import Network


def _arch_dense_mse(rng):
    spec = nn.NetworkSpec([nn.dense(3, 4), nn.relu(), nn.dense(4, 2)])
    net = Network(spec, (3,))
    x = rng.normal(size=(6, 3))
    t = rng.normal(size=(6, 2))
    return net, x, t, "mse", None


def _arch_dense_bn_bce(rng):
    spec = nn.NetworkSpec([nn.dense(4, 5), nn.batchnorm1d(5), nn.relu(),
                           nn.dense(5, 1), nn.sigmoid()])
    net = Network(spec, (4,))
    x = rng.normal(size=(8, 4))
    t = rng.integers(0, 2, size=(8, 1)).astype(float)
    return net, x, t, "bce", None


def _arch_conv_flatten_mse(rng):
    spec = nn.NetworkSpec([nn.conv1d(1, 2, 3, padding=1), nn.batchnorm1d(2),
                           nn.relu(), nn.flatten(), nn.dense(12, 2)])
    net = Network(spec, (1, 6))
    x = rng.normal(size=(5, 1, 6))
    t = rng.normal(size=(5, 2))
    return net, x, t, "mse", None


def _arch_strided_conv_masked(rng):
    spec = nn.NetworkSpec([nn.conv1d(2, 2, 3, stride=2), nn.relu(),
                           nn.flatten(), nn.dense(6, 3)])
    net = Network(spec, (2, 7))
    x = rng.normal(size=(4, 2, 7))
    t = rng.normal(size=(4, 3))
    mask = rng.integers(0, 2, size=(4, 3)).astype(bool)
    mask[0, 0] = True  # never an all-empty mask
    return net, x, t, "masked-mse", mask


def _arch_decoder_mse(rng):
    spec = nn.NetworkSpec([nn.dense(3, 6), nn.relu(), nn.reshape1d(2, 3),
                           nn.upsample1d(2), nn.conv1d(2, 1, 3, padding=1)])
    net = Network(spec, (3,))
    x = rng.normal(size=(5, 3))
    t = rng.normal(size=(5, 1, 6))
    return net, x, t, "mse", None


def _arch_conv_bce(rng):
    spec = nn.NetworkSpec([nn.conv1d(1, 2, 3, padding=1), nn.batchnorm1d(2),
                           nn.sigmoid()])
    net = Network(spec, (1, 5))
    x = rng.normal(size=(6, 1, 5))
    t = rng.integers(0, 2, size=(6, 2, 5)).astype(float)
    return net, x, t, "bce", None


def _arch_wide_dense_masked(rng):
    spec = nn.NetworkSpec([nn.dense(2, 8), nn.relu(), nn.dense(8, 4)])
    net = Network(spec, (2,))
    x = rng.normal(size=(7, 2))
    t = rng.normal(size=(7, 4))
    mask = rng.integers(0, 2, size=(7, 4)).astype(bool)
    mask[0, 0] = True
    return net, x, t, "masked-mse", mask


ARCH_BUILDERS = [_arch_dense_mse, _arch_dense_bn_bce, _arch_conv_flatten_mse,
                 _arch_strided_conv_masked, _arch_decoder_mse, _arch_conv_bce,
                 _arch_wide_dense_masked]


def random_small_net(index: int, seed: int = 20240):
    """Deterministic small problem instance; cycles through architectures
    covering every layer kind and loss. All nets stay at or under 64 params."""
    rng = np.random.default_rng(seed + index)
    net, x, t, loss, mask = ARCH_BUILDERS[index % len(ARCH_BUILDERS)](rng)
    assert net.parameter_count <= 64
    params = net.init_params(rng)
    return net, params, x, t, loss, mask


def finite_difference_grad(net, params, x, t, loss, mask=None, h=1e-5):
    fd = np.zeros_like(params)
    for i in range(params.size):
        up = params.copy()
        up[i] += h
        down = params.copy()
        down[i] -= h
        vu, _ = net.gradients(up, x, t, loss, mask=mask)
        vd, _ = net.gradients(down, x, t, loss, mask=mask)
        fd[i] = (vu - vd) / (2.0 * h)
    return fd


def max_relative_error(analytic, reference, floor=1e-6):
    denom = np.maximum(np.abs(reference), floor)
    return float(np.max(np.abs(analytic - reference) / denom))
