"""Flat-parameter feed-forward networks with analytic gradients.

All math is float64 numpy. A Network owns its immutable NetworkSpec plus
the mutable batch-norm running statistics; parameters themselves always
travel as an external flat vector so optimizers and posterior samplers
can treat the model as a point in R^p.
"""

import numpy as np

from ..errors import ConfigurationError, NumericError
from . import layers as L
from .losses import loss_and_grad


def _as_batch(x: np.ndarray, input_shape: tuple) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.shape[1:] != input_shape:
        raise ConfigurationError(
            f"batch shape {x.shape} does not match input contract {input_shape}")
    return x


def _check_finite(values: np.ndarray, layer_index: int) -> None:
    if not np.all(np.isfinite(values)):
        raise NumericError(f"non-finite activation after layer {layer_index}")


def _bn_axes(x: np.ndarray) -> tuple:
    # (N, F) normalizes per feature; (N, C, L) per channel
    return (0,) if x.ndim == 2 else (0, 2)


def _bn_expand(v: np.ndarray, ndim: int) -> np.ndarray:
    return v[None, :] if ndim == 2 else v[None, :, None]


class Network:
    """Executable network: spec + input contract + batch-norm state."""

    def __init__(self, spec: L.NetworkSpec, input_shape: tuple):
        self.spec = spec
        self.input_shape = tuple(int(s) for s in input_shape)
        self.shapes = spec.shape_chain(self.input_shape)
        self.slices = spec.parameter_slices()
        self.running_mean = {}
        self.running_var = {}
        for i, layer in enumerate(spec.layers):
            if layer.kind == L.BATCHNORM1D:
                self.running_mean[i] = np.zeros(layer.feature_count)
                self.running_var[i] = np.ones(layer.feature_count)

    @property
    def parameter_count(self) -> int:
        return self.spec.parameter_count

    def init_params(self, rng: np.random.Generator) -> np.ndarray:
        """Uniform fan-based weights, zero biases, batch-norm scale 1 / shift 0."""
        params = np.zeros(self.parameter_count)
        for i, layer in enumerate(self.spec.layers):
            lo, hi = self.slices[i]
            if layer.kind == L.DENSE:
                fan_in, fan_out = layer.in_size, layer.out_size
                bound = np.sqrt(6.0 / (fan_in + fan_out))
                nw = fan_in * fan_out
                params[lo:lo + nw] = rng.uniform(-bound, bound, size=nw)
            elif layer.kind == L.CONV1D:
                fan_in = layer.channels_in * layer.kernel_width
                fan_out = layer.channels_out * layer.kernel_width
                bound = np.sqrt(6.0 / (fan_in + fan_out))
                nw = layer.channels_in * layer.channels_out * layer.kernel_width
                params[lo:lo + nw] = rng.uniform(-bound, bound, size=nw)
            elif layer.kind == L.BATCHNORM1D:
                params[lo:lo + layer.feature_count] = 1.0  # scale; shift stays 0
        return params

    def reset_running_stats(self) -> None:
        for i in self.running_mean:
            self.running_mean[i][:] = 0.0
            self.running_var[i][:] = 1.0

    def refresh_running_stats(self, params: np.ndarray, batch: np.ndarray) -> None:
        """Recompute running statistics from one representative batch."""
        self.reset_running_stats()
        x = _as_batch(batch, self.input_shape)
        params = self._check_params(params)
        for i, layer in enumerate(self.spec.layers):
            x = self._forward_layer(i, layer, params, x, training=True,
                                    stat_overwrite=True)

    def _check_params(self, params) -> np.ndarray:
        params = np.asarray(params, dtype=np.float64)
        if params.shape != (self.parameter_count,):
            raise ConfigurationError(
                f"expected {self.parameter_count} parameters, got shape {params.shape}")
        return params

    def _layer_params(self, i: int, layer: L.LayerSpec, params: np.ndarray):
        lo, hi = self.slices[i]
        chunk = params[lo:hi]
        if layer.kind == L.DENSE:
            nw = layer.in_size * layer.out_size
            w = chunk[:nw].reshape(layer.out_size, layer.in_size)
            b = chunk[nw:]
            return w, b
        if layer.kind == L.CONV1D:
            nw = layer.channels_in * layer.channels_out * layer.kernel_width
            w = chunk[:nw].reshape(layer.channels_out, layer.channels_in,
                                   layer.kernel_width)
            b = chunk[nw:]
            return w, b
        if layer.kind == L.BATCHNORM1D:
            f = layer.feature_count
            return chunk[:f], chunk[f:]  # scale, shift
        return None

    # -- forward ------------------------------------------------------------

    def _forward_layer(self, i, layer, params, x, training, cache=None,
                       stat_overwrite=False):
        kind = layer.kind
        if kind == L.DENSE:
            w, b = self._layer_params(i, layer, params)
            out = x @ w.T + b
            if cache is not None:
                cache.append(("dense", x))
        elif kind == L.CONV1D:
            w, b = self._layer_params(i, layer, params)
            out, cols = _conv1d_forward(x, w, b, layer.stride, layer.padding)
            if cache is not None:
                cache.append(("conv1d", cols, x.shape))
        elif kind == L.BATCHNORM1D:
            scale, shift = self._layer_params(i, layer, params)
            axes = _bn_axes(x)
            if training:
                mean = x.mean(axis=axes)
                var = x.var(axis=axes)
                if stat_overwrite:
                    self.running_mean[i][:] = mean
                    self.running_var[i][:] = var
                else:
                    m = layer.momentum
                    self.running_mean[i] *= 1.0 - m
                    self.running_mean[i] += m * mean
                    self.running_var[i] *= 1.0 - m
                    self.running_var[i] += m * var
            else:
                mean = self.running_mean[i]
                var = self.running_var[i]
            inv_std = 1.0 / np.sqrt(var + layer.epsilon)
            xhat = (x - _bn_expand(mean, x.ndim)) * _bn_expand(inv_std, x.ndim)
            out = xhat * _bn_expand(scale, x.ndim) + _bn_expand(shift, x.ndim)
            if cache is not None:
                cache.append(("batchnorm1d", xhat, inv_std, scale, training))
        elif kind == L.RELU:
            out = np.maximum(x, 0.0)
            if cache is not None:
                cache.append(("relu", x > 0.0))
        elif kind == L.SIGMOID:
            out = _sigmoid(x)
            if cache is not None:
                cache.append(("sigmoid", out))
        elif kind == L.FLATTEN:
            out = x.reshape(x.shape[0], -1)
            if cache is not None:
                cache.append(("flatten", x.shape))
        elif kind == L.RESHAPE1D:
            out = x.reshape(x.shape[0], layer.channels, layer.length)
            if cache is not None:
                cache.append(("reshape1d", x.shape))
        elif kind == L.UPSAMPLE1D:
            out = np.repeat(x, layer.factor, axis=2)
            if cache is not None:
                cache.append(("upsample1d", layer.factor))
        else:  # pragma: no cover - LayerSpec already rejects unknown kinds
            raise ConfigurationError(f"unknown layer kind {kind!r}")
        _check_finite(out, i)
        return out

    def forward(self, params, batch, training: bool = False) -> np.ndarray:
        params = self._check_params(params)
        x = _as_batch(batch, self.input_shape)
        for i, layer in enumerate(self.spec.layers):
            x = self._forward_layer(i, layer, params, x, training)
        return x

    def forward_cached(self, params, batch, training: bool = True):
        params = self._check_params(params)
        x = _as_batch(batch, self.input_shape)
        caches = []
        for i, layer in enumerate(self.spec.layers):
            x = self._forward_layer(i, layer, params, x, training, cache=caches)
        return x, caches

    # -- backward -----------------------------------------------------------

    def backward(self, params, caches, d_out) -> tuple:
        """Backpropagate d(loss)/d(output); returns (d_params, d_input)."""
        params = self._check_params(params)
        d_params = np.zeros_like(params)
        d = np.asarray(d_out, dtype=np.float64)
        for i in range(len(self.spec.layers) - 1, -1, -1):
            layer = self.spec.layers[i]
            entry = caches[i]
            lo, hi = self.slices[i]
            kind = entry[0]
            if kind == "dense":
                x = entry[1]
                w, _ = self._layer_params(i, layer, params)
                nw = layer.in_size * layer.out_size
                d_params[lo:lo + nw] = (d.T @ x).ravel()
                d_params[lo + nw:hi] = d.sum(axis=0)
                d = d @ w
            elif kind == "conv1d":
                cols, x_shape = entry[1], entry[2]
                w, _ = self._layer_params(i, layer, params)
                d, dw, db = _conv1d_backward(d, cols, w, x_shape,
                                             layer.stride, layer.padding)
                nw = dw.size
                d_params[lo:lo + nw] = dw.ravel()
                d_params[lo + nw:hi] = db
            elif kind == "batchnorm1d":
                xhat, inv_std, scale, trained = entry[1], entry[2], entry[3], entry[4]
                axes = _bn_axes(d)
                f = layer.feature_count
                d_params[lo:lo + f] = (d * xhat).sum(axis=axes)
                d_params[lo + f:hi] = d.sum(axis=axes)
                d_xhat = d * _bn_expand(scale, d.ndim)
                if trained:
                    m = d.size / f  # samples per feature
                    s1 = d_xhat.sum(axis=axes)
                    s2 = (d_xhat * xhat).sum(axis=axes)
                    d = (_bn_expand(inv_std, d.ndim) / m) * (
                        m * d_xhat
                        - _bn_expand(s1, d.ndim)
                        - xhat * _bn_expand(s2, d.ndim))
                else:
                    d = d_xhat * _bn_expand(inv_std, d.ndim)
            elif kind == "relu":
                d = d * entry[1]
            elif kind == "sigmoid":
                y = entry[1]
                d = d * y * (1.0 - y)
            elif kind == "flatten":
                d = d.reshape(entry[1])
            elif kind == "reshape1d":
                d = d.reshape(entry[1])
            elif kind == "upsample1d":
                factor = entry[1]
                n, c, lo_len = d.shape[0], d.shape[1], d.shape[2] // entry[1]
                d = d.reshape(n, c, lo_len, factor).sum(axis=3)
        return d_params, d

    def gradients(self, params, batch, targets, loss: str, mask=None,
                  training: bool = True) -> tuple:
        """Loss value plus d(loss)/d(params) for one of the named losses."""
        out, caches = self.forward_cached(params, batch, training=training)
        value, d_out = loss_and_grad(loss, out, targets, mask=mask)
        d_params, _ = self.backward(params, caches, d_out)
        if not np.all(np.isfinite(d_params)):
            raise NumericError("non-finite gradient")
        return value, d_params


def network_forward(net: Network, params, batch, mode: str = "eval") -> np.ndarray:
    if mode not in ("train", "eval"):
        raise ConfigurationError(f"mode must be train or eval, got {mode!r}")
    return net.forward(params, batch, training=(mode == "train"))


def network_gradients(net: Network, params, batch, targets, loss: str,
                      mask=None) -> tuple:
    return net.gradients(params, batch, targets, loss, mask=mask)


def _sigmoid(x: np.ndarray) -> np.ndarray:
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def _conv1d_forward(x, w, b, stride, padding):
    n, c_in, length = x.shape
    c_out, _, k = w.shape
    if padding:
        xp = np.zeros((n, c_in, length + 2 * padding))
        xp[:, :, padding:padding + length] = x
    else:
        xp = x
    l_out = L.conv_output_length(length, k, stride, padding)
    cols = np.empty((n, c_in, l_out, k))
    for j in range(k):
        cols[:, :, :, j] = xp[:, :, j:j + stride * (l_out - 1) + 1:stride]
    out = np.einsum("nclk,ock->nol", cols, w, optimize=True) + b[None, :, None]
    return out, cols


def _conv1d_backward(d_out, cols, w, x_shape, stride, padding):
    n, c_in, length = x_shape
    c_out, _, k = w.shape
    l_out = d_out.shape[2]
    dw = np.einsum("nol,nclk->ock", d_out, cols, optimize=True)
    db = d_out.sum(axis=(0, 2))
    d_cols = np.einsum("nol,ock->nclk", d_out, w, optimize=True)
    d_xp = np.zeros((n, c_in, length + 2 * padding))
    for j in range(k):
        d_xp[:, :, j:j + stride * (l_out - 1) + 1:stride] += d_cols[:, :, :, j]
    if padding:
        d_x = d_xp[:, :, padding:padding + length]
    else:
        d_x = d_xp
    return d_x, dw, db
