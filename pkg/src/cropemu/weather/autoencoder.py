"""Convolutional weather autoencoders.

Two models share one architecture family: three stride-2 conv blocks to
a dense latent bottleneck, mirrored by upsampling conv blocks. The
temperature-radiation model encodes (maxT, diurnalRange, radn); decoding
maxT plus a nonnegative diurnal range keeps maxT >= minT structural.
The rainfall model encodes log1p(rain) and decodes through two heads:
wet-day occurrence logits and log1p intensity.

Series of 365 days are edge-padded to 368 (divisible by 8) so the three
stride-2 stages keep exact shapes; decoders emit 368 and crop back.
"""

from dataclasses import dataclass, field

import numpy as np

from .. import nncore as nn
from ..errors import InputError
from ..nncore.network import Network
from .series import DAYS_PER_YEAR, WeatherSeries

PADDED_LENGTH = 368
TEMPRAD_LATENT = 10
RAIN_LATENT = 6
_CONV_CHANNELS = (16, 32, 64)
_KERNEL = 7
_BOTTLENECK_LENGTH = PADDED_LENGTH // 8  # 46


def _pad_days(x: np.ndarray) -> np.ndarray:
    """(N, C, 365) -> (N, C, 368) repeating the final day."""
    tail = np.repeat(x[:, :, -1:], PADDED_LENGTH - DAYS_PER_YEAR, axis=2)
    return np.concatenate([x, tail], axis=2)


def _crop_days(x: np.ndarray) -> np.ndarray:
    return x[:, :, :DAYS_PER_YEAR]


def _encoder_spec(channels_in: int, latent: int) -> nn.NetworkSpec:
    layers = []
    prev = channels_in
    for ch in _CONV_CHANNELS:
        layers.append(nn.conv1d(prev, ch, _KERNEL, stride=2, padding=3))
        layers.append(nn.relu())
        layers.append(nn.batchnorm1d(ch))
        prev = ch
    layers.append(nn.flatten())
    layers.append(nn.dense(_CONV_CHANNELS[-1] * _BOTTLENECK_LENGTH, latent))
    return nn.NetworkSpec(layers)


def _decoder_spec(latent: int, channels_out: int) -> nn.NetworkSpec:
    widths = list(reversed(_CONV_CHANNELS))  # 64, 32, 16
    layers = [
        nn.dense(latent, widths[0] * _BOTTLENECK_LENGTH),
        nn.relu(),
        nn.reshape1d(widths[0], _BOTTLENECK_LENGTH),
    ]
    for nxt in widths[1:]:
        layers.append(nn.upsample1d(2))
        layers.append(nn.conv1d(layers_channels(layers), nxt, _KERNEL, padding=3))
        layers.append(nn.relu())
        layers.append(nn.batchnorm1d(nxt))
    layers.append(nn.upsample1d(2))
    layers.append(nn.conv1d(widths[-1], channels_out, _KERNEL, padding=3))
    return nn.NetworkSpec(layers)


def layers_channels(layers) -> int:
    """Channel count flowing out of the layers built so far."""
    for layer in reversed(layers):
        if layer.kind == "conv1d":
            return layer.channels_out
        if layer.kind == "reshape1d":
            return layer.channels
    raise InputError("no channel-bearing layer yet")


@dataclass
class AutoencoderModel:
    encoder: Network
    decoder: Network
    enc_params: np.ndarray
    dec_params: np.ndarray
    channel_means: np.ndarray
    channel_stds: np.ndarray
    epoch_losses: list = field(default_factory=list)

    def encode(self, channels: np.ndarray) -> np.ndarray:
        z = (channels - self.channel_means[None, :, None]) \
            / self.channel_stds[None, :, None]
        return self.encoder.forward(self.enc_params, _pad_days(z))

    def decode_raw(self, latent: np.ndarray) -> np.ndarray:
        """Decoder output in normalized space, cropped to 365 days."""
        return _crop_days(self.decoder.forward(self.dec_params, latent))


class TempRadAutoencoder(AutoencoderModel):
    pass


class RainAutoencoder(AutoencoderModel):
    pass


def temprad_channels(series_list) -> np.ndarray:
    """(N, 3, 365): maxT, diurnal range, radiation."""
    out = np.empty((len(series_list), 3, DAYS_PER_YEAR))
    for i, s in enumerate(series_list):
        out[i, 0] = s.maxt
        out[i, 1] = s.maxt - s.mint
        out[i, 2] = s.radn
    return out


def rain_channels(series_list) -> np.ndarray:
    """(N, 1, 365): log1p rainfall."""
    out = np.empty((len(series_list), 1, DAYS_PER_YEAR))
    for i, s in enumerate(series_list):
        out[i, 0] = np.log1p(s.rain)
    return out


def _channel_stats(channels: np.ndarray) -> tuple:
    means = channels.mean(axis=(0, 2))
    stds = channels.std(axis=(0, 2))
    stds = np.where(stds > 1e-9, stds, 1.0)
    return means, stds


def _sigmoid(x: np.ndarray) -> np.ndarray:
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def bce_with_logits(logits: np.ndarray, targets: np.ndarray) -> tuple:
    """Numerically stable BCE on logits; returns (value, d_logits)."""
    z, t = logits, targets
    value = float(np.mean(np.maximum(z, 0.0) - z * t + np.log1p(np.exp(-np.abs(z)))))
    grad = (_sigmoid(z) - t) / z.size
    return value, grad


def _train_autoencoder(channels: np.ndarray, latent: int, lr: float, wd: float,
                       epochs: int, batch_size: int, seed: int,
                       loss_fn) -> tuple:
    """Generic AE loop; loss_fn(recon, normalized_target) -> (value, d_recon)."""
    n, c = channels.shape[0], channels.shape[1]
    if n == 0:
        raise InputError("empty corpus")
    means, stds = _channel_stats(channels)
    z = (channels - means[None, :, None]) / stds[None, :, None]
    z = _pad_days(z)

    rng = np.random.default_rng(seed)
    out_channels = loss_fn.output_channels
    encoder = Network(_encoder_spec(c, latent), (c, PADDED_LENGTH))
    decoder = Network(_decoder_spec(latent, out_channels), (latent,))
    enc_params = encoder.init_params(rng)
    dec_params = decoder.init_params(rng)

    opt_cfg = nn.OptimizerConfig("adaptive-moment", learning_rate=lr,
                                 momentum=0.9, weight_decay=wd)
    enc_state = nn.OptimizerState.fresh(enc_params.size)
    dec_state = nn.OptimizerState.fresh(dec_params.size)
    sched = nn.SchedulerState()
    current_lr = lr

    epoch_losses = []
    for _ in range(epochs):
        order = rng.permutation(n)
        total, seen = 0.0, 0
        for start in range(0, n, batch_size):
            rows = order[start:start + batch_size]
            xb = z[rows]
            latent_out, enc_cache = encoder.forward_cached(enc_params, xb)
            recon, dec_cache = decoder.forward_cached(dec_params, latent_out)
            value, d_recon = loss_fn(recon, xb, rows)
            d_dec, d_latent = decoder.backward(dec_params, dec_cache, d_recon)
            d_enc, _ = encoder.backward(enc_params, enc_cache, d_latent)
            enc_params = nn.optimizer_step(opt_cfg, enc_params, d_enc, enc_state,
                                           learning_rate=current_lr)
            dec_params = nn.optimizer_step(opt_cfg, dec_params, d_dec, dec_state,
                                           learning_rate=current_lr)
            total += value * len(rows)
            seen += len(rows)
        epoch_loss = total / seen
        epoch_losses.append(epoch_loss)
        current_lr = nn.scheduler_step(sched, epoch_loss, current_lr)

    # freeze batch-norm statistics on a representative batch
    stat_rows = np.arange(min(n, max(batch_size, 2)))
    encoder.refresh_running_stats(enc_params, z[stat_rows])
    lat_stat = encoder.forward(enc_params, z[stat_rows])
    decoder.refresh_running_stats(dec_params, lat_stat)
    return encoder, decoder, enc_params, dec_params, means, stds, epoch_losses


class _MseReconLoss:
    output_channels = None  # set at construction

    def __init__(self, channels: int):
        self.output_channels = channels

    def __call__(self, recon, target, rows):
        return nn.mse_loss(recon, target)


class _RainDualLoss:
    """Occurrence BCE (on logits) + masked MSE on wet-day log1p intensity."""
    output_channels = 2

    def __init__(self, wet_mask_padded: np.ndarray):
        self.wet = wet_mask_padded  # (N, 1, 368) booleans

    def __call__(self, recon, target, rows):
        logits = recon[:, 0:1, :]
        intensity = recon[:, 1:2, :]
        wet = self.wet[rows]
        occ_value, d_logits = bce_with_logits(logits, wet.astype(np.float64))
        int_value, d_intensity = nn.masked_mse_loss(intensity, target, wet)
        d_recon = np.concatenate([d_logits, d_intensity], axis=1)
        return occ_value + int_value, d_recon


def train_temprad_ae(corpus, learning_rate: float = 1e-3,
                     weight_decay: float = 3e-4, epochs: int = 500,
                     batch_size: int = 96, seed: int = 0) -> TempRadAutoencoder:
    channels = temprad_channels(corpus)
    parts = _train_autoencoder(channels, TEMPRAD_LATENT, learning_rate,
                               weight_decay, epochs, batch_size, seed,
                               _MseReconLoss(3))
    return TempRadAutoencoder(*parts)


def train_rain_ae(corpus, learning_rate: float = 5e-4,
                  weight_decay: float = 1e-4, epochs: int = 500,
                  batch_size: int = 96, seed: int = 0) -> RainAutoencoder:
    if len(corpus) == 0:
        raise InputError("empty corpus")
    channels = rain_channels(corpus)
    wet = np.stack([(s.rain > 0.0)[None, :] for s in corpus])
    wet_padded = np.concatenate(
        [wet, np.repeat(wet[:, :, -1:], PADDED_LENGTH - DAYS_PER_YEAR, axis=2)],
        axis=2)
    parts = _train_autoencoder(channels, RAIN_LATENT, learning_rate,
                               weight_decay, epochs, batch_size, seed,
                               _RainDualLoss(wet_padded))
    return RainAutoencoder(*parts)


def decode_temprad(model: TempRadAutoencoder, latent: np.ndarray) -> np.ndarray:
    """Latent rows -> (N, 3, 365) physical channels with invariants applied."""
    raw = model.decode_raw(np.atleast_2d(latent))
    phys = raw * model.channel_stds[None, :, None] + model.channel_means[None, :, None]
    phys[:, 1] = np.maximum(phys[:, 1], 0.0)   # diurnal range
    phys[:, 2] = np.maximum(phys[:, 2], 0.0)   # radiation
    return phys


def decode_rain(model: RainAutoencoder, latent: np.ndarray) -> np.ndarray:
    """Latent rows -> (N, 365) rainfall: occurrence gate times intensity."""
    raw = model.decode_raw(np.atleast_2d(latent))
    wet = _sigmoid(raw[:, 0]) > 0.5
    log1p_amount = raw[:, 1] * model.channel_stds[0] + model.channel_means[0]
    amount = np.maximum(np.expm1(log1p_amount), 0.0)
    return np.where(wet, amount, 0.0)


def reconstruct_series(temprad: TempRadAutoencoder, rain_model: RainAutoencoder,
                       series: WeatherSeries) -> WeatherSeries:
    z_tr = temprad.encode(temprad_channels([series]))
    z_rn = rain_model.encode(rain_channels([series]))
    phys = decode_temprad(temprad, z_tr)[0]
    rain = decode_rain(rain_model, z_rn)[0]
    return series.with_fields(maxt=phys[0], mint=phys[0] - phys[1],
                              radn=phys[2], rain=rain)


def encode_series(temprad: TempRadAutoencoder, rain_model: RainAutoencoder,
                  series_list) -> np.ndarray:
    """(N, 16) latent matrix: 10 temp-rad dims then 6 rain dims."""
    z_tr = temprad.encode(temprad_channels(series_list))
    z_rn = rain_model.encode(rain_channels(series_list))
    return np.hstack([z_tr, z_rn])
