"""Versioned flat-binary serialization of trained weather autoencoders.

Layout (little-endian): magic 'CWAE', uint32 version, a kind byte
(0 temperature/radiation, 1 rain), the channel/latent geometry, encoder
and decoder parameter vectors, per-network batch-norm running
statistics, and the channel normalization vectors.
"""

import struct

import numpy as np

from ..errors import ParseError
from ..nncore.network import Network
from .autoencoder import (
    PADDED_LENGTH,
    RAIN_LATENT,
    TEMPRAD_LATENT,
    RainAutoencoder,
    TempRadAutoencoder,
    _decoder_spec,
    _encoder_spec,
)

MAGIC = b"CWAE"
VERSION = 1

_KIND_TEMPRAD = 0
_KIND_RAIN = 1


def _write_array(fh, arr: np.ndarray) -> None:
    arr = np.ascontiguousarray(arr, dtype="<f8")
    fh.write(struct.pack("<Q", arr.size))
    fh.write(arr.tobytes())


def _read_array(fh) -> np.ndarray:
    (size,) = struct.unpack("<Q", fh.read(8))
    return np.frombuffer(fh.read(8 * size), dtype="<f8").copy()


def _write_bn(fh, net: Network) -> None:
    layers = sorted(net.running_mean)
    fh.write(struct.pack("<I", len(layers)))
    for i in layers:
        fh.write(struct.pack("<I", i))
        _write_array(fh, net.running_mean[i])
        _write_array(fh, net.running_var[i])


def _read_bn(fh, net: Network, path) -> None:
    (count,) = struct.unpack("<I", fh.read(4))
    for _ in range(count):
        (i,) = struct.unpack("<I", fh.read(4))
        if i not in net.running_mean:
            raise ParseError(f"{path}: layer {i} is not batch-norm")
        net.running_mean[i][:] = _read_array(fh)
        net.running_var[i][:] = _read_array(fh)


def save_autoencoder(path, model) -> None:
    if isinstance(model, TempRadAutoencoder):
        kind, latent = _KIND_TEMPRAD, TEMPRAD_LATENT
    elif isinstance(model, RainAutoencoder):
        kind, latent = _KIND_RAIN, RAIN_LATENT
    else:
        raise ParseError(f"unknown autoencoder type {type(model).__name__}")
    channels_in = model.channel_means.size
    out_channels = 3 if kind == _KIND_TEMPRAD else 2

    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<I", VERSION))
        fh.write(struct.pack("<BIII", kind, channels_in, latent, out_channels))
        _write_array(fh, model.enc_params)
        _write_array(fh, model.dec_params)
        _write_bn(fh, model.encoder)
        _write_bn(fh, model.decoder)
        _write_array(fh, model.channel_means)
        _write_array(fh, model.channel_stds)


def load_autoencoder(path):
    with open(path, "rb") as fh:
        if fh.read(4) != MAGIC:
            raise ParseError(f"{path}: not an autoencoder file")
        (version,) = struct.unpack("<I", fh.read(4))
        if version != VERSION:
            raise ParseError(f"{path}: unsupported version {version}")
        kind, channels_in, latent, out_channels = \
            struct.unpack("<BIII", fh.read(13))
        if kind not in (_KIND_TEMPRAD, _KIND_RAIN):
            raise ParseError(f"{path}: unknown autoencoder kind {kind}")

        encoder = Network(_encoder_spec(channels_in, latent),
                          (channels_in, PADDED_LENGTH))
        decoder = Network(_decoder_spec(latent, out_channels), (latent,))
        enc_params = _read_array(fh)
        dec_params = _read_array(fh)
        if enc_params.size != encoder.spec.parameter_count:
            raise ParseError(f"{path}: encoder parameter count mismatch")
        if dec_params.size != decoder.spec.parameter_count:
            raise ParseError(f"{path}: decoder parameter count mismatch")
        _read_bn(fh, encoder, path)
        _read_bn(fh, decoder, path)
        channel_means = _read_array(fh)
        channel_stds = _read_array(fh)

    cls = TempRadAutoencoder if kind == _KIND_TEMPRAD else RainAutoencoder
    return cls(encoder, decoder, enc_params, dec_params,
               channel_means, channel_stds)
