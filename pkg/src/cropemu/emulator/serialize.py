"""Versioned flat-binary serialization of trained emulators.

Layout (all little-endian): magic 'CEMU', uint32 version, the layer
geometry (feature/target widths and hidden sizes), the float64 parameter
vector, per-layer batch-norm running statistics, the standardizer
vectors, and the newline-joined column labels.
"""

import struct

import numpy as np

from ..errors import ParseError
from ..nncore.network import Network
from .dataset import Standardizer
from .train import EmulatorModel, emulator_spec

MAGIC = b"CEMU"
VERSION = 1


def _write_array(fh, arr: np.ndarray) -> None:
    arr = np.ascontiguousarray(arr, dtype="<f8")
    fh.write(struct.pack("<Q", arr.size))
    fh.write(arr.tobytes())


def _read_array(fh) -> np.ndarray:
    (size,) = struct.unpack("<Q", fh.read(8))
    return np.frombuffer(fh.read(8 * size), dtype="<f8").copy()


def _write_text(fh, text: str) -> None:
    raw = text.encode("utf-8")
    fh.write(struct.pack("<I", len(raw)))
    fh.write(raw)


def _read_text(fh) -> str:
    (size,) = struct.unpack("<I", fh.read(4))
    return fh.read(size).decode("utf-8")


def save_emulator(path, model: EmulatorModel) -> None:
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<I", VERSION))
        n_features = len(model.feature_labels)
        n_targets = len(model.target_labels)
        fh.write(struct.pack("<III", n_features, n_targets, len(model.hidden)))
        fh.write(struct.pack(f"<{len(model.hidden)}I", *model.hidden))

        _write_array(fh, model.params)
        bn_layers = sorted(model.network.running_mean)
        fh.write(struct.pack("<I", len(bn_layers)))
        for i in bn_layers:
            fh.write(struct.pack("<I", i))
            _write_array(fh, model.network.running_mean[i])
            _write_array(fh, model.network.running_var[i])

        std = model.standardizer
        for arr in (std.feature_means, std.feature_stds,
                    std.target_means, std.target_stds):
            _write_array(fh, arr)
        _write_text(fh, "\n".join(model.feature_labels))
        _write_text(fh, "\n".join(model.target_labels))


def load_emulator(path) -> EmulatorModel:
    with open(path, "rb") as fh:
        if fh.read(4) != MAGIC:
            raise ParseError(f"{path}: not an emulator file")
        (version,) = struct.unpack("<I", fh.read(4))
        if version != VERSION:
            raise ParseError(f"{path}: unsupported version {version}")
        n_features, n_targets, n_hidden = struct.unpack("<III", fh.read(12))
        hidden = struct.unpack(f"<{n_hidden}I", fh.read(4 * n_hidden))

        params = _read_array(fh)
        spec = emulator_spec(n_features, hidden, n_targets)
        net = Network(spec, (n_features,))
        if params.size != spec.parameter_count:
            raise ParseError(f"{path}: parameter count mismatch")
        (n_bn,) = struct.unpack("<I", fh.read(4))
        for _ in range(n_bn):
            (i,) = struct.unpack("<I", fh.read(4))
            if i not in net.running_mean:
                raise ParseError(f"{path}: layer {i} is not batch-norm")
            net.running_mean[i][:] = _read_array(fh)
            net.running_var[i][:] = _read_array(fh)

        std = Standardizer(_read_array(fh), _read_array(fh),
                           _read_array(fh), _read_array(fh))
        feature_labels = tuple(_read_text(fh).split("\n"))
        target_labels = tuple(_read_text(fh).split("\n"))
    return EmulatorModel(net, params, std, tuple(int(h) for h in hidden),
                         feature_labels, target_labels)
