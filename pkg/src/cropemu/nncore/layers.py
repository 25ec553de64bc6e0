"""Layer and network specifications.

A network is an ordered list of LayerSpec entries; all trainable scalars
live in one flat float64 parameter vector, sliced per layer in order.
Activations flow as float64 arrays shaped (N, features) for dense-style
layers and (N, channels, length) for conv-style layers.
"""

from dataclasses import dataclass, field

from ..errors import ConfigurationError

DENSE = "dense"
CONV1D = "conv1d"
BATCHNORM1D = "batchnorm1d"
RELU = "relu"
SIGMOID = "sigmoid"
FLATTEN = "flatten"
RESHAPE1D = "reshape1d"
UPSAMPLE1D = "upsample1d"

KINDS = (DENSE, CONV1D, BATCHNORM1D, RELU, SIGMOID, FLATTEN, RESHAPE1D, UPSAMPLE1D)


@dataclass(frozen=True)
class LayerSpec:
    kind: str
    in_size: int = 0
    out_size: int = 0
    channels_in: int = 0
    channels_out: int = 0
    kernel_width: int = 0
    stride: int = 1
    padding: int = 0
    feature_count: int = 0
    momentum: float = 0.1
    epsilon: float = 1e-5
    channels: int = 0
    length: int = 0
    factor: int = 0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigurationError(f"unknown layer kind {self.kind!r}")
        if self.kind == DENSE and (self.in_size < 1 or self.out_size < 1):
            raise ConfigurationError("dense layer needs in_size and out_size >= 1")
        if self.kind == CONV1D:
            if self.kernel_width < 1 or self.stride < 1:
                raise ConfigurationError("conv1d needs kernel_width >= 1 and stride >= 1")
            if self.channels_in < 1 or self.channels_out < 1:
                raise ConfigurationError("conv1d needs positive channel counts")
            if self.padding < 0:
                raise ConfigurationError("conv1d padding must be >= 0")
        if self.kind == BATCHNORM1D:
            if self.feature_count < 1:
                raise ConfigurationError("batchnorm1d needs feature_count >= 1")
            if not 0.0 < self.momentum < 1.0:
                raise ConfigurationError("batchnorm momentum must be in (0,1)")
            if self.epsilon <= 0.0:
                raise ConfigurationError("batchnorm epsilon must be > 0")
        if self.kind == RESHAPE1D and (self.channels < 1 or self.length < 1):
            raise ConfigurationError("reshape1d needs target channels and length")
        if self.kind == UPSAMPLE1D and self.factor < 1:
            raise ConfigurationError("upsample1d factor must be >= 1")

    @property
    def parameter_count(self) -> int:
        if self.kind == DENSE:
            return self.in_size * self.out_size + self.out_size
        if self.kind == CONV1D:
            return self.channels_in * self.channels_out * self.kernel_width + self.channels_out
        if self.kind == BATCHNORM1D:
            return 2 * self.feature_count
        return 0


def dense(in_size: int, out_size: int) -> LayerSpec:
    return LayerSpec(DENSE, in_size=in_size, out_size=out_size)


def conv1d(channels_in: int, channels_out: int, kernel_width: int,
           stride: int = 1, padding: int = 0) -> LayerSpec:
    return LayerSpec(CONV1D, channels_in=channels_in, channels_out=channels_out,
                     kernel_width=kernel_width, stride=stride, padding=padding)


def batchnorm1d(feature_count: int, momentum: float = 0.1, epsilon: float = 1e-5) -> LayerSpec:
    return LayerSpec(BATCHNORM1D, feature_count=feature_count,
                     momentum=momentum, epsilon=epsilon)


def relu() -> LayerSpec:
    return LayerSpec(RELU)


def sigmoid() -> LayerSpec:
    return LayerSpec(SIGMOID)


def flatten() -> LayerSpec:
    return LayerSpec(FLATTEN)


def reshape1d(channels: int, length: int) -> LayerSpec:
    return LayerSpec(RESHAPE1D, channels=channels, length=length)


def upsample1d(factor: int) -> LayerSpec:
    return LayerSpec(UPSAMPLE1D, factor=factor)


def conv_output_length(length: int, kernel_width: int, stride: int, padding: int) -> int:
    out = (length + 2 * padding - kernel_width) // stride + 1
    if out < 1:
        raise ConfigurationError(
            f"conv1d produces empty output (length {length}, kernel {kernel_width}, "
            f"stride {stride}, padding {padding})")
    return out


def layer_output_shape(spec: LayerSpec, shape: tuple) -> tuple:
    """Per-sample shape after `spec` given per-sample input `shape`.

    Shapes are (features,) for dense-style tensors and (channels, length)
    for conv-style tensors.
    """
    if spec.kind == DENSE:
        if shape != (spec.in_size,):
            raise ConfigurationError(f"dense expects ({spec.in_size},), got {shape}")
        return (spec.out_size,)
    if spec.kind == CONV1D:
        if len(shape) != 2 or shape[0] != spec.channels_in:
            raise ConfigurationError(
                f"conv1d expects ({spec.channels_in}, L), got {shape}")
        return (spec.channels_out,
                conv_output_length(shape[1], spec.kernel_width, spec.stride, spec.padding))
    if spec.kind == BATCHNORM1D:
        feat = shape[0]
        if feat != spec.feature_count:
            raise ConfigurationError(
                f"batchnorm1d expects {spec.feature_count} features/channels, got {shape}")
        return shape
    if spec.kind == FLATTEN:
        if len(shape) != 2:
            raise ConfigurationError(f"flatten expects (C, L), got {shape}")
        return (shape[0] * shape[1],)
    if spec.kind == RESHAPE1D:
        if shape != (spec.channels * spec.length,):
            raise ConfigurationError(
                f"reshape1d expects ({spec.channels * spec.length},), got {shape}")
        return (spec.channels, spec.length)
    if spec.kind == UPSAMPLE1D:
        if len(shape) != 2:
            raise ConfigurationError(f"upsample1d expects (C, L), got {shape}")
        return (shape[0], shape[1] * spec.factor)
    return shape  # relu, sigmoid


@dataclass(frozen=True)
class NetworkSpec:
    layers: tuple = field(default_factory=tuple)

    def __init__(self, layers):
        object.__setattr__(self, "layers", tuple(layers))

    @property
    def parameter_count(self) -> int:
        return sum(layer.parameter_count for layer in self.layers)

    def parameter_slices(self) -> list:
        """(start, stop) into the flat parameter vector, one per layer."""
        slices, offset = [], 0
        for layer in self.layers:
            n = layer.parameter_count
            slices.append((offset, offset + n))
            offset += n
        return slices

    def shape_chain(self, input_shape: tuple) -> list:
        """Per-sample shapes before/after every layer; raises if they don't compose."""
        shapes = [tuple(input_shape)]
        for layer in self.layers:
            shapes.append(layer_output_shape(layer, shapes[-1]))
        return shapes
