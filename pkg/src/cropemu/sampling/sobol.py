"""Gray-code Sobol sequence, up to 32 dimensions.

Direction numbers follow the classic primitive-polynomial construction
(Joe & Kuo tables for dimensions 2..32, van der Corput in dimension 1).
Points are emitted in Gray-code order, which reproduces the standard
reference sequence exactly while needing one XOR per point.
"""

import numpy as np

from ..errors import ConfigurationError

MAX_DIMENSION = 32
NBITS = 30

# Primitive polynomials over GF(2), encoded as bit patterns (dims 2..32).
_POLY = [3, 7, 11, 13, 19, 25, 37, 41, 47, 55, 59, 61, 67, 91, 97, 103, 109,
         115, 131, 137, 143, 145, 157, 167, 171, 185, 191, 193, 203, 211, 213]

# Initial direction integers m_k (odd), one row per dimension 2..32.
_MINIT = [
    [1],
    [1, 3],
    [1, 3, 1],
    [1, 1, 1],
    [1, 1, 3, 3],
    [1, 3, 5, 13],
    [1, 1, 5, 5, 17],
    [1, 1, 5, 5, 5],
    [1, 1, 7, 11, 19],
    [1, 1, 5, 1, 1],
    [1, 1, 1, 3, 11],
    [1, 3, 5, 5, 31],
    [1, 3, 3, 9, 7, 49],
    [1, 1, 1, 15, 21, 21],
    [1, 3, 1, 13, 27, 49],
    [1, 1, 1, 15, 7, 5],
    [1, 3, 1, 15, 13, 25],
    [1, 1, 5, 5, 19, 61],
    [1, 3, 7, 11, 23, 15, 103],
    [1, 3, 7, 13, 13, 15, 69],
    [1, 1, 3, 13, 7, 35, 63],
    [1, 3, 5, 9, 1, 25, 53],
    [1, 3, 1, 13, 9, 35, 107],
    [1, 3, 1, 5, 27, 61, 31],
    [1, 1, 5, 11, 19, 41, 61],
    [1, 3, 5, 3, 3, 13, 69],
    [1, 1, 7, 13, 1, 19, 1],
    [1, 3, 7, 5, 13, 19, 59],
    [1, 1, 3, 9, 25, 29, 41],
    [1, 3, 5, 13, 23, 1, 55],
    [1, 3, 7, 3, 13, 59, 17],
]


def _direction_table(dimension: int) -> np.ndarray:
    """V[d, k] = direction integer k of dimension d, scaled into NBITS bits."""
    v = np.zeros((dimension, NBITS), dtype=np.int64)
    # dimension 1: van der Corput, m_k = 1 for all k
    for k in range(NBITS):
        v[0, k] = 1 << (NBITS - 1 - k)
    for d in range(1, dimension):
        poly = _POLY[d - 1]
        degree = poly.bit_length() - 1
        include = [(poly >> (degree - i)) & 1 for i in range(1, degree)]
        m = _MINIT[d - 1]
        for k in range(min(degree, NBITS)):
            v[d, k] = m[k] << (NBITS - 1 - k)
        for k in range(degree, NBITS):
            acc = v[d, k - degree] ^ (v[d, k - degree] >> degree)
            for i, bit in enumerate(include, start=1):
                if bit:
                    acc ^= v[d, k - i]
            v[d, k] = acc
    return v


class SobolState:
    """Resumable generator state: next index plus the current Gray-code word."""

    def __init__(self, dimension: int, skip_count: int = 0):
        if not 1 <= dimension <= MAX_DIMENSION:
            raise ConfigurationError(
                f"dimension must be in 1..{MAX_DIMENSION}, got {dimension}")
        if skip_count < 0:
            raise ConfigurationError("skip count must be >= 0")
        self.dimension = dimension
        self.skip_count = skip_count
        self.directions = _direction_table(dimension)
        self.index = 0
        self._word = np.zeros(dimension, dtype=np.int64)
        for _ in range(skip_count):
            self._advance()

    def _advance(self) -> np.ndarray:
        # Gray-code step: point i flips the bit at the lowest set bit of i.
        if self.index > 0:
            c = (self.index & -self.index).bit_length() - 1
            if c >= NBITS:
                raise ConfigurationError("sequence length exceeds bit capacity")
            self._word ^= self.directions[:, c]
        self.index += 1
        return self._word

    def next_points(self, count: int) -> np.ndarray:
        if count < 1:
            raise ConfigurationError("count must be >= 1")
        out = np.empty((count, self.dimension))
        scale = float(1 << NBITS)
        for row in range(count):
            out[row] = self._advance() / scale
        return out


def sobol_points(dimension: int, count: int, skip_count: int = 0) -> np.ndarray:
    """First `count` points of the sequence after skipping `skip_count`."""
    return SobolState(dimension, skip_count=skip_count).next_points(count)
