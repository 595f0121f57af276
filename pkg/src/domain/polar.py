"""
Polar Core - GF(2) primitives of the forward reconciliation phase.

G_n = B·F^{⊗log n} is applied as bit-reversal followed by the butterfly
stages, so decoder bit index i is U[i] before permutation.
"""

import numpy as np

from .exceptions import InvalidArgumentError
from .value_objects import BitBlock, is_power_of_two


def _require_power_of_two(length: int) -> int:
    if not is_power_of_two(length):
        raise InvalidArgumentError(f"block length {length} is not a power of two")
    return length.bit_length() - 1


def bit_reversal_indices(n: int) -> np.ndarray:
    """rev(j) for j in [0, n): reverse the log2(n)-bit representation of j"""
    log_n = _require_power_of_two(n)
    indices = np.arange(n, dtype=np.int64)
    reversed_ = np.zeros(n, dtype=np.int64)
    for bit in range(log_n):
        reversed_ |= ((indices >> bit) & 1) << (log_n - 1 - bit)
    return reversed_


def bit_reversal_array(bits: np.ndarray) -> np.ndarray:
    return bits[bit_reversal_indices(bits.shape[0])]


def polar_transform_array(bits: np.ndarray) -> np.ndarray:
    """x·F^{⊗log n} on a uint8 array, one XOR stage per level"""
    n = bits.shape[0]
    _require_power_of_two(n)
    x = np.array(bits, dtype=np.uint8, copy=True)
    stride = 1
    while stride < n:
        view = x.reshape(-1, 2, stride)
        view[:, 0, :] ^= view[:, 1, :]
        stride <<= 1
    return x


def bit_reversal_permute(x: BitBlock) -> BitBlock:
    _require_power_of_two(len(x))
    return BitBlock.trusted(bit_reversal_array(x.bits))


def polar_transform(x: BitBlock) -> BitBlock:
    return BitBlock.trusted(polar_transform_array(x.bits))


def encode_array(u: np.ndarray, key: np.ndarray) -> np.ndarray:
    return polar_transform_array(bit_reversal_array(u)) ^ key


def encode(u: BitBlock, key: BitBlock) -> BitBlock:
    """Z = U·G_n ⊕ K"""
    if len(u) != len(key):
        raise InvalidArgumentError(f"U has length {len(u)} but K has length {len(key)}")
    _require_power_of_two(len(u))
    return BitBlock.trusted(encode_array(u.bits, key.bits))


def generator_matrix(n: int) -> np.ndarray:
    """Dense G_n, for small-n checks"""
    log_n = _require_power_of_two(n)
    kernel = np.array([[1, 0], [1, 1]], dtype=np.uint8)
    f = np.ones((1, 1), dtype=np.uint8)
    for _ in range(log_n):
        f = np.kron(f, kernel) % 2
    return f[bit_reversal_indices(n)].astype(np.uint8)
