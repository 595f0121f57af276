"""
CRC - Configurable-width cyclic redundancy checks over bit blocks.

Bits are consumed MSB-first in 8-bit chunks (a trailing partial chunk is
fed bit by bit). With `reflected` set, each chunk is bit-reversed on input
and the final register is reflected, which reproduces the usual
byte-oriented Rocksoft presets on whole-byte inputs.
"""

from functools import lru_cache
from typing import List, Tuple

import numpy as np

from .exceptions import InvalidArgumentError
from .value_objects import BitBlock, CrcSpec, TagVector


_BYTE_REVERSE = np.array([int(f"{b:08b}"[::-1], 2) for b in range(256)], dtype=np.int64)


def reflect(value: int, width: int) -> int:
    result = 0
    for _ in range(width):
        result = (result << 1) | (value & 1)
        value >>= 1
    return result


@lru_cache(maxsize=32)
def _table(width: int, polynomial: int) -> Tuple[int, ...]:
    """Register update table for feeding one byte into the top of a width >= 8 register"""
    mask = (1 << width) - 1
    top = 1 << (width - 1)
    table = []
    for byte in range(256):
        reg = byte << (width - 8)
        for _ in range(8):
            reg = ((reg << 1) ^ polynomial) if reg & top else (reg << 1)
            reg &= mask
        table.append(reg)
    return tuple(table)


def _feed_bits(reg: int, bits, spec: CrcSpec) -> int:
    top_shift = spec.width - 1
    mask = spec.mask
    for b in bits:
        top = reg >> top_shift
        reg = (reg << 1) & mask
        if top ^ int(b):
            reg ^= spec.polynomial
    return reg


def bitwise_crc(bits, spec: CrcSpec) -> int:
    """Shift-register long division, one bit at a time"""
    bits = np.asarray(bits, dtype=np.uint8)
    if spec.reflected:
        whole = (bits.size // 8) * 8
        head = bits[:whole].reshape(-1, 8)[:, ::-1].reshape(-1)
        bits = np.concatenate([head, bits[whole:][::-1]])
    reg = _feed_bits(spec.init, bits, spec)
    if spec.reflected:
        reg = reflect(reg, spec.width)
    return reg ^ spec.xorout


def _compute(bits: np.ndarray, spec: CrcSpec) -> int:
    if spec.width < 8:
        return bitwise_crc(bits, spec)
    whole = (bits.size // 8) * 8
    chunks = np.packbits(bits[:whole]).astype(np.int64)
    if spec.reflected:
        chunks = _BYTE_REVERSE[chunks]
    table = _table(spec.width, spec.polynomial)
    shift = spec.width - 8
    mask = spec.mask
    reg = spec.init
    for byte in chunks.tolist():
        reg = ((reg << 8) & mask) ^ table[(reg >> shift) ^ byte]
    tail = bits[whole:]
    if tail.size:
        reg = _feed_bits(reg, tail[::-1] if spec.reflected else tail, spec)
    if spec.reflected:
        reg = reflect(reg, spec.width)
    return reg ^ spec.xorout


def crc_compute(bits: BitBlock, spec: CrcSpec) -> int:
    """d-bit tag of a non-empty block"""
    return _compute(bits.bits, spec)


def crc_of_array(bits: np.ndarray, spec: CrcSpec) -> int:
    if bits.size == 0:
        raise InvalidArgumentError("cannot compute the CRC of an empty block")
    return _compute(np.ascontiguousarray(bits, dtype=np.uint8), spec)


def crc_tags(u: BitBlock, m: int, spec: CrcSpec) -> TagVector:
    """One tag per sub-block of length n/m"""
    if m <= 0 or len(u) % m != 0:
        raise InvalidArgumentError(f"m={m} does not divide block length {len(u)}")
    size = len(u) // m
    tags: List[int] = [_compute(u.bits[i * size:(i + 1) * size], spec) for i in range(m)]
    return TagVector(tags=tuple(tags), width=spec.width)


def resolve_spec(value) -> CrcSpec:
    """CrcSpec from a preset name, a width, a parameter mapping or a CrcSpec"""
    if isinstance(value, CrcSpec):
        return value
    if isinstance(value, str):
        aliases = {'CRC-8': 'CRC-8/SMBUS', 'CRC-16': 'CRC-16/CCITT-FALSE', 'CRC-64': 'CRC-64/ECMA-182'}
        return CrcSpec.preset(aliases.get(value.upper(), value))
    if isinstance(value, int):
        return CrcSpec.generic(value)
    if isinstance(value, dict):
        try:
            return CrcSpec(**value)
        except Exception as e:
            raise InvalidArgumentError(f"invalid CRC parameters: {e}") from e
    raise InvalidArgumentError(f"cannot build a CRC specification from {value!r}")


def spec_for_width(width: int) -> CrcSpec:
    """Preferred engine for tag length d: CRC-32/ISO-HDLC at 32 bits, generic otherwise"""
    if width == 32:
        return CrcSpec.preset('CRC-32/ISO-HDLC')
    return CrcSpec.generic(width)
