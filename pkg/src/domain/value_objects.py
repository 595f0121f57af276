"""
Value Objects - Immutable reconciliation primitives without identity.
Following Domain-Driven Design principles.
"""

import math
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import scipy.sparse as sp
from pydantic import (
    BaseModel, ConfigDict, Field, PrivateAttr, ValidationError,
    field_validator, model_validator
)

from .exceptions import InvalidArgumentError


def is_power_of_two(value: int) -> bool:
    return value > 0 and value & (value - 1) == 0


def _read_only(array: np.ndarray) -> np.ndarray:
    array.setflags(write=False)
    return array


class BitBlock(BaseModel):
    """Value Object holding a binary sequence (one uint8 per bit internally)"""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    bits: np.ndarray

    @field_validator('bits', mode='before')
    @classmethod
    def validate_bits(cls, v):
        array = np.array(v, dtype=np.int64) if not isinstance(v, np.ndarray) else v
        if array.ndim != 1 or array.size == 0:
            raise ValueError('bit block must be a non-empty one-dimensional sequence')
        if np.any((array != 0) & (array != 1)):
            raise ValueError('bit values must be 0 or 1')
        return _read_only(np.array(array, dtype=np.uint8))

    @classmethod
    def of(cls, values) -> 'BitBlock':
        try:
            return cls(bits=values)
        except ValidationError as e:
            raise InvalidArgumentError(str(e)) from e

    @classmethod
    def trusted(cls, array: np.ndarray) -> 'BitBlock':
        """Wrap a uint8 0/1 array produced internally, skipping validation"""
        return cls.model_construct(bits=_read_only(np.ascontiguousarray(array, dtype=np.uint8)))

    @classmethod
    def zeros(cls, n: int) -> 'BitBlock':
        if n <= 0:
            raise InvalidArgumentError(f"block length must be positive, got {n}")
        return cls.trusted(np.zeros(n, dtype=np.uint8))

    @classmethod
    def from_bytes(cls, data: bytes, length: int) -> 'BitBlock':
        """Unpack an MSB-first byte string into a block of `length` bits"""
        if length <= 0 or len(data) * 8 < length:
            raise InvalidArgumentError(f"{len(data)} bytes cannot hold {length} bits")
        unpacked = np.unpackbits(np.frombuffer(data, dtype=np.uint8))[:length]
        return cls.trusted(unpacked)

    @classmethod
    def concat(cls, blocks: Sequence['BitBlock']) -> 'BitBlock':
        if not blocks:
            raise InvalidArgumentError("cannot concatenate an empty list of blocks")
        return cls.trusted(np.concatenate([b.bits for b in blocks]))

    def to_bytes(self) -> bytes:
        """MSB-first packing, zero padded to a whole byte"""
        return np.packbits(self.bits).tobytes()

    def weight(self) -> int:
        return int(self.bits.sum(dtype=np.int64))

    def split(self, m: int) -> List['BitBlock']:
        if m <= 0 or len(self) % m != 0:
            raise InvalidArgumentError(f"{m} sub-blocks do not divide length {len(self)}")
        size = len(self) // m
        return [BitBlock.trusted(self.bits[i * size:(i + 1) * size]) for i in range(m)]

    def __len__(self) -> int:
        return int(self.bits.shape[0])

    def __getitem__(self, item):
        if isinstance(item, slice):
            return BitBlock.trusted(self.bits[item])
        return int(self.bits[item])

    def __xor__(self, other: 'BitBlock') -> 'BitBlock':
        if len(self) != len(other):
            raise InvalidArgumentError(f"cannot XOR blocks of length {len(self)} and {len(other)}")
        return BitBlock.trusted(np.bitwise_xor(self.bits, other.bits))

    def __eq__(self, other) -> bool:
        if not isinstance(other, BitBlock):
            return NotImplemented
        return bool(np.array_equal(self.bits, other.bits))

    def __hash__(self) -> int:
        return hash(self.bits.tobytes())

    def __str__(self) -> str:
        preview = ''.join(str(b) for b in self.bits[:32])
        return f"BitBlock[{len(self)}]({preview}{'…' if len(self) > 32 else ''})"


class FrozenVector(BaseModel):
    """Value Object marking frozen (0) and information (-1) positions of a polar code"""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    marks: np.ndarray

    @field_validator('marks', mode='before')
    @classmethod
    def validate_marks(cls, v):
        array = np.asarray(v)
        if array.ndim != 1 or array.size == 0:
            raise ValueError('frozen vector must be a non-empty one-dimensional sequence')
        if np.any((array != 0) & (array != -1)):
            raise ValueError('frozen marks must be 0 (frozen) or -1 (information)')
        return _read_only(np.array(array, dtype=np.int8))

    @classmethod
    def from_info_mask(cls, mask) -> 'FrozenVector':
        mask = np.asarray(mask, dtype=bool)
        return cls(marks=np.where(mask, -1, 0))

    @classmethod
    def all_frozen(cls, n: int) -> 'FrozenVector':
        return cls(marks=np.zeros(n, dtype=np.int8))

    @property
    def n(self) -> int:
        return int(self.marks.shape[0])

    @property
    def k(self) -> int:
        return int(np.count_nonzero(self.marks))

    @property
    def info_mask(self) -> np.ndarray:
        return self.marks == -1

    @property
    def info_positions(self) -> np.ndarray:
        return np.flatnonzero(self.marks)

    def __eq__(self, other) -> bool:
        if not isinstance(other, FrozenVector):
            return NotImplemented
        return bool(np.array_equal(self.marks, other.marks))

    def __hash__(self) -> int:
        return hash(self.marks.tobytes())


# Polynomials used when a width has no named preset; truncations of the
# CRC-64/ECMA-182 generator with the constant term forced on.
_NAMED_POLYNOMIALS: Dict[int, int] = {
    8: 0x07,
    16: 0x1021,
    24: 0x864CFB,
    32: 0x04C11DB7,
    40: 0x0004820009,
    64: 0x42F0E1EBA9EA3693,
}


def default_polynomial(width: int) -> int:
    if width in _NAMED_POLYNOMIALS:
        return _NAMED_POLYNOMIALS[width]
    return (0x42F0E1EBA9EA3693 & ((1 << width) - 1)) | 1


class CrcSpec(BaseModel):
    """Value Object with the parameters of a width-d CRC (Rocksoft model)"""
    model_config = ConfigDict(frozen=True)

    width: int = Field(ge=4, le=64)
    polynomial: int = Field(ge=1)
    init: int = Field(ge=0)
    xorout: int = Field(default=0, ge=0)
    reflected: bool = False
    name: str = ""

    @model_validator(mode='before')
    @classmethod
    def fill_defaults(cls, data):
        if isinstance(data, dict) and 'width' in data:
            data = dict(data)
            width = int(data['width'])
            data.setdefault('polynomial', default_polynomial(width) if 4 <= width <= 64 else 1)
            data.setdefault('init', (1 << width) - 1 if 4 <= width <= 64 else 0)
        return data

    @model_validator(mode='after')
    def validate_register_values(self):
        limit = 1 << self.width
        for label, value in (('polynomial', self.polynomial), ('init', self.init), ('xorout', self.xorout)):
            if value >= limit:
                raise ValueError(f'{label} 0x{value:X} does not fit in {self.width} bits')
        return self

    @classmethod
    def generic(cls, width: int) -> 'CrcSpec':
        """Default engine for width d: init all-ones, xorout 0, non-reflected"""
        try:
            return cls(width=width)
        except ValidationError as e:
            raise InvalidArgumentError(str(e)) from e

    @classmethod
    def preset(cls, name: str) -> 'CrcSpec':
        key = name.upper()
        if key not in CRC_PRESETS:
            raise InvalidArgumentError(f"unknown CRC preset '{name}'; known: {', '.join(sorted(CRC_PRESETS))}")
        return CRC_PRESETS[key]

    @property
    def mask(self) -> int:
        return (1 << self.width) - 1


CRC_PRESETS: Dict[str, CrcSpec] = {
    'CRC-32/ISO-HDLC': CrcSpec(width=32, polynomial=0x04C11DB7, init=0xFFFFFFFF,
                               xorout=0xFFFFFFFF, reflected=True, name='CRC-32/ISO-HDLC'),
    'CRC-32/MPEG-2': CrcSpec(width=32, polynomial=0x04C11DB7, init=0xFFFFFFFF,
                             xorout=0, reflected=False, name='CRC-32/MPEG-2'),
    'CRC-16/CCITT-FALSE': CrcSpec(width=16, polynomial=0x1021, init=0xFFFF,
                                  xorout=0, reflected=False, name='CRC-16/CCITT-FALSE'),
    'CRC-8/SMBUS': CrcSpec(width=8, polynomial=0x07, init=0, xorout=0,
                           reflected=False, name='CRC-8/SMBUS'),
    'CRC-64/ECMA-182': CrcSpec(width=64, polynomial=0x42F0E1EBA9EA3693, init=0,
                               xorout=0, reflected=False, name='CRC-64/ECMA-182'),
}
CRC_PRESETS['CRC-32'] = CRC_PRESETS['CRC-32/ISO-HDLC']


class TagVector(BaseModel):
    """Value Object: the m per-sub-block CRC tags T = (T_0|...|T_{m-1})"""
    model_config = ConfigDict(frozen=True)

    tags: Tuple[int, ...]
    width: int = Field(ge=4, le=64)

    @model_validator(mode='after')
    def validate_tags(self):
        limit = 1 << self.width
        if not self.tags:
            raise ValueError('a tag vector holds at least one tag')
        if any(t < 0 or t >= limit for t in self.tags):
            raise ValueError(f'tags must fit in {self.width} bits')
        return self

    @property
    def m(self) -> int:
        return len(self.tags)

    def __len__(self) -> int:
        return len(self.tags)

    def __getitem__(self, index: int) -> int:
        return self.tags[index]


class Syndrome(BaseModel):
    """Value Object: LDPC syndromes of the failed sub-blocks, in ascending block order"""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    bits: np.ndarray
    block_ids: Tuple[int, ...]
    rows: int = Field(gt=0)

    @field_validator('bits', mode='before')
    @classmethod
    def validate_bits(cls, v):
        array = np.asarray(v)
        if array.ndim != 2:
            raise ValueError('syndrome bits are stored one row per failed block')
        if np.any((array != 0) & (array != 1)):
            raise ValueError('syndrome values must be 0 or 1')
        return _read_only(np.array(array, dtype=np.uint8))

    @model_validator(mode='after')
    def validate_shape(self):
        if self.bits.shape != (len(self.block_ids), self.rows):
            raise ValueError(f'expected {len(self.block_ids)}x{self.rows} syndrome bits, got {self.bits.shape}')
        if list(self.block_ids) != sorted(set(self.block_ids)):
            raise ValueError('block ids must be strictly ascending')
        return self

    @property
    def total_bits(self) -> int:
        return self.rows * len(self.block_ids)

    def for_block(self, block_id: int) -> np.ndarray:
        return self.bits[self.block_ids.index(block_id)]


class BitChannelStats(BaseModel):
    """Value Object: per-bit-channel error probability bounds for BSC(qber)"""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    pe: np.ndarray
    qber: float = Field(gt=0.0, lt=0.5)
    n: int
    fidelity: int = Field(default=256, ge=2)
    pe_lower: Optional[np.ndarray] = None

    @field_validator('pe', 'pe_lower', mode='before')
    @classmethod
    def validate_probabilities(cls, v):
        if v is None:
            return None
        array = np.array(v, dtype=np.float64)
        if array.ndim != 1:
            raise ValueError('probabilities must be one-dimensional')
        if np.any(array < -1e-12) or np.any(array > 0.5 + 1e-12):
            raise ValueError('bit-channel error probabilities must lie in [0, 0.5]')
        return _read_only(np.clip(array, 0.0, 0.5))

    @model_validator(mode='after')
    def validate_length(self):
        if not is_power_of_two(self.n) or self.pe.shape[0] != self.n:
            raise ValueError(f'expected {self.n} probabilities for a power-of-two block length')
        if self.pe_lower is not None and self.pe_lower.shape[0] != self.n:
            raise ValueError('lower bounds must match the block length')
        return self


class BoundInputs(BaseModel):
    """Value Object grouping the symbols of the correctness and efficiency bounds"""
    model_config = ConfigDict(frozen=True)

    eps_f: float = Field(ge=0.0, le=1.0)
    eps_a: float = Field(default=0.0, ge=0.0, le=1.0)
    l: int = Field(default=1, ge=1)
    d: int = Field(default=32, ge=0)
    m: int = Field(default=1, ge=1)
    n: int = Field(default=1 << 20, ge=1)
    f_I: float = Field(default=1.0, ge=1.0)
    f_II: float = Field(default=1.0, ge=1.0)
    qber: float = Field(default=0.02, gt=0.0, lt=0.5)

    @model_validator(mode='after')
    def validate_tag_length(self):
        if self.d < math.log2(self.l):
            raise ValueError(f'CRC length d={self.d} must be at least log2(l)={math.log2(self.l):g}')
        return self


class ParityCheckMatrix(BaseModel):
    """Value Object: sparse binary parity-check matrix stored as an edge list"""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    rows: int = Field(gt=0)
    cols: int = Field(gt=0)
    check_index: np.ndarray
    variable_index: np.ndarray
    design_threshold: Optional[float] = Field(default=None, gt=0.0, lt=0.5)
    name: str = ""

    _matrix: sp.csr_matrix = PrivateAttr()

    @field_validator('check_index', 'variable_index', mode='before')
    @classmethod
    def validate_indices(cls, v):
        array = np.asarray(v)
        if array.ndim != 1:
            raise ValueError('edge indices must be one-dimensional')
        return np.array(array, dtype=np.int64)

    @model_validator(mode='after')
    def validate_edges(self):
        if self.rows >= self.cols:
            raise ValueError(f'a {self.rows}x{self.cols} matrix has no positive rate')
        if self.check_index.shape != self.variable_index.shape:
            raise ValueError('edge index arrays differ in length')
        if self.check_index.size == 0:
            raise ValueError('matrix has no edges')
        if self.check_index.min() < 0 or self.check_index.max() >= self.rows:
            raise ValueError('check index out of range')
        if self.variable_index.min() < 0 or self.variable_index.max() >= self.cols:
            raise ValueError('variable index out of range')
        keys = self.check_index * self.cols + self.variable_index
        order = np.argsort(keys, kind='stable')
        if np.any(np.diff(keys[order]) == 0):
            raise ValueError('duplicate edge in parity-check matrix')
        if np.any(np.bincount(self.variable_index, minlength=self.cols) == 0):
            raise ValueError('every column needs at least one check')
        # Canonical edge order: by check, then by variable
        object.__setattr__(self, 'check_index', _read_only(self.check_index[order]))
        object.__setattr__(self, 'variable_index', _read_only(self.variable_index[order]))
        return self

    def model_post_init(self, __context) -> None:
        data = np.ones(self.check_index.size, dtype=np.uint8)
        self._matrix = sp.csr_matrix(
            (data, (self.check_index, self.variable_index)), shape=(self.rows, self.cols)
        )

    @classmethod
    def from_dense(cls, h, **kwargs) -> 'ParityCheckMatrix':
        dense = np.asarray(h)
        checks, variables = np.nonzero(dense)
        return cls(rows=dense.shape[0], cols=dense.shape[1],
                   check_index=checks, variable_index=variables, **kwargs)

    @property
    def matrix(self) -> sp.csr_matrix:
        return self._matrix

    @property
    def rate(self) -> float:
        return 1.0 - self.rows / self.cols

    @property
    def edges(self) -> int:
        return int(self.check_index.size)

    def column_degrees(self) -> np.ndarray:
        return np.bincount(self.variable_index, minlength=self.cols)

    def row_degrees(self) -> np.ndarray:
        return np.bincount(self.check_index, minlength=self.rows)

    def to_dense(self) -> np.ndarray:
        return self._matrix.toarray()
