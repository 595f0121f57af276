"""
Domain Entities - Session, message, decoder and campaign records.
Following Domain-Driven Design principles.
"""

import math
from typing import Dict, List, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from .exceptions import ConfigurationError, InvalidArgumentError
from .value_objects import (
    BitBlock, BitChannelStats, CrcSpec, FrozenVector, ParityCheckMatrix,
    Syndrome, TagVector, is_power_of_two
)


def library_key(qber: float) -> float:
    """QBER grid point of the frozen-vector library (two decimals)"""
    return round(float(qber), 2)


class DecoderPath(BaseModel):
    """Decoding path 𝒫 of the reference list decoder"""
    decisions: List[int] = Field(default_factory=list)
    metric: float = Field(default=0.0, ge=0.0)
    index: int = 0

    def extended(self, bit: int, penalty: float, index: Optional[int] = None) -> 'DecoderPath':
        return DecoderPath(
            decisions=self.decisions + [bit],
            metric=self.metric + penalty,
            index=self.index if index is None else index,
        )


class DecodeOutcome(BaseModel):
    """Decoded vector U′ with the per-sub-block failure map σ"""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    u_prime: BitBlock
    sigma: Tuple[int, ...]
    full_pass: bool = False

    @field_validator('sigma')
    @classmethod
    def validate_sigma(cls, v):
        if not v or any(s not in (0, 1) for s in v):
            raise ValueError('sigma must be a non-empty sequence of 0/1 flags')
        return v

    @property
    def m(self) -> int:
        return len(self.sigma)

    @property
    def r(self) -> int:
        return sum(self.sigma)

    @property
    def failed_blocks(self) -> List[int]:
        return [i for i, s in enumerate(self.sigma) if s]


class ForwardMessage(BaseModel):
    """Alice → Bob: syndrome Z and tag vector T"""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    z: BitBlock
    tags: TagVector

    @model_validator(mode='after')
    def validate_lengths(self):
        if len(self.z) % self.tags.m != 0:
            raise ValueError(f'{self.tags.m} tags do not split a block of length {len(self.z)}')
        return self


class AckMessage(BaseModel):
    """Bob → Alice: failure map σ and the LDPC syndromes of the failed sub-blocks"""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    sigma: Tuple[int, ...]
    syndromes: Optional[Syndrome] = None

    @model_validator(mode='after')
    def validate_case(self):
        if not self.sigma or any(s not in (0, 1) for s in self.sigma):
            raise ValueError('sigma must be a non-empty sequence of 0/1 flags')
        failed = [i for i, s in enumerate(self.sigma) if s]
        if not failed:
            if self.syndromes is not None and self.syndromes.block_ids:
                raise ValueError('no failed block but syndromes were attached')
        else:
            if self.syndromes is None or list(self.syndromes.block_ids) != failed:
                raise ValueError(f'syndromes must cover exactly the failed blocks {failed}')
        return self

    @property
    def r(self) -> int:
        return sum(self.sigma)

    @property
    def is_empty(self) -> bool:
        """Case II: nothing beyond σ is sent"""
        return self.r == 0

    @property
    def syndrome_bits(self) -> int:
        return 0 if self.syndromes is None else self.syndromes.total_bits


class SessionParams(BaseModel):
    """Parameters shared by Alice and Bob for one reconciliation session"""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    n: int
    m: int = Field(ge=1)
    d: int = Field(ge=4, le=64)
    l: int = Field(ge=1)
    qber: float = Field(gt=0.0, lt=0.5)
    frozen: FrozenVector
    crc: CrcSpec
    ldpc: Optional[ParityCheckMatrix] = None
    max_iters: int = Field(default=100, ge=1)
    exact_metric: bool = False

    @model_validator(mode='after')
    def validate_session(self):
        if not is_power_of_two(self.n):
            raise ValueError(f'n={self.n} is not a power of two')
        if self.n % self.m != 0:
            raise ValueError(f'm={self.m} does not divide n={self.n}')
        if self.d < math.log2(self.l):
            raise ValueError(f'd={self.d} is below log2(l)={math.log2(self.l):g}')
        if self.crc.width != self.d:
            raise ValueError(f'CRC width {self.crc.width} differs from d={self.d}')
        if self.frozen.n != self.n:
            raise ValueError(f'frozen vector has length {self.frozen.n}, expected {self.n}')
        if self.ldpc is not None and self.ldpc.cols != self.sub_block_length:
            raise ValueError(f'LDPC code has {self.ldpc.cols} columns, sub-blocks have {self.sub_block_length} bits')
        return self

    @property
    def k(self) -> int:
        return self.frozen.k

    @property
    def sub_block_length(self) -> int:
        return self.n // self.m

    def require_ldpc(self) -> ParityCheckMatrix:
        if self.ldpc is None:
            raise ConfigurationError('session has failed sub-blocks but no LDPC code configured')
        return self.ldpc


class LeakageLedger(BaseModel):
    """Bits disclosed to Eve during one session"""
    model_config = ConfigDict(frozen=True)

    forward_bits: int = Field(ge=0)
    tag_bits: int = Field(ge=0)
    sigma_bits: int = Field(ge=0)
    ack_bits: int = Field(default=0, ge=0)

    @property
    def total(self) -> int:
        return self.forward_bits + self.tag_bits + self.sigma_bits + self.ack_bits


class FrozenLibraryEntry(BaseModel):
    """One frozen vector of the library with its construction provenance"""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    qber: float = Field(gt=0.0, lt=0.5)
    target_fer: float = Field(gt=0.0, lt=1.0)
    frozen: FrozenVector
    stats: Optional[BitChannelStats] = None

    @property
    def n(self) -> int:
        return self.frozen.n

    @property
    def k(self) -> int:
        return self.frozen.k


class FrozenLibrary(BaseModel):
    """Frozen vectors of one block length keyed by QBER grid point"""
    model_config = ConfigDict(arbitrary_types_allowed=True)

    n: int
    entries: Dict[float, FrozenLibraryEntry] = Field(default_factory=dict)

    @field_validator('n')
    @classmethod
    def validate_n(cls, v):
        if not is_power_of_two(v):
            raise ValueError(f'n={v} is not a power of two')
        return v

    def add(self, entry: FrozenLibraryEntry) -> None:
        if entry.n != self.n:
            raise InvalidArgumentError(f'entry of length {entry.n} added to a library of length {self.n}')
        self.entries[library_key(entry.qber)] = entry

    def get(self, qber: float) -> FrozenLibraryEntry:
        key = library_key(qber)
        if key not in self.entries:
            known = ', '.join(f'{q:.2f}' for q in sorted(self.entries)) or 'none'
            raise ConfigurationError(f'no frozen vector for n={self.n}, qber={key:.2f} (known: {known})')
        return self.entries[key]

    def qbers(self) -> List[float]:
        return sorted(self.entries)

    def __len__(self) -> int:
        return len(self.entries)

    def __contains__(self, qber: float) -> bool:
        return library_key(qber) in self.entries


class TrialConfig(BaseModel):
    """Everything that determines one Monte-Carlo trial"""
    model_config = ConfigDict(frozen=True)

    n: int
    m: int = Field(ge=1)
    d: int = Field(ge=4, le=64)
    l: int = Field(ge=1)
    qber: float = Field(ge=0.0, lt=0.5)
    design_qber: Optional[float] = Field(default=None, gt=0.0, lt=0.5)
    seed: Optional[int] = Field(default=None, ge=0, lt=1 << 64)
    trial_index: int = Field(default=0, ge=0)
    frozen_library: str = 'resources/frozen'
    ldpc_registry: str = 'resources/ldpc'
    crc: CrcSpec
    target_fer: float = Field(default=0.01, gt=0.0, lt=1.0)
    max_iters: int = Field(default=100, ge=1)
    exact_metric: bool = False
    ldpc_margin: float = Field(default=0.0, ge=0.0)

    @model_validator(mode='after')
    def validate_trial(self):
        if not is_power_of_two(self.n):
            raise ValueError(f'n={self.n} is not a power of two')
        if self.n % self.m != 0:
            raise ValueError(f'm={self.m} does not divide n={self.n}')
        if self.d < math.log2(self.l):
            raise ValueError(f'd={self.d} is below log2(l)={math.log2(self.l):g}')
        if self.crc.width != self.d:
            raise ValueError(f'CRC width {self.crc.width} differs from d={self.d}')
        if self.design_qber is None and self.qber == 0.0:
            raise ValueError('a noiseless trial needs an explicit design_qber')
        return self

    @property
    def effective_design_qber(self) -> float:
        return self.qber if self.design_qber is None else self.design_qber

    def for_trial(self, trial_index: int, qber: Optional[float] = None) -> 'TrialConfig':
        update = {'trial_index': trial_index}
        if qber is not None:
            update['qber'] = qber
        return self.model_copy(update=update)


class TrialResult(BaseModel):
    """Outcome of one trial, checked against ground truth"""
    trial_index: int
    qber: float
    k: int
    fer_failed: bool
    r: int = Field(ge=0)
    leaked_bits: int = Field(ge=0)
    ldpc_converged: bool = True
    crc_false_pass: bool = False
    wall_time: float = Field(default=0.0, ge=0.0)


class QberRow(BaseModel):
    """Campaign summary for one QBER; f is NaN on noiseless rows and null in JSON"""
    model_config = ConfigDict(ser_json_inf_nan='null')

    qber: float
    n: int
    m: int
    d: int
    l: int
    trials: int
    k: int
    f: float
    fer: float
    fer_ci_low: float
    fer_ci_high: float
    gamma: float
    mean_r: float
    leak_bits_total: int
    f_trial_mean: float = 0.0
    crc_false_passes: int = 0


class AggregateStats(BaseModel):
    """Campaign totals; leakage is accumulated over all trials"""
    model_config = ConfigDict(ser_json_inf_nan='null')

    trials: int = Field(ge=0)
    f_mean: float = 0.0
    fer: float = Field(default=0.0, ge=0.0, le=1.0)
    gamma: float = 0.0
    f_trial_mean: float = 0.0
    crc_false_passes: int = 0
    rows: List[QberRow] = Field(default_factory=list)
    interrupted: bool = False

    def row(self, qber: float) -> QberRow:
        for row in self.rows:
            if abs(row.qber - qber) < 1e-12:
                return row
        raise KeyError(qber)
