"""
Block-Checked SCL Decoder - successive cancellation list decoding with a
CRC check at every sub-block boundary.

The list runs over all n bits without restarting. At the end of sub-block
i, the passing path of smallest metric (lowest list position on ties)
fixes U′_i and σ_i = 0; if no path passes, U′_i stays zero and σ_i = 1.
The list itself is never culled to agree with an accepted sub-block. When
a surviving path passes every tag, it replaces U′ and σ becomes all zeros.
"""

import logging
import math
from typing import Callable, List, Optional, Sequence

import numpy as np

from .crc import crc_of_array
from .exceptions import InvalidArgumentError
from .entities import DecodeOutcome, DecoderPath
from .polar import encode_array
from .scl_kernels import ListDecoderState
from .value_objects import BitBlock, CrcSpec, FrozenVector, TagVector, is_power_of_two

logger = logging.getLogger(__name__)


def channel_llr(received: BitBlock, qber: float) -> np.ndarray:
    """llr[j] = (1 − 2·y[j])·ln((1 − qber)/qber)"""
    if not 0.0 < qber < 0.5:
        raise InvalidArgumentError(f"qber must lie in (0, 0.5), got {qber}")
    magnitude = math.log((1.0 - qber) / qber)
    return (1.0 - 2.0 * received.bits.astype(np.float64)) * magnitude


def f_function(a: float, b: float, exact: bool = False) -> float:
    sign = 1.0 if (a >= 0.0) == (b >= 0.0) else -1.0
    value = sign * min(abs(a), abs(b))
    if exact:
        value += math.log1p(math.exp(-abs(a + b))) - math.log1p(math.exp(-abs(a - b)))
    return value


def g_function(a: float, b: float, u: int) -> float:
    return b + (1.0 - 2.0 * u) * a


def branch_penalty(llr: float, bit: int, exact: bool = False) -> float:
    """−ln Pr increment of deciding `bit`; approximated by |llr| or 0 unless exact"""
    if exact:
        x = llr if bit == 0 else -llr
        return math.log1p(math.exp(-x)) if x > 0.0 else -x + math.log1p(math.exp(x))
    disagrees = (llr >= 0.0 and bit == 1) or (llr < 0.0 and bit == 0)
    return abs(llr) if disagrees else 0.0


def bit_llr(llr: Sequence[float], decided: Sequence[int], exact: bool = False) -> float:
    """Soft value of bit len(decided) given the channel LLRs and the earlier decisions"""
    if len(llr) == 1:
        return float(llr[0])
    half = len(llr) // 2
    even, odd = llr[0::2], llr[1::2]
    i = len(decided)
    if i < half:
        combined = [f_function(a, b, exact) for a, b in zip(even, odd)]
        return bit_llr(combined, decided, exact)
    partial = encode_array(np.asarray(decided[:half], dtype=np.uint8), np.zeros(half, dtype=np.uint8))
    combined = [g_function(a, b, int(c)) for a, b, c in zip(even, odd, partial)]
    return bit_llr(combined, decided[half:], exact)


def fork(paths: List[DecoderPath], bit_llrs: Sequence[float], exact: bool = False) -> List[DecoderPath]:
    """
    Branch every path on the next bit: the input paths continued with 0,
    followed by copies continued with 1, in the same order.
    """
    zeros = [p.extended(0, branch_penalty(llr, 0, exact)) for p, llr in zip(paths, bit_llrs)]
    ones = [p.extended(1, branch_penalty(llr, 1, exact)) for p, llr in zip(paths, bit_llrs)]
    forked = zeros + ones
    for position, path in enumerate(forked):
        path.index = position
    return forked


def prune(paths: List[DecoderPath], l: int) -> List[DecoderPath]:
    """The l smallest-metric paths, ties to the earlier path, kept in list order"""
    if len(paths) <= l:
        return paths
    ranked = sorted(range(len(paths)), key=lambda j: paths[j].metric)
    survivors = sorted(ranked[:l])
    return [paths[j] for j in survivors]


def _check_arguments(received: BitBlock, v: FrozenVector, tags: TagVector, l: int, m: int,
                     spec: CrcSpec) -> int:
    n = len(received)
    if not is_power_of_two(n) or n < 2:
        raise InvalidArgumentError(f"received block length {n} is not a power of two ≥ 2")
    if v.n != n:
        raise InvalidArgumentError(f"frozen vector has length {v.n}, received block {n}")
    if m <= 0 or n % m != 0:
        raise InvalidArgumentError(f"m={m} does not divide n={n}")
    if l < 1:
        raise InvalidArgumentError(f"list size must be at least 1, got {l}")
    if tags.m != m:
        raise InvalidArgumentError(f"{tags.m} tags given for {m} sub-blocks")
    if tags.width != spec.width:
        raise InvalidArgumentError(f"tags are {tags.width} bits wide, CRC produces {spec.width}")
    return n // m


def _best_position(metrics: np.ndarray, eligible: np.ndarray) -> Optional[int]:
    """List position of the smallest metric among eligible ones, lowest position on ties"""
    candidates = np.flatnonzero(eligible)
    if candidates.size == 0:
        return None
    return int(candidates[np.argmin(metrics[candidates])])


def decode(received: BitBlock, v: FrozenVector, tags: TagVector, l: int, m: int, qber: float,
           spec: CrcSpec, exact: bool = False) -> DecodeOutcome:
    """Block-checked SCL decoding of K_B ⊕ Z into (U′, σ)"""
    sub = _check_arguments(received, v, tags, l, m, spec)
    llr = channel_llr(received, qber)
    state = ListDecoderState(llr, v.info_mask, l, exact)

    u_prime = np.zeros(len(received), dtype=np.uint8)
    sigma: List[int] = []
    all_pass = np.ones(1, dtype=bool)
    for block in range(m):
        start, stop = block * sub, (block + 1) * sub
        state.advance(start, stop)
        bits, ancestors = state.traceback(start, stop)
        passed = np.array([crc_of_array(row, spec) == tags[block] for row in bits], dtype=bool)
        all_pass = all_pass[ancestors] & passed
        accepted = _best_position(state.listed_metrics(), passed)
        if accepted is None:
            sigma.append(1)
        else:
            u_prime[start:stop] = bits[accepted]
            sigma.append(0)
        logger.debug(f"sub-block {block}: {int(passed.sum())}/{passed.size} paths pass, sigma={sigma[-1]}")

    full = _best_position(state.listed_metrics(), all_pass)
    if full is not None:
        bits, _ = state.traceback(0, len(received))
        u_prime = bits[full]
        sigma = [0] * m
    return DecodeOutcome(u_prime=BitBlock.trusted(u_prime), sigma=tuple(sigma), full_pass=full is not None)


class ReferenceListDecoder:
    """Plain list decoder built from fork and prune on DecoderPath objects"""

    def __init__(self, l: int, exact: bool = False,
                 crc: Optional[Callable[[np.ndarray, CrcSpec], int]] = None):
        if l < 1:
            raise InvalidArgumentError(f"list size must be at least 1, got {l}")
        self.l = l
        self.exact = exact
        self.crc = crc or crc_of_array

    def decode_paths(self, llr: Sequence[float], v: FrozenVector) -> List[DecoderPath]:
        """Surviving paths after all n bits, in list order"""
        paths = [DecoderPath()]
        for i in range(len(llr)):
            soft = [bit_llr(llr, p.decisions, self.exact) for p in paths]
            if v.marks[i] == 0:
                paths = [p.extended(0, branch_penalty(s, 0, self.exact)) for p, s in zip(paths, soft)]
            else:
                paths = prune(fork(paths, soft, self.exact), self.l)
        return paths

    def decode(self, received: BitBlock, v: FrozenVector, tags: TagVector, m: int, qber: float,
               spec: CrcSpec) -> DecodeOutcome:
        sub = _check_arguments(received, v, tags, self.l, m, spec)
        llr = channel_llr(received, qber)
        n = len(received)

        paths = [DecoderPath()]
        u_prime = np.zeros(n, dtype=np.uint8)
        sigma: List[int] = []
        for i in range(n):
            soft = [bit_llr(llr, p.decisions, self.exact) for p in paths]
            if v.marks[i] == 0:
                paths = [p.extended(0, branch_penalty(s, 0, self.exact)) for p, s in zip(paths, soft)]
            else:
                paths = prune(fork(paths, soft, self.exact), self.l)
            if (i + 1) % sub == 0:
                block = i // sub
                start = block * sub
                passing = [p for p in paths
                           if self.crc(np.asarray(p.decisions[start:i + 1], dtype=np.uint8), spec) == tags[block]]
                if passing:
                    best = min(passing, key=lambda p: p.metric)
                    u_prime[start:i + 1] = best.decisions[start:i + 1]
                    sigma.append(0)
                else:
                    sigma.append(1)

        complete = [p for p in paths if self._passes_all(p, tags, m, sub, spec)]
        if complete:
            best = min(complete, key=lambda p: p.metric)
            return DecodeOutcome(u_prime=BitBlock.of(best.decisions), sigma=(0,) * m, full_pass=True)
        return DecodeOutcome(u_prime=BitBlock.trusted(u_prime), sigma=tuple(sigma))

    def _passes_all(self, path: DecoderPath, tags: TagVector, m: int, sub: int, spec: CrcSpec) -> bool:
        bits = np.asarray(path.decisions, dtype=np.uint8)
        return all(self.crc(bits[j * sub:(j + 1) * sub], spec) == tags[j] for j in range(m))
