"""
LDPC - Syndrome computation and belief-propagation syndrome decoding for the
acknowledgment phase.

Flooding sum-product over the edge list: check messages use log|tanh| sums
with sign parity, both excluding the edge itself. Messages are clipped at
±30. Decoding estimates the error pattern ê with H·ê equal to the residual
syndrome H·x ⊕ s, and returns x ⊕ ê.
"""

import logging
import math
from typing import Iterable, Optional, Tuple

import numpy as np

from .analysis import binary_entropy, inverse_binary_entropy
from .exceptions import InvalidArgumentError, NoCodeError
from .value_objects import BitBlock, ParityCheckMatrix

logger = logging.getLogger(__name__)

LLR_CLIP = 30.0
DEFAULT_MAX_ITERS = 100
# design threshold assumed for codes registered without one: H2(p*) = (1 − R)/1.2
DEFAULT_INEFFICIENCY = 1.2

_TANH_FLOOR = 1e-300
_TANH_CEIL = 1.0 - 1e-16


def _as_bits(block) -> np.ndarray:
    return block.bits if isinstance(block, BitBlock) else np.asarray(block, dtype=np.uint8)


def syndrome_array(h: ParityCheckMatrix, bits: np.ndarray) -> np.ndarray:
    return ((h.matrix @ bits.astype(np.int64)) & 1).astype(np.uint8)


def syndrome(h: ParityCheckMatrix, block) -> np.ndarray:
    """s = H·block over GF(2)"""
    bits = _as_bits(block)
    if bits.shape[0] != h.cols:
        raise InvalidArgumentError(f"block has {bits.shape[0]} bits, code has {h.cols} columns")
    return syndrome_array(h, bits)


def belief_propagation(h: ParityCheckMatrix, residual: np.ndarray, qber: float,
                       max_iters: int = DEFAULT_MAX_ITERS) -> Tuple[np.ndarray, bool, int]:
    """Error pattern ê with H·ê = residual, convergence flag and iterations used"""
    if not np.any(residual):
        return np.zeros(h.cols, dtype=np.uint8), True, 0

    checks, variables = h.check_index, h.variable_index
    prior = math.log((1.0 - qber) / qber)
    check_sign = 1.0 - 2.0 * residual.astype(np.float64)
    to_check = np.full(checks.shape[0], prior)
    estimate = np.zeros(h.cols, dtype=np.uint8)

    for iteration in range(1, max_iters + 1):
        magnitude = np.clip(np.tanh(np.abs(to_check) / 2.0), _TANH_FLOOR, _TANH_CEIL)
        log_mag = np.log(magnitude)
        negative = (to_check < 0.0).astype(np.int64)
        row_log = np.bincount(checks, weights=log_mag, minlength=h.rows)
        row_parity = np.bincount(checks, weights=negative, minlength=h.rows).astype(np.int64) & 1

        excluded = np.minimum(np.exp(row_log[checks] - log_mag), _TANH_CEIL)
        sign = 1.0 - 2.0 * (row_parity[checks] ^ negative)
        to_variable = np.clip(sign * check_sign[checks] * 2.0 * np.arctanh(excluded), -LLR_CLIP, LLR_CLIP)

        total = prior + np.bincount(variables, weights=to_variable, minlength=h.cols)
        estimate = (total < 0.0).astype(np.uint8)
        if np.array_equal(syndrome_array(h, estimate), residual):
            return estimate, True, iteration
        to_check = np.clip(total[variables] - to_variable, -LLR_CLIP, LLR_CLIP)

    return estimate, False, max_iters


def decode_syndrome(h: ParityCheckMatrix, x, s_target, qber: float,
                    max_iters: int = DEFAULT_MAX_ITERS) -> Tuple[BitBlock, bool]:
    """Move x toward the block whose syndrome is s_target"""
    bits = _as_bits(x)
    target = np.asarray(s_target, dtype=np.uint8)
    if bits.shape[0] != h.cols:
        raise InvalidArgumentError(f"block has {bits.shape[0]} bits, code has {h.cols} columns")
    if target.shape[0] != h.rows:
        raise InvalidArgumentError(f"target syndrome has {target.shape[0]} bits, code has {h.rows} rows")
    if not 0.0 <= qber < 0.5:
        raise InvalidArgumentError(f"qber must lie in [0, 0.5), got {qber}")

    residual = syndrome_array(h, bits) ^ target
    if qber == 0.0:
        # no noise expected: only the hard check remains
        return BitBlock.trusted(bits), not np.any(residual)

    error, converged, iterations = belief_propagation(h, residual, qber, max_iters)
    if not converged:
        logger.warning(f"BP did not converge within {max_iters} iterations "
                       f"({int(residual.sum())} unsatisfied checks at start)")
    else:
        logger.debug(f"BP converged after {iterations} iterations")
    return BitBlock.trusted(bits ^ error), converged


def design_threshold(h: ParityCheckMatrix) -> float:
    """Largest QBER the code is registered for"""
    if h.design_threshold is not None:
        return h.design_threshold
    return float(inverse_binary_entropy((1.0 - h.rate) / DEFAULT_INEFFICIENCY))


def implied_inefficiency(h: ParityCheckMatrix, qber: float) -> float:
    """f_II = (rows/cols)/H2(qber)"""
    return (h.rows / h.cols) / binary_entropy(qber)


def select_code(qber: float, registry: Iterable[ParityCheckMatrix], margin: float = 0.0,
                cols: Optional[int] = None) -> ParityCheckMatrix:
    """Highest-rate code whose design threshold exceeds qber·(1 + margin)"""
    codes = list(registry)
    if not codes:
        raise NoCodeError("LDPC registry is empty")
    if not 0.0 < qber < 0.5:
        raise InvalidArgumentError(f"qber must lie in (0, 0.5), got {qber}")
    needed = qber * (1.0 + margin)
    eligible = [h for h in codes
                if design_threshold(h) > needed and (cols is None or h.cols == cols)]
    if not eligible:
        width = f" with {cols} columns" if cols is not None else ""
        raise NoCodeError(f"no registered LDPC code{width} has a threshold above {needed:.4f}")
    best = max(eligible, key=lambda h: h.rate)
    logger.info(f"Selected LDPC code {best.name or f'{best.rows}x{best.cols}'} (rate {best.rate:.3f}) "
                f"for qber={qber}: f_II={implied_inefficiency(best, qber):.3f}")
    return best


def frame_error_rate(h: ParityCheckMatrix, qber: float, trials: int,
                     rng: np.random.Generator, max_iters: int = DEFAULT_MAX_ITERS) -> float:
    """Fraction of BSC(qber) blocks that syndrome decoding fails to recover"""
    if trials <= 0:
        raise InvalidArgumentError(f"trials must be positive, got {trials}")
    if not 0.0 < qber < 0.5:
        raise InvalidArgumentError(f"qber must lie in (0, 0.5), got {qber}")
    failures = 0
    for _ in range(trials):
        error = (rng.random(h.cols) < qber).astype(np.uint8)
        estimate, converged, _ = belief_propagation(h, syndrome_array(h, error), qber, max_iters)
        if not converged or not np.array_equal(estimate, error):
            failures += 1
    return failures / trials
