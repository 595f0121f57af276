"""
Analysis - Closed-form evaluators for entropy, efficiency, yield and correctness bounds.
"""

import logging
import math
from typing import Dict, Iterable, Mapping, Optional, Sequence

import numpy as np
import pandas as pd
from scipy.special import entr

from .exceptions import InvalidArgumentError
from .value_objects import BitChannelStats, BoundInputs, FrozenVector, ParityCheckMatrix

logger = logging.getLogger(__name__)

_LN2 = math.log(2.0)


def binary_entropy(x: float) -> float:
    """H2(x) in bits, with H2(0) = H2(1) = 0"""
    if not 0.0 <= x <= 1.0:
        raise InvalidArgumentError(f"binary entropy is defined on [0, 1], got {x}")
    return float((entr(x) + entr(1.0 - x)) / _LN2)


def binary_entropy_array(p: np.ndarray) -> np.ndarray:
    p = np.asarray(p, dtype=np.float64)
    return (entr(p) + entr(1.0 - p)) / _LN2


def inverse_binary_entropy(h, iterations: int = 64) -> np.ndarray:
    """p in [0, 0.5] with H2(p) = h, by vectorized bisection"""
    target = np.asarray(h, dtype=np.float64)
    lo = np.zeros_like(target)
    hi = np.full_like(target, 0.5)
    for _ in range(iterations):
        mid = 0.5 * (lo + hi)
        below = binary_entropy_array(mid) < target
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
    return 0.5 * (lo + hi)


def _require_channel(qber: float) -> float:
    if not 0.0 < qber < 0.5:
        raise InvalidArgumentError(f"qber must lie in (0, 0.5), got {qber}")
    return binary_entropy(qber)


def yield_gamma(eps: float, f: float, qber: float) -> float:
    """γ = (1 − ε)·[1 − f·H2(qber)]"""
    if not 0.0 <= eps <= 1.0:
        raise InvalidArgumentError(f"eps must lie in [0, 1], got {eps}")
    if f < 0.0:
        raise InvalidArgumentError(f"efficiency must be non-negative, got {f}")
    return (1.0 - eps) * (1.0 - f * binary_entropy(qber))


def _tag_miss_probability(l: int, d: int, blocks: int) -> float:
    """1 − (1 − l/2^d)^blocks without cancellation at large d"""
    if blocks <= 0:
        return 0.0
    ratio = l / 2.0 ** d
    if ratio >= 1.0:
        return 1.0
    return -math.expm1(blocks * math.log1p(-ratio))


def epsilon_bound(b: BoundInputs) -> float:
    """ε_f·[1 − (1 − l/2^d)^m + ε_a]"""
    return b.eps_f * (_tag_miss_probability(b.l, b.d, b.m) + b.eps_a)


def epsilon_bound_cases(b: BoundInputs, pr_r: Optional[Sequence[float]] = None) -> float:
    """
    Correctness bound split over the number r of failed sub-blocks.

    With r = i, only the m − i accepted sub-blocks can hide a false CRC pass
    and the acknowledgment code only runs when i > 0:
        ε ≤ ε_f·Σ_i Pr(r=i)·[1 − (1 − l/2^d)^(m−i) + ε_a·[i > 0]]
    Without a distribution this is bounded by the closed form.
    """
    if pr_r is None:
        return epsilon_bound(b)
    probabilities = np.asarray(pr_r, dtype=np.float64)
    if probabilities.ndim != 1 or probabilities.size == 0 or probabilities.size > b.m + 1:
        raise InvalidArgumentError(f"Pr(r=i) needs between 1 and m+1={b.m + 1} entries")
    if np.any(probabilities < 0.0) or abs(probabilities.sum() - 1.0) > 1e-9:
        raise InvalidArgumentError("Pr(r=i) must be a probability distribution")
    total = 0.0
    for i, p in enumerate(probabilities):
        total += p * (_tag_miss_probability(b.l, b.d, b.m - i) + (b.eps_a if i > 0 else 0.0))
    return b.eps_f * total


def total_efficiency(b: BoundInputs, r: int) -> float:
    """f = f_I + m(d+1)/(n·H2) + ε_f·f_II·r/m"""
    if not 0 <= r <= b.m:
        raise InvalidArgumentError(f"r must lie in [0, m={b.m}], got {r}")
    h = _require_channel(b.qber)
    return b.f_I + b.m * (b.d + 1) / (b.n * h) + b.eps_f * b.f_II * r / b.m


def single_block_efficiency(b: BoundInputs) -> float:
    """f without block partition: m = 1, and a failure costs the whole block"""
    return total_efficiency(b.model_copy(update={'m': 1}), 1)


def efficiency_yield(b: BoundInputs, r: int) -> float:
    """
    𝒴(m) = f_{m=1} − f.

    r counts the sub-blocks acknowledged after a forward failure, so at least one.
    """
    if not 1 <= r <= b.m:
        raise InvalidArgumentError(f"r must lie in [1, m={b.m}], got {r}")
    h = _require_channel(b.qber)
    return -(b.m - 1) * (b.d + 1) / (b.n * h) + b.eps_f * b.f_II * (b.m - r) / b.m


def measured_efficiency(ledger_total_bits: int, n: int, qber: float) -> float:
    """Leaked bits per Shannon-minimum bit"""
    if n <= 0:
        raise InvalidArgumentError(f"n must be positive, got {n}")
    if ledger_total_bits < 0:
        raise InvalidArgumentError(f"leaked bit count must be non-negative, got {ledger_total_bits}")
    return ledger_total_bits / (n * _require_channel(qber))


def epsilon_sweep(l: int, m_values: Iterable[int], d_values: Iterable[int],
                  eps_f: float = 0.01, eps_a: float = 1e-6) -> pd.DataFrame:
    rows = []
    for m in m_values:
        for d in d_values:
            if d < math.log2(l):
                continue
            bound = epsilon_bound(BoundInputs(eps_f=eps_f, eps_a=eps_a, l=l, d=d, m=m))
            rows.append({'m': m, 'd': d, 'epsilon': bound})
    return pd.DataFrame(rows, columns=['m', 'd', 'epsilon'])


def acknowledged_blocks(r_bound: int, m: int) -> int:
    """The estimate clamped to [1, m]: a forward failure fails at least one sub-block"""
    return min(max(int(r_bound), 1), m)


def efficiency_yield_sweep(n_values: Iterable[int], m_values: Iterable[int], qber: float,
                           eps_f: float = 0.1, f_II: float = 1.0, d: int = 32,
                           r_by_m: Optional[Mapping[int, int]] = None) -> pd.DataFrame:
    """
    𝒴(m) over a grid of block lengths.

    r_by_m gives the failed sub-block estimate per m; an m missing from it is
    charged every sub-block (r = m).
    """
    r_by_m = r_by_m or {}
    rows = []
    for n in n_values:
        for m in m_values:
            r = acknowledged_blocks(r_by_m.get(m, m), m)
            b = BoundInputs(eps_f=eps_f, l=1, d=d, m=m, n=n, f_II=f_II, qber=qber)
            rows.append({'n': n, 'm': m, 'r': r, 'f_II': f_II, 'yield': efficiency_yield(b, r)})
    return pd.DataFrame(rows, columns=['n', 'm', 'r', 'f_II', 'yield'])


def failed_block_profile(stats: BitChannelStats, frozen: FrozenVector, m_values: Iterable[int],
                         eps_block: float = 1e-3) -> Dict[int, int]:
    """Clamped failed sub-block estimate for each m"""
    from .construction import estimate_failed_blocks

    return {m: acknowledged_blocks(estimate_failed_blocks(stats, frozen, m, eps_block)[1], m)
            for m in m_values}


def efficiency_yield_model(n_values: Iterable[int], m_values: Iterable[int], qber: float,
                           eps_f: float = 0.1, d: int = 32, f_II: Optional[float] = None,
                           registry: Optional[Iterable[ParityCheckMatrix]] = None,
                           reference_n: int = 1 << 16, eps_block: float = 1e-3,
                           fidelity: int = 64) -> pd.DataFrame:
    """
    Efficiency-yield sweep with r taken from a polar construction.

    The frozen set of a reference_n code is chosen at target FER eps_f and the
    per-m estimate of failed sub-blocks is reused for every n. f_II comes from
    the registry code selected for qber when a registry is given.
    """
    from .construction import construct_bsc, select_frozen
    from .ldpc import implied_inefficiency, select_code

    m_values = list(m_values)
    if registry is not None:
        f_II = implied_inefficiency(select_code(qber, registry), qber)
    if f_II is None:
        raise InvalidArgumentError("efficiency yield needs f_II or an LDPC registry")
    stats = construct_bsc(reference_n, qber, fidelity)
    frozen = select_frozen(stats, eps_f)
    r_by_m = failed_block_profile(stats, frozen, m_values, eps_block)
    logger.info(f"Failed sub-block estimate at n={reference_n}, k={frozen.k}: {r_by_m}")
    return efficiency_yield_sweep(n_values, m_values, qber, eps_f, f_II, d, r_by_m)


def failed_block_sweep(stats: BitChannelStats, frozen: FrozenVector,
                       m_values: Iterable[int], eps_block: float) -> pd.DataFrame:
    """Upper bound on the number of failed sub-blocks for each block count m"""
    from .construction import estimate_failed_blocks

    rows = []
    for m in m_values:
        pu, r_bound = estimate_failed_blocks(stats, frozen, m, eps_block)
        rows.append({'m': m, 'r_bound': r_bound, 'max_pu': float(np.max(pu)), 'sum_pu': float(np.sum(pu))})
    return pd.DataFrame(rows, columns=['m', 'r_bound', 'max_pu', 'sum_pu'])
