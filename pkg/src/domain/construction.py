"""
Construction - Bit-channel error probabilities of polar codes over BSC(qber).

A binary-input symmetric channel is held as conjugate output pairs: symbol s
has W(y_s|0) = W(ȳ_s|1) = a[s] and W(y_s|1) = W(ȳ_s|0) = b[s] with
a[s] ≥ b[s], so P_e(W) = Σ b. Each polarization step squares the alphabet;
a merge step brings it back to at most `fidelity` symbols. Merging symbols
degrades the channel (upper bounds on P_e); splitting each symbol onto
bracketing posteriors upgrades it (lower bounds).

Bit-channel index i is read MSB-first: bit 0 selects the minus transform,
bit 1 the plus transform at that level.
"""

import logging
from concurrent.futures import ProcessPoolExecutor
from functools import lru_cache
from typing import Iterable, List, Optional, Tuple

import numpy as np

from .analysis import binary_entropy_array, inverse_binary_entropy
from .entities import FrozenLibrary, FrozenLibraryEntry, library_key
from .exceptions import InvalidArgumentError
from .value_objects import BitChannelStats, FrozenVector, is_power_of_two

logger = logging.getLogger(__name__)

Channel = Tuple[np.ndarray, np.ndarray]

DEFAULT_FIDELITY = 256


def bsc_channel(qber: float) -> Channel:
    return np.array([1.0 - qber]), np.array([qber])


def minus_transform(channel: Channel) -> Channel:
    """W ⊟ W"""
    a, b = channel
    same = np.outer(a, a) + np.outer(b, b)
    cross = np.outer(a, b) + np.outer(b, a)
    return same.ravel(), cross.ravel()


def plus_transform(channel: Channel) -> Channel:
    """W ⊛ W"""
    a, b = channel
    ab = np.outer(a, b).ravel()
    ba = np.outer(b, a).ravel()
    new_a = np.concatenate([np.outer(a, a).ravel(), np.maximum(ab, ba)])
    new_b = np.concatenate([np.outer(b, b).ravel(), np.minimum(ab, ba)])
    return new_a, new_b


def error_probability(channel: Channel) -> float:
    return float(channel[1].sum())


def degrading_merge(channel: Channel, fidelity: int) -> Channel:
    """Merge symbols whose posterior entropies share one of `fidelity` uniform bins"""
    a, b = channel
    mass = a + b
    keep = mass > 0.0
    a, b, mass = a[keep], b[keep], mass[keep]
    if a.size <= fidelity:
        return a, b
    bins = np.minimum((binary_entropy_array(b / mass) * fidelity).astype(np.int64), fidelity - 1)
    merged_a = np.bincount(bins, weights=a, minlength=fidelity)
    merged_b = np.bincount(bins, weights=b, minlength=fidelity)
    used = (merged_a + merged_b) > 0.0
    return merged_a[used], merged_b[used]


@lru_cache(maxsize=8)
def _edge_posteriors(fidelity: int) -> np.ndarray:
    edges = inverse_binary_entropy(np.arange(fidelity + 1) / fidelity)
    edges[0], edges[-1] = 0.0, 0.5
    return edges


def upgrading_merge(channel: Channel, fidelity: int) -> Channel:
    """Split each symbol between the two bin-edge posteriors bracketing its own"""
    a, b = channel
    mass = a + b
    keep = mass > 0.0
    a, b, mass = a[keep], b[keep], mass[keep]
    if a.size <= fidelity:
        return a, b
    edges = _edge_posteriors(fidelity)
    posterior = b / mass
    lower = np.clip(np.searchsorted(edges, posterior, side='right') - 1, 0, fidelity - 1)
    p1, p2 = edges[lower], edges[lower + 1]
    upper_share = mass * (posterior - p1) / (p2 - p1)
    upper_share = np.clip(upper_share, 0.0, mass)
    totals = np.bincount(lower, weights=mass - upper_share, minlength=fidelity + 1)
    totals += np.bincount(lower + 1, weights=upper_share, minlength=fidelity + 1)
    used = totals > 0.0
    return totals[used] * (1.0 - edges[used]), totals[used] * edges[used]


def normalize(channel: Channel) -> Channel:
    """Rescale to unit mass"""
    a, b = channel
    total = float(a.sum() + b.sum())
    return a / total, b / total


def _step(channel: Channel, transform, fidelity: int, upgrade: bool) -> Channel:
    merge = upgrading_merge if upgrade else degrading_merge
    return normalize(merge(transform(channel), fidelity))


def _subtree(channel: Channel, depth: int, fidelity: int, upgrade: bool) -> List[float]:
    """Error probabilities of the 2^depth descendants of `channel`, in index order"""
    if depth == 0:
        return [error_probability(channel)]
    if depth == 1:
        total_a, total_b = float(channel[0].sum()), float(channel[1].sum())
        a, b = channel
        plus_pe = total_b * total_b + float(np.minimum(np.outer(a, b), np.outer(b, a)).sum())
        return [2.0 * total_a * total_b, plus_pe]
    return (_subtree(_step(channel, minus_transform, fidelity, upgrade), depth - 1, fidelity, upgrade)
            + _subtree(_step(channel, plus_transform, fidelity, upgrade), depth - 1, fidelity, upgrade))


def _descend(channel: Channel, path: int, steps: int, fidelity: int, upgrade: bool) -> Channel:
    for level in range(steps - 1, -1, -1):
        transform = plus_transform if (path >> level) & 1 else minus_transform
        channel = _step(channel, transform, fidelity, upgrade)
    return channel


def _subtree_task(args) -> List[float]:
    qber, prefix, prefix_bits, depth, fidelity, upgrade = args
    start = _descend(bsc_channel(qber), prefix, prefix_bits, fidelity, upgrade)
    return _subtree(start, depth, fidelity, upgrade)


def bit_channel_error_probabilities(n: int, qber: float, fidelity: int = DEFAULT_FIDELITY,
                                    upgrade: bool = False, workers: int = 1) -> np.ndarray:
    log_n = n.bit_length() - 1
    if workers <= 1 or log_n < 4:
        return np.array(_subtree(bsc_channel(qber), log_n, fidelity, upgrade))
    prefix_bits = min(log_n - 2, max(1, (4 * workers - 1).bit_length()))
    tasks = [(qber, prefix, prefix_bits, log_n - prefix_bits, fidelity, upgrade)
             for prefix in range(1 << prefix_bits)]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        parts = list(pool.map(_subtree_task, tasks))
    return np.concatenate([np.asarray(part) for part in parts])


def construct_bsc(n: int, qber: float, fidelity: int = DEFAULT_FIDELITY,
                  with_lower: bool = False, workers: int = 1) -> BitChannelStats:
    """Upper bounds on P_e(W_i) for every bit-channel of a length-n polar code"""
    if not is_power_of_two(n):
        raise InvalidArgumentError(f"block length {n} is not a power of two")
    if not 0.0 < qber < 0.5:
        raise InvalidArgumentError(f"qber must lie in (0, 0.5), got {qber}")
    if fidelity < 2:
        raise InvalidArgumentError(f"fidelity must be at least 2, got {fidelity}")

    logger.info(f"Constructing n={n} polar code for BSC({qber}) at fidelity {fidelity}")
    upper = np.clip(bit_channel_error_probabilities(n, qber, fidelity, upgrade=False, workers=workers), 0.0, 0.5)
    lower = None
    if with_lower:
        lower = bit_channel_error_probabilities(n, qber, fidelity, upgrade=True, workers=workers)
        lower = np.minimum(np.clip(lower, 0.0, 0.5), upper)
    return BitChannelStats(pe=upper, qber=qber, n=n, fidelity=fidelity, pe_lower=lower)


def _selection_order(pe: np.ndarray) -> np.ndarray:
    """Positions by ascending pe; lower index first on ties"""
    return np.argsort(pe, kind='stable')


def select_frozen(stats: BitChannelStats, target_fer: float) -> FrozenVector:
    """Largest information set whose union bound Σ pe stays within target_fer"""
    if not 0.0 < target_fer < 1.0:
        raise InvalidArgumentError(f"target FER must lie in (0, 1), got {target_fer}")
    order = _selection_order(stats.pe)
    running = np.cumsum(stats.pe[order])
    k = int(np.searchsorted(running, target_fer, side='right'))
    mask = np.zeros(stats.n, dtype=bool)
    mask[order[:k]] = True
    return FrozenVector.from_info_mask(mask)


def select_frozen_rate(stats: BitChannelStats, k: int) -> FrozenVector:
    """Freeze exactly n − k positions, those with the largest pe"""
    if not 0 <= k <= stats.n:
        raise InvalidArgumentError(f"k must lie in [0, {stats.n}], got {k}")
    mask = np.zeros(stats.n, dtype=bool)
    mask[_selection_order(stats.pe)[:k]] = True
    return FrozenVector.from_info_mask(mask)


def union_bound(stats: BitChannelStats, frozen: FrozenVector) -> float:
    return float(stats.pe[frozen.info_mask].sum())


def estimate_failed_blocks(stats: BitChannelStats, v: FrozenVector, m: int,
                           eps_block: float) -> Tuple[np.ndarray, int]:
    """Per-sub-block error bounds P^U_j and the count of those above eps_block"""
    if m <= 0 or stats.n % m != 0:
        raise InvalidArgumentError(f"m={m} does not divide n={stats.n}")
    if not 0.0 < eps_block < 1.0:
        raise InvalidArgumentError(f"eps_block must lie in (0, 1), got {eps_block}")
    if v.n != stats.n:
        raise InvalidArgumentError(f"frozen vector length {v.n} differs from n={stats.n}")
    pu = np.where(v.info_mask, stats.pe, 0.0).reshape(m, -1).sum(axis=1)
    return pu, int(np.count_nonzero(pu > eps_block))


def build_library(n: int, qber_list: Iterable[float], target_fer: float = 0.01,
                  fidelity: int = DEFAULT_FIDELITY, workers: int = 1,
                  k: Optional[int] = None) -> FrozenLibrary:
    """
    Frozen vectors for each distinct QBER grid point.

    With `k` set, every entry freezes exactly n − k positions instead of
    meeting target_fer.
    """
    grid = sorted({library_key(q) for q in qber_list})
    if not grid:
        raise InvalidArgumentError("qber list is empty")
    for q in grid:
        if not 0.0 < q < 0.5:
            raise InvalidArgumentError(f"qber grid point {q} outside (0, 0.5)")

    library = FrozenLibrary(n=n)
    for q in grid:
        stats = construct_bsc(n, q, fidelity, workers=workers)
        frozen = select_frozen(stats, target_fer) if k is None else select_frozen_rate(stats, k)
        library.add(FrozenLibraryEntry(qber=q, target_fer=target_fer, frozen=frozen, stats=stats))
        logger.info(f"Library entry qber={q:.2f}: k={frozen.k}, union bound {union_bound(stats, frozen):.3e}")
    return library
