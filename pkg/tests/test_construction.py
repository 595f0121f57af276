import numpy as np
import pytest

from src.domain.construction import (
    bit_channel_error_probabilities, build_library, construct_bsc, degrading_merge,
    estimate_failed_blocks, minus_transform, normalize, plus_transform, select_frozen,
    select_frozen_rate, union_bound, upgrading_merge, bsc_channel, error_probability
)
from src.domain import construction
from src.domain.exceptions import InvalidArgumentError
from src.domain.polar import generator_matrix


def exact_bit_channel_pe(n, qber):
    """Genie-aided MAP error of every bit-channel by enumerating all (u, y)"""
    g = generator_matrix(n).astype(np.int64)
    words = (np.arange(1 << n)[:, None] >> np.arange(n - 1, -1, -1)) & 1
    x = (words @ g) % 2
    flips = (x[:, None, :] != words[None, :, :]).sum(axis=2)
    joint = qber ** flips * (1.0 - qber) ** (n - flips) / (1 << n)
    joint = joint.reshape((2,) * n + (1 << n,))
    pe = []
    for i in range(n):
        marginal = joint.sum(axis=tuple(range(i + 1, n))) if i + 1 < n else joint
        pe.append(marginal.min(axis=i).sum())
    return np.array(pe)


def test_two_bit_worked_example():
    stats = construct_bsc(2, 0.02)
    np.testing.assert_allclose(stats.pe, [2 * 0.02 * 0.98, 0.02], rtol=1e-12)


@pytest.mark.parametrize("n", [2, 4, 8])
@pytest.mark.parametrize("qber", [0.05, 0.11, 0.3])
def test_small_codes_match_exhaustive_enumeration(n, qber):
    np.testing.assert_allclose(construct_bsc(n, qber).pe, exact_bit_channel_pe(n, qber), rtol=1e-9)


def test_transforms_preserve_probability_mass():
    channel = bsc_channel(0.07)
    for step in (minus_transform, plus_transform, minus_transform):
        channel = step(channel)
        a, b = channel
        assert a.sum() + b.sum() == pytest.approx(1.0)
        assert np.all(a >= b - 1e-15)


@pytest.mark.parametrize("merge", [degrading_merge, upgrading_merge])
def test_mass_stays_at_one_over_twenty_levels(merge):
    channel = bsc_channel(0.02)
    for level in range(20):
        step = plus_transform if level % 3 else minus_transform
        channel = normalize(merge(step(channel), 8))
        assert channel[0].sum() + channel[1].sum() == pytest.approx(1.0, abs=1e-14)
    assert 0.0 <= error_probability(channel) <= 0.5


def test_construction_clips_rounding_overshoot(monkeypatch):
    drifted = np.array([0.0, 1e-13, 0.25, 0.5 + 8e-12])
    monkeypatch.setattr(construction, 'bit_channel_error_probabilities', lambda *args, **kwargs: drifted)
    stats = construct_bsc(4, 0.02, with_lower=True)
    assert stats.pe.max() == 0.5
    assert np.all(stats.pe_lower <= stats.pe)


@pytest.mark.slow
def test_megabit_construction_stays_within_half():
    stats = construct_bsc(1 << 20, 0.02, fidelity=8, workers=4)
    assert stats.pe.shape == (1 << 20,)
    assert stats.pe.max() <= 0.5
    assert stats.pe[0] > 0.49 and stats.pe[-1] < 1e-9


@pytest.mark.parametrize("step", [minus_transform, plus_transform])
def test_merged_channels_bound_their_successors(step):
    channel = bsc_channel(0.06)
    for first in (plus_transform, minus_transform, plus_transform):
        channel = first(channel)
    exact = error_probability(step(channel))
    assert error_probability(step(degrading_merge(channel, 4))) >= exact - 1e-15
    assert error_probability(step(upgrading_merge(channel, 4))) <= exact + 1e-15


def test_lower_bounds_never_exceed_upper_bounds():
    upper = bit_channel_error_probabilities(128, 0.05, fidelity=16)
    lower = bit_channel_error_probabilities(128, 0.05, fidelity=16, upgrade=True)
    assert np.all(lower <= upper + 1e-12)
    stats = construct_bsc(128, 0.05, fidelity=16, with_lower=True)
    assert stats.pe_lower is not None


def test_parallel_construction_equals_serial():
    serial = bit_channel_error_probabilities(64, 0.05, fidelity=32)
    parallel = bit_channel_error_probabilities(64, 0.05, fidelity=32, workers=2)
    np.testing.assert_allclose(parallel, serial, rtol=1e-12)


def test_select_frozen_respects_target():
    stats = construct_bsc(256, 0.03)
    frozen = select_frozen(stats, 0.01)
    assert 0 < frozen.k < 256
    assert union_bound(stats, frozen) <= 0.01
    # the next best channel would cross the target
    remaining = np.sort(stats.pe[~frozen.info_mask])
    assert union_bound(stats, frozen) + remaining[0] > 0.01


def test_select_frozen_rate_freezes_worst_positions():
    stats = construct_bsc(64, 0.05)
    frozen = select_frozen_rate(stats, 20)
    assert frozen.k == 20
    assert stats.pe[frozen.info_mask].max() <= stats.pe[~frozen.info_mask].min()


def test_failed_block_estimate_partitions_union_bound():
    stats = construct_bsc(256, 0.03)
    frozen = select_frozen(stats, 0.01)
    pu, r_bound = estimate_failed_blocks(stats, frozen, 8, eps_block=1e-4)
    assert pu.shape == (8,)
    assert pu.sum() == pytest.approx(union_bound(stats, frozen))
    assert r_bound == int(np.count_nonzero(pu > 1e-4))
    with pytest.raises(InvalidArgumentError):
        estimate_failed_blocks(stats, frozen, 3, eps_block=1e-4)


def test_library_keys_round_to_grid():
    library = build_library(32, [0.031, 0.05, 0.049], target_fer=0.05)
    assert library.qbers() == [0.03, 0.05]
    assert library.get(0.0301).n == 32
    assert 0.05 in library


@pytest.mark.parametrize("kwargs", [
    {'n': 12, 'qber': 0.05},
    {'n': 16, 'qber': 0.5},
    {'n': 16, 'qber': 0.0},
    {'n': 16, 'qber': 0.05, 'fidelity': 1},
])
def test_invalid_construction_arguments(kwargs):
    with pytest.raises(InvalidArgumentError):
        construct_bsc(**kwargs)


@pytest.mark.parametrize("qber", [0.05, 0.2])
@pytest.mark.parametrize("target", [0.01, 0.1, 0.5, 0.9])
def test_select_frozen_matches_exhaustive_subset_search(qber, target):
    stats = construct_bsc(8, qber)
    frozen = select_frozen(stats, target)
    best_size, best_sum = 0, 0.0
    for mask in range(1 << 8):
        members = [i for i in range(8) if mask >> i & 1]
        total = float(stats.pe[members].sum())
        if total <= target and (len(members) > best_size or
                                (len(members) == best_size and total < best_sum)):
            best_size, best_sum = len(members), total
    assert frozen.k == best_size
    assert union_bound(stats, frozen) == pytest.approx(best_sum, abs=1e-15)


def test_information_set_shrinks_as_qber_grows():
    library = build_library(256, [0.01, 0.03, 0.05, 0.07, 0.09, 0.11], target_fer=0.01)
    ks = [library.get(q).k for q in library.qbers()]
    assert all(a >= b for a, b in zip(ks, ks[1:]))
    assert ks[0] > ks[-1]
