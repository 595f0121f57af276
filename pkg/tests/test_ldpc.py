import numpy as np
import pytest

from src.code_generator import build_peg_code, count_four_cycles, rows_for_qber
from src.domain.analysis import binary_entropy, inverse_binary_entropy
from src.domain.exceptions import InvalidArgumentError, NoCodeError
from src.domain.ldpc import (
    belief_propagation, decode_syndrome, design_threshold, frame_error_rate, implied_inefficiency,
    select_code, syndrome
)
from src.domain.value_objects import BitBlock, ParityCheckMatrix


def rate_code(rows, cols, name="", threshold=None):
    dense = np.zeros((rows, cols), dtype=np.uint8)
    dense[np.arange(cols) % rows, np.arange(cols)] = 1
    return ParityCheckMatrix.from_dense(dense, name=name, design_threshold=threshold)


def test_hamming_fixture_dimensions(hamming):
    assert (hamming.rows, hamming.cols, hamming.edges) == (3, 7, 12)
    np.testing.assert_array_equal(hamming.column_degrees(), [2, 2, 2, 3, 1, 1, 1])


def test_unit_vectors_read_out_columns(hamming):
    dense = hamming.to_dense()
    for j in range(7):
        unit = np.zeros(7, dtype=np.uint8)
        unit[j] = 1
        np.testing.assert_array_equal(syndrome(hamming, unit), dense[:, j])


def test_syndrome_is_linear(hamming, rng):
    x, y = rng.integers(0, 2, (2, 7)).astype(np.uint8)
    np.testing.assert_array_equal(syndrome(hamming, x ^ y), syndrome(hamming, x) ^ syndrome(hamming, y))
    np.testing.assert_array_equal(syndrome(hamming, BitBlock.zeros(7)), [0, 0, 0])


def test_syndrome_length_mismatch(hamming):
    with pytest.raises(InvalidArgumentError):
        syndrome(hamming, BitBlock.zeros(8))


def test_zero_residual_needs_no_iterations(hamming, rng):
    x = rng.integers(0, 2, 7).astype(np.uint8)
    corrected, converged = decode_syndrome(hamming, x, syndrome(hamming, x), 0.05)
    np.testing.assert_array_equal(corrected.bits, x)
    assert converged
    _, ok, iterations = belief_propagation(hamming, np.zeros(3, dtype=np.uint8), 0.05)
    assert ok and iterations == 0


@pytest.mark.parametrize("position", range(7))
def test_hamming_corrects_every_single_error(hamming, position, rng):
    x = rng.integers(0, 2, 7).astype(np.uint8)
    y = x.copy()
    y[position] ^= 1
    corrected, converged = decode_syndrome(hamming, x, syndrome(hamming, y), 0.12)
    assert converged
    np.testing.assert_array_equal(corrected.bits, y)


def test_noiseless_guard_only_checks(hamming):
    x = np.zeros(7, dtype=np.uint8)
    corrected, converged = decode_syndrome(hamming, x, [1, 0, 0], 0.0)
    assert not converged
    np.testing.assert_array_equal(corrected.bits, x)
    assert decode_syndrome(hamming, x, [0, 0, 0], 0.0)[1]


def test_peg_code_shape():
    code = build_peg_code(512, 128, column_weight=3, seed=3)
    assert set(code.column_degrees().tolist()) == {3}
    assert code.row_degrees().min() >= 1
    assert code.edges == 3 * 512
    assert code.rate == pytest.approx(0.75)


def test_peg_code_is_deterministic_per_seed():
    first = build_peg_code(128, 40, seed=5)
    np.testing.assert_array_equal(first.to_dense(), build_peg_code(128, 40, seed=5).to_dense())
    assert not np.array_equal(first.to_dense(), build_peg_code(128, 40, seed=6).to_dense())


def test_peg_avoids_four_cycles_when_room_remains():
    code = build_peg_code(64, 48, column_weight=3, seed=0)
    assert count_four_cycles(code) == 0


def test_four_cycle_count(hamming):
    # columns 0 and 3 share checks 0 and 1, and so on
    dense = hamming.to_dense().astype(int)
    overlap = dense.T @ dense
    expected = sum(v * (v - 1) // 2 for v in overlap[np.triu_indices(7, k=1)])
    assert count_four_cycles(hamming) == expected > 0


def test_peg_arguments():
    with pytest.raises(InvalidArgumentError):
        build_peg_code(16, 2, column_weight=3)
    with pytest.raises(InvalidArgumentError):
        build_peg_code(16, 16)


def test_registry_style_code_corrects_typical_errors(rng):
    cols = 1024
    code = build_peg_code(cols, rows_for_qber(cols, 0.025, 1.4), seed=1, design_threshold=0.025)
    converged = 0
    for _ in range(20):
        x = rng.integers(0, 2, cols).astype(np.uint8)
        y = x ^ (rng.random(cols) < 0.02).astype(np.uint8)
        corrected, ok = decode_syndrome(code, x, syndrome(code, y), 0.02)
        if ok and np.array_equal(corrected.bits, y):
            converged += 1
    assert converged >= 19


def test_frame_error_rate_of_noiseless_and_hopeless_channels(hamming):
    code = build_peg_code(256, 64, seed=2)
    assert frame_error_rate(code, 1e-6, 20, np.random.default_rng(0)) == 0.0
    # three checks cannot place errors spread over seven bits at this rate
    assert frame_error_rate(hamming, 0.45, 50, np.random.default_rng(0)) > 0.5
    with pytest.raises(InvalidArgumentError):
        frame_error_rate(hamming, 0.05, 0, np.random.default_rng(0))


@pytest.mark.slow
def test_sub_block_code_meets_acknowledgment_target():
    cols = 1 << 15
    code = build_peg_code(cols, rows_for_qber(cols, 0.025, 1.4), seed=0, design_threshold=0.025)
    assert frame_error_rate(code, 0.02, 1000, np.random.default_rng(15)) <= 0.001


def test_duplicate_edges_rejected():
    with pytest.raises(ValueError):
        ParityCheckMatrix(rows=2, cols=4, check_index=[0, 0, 1, 1], variable_index=[0, 0, 2, 3])


def test_select_code_worked_example():
    code = rate_code(2, 10, name='rate_0.8')
    assert design_threshold(code) == pytest.approx(float(inverse_binary_entropy(0.2 / 1.2)))
    chosen = select_code(0.02, [code])
    assert chosen is code
    assert implied_inefficiency(chosen, 0.02) == pytest.approx(0.2 / binary_entropy(0.02))
    assert implied_inefficiency(chosen, 0.02) == pytest.approx(1.414, abs=1e-3)


def test_select_code_prefers_highest_qualifying_rate():
    low = rate_code(4, 10, name='low', threshold=0.08)
    high = rate_code(2, 10, name='high', threshold=0.03)
    twin = rate_code(2, 10, name='twin', threshold=0.04)
    assert select_code(0.02, [low, high, twin]).name == 'high'
    assert select_code(0.035, [low, high, twin]).name == 'twin'
    assert select_code(0.05, [low, high, twin]).name == 'low'
    # margin pushes the requirement past the higher-rate code
    assert select_code(0.025, [low, high], margin=0.5).name == 'low'


def test_select_code_errors():
    with pytest.raises(NoCodeError):
        select_code(0.02, [])
    with pytest.raises(NoCodeError):
        select_code(0.2, [rate_code(2, 10, threshold=0.03)])
    with pytest.raises(NoCodeError):
        select_code(0.02, [rate_code(2, 10, threshold=0.03)], cols=16)
