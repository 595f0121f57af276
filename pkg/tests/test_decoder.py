import itertools
import math

import numpy as np
import pytest

from src.domain.construction import construct_bsc, select_frozen, select_frozen_rate
from src.domain.crc import crc_of_array, crc_tags
from src.domain.decoder import (
    ReferenceListDecoder, bit_llr, branch_penalty, channel_llr, decode, f_function,
    fork, g_function, prune
)
from src.domain.entities import DecoderPath
from src.domain.exceptions import InvalidArgumentError
from src.domain.polar import encode, encode_array
from src.domain.scl_kernels import ListDecoderState
from src.domain.value_objects import BitBlock, CrcSpec, TagVector


def random_u(frozen, rng):
    u = np.zeros(frozen.n, dtype=np.uint8)
    u[frozen.info_positions] = rng.integers(0, 2, frozen.k)
    return BitBlock.trusted(u)


def noisy_received(u, qber, rng):
    codeword = encode(u, BitBlock.zeros(len(u)))
    noise = (rng.random(len(u)) < qber).astype(np.uint8)
    return codeword ^ BitBlock.trusted(noise)


def test_channel_llr_values():
    llr = channel_llr(BitBlock.of([0, 1]), 0.02)
    np.testing.assert_allclose(llr, [math.log(49), -math.log(49)])
    assert abs(channel_llr(BitBlock.of([0]), 0.4999)[0]) < 1e-3
    with pytest.raises(InvalidArgumentError):
        channel_llr(BitBlock.of([0]), 0.5)


def test_branch_penalties():
    assert branch_penalty(2.0, 0) == 0.0
    assert branch_penalty(2.0, 1) == 2.0
    assert branch_penalty(-1.5, 0) == 1.5
    # exact form is −ln Pr(bit | llr)
    assert branch_penalty(2.0, 0, exact=True) == pytest.approx(-math.log(1 / (1 + math.exp(-2.0))))
    assert branch_penalty(2.0, 1, exact=True) == pytest.approx(-math.log(1 / (1 + math.exp(2.0))))


@pytest.mark.parametrize("a, b", [(1.2, -0.4), (-3.0, -2.5), (0.3, 5.0)])
def test_check_node_forms(a, b):
    exact = 2 * math.atanh(math.tanh(a / 2) * math.tanh(b / 2))
    assert f_function(a, b, exact=True) == pytest.approx(exact)
    assert f_function(a, b) == pytest.approx(math.copysign(min(abs(a), abs(b)), a * b))
    assert g_function(a, b, 0) == a + b
    assert g_function(a, b, 1) == b - a


def test_bit_llr_two_point_code():
    llr = [1.0, -2.0]
    assert bit_llr(llr, []) == f_function(1.0, -2.0)
    assert bit_llr(llr, [0]) == g_function(1.0, -2.0, 0)
    assert bit_llr(llr, [1]) == g_function(1.0, -2.0, 1)


def test_exact_metric_matches_exhaustive_posterior_on_four_bits():
    """Full-length exact metric equals −ln P(u | y) up to a shared constant"""
    llr = np.array([0.7, -1.1, 2.3, 0.4])
    scores = {}
    for bits in itertools.product([0, 1], repeat=4):
        x = encode_array(np.array(bits, dtype=np.uint8), np.zeros(4, dtype=np.uint8))
        log_likelihood = -np.sum(np.log1p(np.exp(-(1 - 2.0 * x) * llr)))
        path = DecoderPath()
        for i in range(4):
            soft = bit_llr(list(llr), path.decisions, exact=True)
            path = path.extended(bits[i], branch_penalty(soft, bits[i], exact=True))
        scores[bits] = (path.metric, -log_likelihood)
    offsets = [metric - nll for metric, nll in scores.values()]
    assert max(offsets) - min(offsets) < 1e-9


def test_fork_doubles_list_zeros_first():
    forked = fork([DecoderPath()], [1.5])
    assert [p.decisions for p in forked] == [[0], [1]]
    assert [p.metric for p in forked] == [0.0, 1.5]
    assert [p.index for p in forked] == [0, 1]
    paths = [DecoderPath(decisions=[0]), DecoderPath(decisions=[1], metric=0.5)]
    assert len(fork(paths, [0.1, -0.2])) == 4


def test_prune_keeps_smallest_in_list_order():
    paths = [DecoderPath(decisions=[i], metric=m) for i, m in enumerate([0.9, 0.1, 0.5, 0.1, 2.0, 0.3])]
    assert prune(paths, 8) is paths
    kept = prune(paths, 3)
    assert [p.decisions[0] for p in kept] == [1, 3, 5]
    assert [p.decisions[0] for p in prune(paths, 1)] == [1]


def test_noiseless_block_decodes_exactly(make_session, rng):
    params = make_session(n=64, m=4, d=8, l=4, qber=0.02)
    u = random_u(params.frozen, rng)
    tags = crc_tags(u, params.m, params.crc)
    outcome = decode(encode(u, BitBlock.zeros(64)), params.frozen, tags, params.l, params.m,
                     params.qber, params.crc)
    assert outcome.u_prime == u
    assert outcome.sigma == (0, 0, 0, 0)
    assert outcome.full_pass


@pytest.mark.parametrize("exact", [False, True])
def test_kernel_matches_reference_decoder(exact, rng):
    n, m, l, qber = 64, 4, 4, 0.1
    frozen = select_frozen_rate(construct_bsc(n, qber), 32)
    spec = CrcSpec.generic(8)
    reference = ReferenceListDecoder(l, exact=exact)
    failures = 0
    for _ in range(40):
        u = random_u(frozen, rng)
        received = noisy_received(u, qber, rng)
        tags = crc_tags(u, m, spec)
        fast = decode(received, frozen, tags, l, m, qber, spec, exact=exact)
        slow = reference.decode(received, frozen, tags, m, qber, spec)
        assert fast.u_prime == slow.u_prime
        assert fast.sigma == slow.sigma
        assert fast.full_pass == slow.full_pass
        failures += fast.r
    assert failures > 0


def test_full_list_decoding_is_maximum_likelihood(rng):
    n, k, qber = 16, 4, 0.05
    frozen = select_frozen_rate(construct_bsc(n, qber), k)
    codebook = []
    for bits in itertools.product([0, 1], repeat=k):
        u = np.zeros(n, dtype=np.uint8)
        u[frozen.info_positions] = bits
        codebook.append(encode_array(u, np.zeros(n, dtype=np.uint8)))
    codebook = np.array(codebook)

    for _ in range(10_000):
        received = noisy_received(random_u(frozen, rng), qber, rng)
        state = ListDecoderState(channel_llr(received, qber), frozen.info_mask, 1 << k, exact=True)
        state.advance(0, n)
        bits, _ = state.traceback(0, n)
        best = bits[int(np.argmin(state.listed_metrics()))]
        decoded = encode_array(best, np.zeros(n, dtype=np.uint8))
        distances = (codebook != received.bits).sum(axis=1)
        assert (decoded != received.bits).sum() == distances.min()


def test_accepted_blocks_always_pass_their_tags(make_session, rng):
    params = make_session(n=64, m=4, d=8, l=2, qber=0.1)
    for _ in range(60):
        u = random_u(params.frozen, rng)
        tags = crc_tags(u, params.m, params.crc)
        outcome = decode(noisy_received(u, 0.1, rng), params.frozen, tags, params.l, params.m,
                         params.qber, params.crc)
        for i, block in enumerate(outcome.u_prime.split(params.m)):
            if outcome.sigma[i] == 0:
                assert crc_of_array(block.bits, params.crc) == tags[i]
            else:
                assert block.weight() == 0


def test_random_tags_fail_every_block(make_session, rng):
    params = make_session(n=64, m=4, d=32, l=4, qber=0.05)
    u = random_u(params.frozen, rng)
    tags = TagVector(tags=tuple(int(t) for t in rng.integers(0, 1 << 32, 4)), width=32)
    outcome = decode(encode(u, BitBlock.zeros(64)), params.frozen, tags, params.l, params.m,
                     params.qber, params.crc)
    assert outcome.sigma == (1, 1, 1, 1)
    assert not outcome.full_pass


def test_argument_errors(make_session):
    params = make_session(n=32, m=4, d=8, l=2)
    received = BitBlock.zeros(32)
    tags = TagVector(tags=(0,) * 4, width=8)
    with pytest.raises(InvalidArgumentError):
        decode(received, params.frozen, tags, 2, 3, 0.05, params.crc)
    with pytest.raises(InvalidArgumentError):
        decode(received, params.frozen, TagVector(tags=(0,) * 2, width=8), 2, 4, 0.05, params.crc)
    with pytest.raises(InvalidArgumentError):
        decode(received, params.frozen, tags, 2, 4, 0.05, CrcSpec.generic(16))
    with pytest.raises(InvalidArgumentError):
        decode(received, params.frozen, tags, 0, 4, 0.05, params.crc)
    with pytest.raises(InvalidArgumentError):
        decode(BitBlock.zeros(16), params.frozen, tags, 2, 4, 0.05, params.crc)


@pytest.mark.slow
def test_longer_lists_never_lose_to_successive_cancellation():
    n, m, qber, trials = 1 << 12, 4, 0.03, 1000
    frozen = select_frozen(construct_bsc(n, qber), 0.1)
    spec = CrcSpec.generic(16)
    rng = np.random.default_rng(4096)
    failures = {1: 0, 16: 0}
    for _ in range(trials):
        u = random_u(frozen, rng)
        received = noisy_received(u, qber, rng)
        tags = crc_tags(u, m, spec)
        for l in failures:
            failures[l] += decode(received, frozen, tags, l, m, qber, spec).u_prime != u
    p1, p16 = failures[1] / trials, failures[16] / trials
    sigma = math.sqrt((p1 * (1 - p1) + p16 * (1 - p16)) / trials)
    assert p16 <= p1 + 3 * sigma
