"""
Domain Services - The two-party SLA reconciliation exchange.
Following Domain-Driven Design principles.
"""

import logging
from typing import List, Tuple

import numpy as np

from .crc import crc_tags
from .decoder import decode
from .entities import AckMessage, DecodeOutcome, ForwardMessage, LeakageLedger, SessionParams
from .exceptions import InvalidArgumentError
from .ldpc import decode_syndrome, syndrome_array
from .polar import bit_reversal_permute, encode
from .value_objects import BitBlock, Syndrome

logger = logging.getLogger(__name__)


class SLAProtocolService:
    """Forward (polar + BC-SCL) and acknowledgment (LDPC) phases for one session"""

    def __init__(self, params: SessionParams):
        self.params = params

    def _check_key(self, key: BitBlock, who: str) -> None:
        if len(key) != self.params.n:
            raise InvalidArgumentError(f"{who}'s sifted key has {len(key)} bits, session expects {self.params.n}")

    def _check_outcome(self, outcome: DecodeOutcome) -> None:
        if outcome.m != self.params.m or len(outcome.u_prime) != self.params.n:
            raise InvalidArgumentError("decode outcome does not belong to this session")

    def alice_forward(self, k_a: BitBlock, rng: np.random.Generator) -> Tuple[ForwardMessage, BitBlock]:
        """Fill the information positions with fresh random bits, send Z = U·G_n ⊕ K_A and the tags"""
        self._check_key(k_a, "Alice")
        params = self.params
        u = np.zeros(params.n, dtype=np.uint8)
        u[params.frozen.info_positions] = rng.integers(0, 2, size=params.k, dtype=np.uint8)
        u_block = BitBlock.trusted(u)
        message = ForwardMessage(z=encode(u_block, k_a), tags=crc_tags(u_block, params.m, params.crc))
        return message, u_block

    def bob_forward(self, k_b: BitBlock, msg: ForwardMessage) -> DecodeOutcome:
        self._check_key(k_b, "Bob")
        params = self.params
        outcome = decode(k_b ^ msg.z, params.frozen, msg.tags, params.l, params.m,
                         params.qber, params.crc, exact=params.exact_metric)
        logger.debug(f"Forward phase: r={outcome.r} of m={params.m}")
        return outcome

    def bob_ack(self, k_b: BitBlock, outcome: DecodeOutcome) -> AckMessage:
        """Case II (r = 0): σ only. Case I: σ plus syndromes of Y_e for every failed e"""
        self._check_key(k_b, "Bob")
        self._check_outcome(outcome)
        sigma = outcome.sigma
        failed = outcome.failed_blocks
        if not failed:
            return AckMessage(sigma=sigma)
        ldpc = self.params.require_ldpc()
        blocks = bit_reversal_permute(k_b).split(self.params.m)
        rows = np.stack([syndrome_array(ldpc, blocks[e].bits) for e in failed])
        return AckMessage(sigma=sigma, syndromes=Syndrome(bits=rows, block_ids=tuple(failed), rows=ldpc.rows))

    def alice_ack(self, k_a: BitBlock, u: BitBlock, ack: AckMessage) -> Tuple[BitBlock, bool]:
        """K_IR^A: U_i where σ_i = 0, X_i corrected toward Bob's syndrome where σ_i = 1"""
        self._check_key(k_a, "Alice")
        params = self.params
        if len(u) != params.n or len(ack.sigma) != params.m:
            raise InvalidArgumentError("acknowledgment does not match the session parameters")
        if ack.is_empty:
            return u, True

        ldpc = params.require_ldpc()
        u_blocks = u.split(params.m)
        x_blocks = bit_reversal_permute(k_a).split(params.m)
        assembled: List[BitBlock] = []
        converged = True
        for i, failed in enumerate(ack.sigma):
            if not failed:
                assembled.append(u_blocks[i])
                continue
            corrected, ok = decode_syndrome(ldpc, x_blocks[i], ack.syndromes.for_block(i),
                                            params.qber, params.max_iters)
            converged = converged and ok
            assembled.append(corrected)
        return BitBlock.concat(assembled), converged

    def bob_assemble(self, k_b: BitBlock, outcome: DecodeOutcome) -> BitBlock:
        """K_IR^B: U′_i where σ_i = 0, Y_i where σ_i = 1"""
        self._check_key(k_b, "Bob")
        self._check_outcome(outcome)
        if outcome.r == 0:
            return outcome.u_prime
        decoded = outcome.u_prime.split(self.params.m)
        permuted = bit_reversal_permute(k_b).split(self.params.m)
        return BitBlock.concat([permuted[i] if s else decoded[i] for i, s in enumerate(outcome.sigma)])

    def leakage(self, ack: AckMessage) -> LeakageLedger:
        """n − k, m·d tag bits, m bits of σ, and every syndrome bit sent"""
        params = self.params
        return LeakageLedger(
            forward_bits=params.n - params.k,
            tag_bits=params.m * params.d,
            sigma_bits=params.m,
            ack_bits=ack.syndrome_bits,
        )
