"""
Sifted Key Generator for Reconciliation Campaigns
Generates correlated key pairs disagreeing as a binary symmetric channel.
"""

from typing import Optional, Tuple

import numpy as np

try:
    from src.domain.exceptions import InvalidArgumentError
    from src.domain.value_objects import BitBlock
    from src.infrastructure.randomness import StreamRole, trial_stream
except ImportError:
    from .domain.exceptions import InvalidArgumentError
    from .domain.value_objects import BitBlock
    from .infrastructure.randomness import StreamRole, trial_stream


def gen_sifted_pair(n: int, qber: float, rng: np.random.Generator) -> Tuple[BitBlock, BitBlock]:
    """K_A uniform, K_B = K_A ⊕ e with e i.i.d. Bernoulli(qber)"""
    if n <= 0:
        raise InvalidArgumentError(f"key length must be positive, got {n}")
    if not 0.0 <= qber < 0.5:
        raise InvalidArgumentError(f"qber must lie in [0, 0.5), got {qber}")
    k_a = rng.integers(0, 2, size=n, dtype=np.uint8)
    errors = (rng.random(n) < qber).astype(np.uint8)
    return BitBlock.trusted(k_a), BitBlock.trusted(k_a ^ errors)


class SiftedKeyGenerator:
    """Generates reproducible sifted-key pairs per trial"""

    def __init__(self, seed: Optional[int] = None):
        self.seed = seed

    def pair(self, n: int, qber: float, trial_index: int) -> Tuple[BitBlock, BitBlock]:
        rng = trial_stream(self.seed, trial_index, StreamRole.SIFTED_KEYS)
        return gen_sifted_pair(n, qber, rng)
