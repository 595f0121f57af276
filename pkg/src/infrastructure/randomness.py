"""
Randomness - Counter-based random streams keyed by (seed, trial index, role).
"""

from enum import IntEnum
from typing import Optional

import numpy as np


class StreamRole(IntEnum):
    SIFTED_KEYS = 0
    ALICE_PAYLOAD = 1


def trial_stream(seed: Optional[int], trial_index: int, role: StreamRole) -> np.random.Generator:
    """Independent Philox stream; OS entropy when seed is None"""
    sequence = np.random.SeedSequence(seed, spawn_key=(int(trial_index), int(role)))
    return np.random.Generator(np.random.Philox(sequence))
