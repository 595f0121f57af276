"""
Provisioning Service - Builds the resources a campaign runs on.
Frozen-vector libraries (polar construction) and LDPC registries (PEG codes checked by simulation).
"""

import logging
import math
from typing import Iterable, List, Optional, Tuple

import numpy as np

from ..code_generator import build_peg_code, rows_for_qber
from ..domain.construction import DEFAULT_FIDELITY, build_library
from ..domain.entities import FrozenLibrary, library_key
from ..domain.exceptions import ConfigurationError
from ..domain.ldpc import frame_error_rate
from ..domain.repositories import IFrozenLibraryRepository, ILdpcRegistryRepository
from ..domain.value_objects import ParityCheckMatrix
from ..infrastructure.file_repositories import FileFrozenLibraryRepository, FileLdpcRegistryRepository
from ..infrastructure.settings import Settings

logger = logging.getLogger(__name__)


class ProvisioningService:
    """Builds and persists frozen-vector libraries and LDPC code registries"""

    def __init__(self, frozen_repo: Optional[IFrozenLibraryRepository] = None,
                 registry_repo: Optional[ILdpcRegistryRepository] = None,
                 settings: Optional[Settings] = None):
        if frozen_repo is None or registry_repo is None:
            settings = settings or Settings.from_env()
        self.frozen_repo = frozen_repo or FileFrozenLibraryRepository(settings.frozen_library)
        self.registry_repo = registry_repo or FileLdpcRegistryRepository(settings.ldpc_registry)

    def build_frozen_library(self, n: int, qber_list: Iterable[float], target_fer: float = 0.01,
                             fidelity: int = DEFAULT_FIDELITY, workers: int = 1,
                             k: Optional[int] = None) -> Tuple[FrozenLibrary, List[str]]:
        library = build_library(n, qber_list, target_fer, fidelity, workers=workers, k=k)
        paths = self.frozen_repo.save(library)
        return library, paths

    def build_registry(self, cols: int, qber_list: Iterable[float], inefficiency: float = 1.4,
                       headroom: float = 0.005, column_weight: int = 3, seed: int = 0,
                       verify_trials: int = 100, max_fer: float = 0.05) -> List[ParityCheckMatrix]:
        """
        One PEG code per QBER grid point q, registered for q + headroom.

        Each code is decoded verify_trials times at its design threshold; while
        the measured frame error rate exceeds max_fer the code gains checks.
        verify_trials=0 registers the sized code unchecked.
        """
        codes = []
        rng = np.random.default_rng(seed)
        for index, qber in enumerate(sorted({library_key(q) for q in qber_list})):
            threshold = qber + headroom
            rows = rows_for_qber(cols, threshold, inefficiency)
            name = f"ldpc_n{cols}_q{qber:.2f}"
            while True:
                code = build_peg_code(cols, rows, column_weight, seed=seed + index,
                                      name=name, design_threshold=threshold)
                fer = frame_error_rate(code, threshold, verify_trials, rng) if verify_trials > 0 else None
                if fer is None or fer <= max_fer:
                    break
                grown = rows + max(1, math.ceil(0.05 * rows))
                if grown >= cols:
                    raise ConfigurationError(f"no {cols}-column code reaches frame error rate {max_fer} "
                                             f"at qber={threshold:.4f} (last: {rows} rows, fer {fer:.3f})")
                logger.info(f"{name}: fer {fer:.3f} at {threshold:.4f} with {rows} rows, retrying with {grown}")
                rows = grown
            self.registry_repo.register(code, verified_fer=fer)
            codes.append(code)
        logger.info(f"Registered {len(codes)} LDPC codes for {cols}-bit sub-blocks")
        return codes
