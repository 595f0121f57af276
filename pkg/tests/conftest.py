"""
Shared fixtures: small sessions, a Hamming code and provisioned resource directories.
"""

from pathlib import Path

import numpy as np
import pytest

from src.application.provisioning_service import ProvisioningService
from src.code_generator import build_peg_code, rows_for_qber
from src.domain.construction import construct_bsc, select_frozen_rate
from src.domain.entities import SessionParams
from src.domain.value_objects import CrcSpec, ParityCheckMatrix
from src.infrastructure.alist import load_alist
from src.infrastructure.file_repositories import FileFrozenLibraryRepository, FileLdpcRegistryRepository
from src.infrastructure.settings import CampaignConfig

FIXTURES = Path(__file__).parent / 'fixtures'


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def hamming() -> ParityCheckMatrix:
    return load_alist(FIXTURES / 'hamming_7_4.alist')


@pytest.fixture
def hamming_plus_one(hamming) -> ParityCheckMatrix:
    """Hamming(7,4) with an eighth bit hung on a check of its own"""
    dense = np.zeros((4, 8), dtype=np.uint8)
    dense[:3, :7] = hamming.to_dense()
    dense[3, 7] = 1
    return ParityCheckMatrix.from_dense(dense, name='hamming_plus_one', design_threshold=0.15)


@pytest.fixture
def make_session():
    def build(n=64, m=4, d=8, l=8, qber=0.05, k=None, ldpc=None, frozen=None, exact=False):
        if frozen is None:
            stats = construct_bsc(n, qber)
            frozen = select_frozen_rate(stats, n // 2 if k is None else k)
        if ldpc is None:
            cols = n // m
            ldpc = build_peg_code(cols, rows_for_qber(cols, qber + 0.005, 1.4),
                                  design_threshold=qber + 0.005)
        return SessionParams(n=n, m=m, d=d, l=l, qber=qber, frozen=frozen,
                             crc=CrcSpec.generic(d), ldpc=ldpc, exact_metric=exact)
    return build


@pytest.fixture
def resources(tmp_path):
    """Frozen library at n=64 and an LDPC registry for 16-bit sub-blocks"""
    frozen_dir, ldpc_dir = tmp_path / 'frozen', tmp_path / 'ldpc'
    service = ProvisioningService(frozen_repo=FileFrozenLibraryRepository(frozen_dir),
                                  registry_repo=FileLdpcRegistryRepository(ldpc_dir))
    service.build_frozen_library(64, [0.03, 0.05], target_fer=0.05)
    service.build_registry(16, [0.03, 0.05], verify_trials=0)
    return {'frozen_library': str(frozen_dir), 'ldpc_registry': str(ldpc_dir),
            'output': str(tmp_path / 'results' / 'campaign.csv')}


@pytest.fixture
def campaign_config(resources):
    def build(**overrides):
        values = dict(n=64, m=4, d=8, l=4, qber_list=[0.03, 0.05], trials=6, seed=7,
                      target_fer=0.05, **resources)
        values.update(overrides)
        return CampaignConfig(**values)
    return build
