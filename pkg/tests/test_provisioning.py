import pytest
import yaml

from src.application import provisioning_service
from src.application.provisioning_service import ProvisioningService
from src.code_generator import rows_for_qber
from src.domain.exceptions import ConfigurationError
from src.infrastructure.file_repositories import FileFrozenLibraryRepository, FileLdpcRegistryRepository


@pytest.fixture
def service(tmp_path):
    return ProvisioningService(frozen_repo=FileFrozenLibraryRepository(tmp_path / 'frozen'),
                               registry_repo=FileLdpcRegistryRepository(tmp_path / 'ldpc'))


def index_records(tmp_path):
    return yaml.safe_load((tmp_path / 'ldpc' / 'registry.yaml').read_text())['codes']


def test_registered_threshold_is_measured(service, tmp_path):
    codes = service.build_registry(256, [0.01], verify_trials=40)
    assert codes[0].rows >= rows_for_qber(256, 0.015, 1.4)
    assert codes[0].design_threshold == pytest.approx(0.015)
    record = index_records(tmp_path)[0]
    assert record['verified_fer'] <= 0.05


def test_failing_codes_gain_checks(service, tmp_path, monkeypatch):
    measured = iter([0.5, 0.2, 0.01])
    monkeypatch.setattr(provisioning_service, 'frame_error_rate', lambda *args, **kwargs: next(measured))
    code = service.build_registry(256, [0.02], verify_trials=10)[0]
    sized = rows_for_qber(256, 0.025, 1.4)
    assert code.rows > sized + 1
    assert index_records(tmp_path)[0]['verified_fer'] == 0.01


def test_unreachable_target_is_reported(service, monkeypatch):
    monkeypatch.setattr(provisioning_service, 'frame_error_rate', lambda *args, **kwargs: 1.0)
    with pytest.raises(ConfigurationError, match='frame error rate'):
        service.build_registry(64, [0.05], verify_trials=10)


def test_unchecked_registration(service, tmp_path):
    codes = service.build_registry(64, [0.03, 0.05], verify_trials=0)
    assert [c.rows for c in codes] == [rows_for_qber(64, q + 0.005, 1.4) for q in (0.03, 0.05)]
    assert [r['verified_fer'] for r in index_records(tmp_path)] == [None, None]


def test_frozen_library_round_trips_through_repository(service):
    library, paths = service.build_frozen_library(32, [0.03, 0.05], target_fer=0.05)
    assert len(paths) == 2
    assert service.frozen_repo.load(32).qbers() == library.qbers()
