import json
from pathlib import Path

import pytest
import yaml

import run
from src.domain.exceptions import ConfigurationError
from src.infrastructure.file_repositories import frozen_file_name
from src.infrastructure.settings import CampaignConfig, Settings, load_campaign_config, read_config_file


@pytest.fixture
def clean_env(monkeypatch):
    for name in ('SLA_LOG_LEVEL', 'SLA_WORKERS', 'SLA_FROZEN_LIBRARY', 'SLA_LDPC_REGISTRY', 'SLA_OUTPUT'):
        monkeypatch.delenv(name, raising=False)
    return monkeypatch


def write_yaml(path: Path, data) -> str:
    path.write_text(yaml.safe_dump(data), encoding='utf-8')
    return str(path)


def test_settings_from_environment(clean_env):
    clean_env.setenv('SLA_WORKERS', '3')
    clean_env.setenv('SLA_LOG_LEVEL', 'debug')
    clean_env.setenv('SLA_OUTPUT', 'out/table.csv')
    settings = Settings.from_env()
    assert (settings.workers, settings.log_level, settings.output) == (3, 'DEBUG', 'out/table.csv')
    assert settings.frozen_library == 'resources/frozen'

    clean_env.setenv('SLA_WORKERS', 'many')
    with pytest.raises(ConfigurationError):
        Settings.from_env()


def test_config_precedence(tmp_path):
    path = write_yaml(tmp_path / 'campaign.yaml', {'n': 64, 'm': 4, 'd': 8, 'l': 4, 'qber': 0.03,
                                                   'trials': 5, 'output': 'file.csv'})
    settings = Settings(workers=2, output='env.csv', frozen_library='env/frozen')
    config = load_campaign_config(path, {'trials': 7, 'm': None}, settings)
    assert config.trials == 7
    assert config.m == 4
    assert config.workers == 2
    assert config.output == 'file.csv'
    assert config.frozen_library == 'env/frozen'
    assert config.qbers() == [0.03]


def test_json_config_is_accepted(tmp_path):
    path = tmp_path / 'campaign.json'
    path.write_text(json.dumps({'n': 64, 'm': 2, 'd': 16, 'l': 4, 'qber_list': [0.01, 0.02, 0.01],
                                'crc': 'CRC-16/CCITT-FALSE'}))
    config = load_campaign_config(str(path), settings=Settings())
    assert config.qbers() == [0.01, 0.02]
    assert config.crc_spec().name == 'CRC-16/CCITT-FALSE'
    trial = config.trial_config(0.02, trial_index=5)
    assert (trial.trial_index, trial.crc.width, trial.qber) == (5, 16, 0.02)


@pytest.mark.parametrize("overrides", [
    {'n': 100},
    {'m': 3},
    {'d': 4, 'l': 32},
    {'qber': None},
    {'qber': 0.0},
    {'trials': 20000},
    {'n': 1 << 25, 'm': 1},
    {'crc': 'CRC-16/CCITT-FALSE'},
    {'qber_list': []},
])
def test_invalid_campaigns_rejected(overrides):
    values = {'n': 64, 'm': 4, 'd': 8, 'l': 4, 'qber': 0.03}
    values.update(overrides)
    values = {k: v for k, v in values.items() if v is not None}
    with pytest.raises(ValueError):
        CampaignConfig(**values)


def test_long_run_lifts_desk_limits():
    config = CampaignConfig(n=1 << 25, m=1, qber=0.02, trials=20000, long_run=True)
    assert config.trials == 20000
    assert CampaignConfig(n=64, m=4, d=8, qber=0.0, design_qber=0.02).qbers() == [0.0]


def test_config_file_errors(tmp_path):
    with pytest.raises(ConfigurationError, match='not found'):
        read_config_file(tmp_path / 'missing.yaml')
    listing = write_yaml(tmp_path / 'list.yaml', [1, 2, 3])
    with pytest.raises(ConfigurationError, match='mapping'):
        read_config_file(listing)
    assert read_config_file(write_yaml(tmp_path / 'empty.yaml', None)) == {}
    bad = write_yaml(tmp_path / 'bad.yaml', {'n': 100, 'qber': 0.02})
    with pytest.raises(ConfigurationError, match='invalid campaign configuration'):
        load_campaign_config(bad, settings=Settings())


def test_cli_without_command_prints_help(capsys):
    assert run.main([]) == 0
    assert 'decode-trace' in capsys.readouterr().out


def test_cli_point_analysis(clean_env, capsys):
    assert run.main(['analyze', '--l', '16', '--d', '36', '--m', '32', '--fer', '0.01']) == 0
    out = capsys.readouterr().out
    assert 'epsilon bound' in out
    assert 'yield gamma' in out


def test_cli_point_analysis_with_failure_distribution(clean_env, capsys):
    assert run.main(['analyze', '--m', '2', '--r', '2', '--pr-r', '0.5,0.3,0.2']) == 0
    assert 'epsilon by r' in capsys.readouterr().out
    assert run.main(['analyze', '--m', '2', '--pr-r', '0.5,0.2']) == 1


@pytest.mark.parametrize("sweep, extra", [
    ('epsilon', ['--m-values', '1,32', '--d-max', '12']),
    ('yield', ['--n-values', '1e6,1e8', '--m-values', '1,32', '--reference-n', '1024', '--fidelity', '16']),
    ('yield', ['--n-values', '1e8', '--m-values', '1,32', '--r', '4']),
])
def test_cli_sweeps(clean_env, capsys, sweep, extra):
    assert run.main(['analyze', '--sweep', sweep] + extra) == 0
    assert 'm' in capsys.readouterr().out


def test_cli_failed_block_sweep_needs_statistics(clean_env, tmp_path, capsys):
    assert run.main(['analyze', '--sweep', 'failed-blocks', '--n', '64', '--qber', '0.05',
                     '--frozen-library', str(tmp_path)]) == 1
    assert '✗' in capsys.readouterr().out


def test_cli_reports_configuration_errors(clean_env, tmp_path, capsys):
    assert run.main(['run', '--config', str(tmp_path / 'missing.yaml')]) == 1
    assert '✗ config file not found' in capsys.readouterr().out


def test_cli_provisions_resources(clean_env, tmp_path):
    frozen, ldpc = tmp_path / 'frozen', tmp_path / 'ldpc'
    assert run.main(['construct', '--n', '32', '--qber-list', '0.03,0.05', '--target-fer', '0.05',
                     '--out', str(frozen)]) == 0
    assert (frozen / frozen_file_name(32, 0.05)).exists()
    assert run.main(['registry', '--cols', '16', '--qber', '0.05', '--verify-trials', '0', '--out', str(ldpc)]) == 0
    assert (ldpc / 'registry.yaml').exists()
    assert run.main(['construct', '--n', '32', '--out', str(frozen)]) == 1


def test_cli_campaign_and_trace(clean_env, resources, tmp_path, capsys):
    session = ['--n', '64', '--m', '4', '--d', '8', '--l', '4', '--seed', '3',
               '--frozen-library', resources['frozen_library'],
               '--ldpc-registry', resources['ldpc_registry']]
    assert run.main(['run', *session, '--qber-list', '0.03,0.05', '--trials', '2',
                     '--output', resources['output']]) == 0
    assert Path(resources['output']).exists()
    assert '✓ Results written' in capsys.readouterr().out

    transcript = tmp_path / 'trace.bin'
    assert run.main(['decode-trace', *session, '--qber', '0.05', '--trial-index', '1',
                     '--transcript', str(transcript)]) == 0
    assert transcript.exists()
    assert 'leakage:' in capsys.readouterr().out
