"""
Settings - Environment and campaign configuration.
Precedence, lowest first: built-in defaults, environment (.env supported),
config file (JSON or YAML), command-line overrides.
"""

import math
import os
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

import yaml
from dotenv import load_dotenv
from pydantic import BaseModel, Field, ValidationError, field_validator, model_validator

from ..domain.crc import resolve_spec, spec_for_width
from ..domain.entities import TrialConfig
from ..domain.exceptions import ConfigurationError, InvalidArgumentError
from ..domain.value_objects import CrcSpec, is_power_of_two

MAX_DESK_N = 1 << 24
MAX_DESK_TRIALS = 10000


class Settings(BaseModel):
    """Process-wide settings read from SLA_* environment variables"""
    log_level: str = 'INFO'
    workers: int = Field(default=1, ge=1)
    frozen_library: str = 'resources/frozen'
    ldpc_registry: str = 'resources/ldpc'
    output: str = 'results/campaign.csv'

    @classmethod
    def from_env(cls) -> 'Settings':
        load_dotenv()
        try:
            return cls(
                log_level=os.getenv('SLA_LOG_LEVEL', 'INFO').upper(),
                workers=int(os.getenv('SLA_WORKERS', '1')),
                frozen_library=os.getenv('SLA_FROZEN_LIBRARY', 'resources/frozen'),
                ldpc_registry=os.getenv('SLA_LDPC_REGISTRY', 'resources/ldpc'),
                output=os.getenv('SLA_OUTPUT', 'results/campaign.csv'),
            )
        except (ValueError, ValidationError) as e:
            raise ConfigurationError(f"invalid SLA_* environment setting: {e}") from e


class CampaignConfig(BaseModel):
    """A reconciliation campaign: session shape, QBER grid, trial count and resources"""
    n: int = 1 << 20
    m: int = Field(default=32, ge=1)
    d: int = Field(default=32, ge=4, le=64)
    l: int = Field(default=16, ge=1)
    qber: Optional[float] = Field(default=None, ge=0.0, lt=0.5)
    qber_list: Optional[List[float]] = None
    trials: int = Field(default=500, ge=1)
    seed: Optional[int] = Field(default=1, ge=0, lt=1 << 64)
    frozen_library: str = 'resources/frozen'
    ldpc_registry: str = 'resources/ldpc'
    crc: Optional[Union[str, Dict[str, Any]]] = None
    output: str = 'results/campaign.csv'
    target_fer: float = Field(default=0.01, gt=0.0, lt=1.0)
    fidelity: int = Field(default=256, ge=2)
    max_iters: int = Field(default=100, ge=1)
    design_qber: Optional[float] = Field(default=None, gt=0.0, lt=0.5)
    exact_metric: bool = False
    workers: int = Field(default=1, ge=1)
    long_run: bool = False
    ldpc_margin: float = Field(default=0.0, ge=0.0)

    @field_validator('qber_list')
    @classmethod
    def validate_qber_list(cls, v):
        if v is not None:
            if not v:
                raise ValueError('qber_list is empty')
            if any(not 0.0 <= q < 0.5 for q in v):
                raise ValueError('every qber must lie in [0, 0.5)')
        return v

    @model_validator(mode='after')
    def validate_campaign(self):
        if not is_power_of_two(self.n):
            raise ValueError(f'n={self.n} is not a power of two')
        if self.n % self.m != 0:
            raise ValueError(f'm={self.m} does not divide n={self.n}')
        if self.d < math.log2(self.l):
            raise ValueError(f'd={self.d} is below log2(l)={math.log2(self.l):g}')
        if self.qber is None and self.qber_list is None:
            raise ValueError('either qber or qber_list is required')
        if self.design_qber is None and 0.0 in self.qbers():
            raise ValueError('a noiseless qber needs an explicit design_qber')
        if not self.long_run and (self.n > MAX_DESK_N or self.trials > MAX_DESK_TRIALS):
            raise ValueError(f'n > 2^24 or trials > {MAX_DESK_TRIALS} needs long_run')
        self.crc_spec()
        return self

    def qbers(self) -> List[float]:
        values = self.qber_list if self.qber_list is not None else [self.qber]
        return list(dict.fromkeys(float(q) for q in values))

    def crc_spec(self) -> CrcSpec:
        spec = spec_for_width(self.d) if self.crc is None else resolve_spec(self.crc)
        if spec.width != self.d:
            raise InvalidArgumentError(f'CRC {spec.name or "spec"} is {spec.width} bits wide but d={self.d}')
        return spec

    def trial_config(self, qber: float, trial_index: int = 0) -> TrialConfig:
        return TrialConfig(
            n=self.n, m=self.m, d=self.d, l=self.l, qber=qber,
            design_qber=self.design_qber, seed=self.seed, trial_index=trial_index,
            frozen_library=self.frozen_library, ldpc_registry=self.ldpc_registry,
            crc=self.crc_spec(), target_fer=self.target_fer, max_iters=self.max_iters,
            exact_metric=self.exact_metric, ldpc_margin=self.ldpc_margin,
        )


def read_config_file(path: Union[str, Path]) -> Dict[str, Any]:
    """Parse a JSON or YAML config file into a mapping"""
    try:
        with open(path, 'r', encoding='utf-8') as f:
            data = yaml.safe_load(f)
    except FileNotFoundError as e:
        raise ConfigurationError(f"config file not found: {path}") from e
    except yaml.YAMLError as e:
        raise ConfigurationError(f"cannot parse config file {path}: {e}") from e
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ConfigurationError(f"config file {path} must hold a mapping")
    return data


def load_campaign_config(path: Optional[Union[str, Path]] = None,
                         overrides: Optional[Dict[str, Any]] = None,
                         settings: Optional[Settings] = None) -> CampaignConfig:
    settings = settings or Settings.from_env()
    data: Dict[str, Any] = {
        'frozen_library': settings.frozen_library,
        'ldpc_registry': settings.ldpc_registry,
        'output': settings.output,
        'workers': settings.workers,
    }
    if path is not None:
        data.update(read_config_file(path))
    data.update({k: v for k, v in (overrides or {}).items() if v is not None})
    try:
        return CampaignConfig(**data)
    except ValidationError as e:
        raise ConfigurationError(f"invalid campaign configuration: {e}") from e
    except InvalidArgumentError as e:
        raise ConfigurationError(str(e)) from e
