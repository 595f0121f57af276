"""
File Repositories - Frozen-library files and the alist-backed LDPC registry.
Implementation of repository interfaces using the local filesystem.

Frozen-library file (one per n and QBER, `frozen_n{n}_q{qber:.2f}.lib`):

    n=<int>
    qber=<decimal>
    target_fer=<decimal>
    k=<int>
    <hex of the n-bit information mask, MSB-first, 1 = information>
    pe_bytes=<count>            (optional)
    <count bytes of binary64 little-endian pe values>
"""

import logging
import re
from pathlib import Path
from typing import Dict, List, Optional, Union

import numpy as np
import yaml
from pydantic import ValidationError

from ..domain.entities import FrozenLibrary, FrozenLibraryEntry, library_key
from ..domain.exceptions import ConfigurationError, FormatError
from ..domain.repositories import IFrozenLibraryRepository, ILdpcRegistryRepository
from ..domain.value_objects import BitBlock, BitChannelStats, FrozenVector, ParityCheckMatrix
from .alist import load_alist, write_alist

logger = logging.getLogger(__name__)

_HEADER_KEYS = ('n', 'qber', 'target_fer', 'k')
_FILE_PATTERN = re.compile(r'^frozen_n(\d+)_q(\d+\.\d{2})\.lib$')


def frozen_file_name(n: int, qber: float) -> str:
    return f"frozen_n{n}_q{library_key(qber):.2f}.lib"


def serialize_entry(entry: FrozenLibraryEntry, include_pe: bool = True) -> bytes:
    mask = BitBlock.trusted(entry.frozen.info_mask.astype(np.uint8))
    header = [
        f"n={entry.n}",
        f"qber={library_key(entry.qber):.2f}",
        f"target_fer={entry.target_fer!r}",
        f"k={entry.k}",
        mask.to_bytes().hex(),
    ]
    data = ('\n'.join(header) + '\n').encode('ascii')
    if include_pe and entry.stats is not None:
        pe = entry.stats.pe.astype('<f8').tobytes()
        data += f"pe_bytes={len(pe)}\n".encode('ascii') + pe
    return data


def parse_entry(data: bytes, source: str = "<bytes>") -> FrozenLibraryEntry:
    lines = data.split(b'\n', 5)
    if len(lines) < 5:
        raise FormatError(f"{source}: truncated frozen-library header", line=len(lines))
    values: Dict[str, str] = {}
    for number, (key, raw) in enumerate(zip(_HEADER_KEYS, lines[:4]), start=1):
        text = raw.decode('ascii', errors='replace').strip()
        name, _, value = text.partition('=')
        if name != key or not value:
            raise FormatError(f"{source}: expected '{key}=<value>', found '{text}'", line=number)
        values[key] = value
    try:
        n = int(values['n'])
        qber = float(values['qber'])
        target_fer = float(values['target_fer'])
        k = int(values['k'])
    except ValueError as e:
        raise FormatError(f"{source}: malformed header value: {e}") from e

    hex_mask = lines[4].decode('ascii', errors='replace').strip()
    try:
        packed = bytes.fromhex(hex_mask)
    except ValueError as e:
        raise FormatError(f"{source}: mask is not hexadecimal", line=5) from e
    if len(packed) != (n + 7) // 8:
        raise FormatError(f"{source}: mask has {len(packed)} bytes, n={n} needs {(n + 7) // 8}", line=5)
    mask = np.unpackbits(np.frombuffer(packed, dtype=np.uint8))[:n].astype(bool)
    if int(mask.sum()) != k:
        raise FormatError(f"{source}: header says k={k} but the mask has {int(mask.sum())} information bits", line=4)

    stats = None
    if len(lines) == 6 and lines[5]:
        rest = lines[5]
        declaration, _, payload = rest.partition(b'\n')
        name, _, count = declaration.decode('ascii', errors='replace').partition('=')
        if name != 'pe_bytes' or not count.isdigit():
            raise FormatError(f"{source}: expected 'pe_bytes=<count>'", line=6)
        if int(count) != 8 * n or len(payload) != int(count):
            raise FormatError(f"{source}: pe appendix must hold {8 * n} bytes, found {len(payload)}", line=6)
        pe = np.frombuffer(payload, dtype='<f8').astype(np.float64)
        stats = BitChannelStats(pe=pe, qber=qber, n=n)

    try:
        return FrozenLibraryEntry(qber=qber, target_fer=target_fer,
                                  frozen=FrozenVector.from_info_mask(mask), stats=stats)
    except ValidationError as e:
        raise FormatError(f"{source}: {e}") from e


class FileFrozenLibraryRepository(IFrozenLibraryRepository):
    """Frozen-library files in one directory"""

    def __init__(self, directory: Union[str, Path], include_pe: bool = True):
        self.directory = Path(directory)
        self.include_pe = include_pe

    def save_entry(self, entry: FrozenLibraryEntry) -> str:
        self.directory.mkdir(parents=True, exist_ok=True)
        path = self.directory / frozen_file_name(entry.n, entry.qber)
        path.write_bytes(serialize_entry(entry, self.include_pe))
        logger.info(f"Saved frozen vector n={entry.n} qber={entry.qber:.2f} k={entry.k} to {path}")
        return str(path)

    def save(self, library: FrozenLibrary) -> List[str]:
        return [self.save_entry(library.entries[q]) for q in library.qbers()]

    def find(self, n: int, qber: float) -> Optional[FrozenLibraryEntry]:
        path = self.directory / frozen_file_name(n, qber)
        if not path.exists():
            return None
        return parse_entry(path.read_bytes(), str(path))

    def load(self, n: int) -> FrozenLibrary:
        library = FrozenLibrary(n=n)
        if not self.directory.is_dir():
            return library
        for path in sorted(self.directory.iterdir()):
            match = _FILE_PATTERN.match(path.name)
            if match and int(match.group(1)) == n:
                library.add(parse_entry(path.read_bytes(), str(path)))
        return library


class FileLdpcRegistryRepository(ILdpcRegistryRepository):
    """alist files indexed by `registry.yaml` (file, rate, design threshold, measured fer)"""

    INDEX = 'registry.yaml'

    def __init__(self, directory: Union[str, Path]):
        self.directory = Path(directory)
        self._cache: Optional[List[ParityCheckMatrix]] = None

    def _read_index(self) -> List[dict]:
        index = self.directory / self.INDEX
        if not index.exists():
            return []
        try:
            data = yaml.safe_load(index.read_text(encoding='utf-8')) or {}
        except yaml.YAMLError as e:
            raise ConfigurationError(f"cannot parse {index}: {e}") from e
        codes = data.get('codes', [])
        if not isinstance(codes, list):
            raise ConfigurationError(f"{index}: 'codes' must be a list")
        return codes

    def register(self, code: ParityCheckMatrix, verified_fer: Optional[float] = None) -> str:
        name = code.name or f"ldpc_{code.rows}x{code.cols}"
        path = write_alist(code, self.directory / f"{name}.alist")
        codes = [c for c in self._read_index() if c.get('file') != f"{name}.alist"]
        codes.append({
            'file': f"{name}.alist",
            'rows': code.rows,
            'cols': code.cols,
            'rate': round(code.rate, 6),
            'design_threshold': code.design_threshold,
            'verified_fer': verified_fer,
        })
        codes.sort(key=lambda c: (c['cols'], c['rate'], c['file']))
        (self.directory / self.INDEX).write_text(yaml.safe_dump({'codes': codes}, sort_keys=False),
                                                 encoding='utf-8')
        self._cache = None
        logger.info(f"Registered LDPC code {name} (rate {code.rate:.4f}) at {path}")
        return path

    def find_all(self) -> List[ParityCheckMatrix]:
        if self._cache is None:
            loaded = []
            for record in self._read_index():
                h = load_alist(self.directory / record['file'])
                threshold = record.get('design_threshold')
                loaded.append(h.model_copy(update={'design_threshold': threshold}) if threshold else h)
            self._cache = loaded
        return list(self._cache)

    def find_by_columns(self, cols: int) -> List[ParityCheckMatrix]:
        return [h for h in self.find_all() if h.cols == cols]
