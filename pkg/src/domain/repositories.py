"""
Repository Interfaces (Ports) - Abstract interfaces for reconciliation artifacts.
Following Domain-Driven Design and Hexagonal Architecture principles.
"""

from abc import ABC, abstractmethod
from typing import List, Optional, Tuple

from .entities import (
    AckMessage, AggregateStats, ForwardMessage, FrozenLibrary, FrozenLibraryEntry
)
from .value_objects import ParityCheckMatrix


class IFrozenLibraryRepository(ABC):
    """Interface for frozen-vector library persistence"""

    @abstractmethod
    def save(self, library: FrozenLibrary) -> List[str]:
        """Persist every entry of a library, returning the written locations"""
        pass

    @abstractmethod
    def save_entry(self, entry: FrozenLibraryEntry) -> str:
        """Persist a single entry"""
        pass

    @abstractmethod
    def find(self, n: int, qber: float) -> Optional[FrozenLibraryEntry]:
        """Find the entry for a block length and QBER grid point"""
        pass

    @abstractmethod
    def load(self, n: int) -> FrozenLibrary:
        """Load every stored entry of a block length"""
        pass


class ILdpcRegistryRepository(ABC):
    """Interface for the registry of acknowledgment-phase LDPC codes"""

    @abstractmethod
    def register(self, code: ParityCheckMatrix, verified_fer: Optional[float] = None) -> str:
        """Store a code and index it, with the frame error rate measured at its threshold if known"""
        pass

    @abstractmethod
    def find_all(self) -> List[ParityCheckMatrix]:
        """Every registered code"""
        pass

    @abstractmethod
    def find_by_columns(self, cols: int) -> List[ParityCheckMatrix]:
        """Registered codes for sub-blocks of `cols` bits"""
        pass


class ITranscriptRepository(ABC):
    """Interface for session transcript dumps"""

    @abstractmethod
    def dump(self, forward: ForwardMessage, ack: AckMessage) -> str:
        """Write both messages of a session"""
        pass

    @abstractmethod
    def load(self) -> Tuple[ForwardMessage, AckMessage]:
        """Read both messages back"""
        pass


class IResultSink(ABC):
    """Interface for campaign result output"""

    @abstractmethod
    def write(self, stats: AggregateStats) -> List[str]:
        """Write the per-QBER rows of a campaign"""
        pass
