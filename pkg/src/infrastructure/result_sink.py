"""
Result Sink - Campaign rows as CSV with a JSON mirror.
"""

import logging
from pathlib import Path
from typing import List, Union

import pandas as pd

from ..domain.entities import AggregateStats
from ..domain.repositories import IResultSink

logger = logging.getLogger(__name__)

CSV_COLUMNS = [
    'qber', 'n', 'm', 'd', 'l', 'trials', 'k', 'f', 'fer',
    'fer_ci_low', 'fer_ci_high', 'gamma', 'mean_r', 'leak_bits_total', 'crc_false_passes',
]


def stats_frame(stats: AggregateStats) -> pd.DataFrame:
    return pd.DataFrame([row.model_dump() for row in stats.rows], columns=CSV_COLUMNS)


class CsvResultSink(IResultSink):
    """Writes `<output>.csv` and, optionally, `<output>.json` next to it"""

    def __init__(self, path: Union[str, Path], json_mirror: bool = True):
        self.path = Path(path)
        self.json_mirror = json_mirror

    def write(self, stats: AggregateStats) -> List[str]:
        self.path.parent.mkdir(parents=True, exist_ok=True)
        stats_frame(stats).to_csv(self.path, index=False, float_format='%.10g')
        written = [str(self.path)]
        if self.json_mirror:
            mirror = self.path.with_suffix('.json')
            mirror.write_text(stats.model_dump_json(indent=2), encoding='utf-8')
            written.append(str(mirror))
        logger.info(f"Wrote {len(stats.rows)} campaign rows to {', '.join(written)}")
        return written
