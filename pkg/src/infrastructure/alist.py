"""
alist - Plain-text interchange format for sparse parity-check matrices.

    cols rows
    max_col_degree max_row_degree
    <cols column degrees>
    <rows row degrees>
    <one line per column: 1-based check indices, zero padded>
    <one line per row: 1-based variable indices, zero padded>
"""

import logging
from pathlib import Path
from typing import List, Set, Tuple, Union

import numpy as np
from pydantic import ValidationError

from ..domain.exceptions import FormatError
from ..domain.value_objects import ParityCheckMatrix

logger = logging.getLogger(__name__)


def _numbered_lines(text: str) -> List[Tuple[int, List[int]]]:
    lines = []
    for number, raw in enumerate(text.splitlines(), start=1):
        if not raw.strip():
            continue
        try:
            lines.append((number, [int(token) for token in raw.split()]))
        except ValueError as e:
            raise FormatError(f"non-integer token in '{raw.strip()}'", line=number) from e
    return lines


def _index_list(entry: Tuple[int, List[int]], degree: int, bound: int, what: str) -> List[int]:
    number, values = entry
    indices = [v for v in values if v != 0]
    if len(indices) != degree:
        raise FormatError(f"{what} lists {len(indices)} entries but its degree is {degree}", line=number)
    if any(v < 1 or v > bound for v in indices):
        raise FormatError(f"{what} has an index outside [1, {bound}]", line=number)
    if len(set(indices)) != len(indices):
        raise FormatError(f"duplicate edge in {what}", line=number)
    return [v - 1 for v in indices]


def parse_alist(text: str, name: str = "") -> ParityCheckMatrix:
    lines = _numbered_lines(text)
    if len(lines) < 4:
        raise FormatError("alist needs at least the four header lines", line=len(lines) + 1 if lines else 1)

    header_line, header = lines[0]
    if len(header) != 2 or min(header) <= 0:
        raise FormatError("first line must be 'cols rows'", line=header_line)
    cols, rows = header
    degree_line, degrees = lines[1]
    if len(degrees) != 2:
        raise FormatError("second line must hold the two maximum degrees", line=degree_line)

    col_line, col_degrees = lines[2]
    row_line, row_degrees = lines[3]
    if len(col_degrees) != cols:
        raise FormatError(f"expected {cols} column degrees, found {len(col_degrees)}", line=col_line)
    if len(row_degrees) != rows:
        raise FormatError(f"expected {rows} row degrees, found {len(row_degrees)}", line=row_line)
    if max(col_degrees) != degrees[0] or max(row_degrees) != degrees[1]:
        raise FormatError("maximum degrees disagree with the degree lists", line=degree_line)
    if len(lines) != 4 + cols + rows:
        last = lines[-1][0]
        raise FormatError(f"expected {cols + rows} index lines, found {len(lines) - 4}", line=last)

    column_edges: Set[Tuple[int, int]] = set()
    for j in range(cols):
        for check in _index_list(lines[4 + j], col_degrees[j], rows, f"column {j + 1}"):
            column_edges.add((check, j))
    row_edges: Set[Tuple[int, int]] = set()
    for i in range(rows):
        for variable in _index_list(lines[4 + cols + i], row_degrees[i], cols, f"row {i + 1}"):
            row_edges.add((i, variable))
    if column_edges != row_edges:
        raise FormatError("column and row index lists describe different matrices", line=lines[4 + cols][0])

    edges = np.array(sorted(column_edges), dtype=np.int64)
    try:
        return ParityCheckMatrix(rows=rows, cols=cols, check_index=edges[:, 0],
                                 variable_index=edges[:, 1], name=name)
    except ValidationError as e:
        raise FormatError(f"invalid parity-check matrix: {e}") from e


def load_alist(path: Union[str, Path]) -> ParityCheckMatrix:
    path = Path(path)
    try:
        text = path.read_text(encoding='utf-8')
    except FileNotFoundError as e:
        raise FormatError(f"alist file not found: {path}") from e
    if not text.strip():
        raise FormatError(f"alist file {path} is empty", line=1)
    h = parse_alist(text, name=path.stem)
    logger.debug(f"Loaded {h.rows}x{h.cols} parity-check matrix from {path}")
    return h


def format_alist(h: ParityCheckMatrix) -> str:
    col_lists = [[] for _ in range(h.cols)]
    row_lists = [[] for _ in range(h.rows)]
    for check, variable in zip(h.check_index.tolist(), h.variable_index.tolist()):
        col_lists[variable].append(check + 1)
        row_lists[check].append(variable + 1)
    col_degrees = [len(c) for c in col_lists]
    row_degrees = [len(r) for r in row_lists]
    max_col, max_row = max(col_degrees), max(row_degrees)

    out = [f"{h.cols} {h.rows}", f"{max_col} {max_row}",
           ' '.join(map(str, col_degrees)), ' '.join(map(str, row_degrees))]
    out += [' '.join(map(str, sorted(c) + [0] * (max_col - len(c)))) for c in col_lists]
    out += [' '.join(map(str, sorted(r) + [0] * (max_row - len(r)))) for r in row_lists]
    return '\n'.join(out) + '\n'


def write_alist(h: ParityCheckMatrix, path: Union[str, Path]) -> str:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(format_alist(h), encoding='utf-8')
    return str(path)
