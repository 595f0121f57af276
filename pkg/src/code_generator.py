"""
LDPC Code Generator for the Acknowledgment Phase
Builds column-regular parity-check matrices by progressive edge growth (PEG).

Edges are placed one column at a time. The first edge of a column goes to a
least-loaded check; every further edge goes to a check the column cannot reach
yet in the Tanner graph built so far or, once all checks are reachable, to a
least-loaded check at the greatest distance. Each new edge therefore closes
the longest cycle available.
"""

import logging
import math
from typing import Optional

import numpy as np
import scipy.sparse as sp
from numba import njit

try:
    from src.domain.analysis import binary_entropy
    from src.domain.exceptions import InvalidArgumentError
    from src.domain.value_objects import ParityCheckMatrix
except ImportError:
    from .domain.analysis import binary_entropy
    from .domain.exceptions import InvalidArgumentError
    from .domain.value_objects import ParityCheckMatrix

logger = logging.getLogger(__name__)


def rows_for_qber(cols: int, qber: float, inefficiency: float) -> int:
    """Check count giving syndrome length ≈ inefficiency·H2(qber)·cols"""
    rows = math.ceil(cols * inefficiency * binary_entropy(qber))
    if rows >= cols:
        raise InvalidArgumentError(f"qber={qber} at inefficiency {inefficiency} leaves no positive rate")
    return rows


@njit(cache=True)
def _least_loaded(rows, degree, order, shift, marks, stamp, want_marked):
    """Lowest-degree check among those whose mark equals (or differs from) stamp"""
    best, best_degree = -1, 1 << 62
    for t in range(rows):
        c = order[(shift + t) % rows]
        if (marks[c] == stamp) == want_marked and degree[c] < best_degree:
            best, best_degree = c, degree[c]
    return best


@njit(cache=True)
def peg_edges(cols, rows, column_weight, order, shifts):
    """Check index of every (column, edge) slot, shape (cols, column_weight)"""
    var_checks = np.full((cols, column_weight), -1, dtype=np.int64)
    capacity = 2 * ((cols * column_weight + rows - 1) // rows) + column_weight
    check_vars = np.full((rows, capacity), -1, dtype=np.int64)
    degree = np.zeros(rows, dtype=np.int64)
    check_seen = np.full(rows, -1, dtype=np.int64)
    layer_seen = np.full(rows, -1, dtype=np.int64)
    var_seen = np.full(cols, -1, dtype=np.int64)
    frontier_c = np.empty(rows, dtype=np.int64)
    frontier_v = np.empty(cols, dtype=np.int64)
    next_v = np.empty(cols, dtype=np.int64)
    stamp = 0

    for j in range(cols):
        for k in range(column_weight):
            stamp += 1
            if k == 0:
                chosen = _least_loaded(rows, degree, order, shifts[j], check_seen, stamp, False)
            else:
                var_seen[j] = stamp
                frontier_v[0] = j
                nv, nc, reached = 1, 0, 0
                while True:
                    nc = 0
                    for t in range(nv):
                        v = frontier_v[t]
                        for e in range(column_weight):
                            c = var_checks[v, e]
                            if c >= 0 and check_seen[c] != stamp:
                                check_seen[c] = stamp
                                frontier_c[nc] = c
                                nc += 1
                    reached += nc
                    if nc == 0 or reached == rows:
                        break
                    nv = 0
                    for t in range(nc):
                        c = frontier_c[t]
                        for e in range(degree[c]):
                            v = check_vars[c, e]
                            if var_seen[v] != stamp:
                                var_seen[v] = stamp
                                next_v[nv] = v
                                nv += 1
                    if nv == 0:
                        break
                    frontier_v[:nv] = next_v[:nv]
                if reached == rows:
                    for t in range(nc):
                        layer_seen[frontier_c[t]] = stamp
                    chosen = _least_loaded(rows, degree, order, shifts[j], layer_seen, stamp, True)
                else:
                    chosen = _least_loaded(rows, degree, order, shifts[j], check_seen, stamp, False)

            if degree[chosen] == check_vars.shape[1]:
                grown = np.full((rows, 2 * check_vars.shape[1]), -1, dtype=np.int64)
                grown[:, :check_vars.shape[1]] = check_vars
                check_vars = grown
            var_checks[j, k] = chosen
            check_vars[chosen, degree[chosen]] = j
            degree[chosen] += 1
    return var_checks


def build_peg_code(cols: int, rows: int, column_weight: int = 3, seed: int = 0,
                   name: str = "", design_threshold: Optional[float] = None) -> ParityCheckMatrix:
    """Column-weight-w PEG matrix; seed only breaks ties between equally loaded checks"""
    if rows < column_weight:
        raise InvalidArgumentError(f"{rows} rows cannot carry columns of weight {column_weight}")
    if rows >= cols:
        raise InvalidArgumentError(f"a {rows}x{cols} matrix has no positive rate")
    rng = np.random.default_rng(seed)
    order = rng.permutation(rows).astype(np.int64)
    shifts = rng.integers(0, rows, cols).astype(np.int64)
    var_checks = peg_edges(cols, rows, column_weight, order, shifts)

    code = ParityCheckMatrix(rows=rows, cols=cols, check_index=var_checks.reshape(-1),
                             variable_index=np.repeat(np.arange(cols), column_weight),
                             design_threshold=design_threshold, name=name)
    logger.debug(f"Built {rows}x{cols} column-weight-{column_weight} PEG code (seed {seed}), "
                 f"{count_four_cycles(code)} four-cycles")
    return code


def count_four_cycles(h: ParityCheckMatrix) -> int:
    """Length-4 cycles: pairs of columns sharing two checks, counted per shared pair"""
    overlap = sp.triu((h.matrix.T.astype(np.int64) @ h.matrix.astype(np.int64)).tocsr(), k=1).tocoo()
    shared = overlap.data[overlap.data >= 2]
    return int((shared * (shared - 1) // 2).sum())
