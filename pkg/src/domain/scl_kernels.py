"""
SCL Kernels - numba-compiled successive cancellation list decoding.

Layer λ of a path holds 2^(M−λ) soft values and partial-sum pairs, one slot
per layer and path, shared between paths until written (lazy copying).
Layer 0 is the channel LLR vector, common to every path. Decisions are kept
as per-phase history (parent list position, bit) so whole paths are only
materialized by traceback.
"""

import math

import numpy as np
from numba import njit


@njit(cache=True)
def f_node(a, b, exact):
    """LLR of a ⊕ b"""
    sign = 1.0 if (a >= 0.0) == (b >= 0.0) else -1.0
    value = sign * min(abs(a), abs(b))
    if exact:
        value += math.log1p(math.exp(-abs(a + b))) - math.log1p(math.exp(-abs(a - b)))
    return value


@njit(cache=True)
def g_node(a, b, u):
    return b + (1.0 - 2.0 * u) * a


@njit(cache=True)
def path_penalty(llr, bit, exact):
    """Increase of −ln Pr when deciding `bit` against soft value `llr`"""
    if exact:
        x = llr if bit == 0 else -llr
        if x > 0.0:
            return math.log1p(math.exp(-x))
        return -x + math.log1p(math.exp(x))
    if (llr >= 0.0 and bit == 1) or (llr < 0.0 and bit == 0):
        return abs(llr)
    return 0.0


@njit(cache=True)
def _trailing_zeros(phi, depth):
    if phi == 0:
        return depth
    count = 0
    while phi & 1 == 0:
        phi >>= 1
        count += 1
    return count


@njit(cache=True)
def _writable_slot(lam, path, P, C, p_off, c_off, sizes, path_to_slot, refcount, free_slots, free_top):
    slot = path_to_slot[lam, path]
    if refcount[lam, slot] == 1:
        return slot
    free_top[lam] -= 1
    fresh = free_slots[lam, free_top[lam]]
    size = sizes[lam]
    src, dst = p_off[lam] + slot * size, p_off[lam] + fresh * size
    P[dst:dst + size] = P[src:src + size]
    src, dst = c_off[lam] + slot * 2 * size, c_off[lam] + fresh * 2 * size
    C[dst:dst + 2 * size] = C[src:src + 2 * size]
    refcount[lam, slot] -= 1
    refcount[lam, fresh] = 1
    path_to_slot[lam, path] = fresh
    return fresh


@njit(cache=True)
def _clone_path(path, depth, path_to_slot, refcount, free_paths, free_path_top):
    free_path_top[0] -= 1
    twin = free_paths[free_path_top[0]]
    for lam in range(1, depth + 1):
        slot = path_to_slot[lam, path]
        path_to_slot[lam, twin] = slot
        refcount[lam, slot] += 1
    return twin


@njit(cache=True)
def _kill_path(path, depth, path_to_slot, refcount, free_slots, free_top, free_paths, free_path_top):
    for lam in range(1, depth + 1):
        slot = path_to_slot[lam, path]
        refcount[lam, slot] -= 1
        if refcount[lam, slot] == 0:
            free_slots[lam, free_top[lam]] = slot
            free_top[lam] += 1
    free_paths[free_path_top[0]] = path
    free_path_top[0] += 1


@njit(cache=True)
def _calc_p(phi, path, depth, P, C, p_off, c_off, sizes, path_to_slot, refcount, free_slots, free_top, exact):
    first = max(1, depth - _trailing_zeros(phi, depth))
    for lam in range(first, depth + 1):
        phase = phi >> (depth - lam)
        slot = _writable_slot(lam, path, P, C, p_off, c_off, sizes, path_to_slot, refcount, free_slots, free_top)
        size = sizes[lam]
        out = p_off[lam] + slot * size
        src = p_off[lam - 1] + path_to_slot[lam - 1, path] * sizes[lam - 1]
        if phase & 1 == 0:
            for beta in range(size):
                P[out + beta] = f_node(P[src + 2 * beta], P[src + 2 * beta + 1], exact)
        else:
            cbase = c_off[lam] + slot * 2 * size
            for beta in range(size):
                P[out + beta] = g_node(P[src + 2 * beta], P[src + 2 * beta + 1], C[cbase + 2 * beta])


@njit(cache=True)
def _update_c(phi, path, depth, P, C, p_off, c_off, sizes, path_to_slot, refcount, free_slots, free_top):
    lam = depth
    phase = phi
    while phase & 1 == 1 and lam >= 2:
        psi = phase >> 1
        column = psi & 1
        size = sizes[lam]
        src = c_off[lam] + path_to_slot[lam, path] * 2 * size
        slot = _writable_slot(lam - 1, path, P, C, p_off, c_off, sizes, path_to_slot, refcount, free_slots, free_top)
        dst = c_off[lam - 1] + slot * 2 * sizes[lam - 1]
        for beta in range(size):
            c0 = C[src + 2 * beta]
            c1 = C[src + 2 * beta + 1]
            C[dst + 2 * (2 * beta) + column] = c0 ^ c1
            C[dst + 2 * (2 * beta + 1) + column] = c1
        lam -= 1
        phase = psi


@njit(cache=True)
def _set_leaf(phi, path, bit, depth, P, C, p_off, c_off, sizes, path_to_slot, refcount, free_slots, free_top):
    slot = _writable_slot(depth, path, P, C, p_off, c_off, sizes, path_to_slot, refcount, free_slots, free_top)
    C[c_off[depth] + slot * 2 + (phi & 1)] = bit


@njit(cache=True)
def advance(start, stop, depth, list_size, info, P, C, p_off, c_off, sizes,
            path_to_slot, refcount, free_slots, free_top, free_paths, free_path_top,
            order, count, metrics, hist_parent, hist_bit, exact):
    """Decode bit indices [start, stop) for every path on the list"""
    leaf_llr = np.empty(list_size, dtype=np.float64)
    cand = np.empty(2 * list_size, dtype=np.float64)
    keep = np.zeros(2 * list_size, dtype=np.uint8)
    twin = np.empty(list_size, dtype=np.int32)
    new_order = np.empty(list_size, dtype=np.int32)
    new_parent = np.empty(list_size, dtype=np.int32)
    new_bit = np.empty(list_size, dtype=np.uint8)

    for phi in range(start, stop):
        active = count[0]
        for i in range(active):
            path = order[i]
            _calc_p(phi, path, depth, P, C, p_off, c_off, sizes, path_to_slot, refcount,
                    free_slots, free_top, exact)
            leaf_llr[i] = P[p_off[depth] + path_to_slot[depth, path]]

        if info[phi] == 0:
            for i in range(active):
                path = order[i]
                metrics[path] += path_penalty(leaf_llr[i], 0, exact)
                _set_leaf(phi, path, 0, depth, P, C, p_off, c_off, sizes, path_to_slot,
                          refcount, free_slots, free_top)
                hist_parent[phi, i] = i
                hist_bit[phi, i] = 0
        else:
            for i in range(active):
                base = metrics[order[i]]
                cand[i] = base + path_penalty(leaf_llr[i], 0, exact)
                cand[active + i] = base + path_penalty(leaf_llr[i], 1, exact)
            total = 2 * active
            if total <= list_size:
                for j in range(total):
                    keep[j] = 1
            else:
                for j in range(total):
                    keep[j] = 0
                ranked = np.argsort(cand[:total], kind='mergesort')
                for j in range(list_size):
                    keep[ranked[j]] = 1

            for i in range(active):
                if keep[i] == 0 and keep[active + i] == 0:
                    _kill_path(order[i], depth, path_to_slot, refcount, free_slots, free_top,
                               free_paths, free_path_top)
            for i in range(active):
                if keep[i] == 1 and keep[active + i] == 1:
                    twin[i] = _clone_path(order[i], depth, path_to_slot, refcount, free_paths, free_path_top)

            kept = 0
            for i in range(active):
                if keep[i] == 1:
                    new_order[kept] = order[i]
                    new_parent[kept] = i
                    new_bit[kept] = 0
                    kept += 1
            for i in range(active):
                if keep[active + i] == 1:
                    new_order[kept] = twin[i] if keep[i] == 1 else order[i]
                    new_parent[kept] = i
                    new_bit[kept] = 1
                    kept += 1

            for j in range(kept):
                path = new_order[j]
                bit = new_bit[j]
                metrics[path] = cand[bit * active + new_parent[j]]
                _set_leaf(phi, path, bit, depth, P, C, p_off, c_off, sizes, path_to_slot,
                          refcount, free_slots, free_top)
                order[j] = path
                hist_parent[phi, j] = new_parent[j]
                hist_bit[phi, j] = bit
            count[0] = kept

        if phi & 1 == 1:
            for i in range(count[0]):
                _update_c(phi, order[i], depth, P, C, p_off, c_off, sizes, path_to_slot,
                          refcount, free_slots, free_top)


@njit(cache=True)
def traceback(hist_parent, hist_bit, count, start, stop):
    """Bits [start, stop) of each listed path and its list position before `start`"""
    bits = np.empty((count, stop - start), dtype=np.uint8)
    ancestors = np.empty(count, dtype=np.int64)
    for j in range(count):
        position = j
        for phi in range(stop - 1, start - 1, -1):
            bits[j, phi - start] = hist_bit[phi, position]
            position = hist_parent[phi, position]
        ancestors[j] = position
    return bits, ancestors


class ListDecoderState:
    """Buffers of one list decoding run; owned by a single decode call"""

    def __init__(self, llr: np.ndarray, info_mask: np.ndarray, list_size: int, exact: bool = False):
        n = llr.shape[0]
        depth = n.bit_length() - 1
        self.n = n
        self.depth = depth
        self.list_size = list_size
        self.exact = exact
        self.info = np.ascontiguousarray(info_mask, dtype=np.uint8)

        self.sizes = np.array([1 << (depth - lam) for lam in range(depth + 1)], dtype=np.int64)
        slots = np.array([1] + [list_size] * depth, dtype=np.int64)
        self.p_off = np.zeros(depth + 1, dtype=np.int64)
        self.c_off = np.zeros(depth + 1, dtype=np.int64)
        for lam in range(1, depth + 1):
            self.p_off[lam] = self.p_off[lam - 1] + slots[lam - 1] * self.sizes[lam - 1]
            self.c_off[lam] = self.c_off[lam - 1] + slots[lam - 1] * 2 * self.sizes[lam - 1]
        self.P = np.zeros(int(self.p_off[-1] + list_size * self.sizes[-1]), dtype=np.float64)
        self.C = np.zeros(int(self.c_off[-1] + list_size * 2 * self.sizes[-1]), dtype=np.uint8)
        self.P[:n] = llr

        self.path_to_slot = np.zeros((depth + 1, list_size), dtype=np.int64)
        self.refcount = np.zeros((depth + 1, list_size), dtype=np.int64)
        self.free_slots = np.tile(np.arange(list_size - 1, -1, -1, dtype=np.int64), (depth + 1, 1))
        self.free_top = np.full(depth + 1, list_size, dtype=np.int64)
        self.free_paths = np.arange(list_size - 1, -1, -1, dtype=np.int64)
        self.free_path_top = np.array([list_size - 1], dtype=np.int64)
        # path 0 owns slot 0 of every layer
        for lam in range(1, depth + 1):
            self.free_top[lam] -= 1
            self.path_to_slot[lam, 0] = 0
            self.refcount[lam, 0] = 1
        self.order = np.zeros(list_size, dtype=np.int64)
        self.count = np.array([1], dtype=np.int64)
        self.metrics = np.zeros(list_size, dtype=np.float64)
        self.hist_parent = np.zeros((n, list_size), dtype=np.int32)
        self.hist_bit = np.zeros((n, list_size), dtype=np.uint8)

    def advance(self, start: int, stop: int) -> None:
        advance(start, stop, self.depth, self.list_size, self.info, self.P, self.C, self.p_off,
                self.c_off, self.sizes, self.path_to_slot, self.refcount, self.free_slots,
                self.free_top, self.free_paths, self.free_path_top, self.order, self.count,
                self.metrics, self.hist_parent, self.hist_bit, self.exact)

    def traceback(self, start: int, stop: int):
        return traceback(self.hist_parent, self.hist_bit, int(self.count[0]), start, stop)

    def listed_metrics(self) -> np.ndarray:
        """Metrics in list order"""
        return self.metrics[self.order[:int(self.count[0])]]
