"""Compiled permutation kernels.

For a permutation ``pi`` the engine evaluates, for every centered matrix
``M_l`` in a stack,

    S_l(pi) = sum_ij K[pi(i), pi(j)] * M_l[i, j]

using only the upper triangle (off-diagonal weights are pre-doubled, which
is exact in floating point). Each permutation is accumulated sequentially
by a single thread, so the value does not depend on how permutations are
distributed over workers.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor

import numpy as np
from numba import njit

from .rng import GOLDEN, PERMUTATION_DOMAIN, check_seed, mix64

CHUNK = 512

_U30 = np.uint64(30)
_U27 = np.uint64(27)
_U31 = np.uint64(31)
_U32 = np.uint64(32)
_C1 = np.uint64(0xBF58476D1CE4E5B9)
_C2 = np.uint64(0x94D049BB133111EB)
_GOLDEN = np.uint64(GOLDEN)
_LOW32 = np.uint64(0xFFFFFFFF)
_TWO32 = np.uint64(1 << 32)


@njit(cache=True, nogil=True)
def _mix(z):
    z = (z ^ (z >> _U30)) * _C1
    z = (z ^ (z >> _U27)) * _C2
    return z ^ (z >> _U31)


@njit(cache=True, nogil=True)
def _shuffle(key, index, perm):
    n = perm.shape[0]
    state = _mix(key + np.uint64(index + 1) * _GOLDEN)
    for i in range(n):
        perm[i] = i
    for i in range(n - 1, 0, -1):
        m = np.uint64(i + 1)
        state = state + _GOLDEN
        prod = (_mix(state) >> _U32) * m
        low = prod & _LOW32
        if low < m:
            threshold = (_TWO32 - m) % m
            while low < threshold:
                state = state + _GOLDEN
                prod = (_mix(state) >> _U32) * m
                low = prod & _LOW32
        j = np.int64(prod >> _U32)
        t = perm[i]
        perm[i] = perm[j]
        perm[j] = t


@njit(cache=True, nogil=True)
def _accumulate(k, w, perm, out, kp):
    n = k.shape[0]
    for i in range(n):
        row = k[perm[i]]
        dst = kp[i]
        for j in range(n):
            dst[j] = row[perm[j]]
    for l in range(w.shape[0]):
        s = 0.0
        for i in range(n):
            wl = w[l, i]
            kr = kp[i]
            # four fixed partial sums: vectorizable and order-deterministic
            a0 = 0.0
            a1 = 0.0
            a2 = 0.0
            a3 = 0.0
            j = i
            while j + 3 < n:
                a0 += kr[j] * wl[j]
                a1 += kr[j + 1] * wl[j + 1]
                a2 += kr[j + 2] * wl[j + 2]
                a3 += kr[j + 3] * wl[j + 3]
                j += 4
            while j < n:
                a0 += kr[j] * wl[j]
                j += 1
            s += (a0 + a1) + (a2 + a3)
        out[l] = s


@njit(cache=True, nogil=True)
def _random_block(k, w, key, start, stop, out):
    n = k.shape[0]
    perm = np.empty(n, dtype=np.int64)
    kp = np.empty((n, n))
    for b in range(start, stop):
        _shuffle(key, b, perm)
        _accumulate(k, w, perm, out[b - start], kp)


@njit(cache=True, nogil=True)
def _explicit_block(k, w, perms, out):
    n = k.shape[0]
    kp = np.empty((n, n))
    for b in range(perms.shape[0]):
        _accumulate(k, w, perms[b], out[b], kp)


@njit(cache=True, nogil=True)
def _shuffle_block(key, start, stop, out):
    for b in range(start, stop):
        _shuffle(key, b, out[b - start])


def stream_key(seed: int) -> np.uint64:
    return np.uint64(mix64(check_seed(seed) ^ PERMUTATION_DOMAIN))


def upper_weights(ms: list[np.ndarray]) -> np.ndarray:
    """Stack centered matrices as ``(L, n, n)`` with doubled strict upper triangle."""
    n = ms[0].shape[0]
    w = np.zeros((len(ms), n, n))
    iu = np.triu_indices(n, 1)
    for l, m in enumerate(ms):
        w[l][iu] = 2.0 * m[iu]
        np.fill_diagonal(w[l], np.diag(m))
    return w


def _map_chunks(fn, total: int, workers: int) -> None:
    bounds = [(s, min(s + CHUNK, total)) for s in range(0, total, CHUNK)]
    if workers <= 1 or len(bounds) == 1:
        for s, e in bounds:
            fn(s, e)
        return
    with ThreadPoolExecutor(max_workers=workers) as pool:
        list(pool.map(lambda se: fn(*se), bounds))


def random_sums(k: np.ndarray, w: np.ndarray, seed: int, count: int, workers: int = 1) -> np.ndarray:
    """Raw sums for permutations ``0 .. count-1`` of stream ``seed``; shape ``(count, L)``."""
    k = np.ascontiguousarray(k, dtype=np.float64)
    out = np.empty((count, w.shape[0]))
    key = stream_key(seed)

    def run(s, e):
        _random_block(k, w, key, s, e, out[s:e])

    _map_chunks(run, count, workers)
    return out


def explicit_sums(k: np.ndarray, w: np.ndarray, perms: np.ndarray, workers: int = 1) -> np.ndarray:
    """Raw sums for the rows of an explicit ``(count, n)`` permutation array."""
    k = np.ascontiguousarray(k, dtype=np.float64)
    perms = np.ascontiguousarray(perms, dtype=np.int64)
    out = np.empty((perms.shape[0], w.shape[0]))

    def run(s, e):
        _explicit_block(k, w, perms[s:e], out[s:e])

    _map_chunks(run, perms.shape[0], workers)
    return out


def permutations_from_stream(seed: int, n: int, count: int, start: int = 0) -> np.ndarray:
    """Materialize permutations ``start .. start+count-1`` (diagnostics and tests)."""
    out = np.empty((count, n), dtype=np.int64)
    _shuffle_block(stream_key(seed), start, start + count, out)
    return out
