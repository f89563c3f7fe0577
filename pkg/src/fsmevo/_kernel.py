"""Compiled evolution inner loop.

Bit-for-bit equivalent to the pure-Python path in :mod:`fsmevo.evolve`:
same xoshiro256** stream, same draw order (initial genes, then per
offspring the position/value pairs of each mutation, then one bounded
draw only when several offspring tie for best), same selection rule.
The equivalence is asserted by the test suite over whole runs.
"""

from __future__ import annotations

import numpy as np
from numba import njit

_U = np.uint64


@njit(cache=True, inline="always")
def _next_u64(state):
    s1 = state[1]
    x = s1 * _U(5)
    result = ((x << _U(7)) | (x >> _U(57))) * _U(9)
    t = s1 << _U(17)
    state[2] ^= state[0]
    state[3] ^= state[1]
    state[1] ^= state[2]
    state[0] ^= state[3]
    state[2] ^= t
    state[3] = (state[3] << _U(45)) | (state[3] >> _U(19))
    return result


@njit(cache=True, inline="always")
def _randbelow(state, n):
    return np.int64(_next_u64(state) % _U(n))


@njit(cache=True)
def _seed_state(seed):
    state = np.empty(4, dtype=np.uint64)
    x = _U(seed)
    for i in range(4):
        x = x + _U(0x9E3779B97F4A7C15)
        z = (x ^ (x >> _U(30))) * _U(0xBF58476D1CE4E5B9)
        z = (z ^ (z >> _U(27))) * _U(0x94D049BB133111EB)
        state[i] = z ^ (z >> _U(31))
    return state


@njit(cache=True, inline="always")
def _popcount(x):
    x = x - ((x >> _U(1)) & _U(0x5555555555555555))
    x = (x & _U(0x3333333333333333)) + ((x >> _U(2)) & _U(0x3333333333333333))
    x = (x + (x >> _U(4))) & _U(0x0F0F0F0F0F0F0F0F)
    return np.int64((x * _U(0x0101010101010101)) >> _U(56))


@njit(cache=True)
def _mismatches(genes, n_i, n_o, m, needed, vals, input_words, desired_words, care_words):
    # backward reachability from the output genes
    for j in range(m):
        needed[j] = False
    for t in range(n_o):
        a = genes[3 * m + t]
        if a >= n_i:
            needed[a - n_i] = True
    for j in range(m - 1, -1, -1):
        if needed[j]:
            c1 = genes[3 * j + 1]
            c2 = genes[3 * j + 2]
            if c1 >= n_i:
                needed[c1 - n_i] = True
            if c2 >= n_i:
                needed[c2 - n_i] = True
    mm = np.int64(0)
    words = input_words.shape[1]
    for w in range(words):
        for v in range(n_i):
            vals[v] = input_words[v, w]
        for j in range(m):
            if needed[j]:
                b = 3 * j
                x = vals[genes[b + 1]]
                y = vals[genes[b + 2]]
                if genes[b] == 0:
                    vals[n_i + j] = ~(x & y)
                else:
                    vals[n_i + j] = ~(x | y)
        for t in range(n_o):
            diff = (vals[genes[3 * m + t]] ^ desired_words[t, w]) & care_words[t, w]
            mm += _popcount(diff)
    return mm


@njit(cache=True)
def run_evolution(
    seed,
    lam,
    max_generations,
    target,
    stride,
    stride_cap,
    k_mutations,
    strict,
    ranges,
    n_i,
    n_o,
    m,
    input_words,
    desired_words,
    care_words,
):
    state = _seed_state(seed)
    gene_count = ranges.shape[0]
    parent = np.empty(gene_count, dtype=np.int64)
    for i in range(gene_count):
        parent[i] = _randbelow(state, ranges[i])

    needed = np.zeros(max(m, 1), dtype=np.bool_)
    vals = np.zeros(n_i + m, dtype=np.uint64)
    parent_mm = _mismatches(
        parent, n_i, n_o, m, needed, vals, input_words, desired_words, care_words
    )

    trace_capacity = parent_mm + 2 + stride_cap
    trace_gens = np.empty(trace_capacity, dtype=np.int64)
    trace_mms = np.empty(trace_capacity, dtype=np.int64)
    trace_gens[0] = 0
    trace_mms[0] = parent_mm
    trace_len = 1
    stride_used = 0

    if parent_mm <= target:
        return 1, np.int64(0), parent, parent_mm, trace_gens, trace_mms, trace_len

    offspring = np.empty((lam, gene_count), dtype=np.int64)
    off_mm = np.empty(lam, dtype=np.int64)

    solved = 0
    generations = np.int64(0)
    for gen in range(1, max_generations + 1):
        generations = np.int64(gen)
        for o in range(lam):
            child = offspring[o]
            for i in range(gene_count):
                child[i] = parent[i]
            for _ in range(k_mutations):
                pos = _randbelow(state, gene_count)
                value = _randbelow(state, ranges[pos])
                if strict:
                    while value == child[pos] and ranges[pos] > 1:
                        value = _randbelow(state, ranges[pos])
                child[pos] = value
            off_mm[o] = _mismatches(
                child, n_i, n_o, m, needed, vals,
                input_words, desired_words, care_words,
            )

        best = off_mm[0]
        for o in range(1, lam):
            if off_mm[o] < best:
                best = off_mm[o]
        if best <= parent_mm:
            ties = 0
            for o in range(lam):
                if off_mm[o] == best:
                    ties += 1
            pick = _randbelow(state, ties) if ties > 1 else np.int64(0)
            seen = 0
            for o in range(lam):
                if off_mm[o] == best:
                    if seen == pick:
                        for i in range(gene_count):
                            parent[i] = offspring[o, i]
                        break
                    seen += 1
            improved = best < parent_mm
            parent_mm = best
        else:
            improved = False

        if improved:
            trace_gens[trace_len] = gen
            trace_mms[trace_len] = parent_mm
            trace_len += 1
        elif stride > 0 and gen % stride == 0 and stride_used < stride_cap:
            trace_gens[trace_len] = gen
            trace_mms[trace_len] = parent_mm
            trace_len += 1
            stride_used += 1

        if parent_mm <= target:
            solved = 1
            break

    return solved, generations, parent, parent_mm, trace_gens, trace_mms, trace_len
