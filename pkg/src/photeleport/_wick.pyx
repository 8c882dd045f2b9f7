# cython: language_level=3, boundscheck=False, wraparound=False
"""Compiled pairing enumeration (same contract as ``_wick_py``)."""

cdef enum:
    MAXN = 64


cdef long long _count(int* kinds, long long* modes, char* used, int n) nogil:
    cdef int i = 0, j
    cdef long long total = 0
    cdef long long m
    while i < n and used[i]:
        i += 1
    if i == n:
        return 1
    if kinds[i] != 1:
        return 0
    used[i] = 1
    m = modes[i]
    for j in range(i + 1, n):
        if not used[j] and kinds[j] == 0 and modes[j] == m:
            used[j] = 1
            total += _count(kinds, modes, used, n)
            used[j] = 0
    used[i] = 0
    return total


def count_pairings(kinds, modes):
    cdef int n = len(kinds)
    cdef int k
    cdef int ck[MAXN]
    cdef long long cm[MAXN]
    cdef char used[MAXN]
    cdef long long result
    if n != len(modes):
        raise ValueError("kinds and modes must have equal length")
    if n > MAXN:
        raise ValueError("word too long for compiled kernel")
    if n % 2:
        return 0
    for k in range(n):
        ck[k] = kinds[k]
        cm[k] = modes[k]
        used[k] = 0
    with nogil:
        result = _count(ck, cm, used, n)
    return result


def count_pairings_batch(words):
    return [count_pairings(k, m) for k, m in words]
