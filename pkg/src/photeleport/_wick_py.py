"""Pure-Python pairing enumeration, used when the compiled kernel is absent."""

CREATE = 0
ANNIHILATE = 1


def _count(kinds, modes, used, n):
    i = 0
    while i < n and used[i]:
        i += 1
    if i == n:
        return 1
    if kinds[i] != ANNIHILATE:
        # leftmost free factor is a creation: nothing to its left can absorb it
        return 0
    used[i] = True
    total = 0
    m = modes[i]
    for j in range(i + 1, n):
        if not used[j] and kinds[j] == CREATE and modes[j] == m:
            used[j] = True
            total += _count(kinds, modes, used, n)
            used[j] = False
    used[i] = False
    return total


def count_pairings(kinds, modes):
    """Number of complete contractions of a word.

    Each annihilation at position i is matched with a creation at a later
    position j on the same mode; the enumeration is explicit (depth-first).
    """
    n = len(kinds)
    if n != len(modes):
        raise ValueError("kinds and modes must have equal length")
    if n % 2:
        return 0
    return _count(list(kinds), list(modes), [False] * n, n)


def count_pairings_batch(words):
    return [count_pairings(k, m) for k, m in words]
