"""Compiled vs pure-Python pairing enumeration on long words.

    python3 benchmarks/bench_kernels.py [--repeat N]

Words have 12-16 generators over two modes with all annihilations first, the
worst case for enumeration (every annihilation can pair with many creations).
"""

import argparse
import random
import timeit

from photeleport import _wick_py

try:
    from photeleport import _wick
except ImportError:  # extension not built
    _wick = None


def worst_case_words(rng, n_words=20):
    words = []
    for _ in range(n_words):
        half = rng.choice((6, 7, 8))
        modes = [rng.randrange(2) for _ in range(half)]
        ann = list(modes)
        rng.shuffle(modes)
        words.append(([1] * half + [0] * half, ann + modes))
    return words


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    words = worst_case_words(random.Random(0))
    ref = _wick_py.count_pairings_batch(words)
    print(f"{len(words)} words, {sum(ref)} pairings in total")
    t_py = min(timeit.repeat(lambda: _wick_py.count_pairings_batch(words), number=1, repeat=args.repeat))
    print(f"python  {t_py * 1e3:10.2f} ms")
    if _wick is None:
        print("cython  (extension not built)")
        return
    assert _wick.count_pairings_batch(words) == ref
    t_cy = min(timeit.repeat(lambda: _wick.count_pairings_batch(words), number=1, repeat=args.repeat))
    print(f"cython  {t_cy * 1e3:10.2f} ms   speedup x{t_py / t_cy:.0f}")


if __name__ == "__main__":
    main()
