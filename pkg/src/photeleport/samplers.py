"""Seeded random operators for property checks (shared by tests and the CLI self-test)."""

from .algebra import ANNIHILATE, CREATE, Generator, ModeLabel, OperatorSum, OperatorWord


def make_modes(n):
    base = [
        ModeLabel((0, 0, 1), 1),
        ModeLabel((0, 0, 1), -1),
        ModeLabel((1, 0, 0), 1),
        ModeLabel((0, -1, 2), -1),
    ]
    return base[:n]


def random_word(rng, max_len=8, n_modes=4, balanced=None):
    modes = make_modes(n_modes)
    if balanced is None:
        balanced = rng.random() < 0.7
    if balanced:
        half = rng.randint(0, max_len // 2)
        gens = [Generator(CREATE, rng.choice(modes)) for _ in range(half)]
        gens += [Generator(ANNIHILATE, rng.choice(modes)) for _ in range(half)]
        rng.shuffle(gens)
    else:
        n = rng.randint(1, max_len)
        gens = [Generator(rng.choice((CREATE, ANNIHILATE)), rng.choice(modes)) for _ in range(n)]
    c = complex(rng.uniform(-1, 1), rng.uniform(-1, 1))
    return OperatorWord(c, tuple(gens))


def random_creation_sum(rng, n_terms=5, max_deg=3, n_modes=4):
    modes = make_modes(n_modes)
    words = []
    for _ in range(n_terms):
        d = rng.randint(0, max_deg)
        gens = tuple(Generator(CREATE, rng.choice(modes)) for _ in range(d))
        words.append(OperatorWord(complex(rng.gauss(0, 1), rng.gauss(0, 1)), gens))
    return OperatorSum.from_words(words)


def random_sum(rng, n_terms=3, max_len=4, n_modes=3):
    return OperatorSum.from_words(
        random_word(rng, max_len=max_len, n_modes=n_modes) for _ in range(n_terms)
    )
