import random

import numpy as np
import pytest

from photeleport.algebra import ANNIHILATE, CREATE, Generator, ModeLabel, OperatorSum, OperatorWord  # noqa: F401
from photeleport.samplers import make_modes, random_creation_sum, random_sum, random_word  # noqa: F401


class FockMatrices:
    """Truncated multi-mode Fock representation (oracle for the algebra)."""

    def __init__(self, modes, cutoff=9):
        self.index = {m: i for i, m in enumerate(modes)}
        a = np.diag(np.sqrt(np.arange(1, cutoff)), 1)
        eye = np.eye(cutoff)
        self.ann = []
        for i in range(len(modes)):
            op = np.array([[1.0]])
            for j in range(len(modes)):
                op = np.kron(op, a if j == i else eye)
            self.ann.append(op)
        self.dim = cutoff ** len(modes)

    def matrix(self, g):
        a = self.ann[self.index[g.mode]]
        return a if g.kind == ANNIHILATE else a.T

    def vev(self, word):
        v = np.zeros(self.dim)
        v[0] = 1.0
        w = v.astype(complex)
        for g in reversed(word.factors):
            w = self.matrix(g) @ w
        return complex(word.coefficient) * w[0]


@pytest.fixture
def rng():
    return random.Random(12345)
