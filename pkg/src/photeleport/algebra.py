"""Bosonic creation/annihilation algebra over a finite set of photon modes.

Words are products of generators ``a+(m)`` / ``a-(m)`` with the commutator
``[a-(m), a+(m')] = delta(m, m')`` (unit Kronecker delta; every continuum
measure factor is carried by the coefficients of the states built on top).

Two independent routes to vacuum expectation values are provided:

* :func:`normal_order` rewrites ``a-(m) a+(m')`` into ``a+(m') a-(m) + delta``
  until termination; :func:`vev` reads off the identity coefficient.
* :func:`vev_wick` enumerates complete contractions explicitly (compiled
  kernel when available, see :mod:`photeleport.kernels`).
"""

from __future__ import annotations

import math
import random
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Mapping, NamedTuple, Sequence

from .kernels import count_pairings

CREATE = 0
ANNIHILATE = 1

PRUNE = 1e-14
MAX_GENERATORS = 16


class AlgebraError(ValueError):
    """Malformed operator input (e.g. an annihilator inside a state)."""


class _ModeTuple(NamedTuple):
    momentum_index: tuple
    helicity: int


class ModeLabel(_ModeTuple):
    """Lattice momentum index plus helicity; ordered lexicographically."""

    __slots__ = ()

    def __new__(cls, momentum_index, helicity):
        idx = tuple(int(v) for v in momentum_index)
        if len(idx) != 3:
            raise AlgebraError(f"momentum index must have 3 components, got {idx}")
        if helicity not in (1, -1):
            raise AlgebraError(f"helicity must be +1 or -1, got {helicity}")
        return super().__new__(cls, idx, int(helicity))

    def __repr__(self):
        nx, ny, nz = self.momentum_index
        return f"({nx},{ny},{nz},{'+' if self.helicity > 0 else '-'})"


class Generator(NamedTuple):
    """``kind`` is CREATE (0) or ANNIHILATE (1).

    Tuple order (kind first) puts creations before annihilations, so a
    sorted tuple of generators is already in canonical normal order.
    """

    kind: int
    mode: ModeLabel

    def adjoint(self) -> "Generator":
        return Generator(1 - self.kind, self.mode)

    def __repr__(self):
        return ("c" if self.kind == CREATE else "a") + repr(self.mode)


def create(mode: ModeLabel) -> Generator:
    return Generator(CREATE, mode)


def annihilate(mode: ModeLabel) -> Generator:
    return Generator(ANNIHILATE, mode)


@dataclass(frozen=True)
class OperatorWord:
    """``coefficient * factors[0] * factors[1] * ...`` (factor order kept)."""

    coefficient: complex
    factors: tuple = ()

    def adjoint(self) -> "OperatorWord":
        return OperatorWord(
            complex(self.coefficient).conjugate(),
            tuple(g.adjoint() for g in reversed(self.factors)),
        )

    def __mul__(self, other: "OperatorWord") -> "OperatorWord":
        return OperatorWord(self.coefficient * other.coefficient, self.factors + other.factors)

    def scaled(self, c: complex) -> "OperatorWord":
        return OperatorWord(self.coefficient * c, self.factors)

    def __len__(self):
        return len(self.factors)


def _is_canonical(factors: tuple) -> bool:
    return all(factors[i] <= factors[i + 1] for i in range(len(factors) - 1))


class OperatorSum:
    """Complex linear combination of canonical normal-ordered words.

    Instances are immutable; arithmetic returns new objects.
    """

    __slots__ = ("_terms",)

    def __init__(self, terms: Mapping[tuple, complex] | None = None):
        # Only for already-canonical keys; use normal_order()/from_words otherwise.
        clean = {}
        for k, c in (terms or {}).items():
            c = complex(c)
            if abs(c) >= PRUNE:
                clean[k] = c
        self._terms = clean

    @classmethod
    def identity(cls, c: complex = 1.0) -> "OperatorSum":
        return cls({(): c})

    @classmethod
    def zero(cls) -> "OperatorSum":
        return cls()

    @classmethod
    def from_word(cls, word: OperatorWord) -> "OperatorSum":
        return normal_order(word)

    @classmethod
    def from_words(cls, words: Iterable[OperatorWord]) -> "OperatorSum":
        acc: dict = {}
        for w in words:
            if _is_canonical(w.factors):
                acc[w.factors] = acc.get(w.factors, 0j) + w.coefficient
            else:
                for k, c in normal_order(w)._terms.items():
                    acc[k] = acc.get(k, 0j) + c
        return cls(acc)

    @property
    def terms(self) -> dict:
        return dict(self._terms)

    def items(self):
        return sorted(self._terms.items(), key=lambda kv: (len(kv[0]), kv[0]))

    def __len__(self):
        return len(self._terms)

    def __iter__(self):
        return iter(self.items())

    def coefficient(self, factors: Sequence[Generator] = ()) -> complex:
        return self._terms.get(tuple(sorted(factors)), 0j)

    def is_creation_only(self) -> bool:
        return all(g.kind == CREATE for k in self._terms for g in k)

    def degrees(self) -> set:
        return {len(k) for k in self._terms}

    def __add__(self, other: "OperatorSum") -> "OperatorSum":
        acc = dict(self._terms)
        for k, c in other._terms.items():
            acc[k] = acc.get(k, 0j) + c
        return OperatorSum(acc)

    def __neg__(self) -> "OperatorSum":
        return OperatorSum({k: -c for k, c in self._terms.items()})

    def __sub__(self, other: "OperatorSum") -> "OperatorSum":
        return self + (-other)

    def scale(self, c: complex) -> "OperatorSum":
        return OperatorSum({k: c * v for k, v in self._terms.items()})

    def __mul__(self, other):
        if isinstance(other, OperatorSum):
            return multiply(self, other)
        return self.scale(other)

    def __rmul__(self, other):
        return self.scale(other)

    def adjoint(self) -> "OperatorSum":
        return adjoint(self)

    def max_abs(self) -> float:
        return max((abs(c) for c in self._terms.values()), default=0.0)

    def allclose(self, other: "OperatorSum", tol: float = 1e-12) -> bool:
        return (self - other).max_abs() <= tol

    def __eq__(self, other):
        if not isinstance(other, OperatorSum):
            return NotImplemented
        return self._terms == other._terms

    __hash__ = None

    def __repr__(self):
        if not self._terms:
            return "OperatorSum(0)"
        body = " + ".join(
            f"({c:.6g})" + "".join(repr(g) for g in k) for k, c in self.items()[:6]
        )
        more = "" if len(self._terms) <= 6 else f" + ... [{len(self._terms)} terms]"
        return f"OperatorSum({body}{more})"

    def to_text(self) -> str:
        return to_text(self)


def _check_size(factors):
    if len(factors) > MAX_GENERATORS:
        raise AlgebraError(
            f"word has {len(factors)} generators; limit is {MAX_GENERATORS}"
        )


def _redexes(factors: tuple) -> list:
    return [
        i
        for i in range(len(factors) - 1)
        if factors[i].kind == ANNIHILATE and factors[i + 1].kind == CREATE
    ]


def normal_order(
    word: OperatorWord,
    strategy: str = "leftmost",
    rng: random.Random | None = None,
    stats: dict | None = None,
) -> OperatorSum:
    """Rewrite ``word`` to canonical normal order.

    ``strategy`` picks which adjacent ``a- a+`` redex is rewritten first:
    ``"leftmost"``, ``"rightmost"`` or ``"random"`` (uses ``rng``). All
    strategies give the same result; tests rely on that. When ``stats`` is
    given it receives ``swaps`` (total rewrites) and ``max_chain`` (the
    longest chain of swaps applied to any descendant of the input).
    """
    factors = tuple(word.factors)
    _check_size(factors)
    if strategy == "random" and rng is None:
        rng = random.Random(0)
    pending = {factors: [complex(word.coefficient), 0]}
    out: dict = {}
    swaps = 0
    max_chain = 0
    while pending:
        f, (c, depth) = pending.popitem()
        red = _redexes(f)
        if not red:
            key = tuple(sorted(f))
            out[key] = out.get(key, 0j) + c
            max_chain = max(max_chain, depth)
            continue
        if strategy == "leftmost":
            i = red[0]
        elif strategy == "rightmost":
            i = red[-1]
        elif strategy == "random":
            i = rng.choice(red)
        else:
            raise ValueError(f"unknown strategy {strategy!r}")
        swaps += 1
        a, b = f[i], f[i + 1]
        branches = [f[:i] + (b, a) + f[i + 2:]]
        if a.mode == b.mode:
            branches.append(f[:i] + f[i + 2:])
        for g in branches:
            slot = pending.get(g)
            if slot is None:
                pending[g] = [c, depth + 1]
            else:
                slot[0] += c
                slot[1] = max(slot[1], depth + 1)
    if stats is not None:
        stats["swaps"] = swaps
        stats["max_chain"] = max_chain
    return OperatorSum(out)


def vev(x) -> complex:
    """Vacuum expectation value <0|x|0>: the identity coefficient."""
    if isinstance(x, OperatorWord):
        x = normal_order(x)
    return x._terms.get((), 0j)


def _encode(factors: Sequence[Generator]):
    ids: dict = {}
    kinds = [g.kind for g in factors]
    modes = [ids.setdefault(g.mode, len(ids)) for g in factors]
    return kinds, modes


def vev_wick(word: OperatorWord) -> complex:
    """<0|word|0> by enumerating complete contractions.

    A contraction pairs an annihilation at position i with a creation at a
    later position j on the same mode; every pairing contributes 1.
    """
    _check_size(word.factors)
    n_c = sum(1 for g in word.factors if g.kind == CREATE)
    if 2 * n_c != len(word.factors):
        return 0j
    kinds, modes = _encode(word.factors)
    return complex(word.coefficient) * count_pairings(kinds, modes)


def adjoint(s: OperatorSum) -> OperatorSum:
    out = {}
    for k, c in s._terms.items():
        # reversing a canonical word then flipping kinds is canonical after a sort
        flipped = tuple(sorted(g.adjoint() for g in k))
        out[flipped] = c.conjugate()
    return OperatorSum(out)


def multiply(a: OperatorSum, b: OperatorSum) -> OperatorSum:
    acc: dict = {}
    for ka, ca in a._terms.items():
        a_has_ann = any(g.kind == ANNIHILATE for g in ka)
        for kb, cb in b._terms.items():
            c = ca * cb
            if not a_has_ann or all(g.kind == ANNIHILATE for g in kb):
                key = tuple(sorted(ka + kb))
                acc[key] = acc.get(key, 0j) + c
            else:
                for k, v in normal_order(OperatorWord(c, ka + kb))._terms.items():
                    acc[k] = acc.get(k, 0j) + v
    return OperatorSum(acc)


def _occupation_weight(key: tuple) -> int:
    w = 1
    for n in Counter(g.mode for g in key).values():
        w *= math.factorial(n)
    return w


def inner_product(bra_state: OperatorSum, ket_state: OperatorSum) -> complex:
    """``<0| adjoint(bra) ket |0>`` for creation-only sums.

    Two canonical creation words overlap only when they carry the same
    multiset of modes, in which case the overlap is prod_m n_m!.
    """
    for name, s in (("bra_state", bra_state), ("ket_state", ket_state)):
        if not s.is_creation_only():
            raise AlgebraError(f"{name} contains annihilation generators; not a state")
    small, large, conj_small = (
        (bra_state, ket_state, True)
        if len(bra_state) <= len(ket_state)
        else (ket_state, bra_state, False)
    )
    total = 0j
    lt = large._terms
    for k, c in small._terms.items():
        d = lt.get(k)
        if d is None:
            continue
        w = _occupation_weight(k)
        total += (c.conjugate() * d if conj_small else d.conjugate() * c) * w
    return total


def norm(state: OperatorSum) -> float:
    return math.sqrt(max(inner_product(state, state).real, 0.0))


def normalized(state: OperatorSum) -> OperatorSum:
    n = norm(state)
    if n == 0:
        raise AlgebraError("cannot normalize the zero state")
    return state.scale(1.0 / n)


def product_words(*factors: Sequence[OperatorWord]) -> list:
    """All ordered products ``w1 * w2 * ...`` with one word from each list.

    The factor order is preserved (nothing is canonicalized), so positions
    inside each product keep their role labels.
    """
    out = [OperatorWord(1.0 + 0j, ())]
    for ws in factors:
        out = [a * b for a in out for b in ws if a.coefficient * b.coefficient != 0]
    return out


# --- canonical text form -----------------------------------------------------

def _fmt_gen(g: Generator) -> str:
    nx, ny, nz = g.mode.momentum_index
    s = "+" if g.mode.helicity > 0 else "-"
    return f"{'c' if g.kind == CREATE else 'a'}({nx},{ny},{nz},{s})"


def to_text(s: OperatorSum) -> str:
    """One line per term, sorted by (length, word): ``re im : c(nx,ny,nz,s) ...``."""
    lines = []
    for k, c in s.items():
        word = " ".join(_fmt_gen(g) for g in k)
        lines.append(f"{c.real!r} {c.imag!r} : {word}".rstrip())
    return "\n".join(lines) + ("\n" if lines else "")


def from_text(text: str) -> OperatorSum:
    acc: dict = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line:
            continue
        try:
            head, _, tail = line.partition(":")
            re_s, im_s = head.split()
            factors = []
            for tok in tail.split():
                kind = {"c": CREATE, "a": ANNIHILATE}[tok[0]]
                nx, ny, nz, s = tok[2:-1].split(",")
                factors.append(
                    Generator(kind, ModeLabel((int(nx), int(ny), int(nz)), 1 if s == "+" else -1))
                )
        except (ValueError, KeyError, IndexError) as exc:
            raise AlgebraError(f"line {lineno}: cannot parse {line!r}") from exc
        w = OperatorWord(complex(float(re_s), float(im_s)), tuple(factors))
        for k, c in normal_order(w)._terms.items():
            acc[k] = acc.get(k, 0j) + c
    return OperatorSum(acc)
