"""Photon structure on a finite momentum lattice.

Momenta are ``spacing * n`` for integer index vectors ``n`` with components
in ``[-N, N]`` (one axis only when ``collinear``). The mode measure is
``spacing**d / (2|k|)`` (relativistic) or ``spacing**d`` (galilean), where
``d`` is 1 for collinear grids and 3 otherwise. The relativistic grid drops
``k = 0``; the galilean grid keeps it, so its position operators form an
exactly unitary discrete Fourier basis.

Position lattice: the same index range, ``x = dx * j`` with
``dx = 2*pi / (P * spacing)`` and ``P = 2N + 1`` sites per axis, periodic.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from functools import cached_property
from itertools import product
from typing import Iterable, Mapping

import numpy as np

from .algebra import (
    CREATE,
    Generator,
    ModeLabel,
    OperatorSum,
    OperatorWord,
    create,
    inner_product,
    norm,
)

HELICITIES = (1, -1)
RELATIVISTIC = "relativistic"
GALILEAN = "galilean"
BELL_KINDS = ("Psi-", "Psi+", "Phi-", "Phi+")


class FieldError(ValueError):
    """Domain error in a photon-field construction."""


@dataclass(frozen=True)
class MomentumGrid:
    spacing: float
    half_extent: int
    convention: str = RELATIVISTIC
    collinear: bool = False
    lower_extent: int | None = None  # defaults to -half_extent; anything else is asymmetric

    def __post_init__(self):
        if self.spacing <= 0:
            raise FieldError("spacing must be positive")
        if self.half_extent < 1:
            raise FieldError("half_extent must be >= 1")
        if self.convention not in (RELATIVISTIC, GALILEAN):
            raise FieldError(f"unknown convention {self.convention!r}")

    @property
    def lo(self) -> int:
        return -self.half_extent if self.lower_extent is None else self.lower_extent

    @property
    def hi(self) -> int:
        return self.half_extent

    @property
    def is_symmetric(self) -> bool:
        return self.lo == -self.hi

    @property
    def dim(self) -> int:
        return 1 if self.collinear else 3

    @property
    def sites_per_axis(self) -> int:
        return self.hi - self.lo + 1

    @property
    def n_sites(self) -> int:
        return self.sites_per_axis ** self.dim

    @property
    def dx(self) -> float:
        return 2 * math.pi / (self.sites_per_axis * self.spacing)

    def _lattice(self):
        r = range(self.lo, self.hi + 1)
        if self.collinear:
            return [(0, 0, n) for n in r]
        return list(product(r, r, r))

    @cached_property
    def indices(self) -> tuple:
        pts = self._lattice()
        if self.convention == RELATIVISTIC:
            pts = [p for p in pts if p != (0, 0, 0)]
        return tuple(pts)

    @cached_property
    def index_set(self) -> frozenset:
        return frozenset(self.indices)

    @cached_property
    def positions(self) -> tuple:
        return tuple(self._lattice())

    def modes(self) -> list:
        return [ModeLabel(n, s) for n in self.indices for s in HELICITIES]

    def momentum(self, index) -> np.ndarray:
        return self.spacing * np.asarray(index, dtype=float)

    def k0(self, index) -> float:
        return self.spacing * math.sqrt(sum(v * v for v in index))

    def weight(self, index, convention: str | None = None) -> float:
        conv = convention or self.convention
        base = self.spacing ** self.dim
        if conv == GALILEAN:
            return base
        k0 = self.k0(index)
        if k0 == 0:
            raise FieldError("k = 0 has no relativistic weight")
        return base / (2 * k0)

    def contains(self, index) -> bool:
        return tuple(index) in self.index_set

    def wrap(self, index) -> tuple:
        """Fold an index vector back into the lattice range (periodic)."""
        p = self.sites_per_axis
        out = tuple(((v - self.lo) % p) + self.lo for v in index)
        if self.collinear:
            out = (0, 0, out[2])
        return out

    def check_index(self, index, what="index"):
        index = tuple(int(v) for v in index)
        if len(index) != 3:
            raise FieldError(f"{what} must have 3 components")
        if self.collinear and (index[0] or index[1]):
            raise FieldError(f"{what} {index} is off the collinear axis")
        if any(v < self.lo or v > self.hi for v in index):
            raise FieldError(f"{what} {index} outside [{self.lo}, {self.hi}]")
        return index


# -- polarization geometry ----------------------------------------------------

@dataclass(frozen=True)
class PolarizationBasis:
    e1: np.ndarray
    e2: np.ndarray
    khat: np.ndarray


@dataclass(frozen=True)
class HelicityVectors:
    plus: np.ndarray
    minus: np.ndarray

    def __getitem__(self, s: int) -> np.ndarray:
        return self.plus if s > 0 else self.minus


def build_polarization_basis(k, gauge_angle: float = 0.0) -> PolarizationBasis:
    """Right-handed (e1, e2, khat) triad.

    e1 = normalize(z x khat) unless khat is (anti)parallel to z, then e1 = x.
    ``gauge_angle`` rotates (e1, e2) about khat.
    """
    k = np.asarray(k, dtype=float)
    nk = np.linalg.norm(k)
    if nk == 0:
        raise FieldError("polarization basis undefined for k = 0")
    khat = k / nk
    zhat = np.array([0.0, 0.0, 1.0])
    c = np.cross(zhat, khat)
    if np.linalg.norm(c) < 1e-9:
        e1 = np.array([1.0, 0.0, 0.0])
    else:
        e1 = c / np.linalg.norm(c)
    e2 = np.cross(khat, e1)
    if gauge_angle:
        ca, sa = math.cos(gauge_angle), math.sin(gauge_angle)
        e1, e2 = ca * e1 + sa * e2, -sa * e1 + ca * e2
    return PolarizationBasis(e1, e2, khat)


def helicity_vectors(basis: PolarizationBasis) -> HelicityVectors:
    r = 1 / math.sqrt(2)
    return HelicityVectors(r * (basis.e1 + 1j * basis.e2), r * (basis.e1 - 1j * basis.e2))


def helicity_vector(k, s: int, gauge_angle: float = 0.0) -> np.ndarray:
    return helicity_vectors(build_polarization_basis(k, gauge_angle))[s]


def polarization_variation(grid: MomentumGrid) -> float:
    """max ||w(k,+) - w(k',+)|| over grid pairs (0 iff w(.,+) is constant)."""
    ws = [helicity_vector(grid.momentum(n), 1) for n in grid.indices if any(n)]
    arr = np.array(ws)
    best = 0.0
    for i in range(len(arr)):
        best = max(best, float(np.max(np.linalg.norm(arr - arr[i], axis=1))))
    return best


def gauge_phase(grid: MomentumGrid, mode: ModeLabel, angle: float) -> complex:
    """Component factor for a creation operator relabelled to the rotated triad."""
    if not any(mode.momentum_index):
        return 1.0 + 0j
    k = grid.momentum(mode.momentum_index)
    w0 = helicity_vector(k, mode.helicity)
    wp = helicity_vector(k, mode.helicity, angle)
    return complex(np.vdot(w0, wp))


def regauge(op, grid: MomentumGrid, angle: float):
    """Express ``op`` (OperatorSum or list of words) in the rotated helicity labels."""
    cache: dict = {}

    def factor(factors):
        c = 1.0 + 0j
        for g in factors:
            p = cache.get(g.mode)
            if p is None:
                p = cache[g.mode] = gauge_phase(grid, g.mode, angle)
            c *= p if g.kind == CREATE else p.conjugate()
        return c

    if isinstance(op, OperatorSum):
        return OperatorSum({k: c * factor(k) for k, c in op.terms.items()})
    return [OperatorWord(w.coefficient * factor(w.factors), w.factors) for w in op]


# -- wave packets -------------------------------------------------------------

@dataclass
class PhotonWaveFunction:
    """Momentum-space amplitudes f(k, s); normalized when sum w(k)|f|^2 = 1."""

    grid: MomentumGrid
    amplitudes: dict  # ModeLabel -> complex
    reference_time: float = 0.0

    def __post_init__(self):
        for m in self.amplitudes:
            if not self.grid.contains(m.momentum_index):
                raise FieldError(f"amplitude on {m} outside the grid support")

    def norm_sq(self) -> float:
        return sum(
            self.grid.weight(m.momentum_index) * abs(c) ** 2 for m, c in self.amplitudes.items()
        )

    def normalized(self) -> "PhotonWaveFunction":
        n = math.sqrt(self.norm_sq())
        if n == 0:
            raise FieldError("zero wave function")
        return PhotonWaveFunction(
            self.grid, {m: c / n for m, c in self.amplitudes.items()}, self.reference_time
        )

    def support(self) -> set:
        return {m.momentum_index for m, c in self.amplitudes.items() if abs(c) > 0}


def plane_wave(grid: MomentumGrid, index, helicity_amps=(1.0, 0.0), reference_time=0.0):
    index = grid.check_index(index)
    amps = {
        ModeLabel(index, s): complex(a) for s, a in zip(HELICITIES, helicity_amps) if a != 0
    }
    return PhotonWaveFunction(grid, amps, reference_time).normalized()


def gaussian_packet(
    grid: MomentumGrid,
    center,
    sigma: float,
    helicity_amps=(1.0, 0.0),
    x_center=(0, 0, 0),
    reference_time: float = 0.0,
    cutoff: float = 0.0,
) -> PhotonWaveFunction:
    """Gaussian in momentum around index ``center`` (width ``sigma`` in momentum
    units); the phase ``exp(i k.x_c)`` places the position-space peak at lattice
    site ``x_center``. Amplitudes below ``cutoff`` times the peak are dropped.
    """
    kc = grid.momentum(center)
    xc = grid.dx * np.asarray(x_center, dtype=float)
    amps = {}
    for n in grid.indices:
        k = grid.momentum(n)
        g = math.exp(-float(np.sum((k - kc) ** 2)) / (4 * sigma**2))
        if g <= cutoff:
            continue
        g /= math.sqrt(grid.weight(n))
        ph = cmath.exp(1j * float(k @ xc))
        for s, a in zip(HELICITIES, helicity_amps):
            if a != 0:
                amps[ModeLabel(n, s)] = complex(a) * g * ph
    return PhotonWaveFunction(grid, amps, reference_time).normalized()


def smear_unknown_photon(f: PhotonWaveFunction, tol: float = 1e-10) -> OperatorSum:
    """psi+(f) = sum_{k,s} sqrt(w(k)) f(k,s) exp(-i k0 x0) a+(k,s)."""
    if abs(f.norm_sq() - 1) > tol:
        raise FieldError(f"wave function not normalized (norm^2 = {f.norm_sq():.12g})")
    g = f.grid
    terms = {}
    for m, c in f.amplitudes.items():
        n = m.momentum_index
        terms[(create(m),)] = (
            math.sqrt(g.weight(n)) * c * cmath.exp(-1j * g.k0(n) * f.reference_time)
        )
    return OperatorSum(terms)


def fourier_to_position(f: PhotonWaveFunction) -> dict:
    """Position-space table {(site, helicity): amplitude}; isometric (Parseval)."""
    g = f.grid
    p = g.sites_per_axis
    norm_ = p ** (-g.dim / 2)
    sites = np.array(g.positions, dtype=float)
    out = {}
    for s in HELICITIES:
        acc = np.zeros(len(sites), dtype=complex)
        for m, c in f.amplitudes.items():
            if m.helicity != s:
                continue
            n = np.asarray(m.momentum_index, dtype=float)
            ph = np.exp(-2j * math.pi * (sites @ n) / p)
            acc += ph * (
                math.sqrt(g.weight(m.momentum_index))
                * c
                * cmath.exp(-1j * g.k0(m.momentum_index) * f.reference_time)
            )
        for site, a in zip(g.positions, acc * norm_):
            out[(site, s)] = complex(a)
    return out


def position_table_csv(table: Mapping) -> str:
    lines = ["nx,ny,nz,helicity,re,im"]
    for (site, s), a in sorted(table.items()):
        lines.append(f"{site[0]},{site[1]},{site[2]},{s:+d},{a.real!r},{a.imag!r}")
    return "\n".join(lines) + "\n"


# -- position-space field operators ----------------------------------------------

def position_coefficients(
    grid: MomentumGrid, site, x0: float = 0.0, convention: str | None = None
) -> dict:
    """{momentum index: u} with psi+(x, s) = sum_k u(k) a+(k, s)."""
    conv = convention or grid.convention
    p = grid.sites_per_axis
    scale = (grid.dx / (2 * math.pi)) ** grid.dim
    out = {}
    for n in grid.indices:
        if conv == RELATIVISTIC and not any(n):
            continue
        phase = 2 * math.pi * sum(a * b for a, b in zip(n, site)) / p - grid.k0(n) * x0
        out[n] = math.sqrt(grid.weight(n, conv) * scale) * cmath.exp(1j * phase)
    return out


def field_operator(
    grid: MomentumGrid, site, s: int, x0: float = 0.0, convention: str | None = None
) -> OperatorSum:
    site = tuple(int(v) for v in site)
    coeffs = position_coefficients(grid, site, x0, convention)
    return OperatorSum({(create(ModeLabel(n, s)),): u for n, u in coeffs.items()})


def field_words(grid, site, s, x0=0.0, convention=None) -> list:
    coeffs = position_coefficients(grid, site, x0, convention)
    return [OperatorWord(u, (create(ModeLabel(n, s)),)) for n, u in coeffs.items()]


# -- two-photon operators -----------------------------------------------------------

@dataclass
class TwoPhotonOperator:
    """Degree-2 creation operator kept as ordered words.

    ``words[i].factors == (a+(first photon), a+(second photon))``; the order
    is the particle assignment used by the factorized (distinguishable)
    contraction. ``operator`` is the canonical bosonic sum.
    """

    kind: str
    words: tuple
    params: dict = field(default_factory=dict)

    @cached_property
    def operator(self) -> OperatorSum:
        return OperatorSum.from_words(self.words)

    def norm(self) -> float:
        return norm(self.operator)

    def scaled(self, c: complex) -> "TwoPhotonOperator":
        return TwoPhotonOperator(self.kind, tuple(w.scaled(c) for w in self.words), dict(self.params))

    def normalized(self) -> "TwoPhotonOperator":
        n = self.norm()
        if n == 0:
            raise FieldError(f"{self.kind} operator vanishes identically")
        return self.scaled(1.0 / n)

    def swapped(self) -> "TwoPhotonOperator":
        return TwoPhotonOperator(
            self.kind,
            tuple(OperatorWord(w.coefficient, w.factors[::-1]) for w in self.words),
            dict(self.params),
        )

    def support(self, leg: int) -> set:
        return {w.factors[leg].mode.momentum_index for w in self.words}


def _pair_word(c, m1, m2):
    return OperatorWord(c, (create(m1), create(m2)))


def build_epr_pair(
    grid: MomentumGrid, x0: float = 0.0, support: Iterable | None = None, normalize: bool = True
) -> TwoPhotonOperator:
    """sum_k w(k) exp(-2i k0 x0) a+(k,+) a+(-k,-); zero total momentum.

    ``support`` optionally restricts the first photon's momentum index set.
    """
    if not grid.is_symmetric:
        raise FieldError("grid is not symmetric under index negation")
    allowed = None if support is None else {tuple(s) for s in support}
    words = []
    for n in grid.indices:
        if allowed is not None and n not in allowed:
            continue
        mn = tuple(-v for v in n)
        c = grid.weight(n) * cmath.exp(-2j * grid.k0(n) * x0)
        words.append(_pair_word(c, ModeLabel(n, 1), ModeLabel(mn, -1)))
    if not words:
        raise FieldError("EPR support is empty")
    op = TwoPhotonOperator("EPR", tuple(words), {"x0": x0, "P": (0, 0, 0)})
    return op.normalized() if normalize else op


def _bell_signs(kind):
    if kind not in BELL_KINDS:
        raise FieldError(f"unknown Bell kind {kind!r}")
    hel = ((1, -1), (-1, 1)) if kind.startswith("Psi") else ((1, 1), (-1, -1))
    return hel, (1 if kind.endswith("+") else -1)  # (first word, second word) helicities


def build_bell_operator(
    kind: str, grid: MomentumGrid, Y=(0, 0, 0), P=(0, 0, 0), x0: float = 0.0,
    normalize: bool = False,
) -> TwoPhotonOperator:
    """Lattice Bell operator with displacement ``Y`` (position sites) and total
    momentum ``P`` (momentum index), from position-space smeared operators:

    (1/sqrt2) sum_xi exp(-i xi.P) (psi+(xi,s1) psi+(xi-Y,s2) +- psi+(xi,s1') psi+(xi-Y,s2'))

    The site sum is done analytically (it forces k + k' = P modulo the lattice
    period), which is exact on the periodic lattice.
    """
    ((a1, a2), (b1, b2)), sign = _bell_signs(kind)
    Y = tuple(int(v) for v in Y)
    P = grid.check_index(P, "total momentum P")
    p = grid.sites_per_axis
    scale = p**grid.dim * (grid.dx / (2 * math.pi)) ** grid.dim
    r2 = 1 / math.sqrt(2)
    words = []
    for n in grid.indices:
        n2 = grid.wrap(tuple(a - b for a, b in zip(P, n)))
        if not grid.contains(n2):
            continue
        amp = (
            scale
            * math.sqrt(grid.weight(n) * grid.weight(n2))
            * cmath.exp(-2j * math.pi * sum(a * b for a, b in zip(n2, Y)) / p)
            * cmath.exp(-1j * (grid.k0(n) + grid.k0(n2)) * x0)
            * r2
        )
        words.append(_pair_word(amp, ModeLabel(n, a1), ModeLabel(n2, a2)))
        words.append(_pair_word(sign * amp, ModeLabel(n, b1), ModeLabel(n2, b2)))
    op = TwoPhotonOperator(kind, tuple(words), {"Y": Y, "P": P, "x0": x0})
    return op.normalized() if normalize else op


def build_bell_operator_bruteforce(kind, grid, Y=(0, 0, 0), P=(0, 0, 0), x0=0.0) -> OperatorSum:
    """Same operator built literally from position-space field operators."""
    ((a1, a2), (b1, b2)), sign = _bell_signs(kind)
    p = grid.sites_per_axis
    total = OperatorSum()
    for xi in grid.positions:
        xy = grid.wrap(tuple(a - b for a, b in zip(xi, Y)))
        # the site displacement (not its wrapped image) carries the phase
        ph = cmath.exp(-2j * math.pi * sum(a * b for a, b in zip(xi, P)) / p)
        t1 = field_operator(grid, xi, a1, x0) * field_operator(grid, xy, a2, x0)
        t2 = field_operator(grid, xi, b1, x0) * field_operator(grid, xy, b2, x0)
        total = total + (t1 + t2.scale(sign)).scale(ph / math.sqrt(2))
    return total


def build_labeled_bell(kind: str, k2, k3) -> TwoPhotonOperator:
    """Unit-norm Bell state of two photons with fixed momenta k2 != k3.

    Psi+-: (a+(k2,+) a+(k3,-) +- a+(k2,-) a+(k3,+)) / sqrt2
    Phi+-: (a+(k2,+) a+(k3,+) +- a+(k2,-) a+(k3,-)) / sqrt2
    """
    k2 = tuple(int(v) for v in k2)
    k3 = tuple(int(v) for v in k3)
    if k2 == k3:
        raise FieldError("labeled Bell states need distinct momenta k2 != k3")
    ((a1, a2), (b1, b2)), sign = _bell_signs(kind)
    r2 = 1 / math.sqrt(2)
    words = (
        _pair_word(r2, ModeLabel(k2, a1), ModeLabel(k3, a2)),
        _pair_word(sign * r2, ModeLabel(k2, b1), ModeLabel(k3, b2)),
    )
    return TwoPhotonOperator(kind, words, {"k2": k2, "k3": k3})


def check_one_particle_resolution(
    grid: MomentumGrid, n_pairs: int = 20, rng: np.random.Generator | None = None,
    representation: str = "momentum",
) -> float:
    """Max |sum_b <u|b><b|v> - <u|v>| over random single-photon pairs.

    ``representation`` is ``"momentum"`` (b = a+(k,s)|0>) or ``"position"``
    (b = psi+(x,s)|0> with the grid's measure).
    """
    rng = rng or np.random.default_rng(0)
    modes = grid.modes()

    def rand_state():
        z = rng.normal(size=len(modes)) + 1j * rng.normal(size=len(modes))
        return OperatorSum({(create(m),): c for m, c in zip(modes, z)})

    if representation == "momentum":
        basis = [OperatorSum({(create(m),): 1.0}) for m in modes]
    elif representation == "position":
        basis = [field_operator(grid, x, s) for x in grid.positions for s in HELICITIES]
    else:
        raise FieldError(f"unknown representation {representation!r}")
    worst = 0.0
    for _ in range(n_pairs):
        u, v = rand_state(), rand_state()
        recon = sum(inner_product(u, b) * inner_product(b, v) for b in basis)
        worst = max(worst, abs(recon - inner_product(u, v)) / max(1.0, abs(inner_product(u, v))))
    return worst
