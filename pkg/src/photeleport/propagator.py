"""Massless two-point functions by radial quadrature, and their grid counterparts.

    D+(x) = i (2 pi)^-3  \\int d^3k / (2|k|)  exp(i(k.x - |k| x0))  exp(-eps k^2)  S(|k|)

S is an optional isotropic spectral weight (the squared Fourier transform of a
smearing test function); S = 1 is the bare regulated distribution. With this
normalization ``<0| psi-(y) psi+(x) |0> = -i D+(x - y)`` for field operators
``psi+(x) = (2 pi)^-3/2 sum_k sqrt(w(k)) ... a+(k)``.

After the angular integral the integrand is ``sin(k r) exp(-i k x0) F(k) / r``;
the oscillatory factors are handed to QUADPACK's weighted (QAWO) routine.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.integrate import IntegrationWarning, quad, simpson

from .algebra import ModeLabel, OperatorSum, create, inner_product
from .field import GALILEAN, RELATIVISTIC, MomentumGrid

TWO_PI = 2 * math.pi


class PropagatorError(ValueError):
    """Invalid propagator request or a quadrature that failed to converge."""


@dataclass(frozen=True)
class SpacetimePoint:
    x0: float
    x: tuple = (0.0, 0.0, 0.0)

    def __post_init__(self):
        object.__setattr__(self, "x", tuple(float(v) for v in self.x))
        if len(self.x) != 3 or not all(map(math.isfinite, (self.x0, *self.x))):
            raise PropagatorError("spacetime point needs a finite time and 3-vector")

    @property
    def r(self) -> float:
        return math.sqrt(sum(v * v for v in self.x))

    def __sub__(self, other: "SpacetimePoint") -> "SpacetimePoint":
        return SpacetimePoint(self.x0 - other.x0, tuple(a - b for a, b in zip(self.x, other.x)))


@dataclass(frozen=True)
class PropagatorSample:
    point: SpacetimePoint
    value: complex
    regulator: float
    convention: str = RELATIVISTIC


def laplacian_gaussian_spectrum(sigma: float) -> Callable[[float], float]:
    """S(k) = k^4 exp(-sigma^2 k^2): |FT|^2 of the Laplacian of a Gaussian.

    Zero-mean, so the weight vanishes at k = 0 and a grid without the origin
    loses nothing.
    """
    return lambda k: k**4 * math.exp(-(sigma**2) * k * k)


def _quad(f, upper, weight=None, omega=0.0, epsrel=1e-8):
    if weight == "sin" and omega == 0:
        return 0.0
    sign = 1.0
    kwargs = {}
    if weight is not None and omega != 0:
        if weight == "sin" and omega < 0:
            sign = -1.0
        kwargs = {"weight": weight, "wvar": abs(omega)}
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", IntegrationWarning)
        val, err, info, *rest = quad(
            f, 0.0, upper, limit=1000, epsrel=epsrel, epsabs=0.0, full_output=1, **kwargs
        )
    ier = rest[0].get("ier", 0) if rest and isinstance(rest[0], dict) else 0
    if not math.isfinite(val):
        raise PropagatorError(f"quadrature returned {val} (weight={weight}, omega={omega})")
    # roundoff flags (ier 2) are benign when the error estimate is small
    if err > max(1e-6 * abs(val), 1e-13) and len(rest) and rest[0] and ier not in (0,):
        raise PropagatorError(
            f"quadrature did not converge: weight={weight} omega={omega:.6g} "
            f"value={val:.6g} error_estimate={err:.3g} message={rest[0]!r}"
        )
    return sign * val


def d0_plus(
    point: SpacetimePoint,
    regulator: float,
    spectrum: Callable[[float], float] | None = None,
    convention: str = RELATIVISTIC,
    epsrel: float = 1e-8,
) -> complex:
    """Positive-frequency two-point function D+ at ``point`` (see module doc).

    ``convention="galilean"`` drops the 1/(2|k|) measure factor.
    """
    if not regulator > 0:
        raise PropagatorError("regulator eps must be > 0")
    if convention not in (RELATIVISTIC, GALILEAN):
        raise PropagatorError(f"unknown convention {convention!r}")
    eps, t, r = regulator, point.x0, point.r
    upper = math.sqrt(40.0 / eps)
    if spectrum is not None:
        upper = min(upper, _spectrum_cutoff(spectrum, upper))

    def F(k):
        v = math.exp(-eps * k * k)
        if spectrum is not None:
            v *= spectrum(k)
        if convention == GALILEAN:
            v *= 2 * k
        return v

    pref = 1j * TWO_PI**-3
    if r < 1e-12:
        G = lambda k: k * F(k)  # noqa: E731
        integral = _quad(G, upper, "cos", t, epsrel) - 1j * _quad(G, upper, "sin", t, epsrel)
        return pref * TWO_PI * integral
    re = 0.5 * (_quad(F, upper, "sin", r + t, epsrel) + _quad(F, upper, "sin", r - t, epsrel))
    im = -0.5 * (_quad(F, upper, "cos", r - t, epsrel) - _quad(F, upper, "cos", r + t, epsrel))
    return pref * (TWO_PI / r) * (re + 1j * im)


def _spectrum_cutoff(spectrum, upper):
    # first k beyond the peak where the weight is negligible
    ks = np.linspace(0, upper, 4001)
    vals = np.array([spectrum(k) for k in ks])
    peak = vals.max()
    if peak == 0:
        return upper
    tail = np.nonzero(vals > 1e-18 * peak)[0]
    return float(ks[min(tail[-1] + 1, len(ks) - 1)])


def d0_minus(point, regulator, spectrum=None, convention=RELATIVISTIC, epsrel=1e-8) -> complex:
    """D-(x) = -conj(D+(x)) for real arguments."""
    return -d0_plus(point, regulator, spectrum, convention, epsrel).conjugate()


def sample(point, regulator, spectrum=None, convention=RELATIVISTIC) -> PropagatorSample:
    return PropagatorSample(point, d0_plus(point, regulator, spectrum, convention), regulator, convention)


def light_cone_sweep(
    x0: float, radii: Sequence[float], regulator: float, convention: str = RELATIVISTIC
) -> list:
    return [sample(SpacetimePoint(x0, (0.0, 0.0, float(r))), regulator, None, convention) for r in radii]


def sweep_csv(samples: Sequence[PropagatorSample]) -> str:
    lines = ["x0,r,re,im,eps,convention"]
    for s in samples:
        lines.append(
            f"{s.point.x0!r},{s.point.r!r},{s.value.real!r},{s.value.imag!r},{s.regulator!r},{s.convention}"
        )
    return "\n".join(lines) + "\n"


def radial_pairing(
    x0: float, center: float, width: float, regulator: float, part: str = "plus",
    n_samples: int = 241,
) -> complex:
    """Pair D with a spherical shell profile exp(-(r-center)^2 / 2 width^2).

    ``part="commutator"`` pairs D+ - D- (the light-cone supported part) instead
    of D+ alone.
    """
    rr = np.linspace(max(center - 6 * width, 1e-6), center + 6 * width, n_samples)
    vals = np.array([d0_plus(SpacetimePoint(x0, (0.0, 0.0, r)), regulator) for r in rr])
    if part == "commutator":
        vals = vals - (-np.conj(vals))  # D+ - D-
    elif part != "plus":
        raise PropagatorError(f"unknown part {part!r}")
    prof = np.exp(-((rr - center) ** 2) / (2 * width**2))
    return complex(simpson(4 * math.pi * rr**2 * prof * vals, x=rr))


# -- grid side ------------------------------------------------------------------

def smeared_field_operator(
    grid: MomentumGrid, point: SpacetimePoint, s: int, regulator: float,
    spectrum: Callable[[float], float] | None = None,
) -> OperatorSum:
    """(2 pi)^-3/2 sum_k sqrt(w(k) S(|k|) exp(-eps k^2)) exp(i(k.x - k0 x0)) a+(k, s)."""
    x = np.asarray(point.x)
    terms = {}
    for n in grid.indices:
        k0 = grid.k0(n)
        amp = grid.weight(n) * math.exp(-regulator * k0 * k0)
        if spectrum is not None:
            amp *= spectrum(k0)
        if amp <= 0:
            continue
        phase = float(grid.momentum(n) @ x) - k0 * point.x0
        terms[(create(ModeLabel(n, s)),)] = TWO_PI**-1.5 * math.sqrt(amp) * complex(
            math.cos(phase), math.sin(phase)
        )
    return OperatorSum(terms)


@dataclass(frozen=True)
class PropagatorComparison:
    grid_value: complex
    quadrature_value: complex
    deviation: float


def vev_matches_propagator(
    grid: MomentumGrid, x: SpacetimePoint, y: SpacetimePoint, s: int = 1,
    regulator: float = 0.02, spectrum: Callable[[float], float] | None = None,
) -> PropagatorComparison:
    """Compare <0|psi-(y,s) psi+(x,s)|0> on the grid with -i D+(x - y) by quadrature."""
    if y.x0 < x.x0:
        raise PropagatorError("need y0 >= x0 (creation at x precedes detection at y)")
    if grid.convention != RELATIVISTIC:
        raise PropagatorError("the D+ comparison uses the relativistic measure")
    g = inner_product(
        smeared_field_operator(grid, y, s, regulator, spectrum),
        smeared_field_operator(grid, x, s, regulator, spectrum),
    )
    q = -1j * d0_plus(x - y, regulator, spectrum)
    return PropagatorComparison(g, q, abs(g - q) / abs(q))


def galilean_delta_check(
    grid: MomentumGrid, g: np.ndarray, convention: str | None = None
) -> float:
    """||K * g - g|| / ||g|| for the equal-time kernel K(x) = (2 pi)^-d sum_k w(k) e^{ikx}.

    ``g`` holds samples on the position lattice (``grid.positions`` order). The
    galilean measure makes K the lattice delta on band-limited g.
    """
    conv = convention or grid.convention
    sites = np.array(grid.positions, dtype=float) * grid.dx
    g = np.asarray(g, dtype=complex)
    if g.shape != (len(sites),):
        raise PropagatorError("test function must be sampled on the position lattice")
    acc = np.zeros(len(sites), dtype=complex)
    for n in grid.indices:
        if conv == RELATIVISTIC and not any(n):
            continue
        k = grid.momentum(n)
        wave = np.exp(1j * sites @ k)
        coeff = grid.weight(n, conv) * grid.dx**grid.dim / TWO_PI**grid.dim
        acc += coeff * wave * np.vdot(wave, g)
    return float(np.linalg.norm(acc - g) / np.linalg.norm(g))


def gaussian_on_lattice(grid: MomentumGrid, width_sites: float, carrier: int = 0) -> np.ndarray:
    """Periodic-distance Gaussian with a plane-wave carrier, unit L2 norm."""
    p = grid.sites_per_axis
    vals = []
    for site in grid.positions:
        d2 = sum(min(abs(j), p - abs(j)) ** 2 for j in site)
        ph = 2 * math.pi * carrier * site[2] / p
        vals.append(math.exp(-d2 / (2 * width_sites**2)) * complex(math.cos(ph), math.sin(ph)))
    v = np.array(vals)
    return v / np.linalg.norm(v)
