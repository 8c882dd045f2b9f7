"""Teleportation protocol drivers.

Three settings share the machinery here:

* ``run_polarization_teleport``: every momentum is known; only the helicity
  state of the input photon is unknown. Outcomes are post-selected on momentum.
* ``run_full_teleport``: the input is a wave packet on the same grid as the
  EPR pair, so identical-particle exchange contributes to every amplitude.
* ``run_nonrel_limit``: the distinguishable-particle (direct) amplitude with
  galilean weights, which teleports the whole packet.

Three-photon outcome probabilities use the resolution
``sum_{k,s} a+(k,s) P2 a-(k,s) = N`` (N = 3 on three-photon states), so an
outcome (two-photon basis state B, detected mode d) has probability
``|<B| a-(d) psi>|^2 / 3`` for normalized psi.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from itertools import combinations_with_replacement

import numpy as np

from .algebra import (
    ModeLabel,
    OperatorSum,
    OperatorWord,
    create,
    inner_product,
    multiply,
    vev_wick,
)
from .field import (
    BELL_KINDS,
    GALILEAN,
    RELATIVISTIC,
    MomentumGrid,
    PhotonWaveFunction,
    TwoPhotonOperator,
    build_bell_operator,
    build_epr_pair,
    build_labeled_bell,
    position_coefficients,
    smear_unknown_photon,
)

HELICITY_ORDER = (1, -1)  # vector components are (+, -)


class TeleportationError(ValueError):
    """Invalid protocol input."""


class ConsistencyError(RuntimeError):
    """An internal identity that must hold exactly did not."""


@dataclass(frozen=True)
class BellChannel:
    id: str
    corrective_unitary: np.ndarray


@dataclass(frozen=True)
class OutcomeRecord:
    channel: str
    detected_modes: tuple  # (detector mode, two-photon momenta)
    amplitude: complex
    probability: float


@dataclass(frozen=True)
class PostSelectionRule:
    pair_total: tuple
    third: tuple

    def keeps(self, pair_momenta, detector_momentum) -> bool:
        tot = tuple(a + b for a, b in zip(*pair_momenta))
        return tot == tuple(self.pair_total) and tuple(detector_momentum) == tuple(self.third)


@dataclass
class ChannelResult:
    raw: np.ndarray  # conditional helicity amplitudes (+, -)
    corrected: np.ndarray  # normalized, after the corrective unitary
    fidelity: float
    probability: float


@dataclass
class TeleportationReport:
    channels: dict
    retained_fraction: float = 1.0
    exchange_ratio: float | None = None
    extras: dict = field(default_factory=dict)


# -- small helpers ------------------------------------------------------------

def _idx(v) -> tuple:
    t = tuple(int(a) for a in v)
    if len(t) != 3:
        raise TeleportationError(f"momentum index {v!r} must have 3 components")
    return t


def _distinct(*ks):
    if len(set(ks)) != len(ks):
        raise TeleportationError("momenta must be pairwise distinct (k1, k2, k3)")


def _one_photon(mode: ModeLabel, c: complex = 1.0) -> OperatorSum:
    return OperatorSum({(create(mode),): c})


def _helicity_state(k, amps) -> OperatorSum:
    return OperatorSum(
        {(create(ModeLabel(k, s)),): a for s, a in zip(HELICITY_ORDER, amps)}
    )


def _check_unit(fp, fm, tol=1e-10):
    n = abs(fp) ** 2 + abs(fm) ** 2
    if abs(n - 1) > tol:
        raise TeleportationError(f"|f+|^2 + |f-|^2 = {n:.12g}, expected 1")


def _uniform_gauge_phase(angle: float, s: int) -> complex:
    # rotating (e1, e2) by `angle` multiplies w(k, s) by exp(-i s angle) for every k
    return cmath.exp(-1j * s * angle)


def _regauge_uniform(op: OperatorSum, angle: float) -> OperatorSum:
    if angle == 0:
        return op
    out = {}
    for key, c in op.terms.items():
        for g in key:
            p = _uniform_gauge_phase(angle, g.mode.helicity)
            c *= p if g.kind == 0 else p.conjugate()
        out[key] = c
    return OperatorSum(out)


def fidelity(target, state) -> float:
    target = np.asarray(target, dtype=complex)
    state = np.asarray(state, dtype=complex)
    nt, ns = np.linalg.norm(target), np.linalg.norm(state)
    if nt == 0 or ns == 0:
        return 0.0
    return float(abs(np.vdot(target, state)) ** 2 / (nt * ns) ** 2)


# -- labeled (known-momentum) protocol -------------------------------------------

def initial_state(fp, fm, k1, k2, k3, angle: float = 0.0) -> OperatorSum:
    """psi+(f) Psi-(k2, k3) |0>, with the input components given in the angle-0
    helicity labels and expressed in the labels of ``angle``."""
    photon = _helicity_state(k1, (fp, fm))
    epr = build_labeled_bell("Psi-", k2, k3).operator
    return _regauge_uniform(multiply(photon, epr), angle)


@dataclass
class Decomposition:
    conditional: dict  # Bell kind -> np.ndarray (+, -) amplitudes on k3
    residual: OperatorSum

    @property
    def residual_max(self) -> float:
        return self.residual.max_abs()


def decompose_initial_state(fp, fm, k1, k2, k3, angle: float = 0.0) -> Decomposition:
    """Expand the initial state in {Bell(k1, k2) x a+(k3, s)} exactly.

    The basis is orthonormal (all momenta distinct), so coefficients are inner
    products; the residual (state minus its expansion) must vanish.
    """
    k1, k2, k3 = _idx(k1), _idx(k2), _idx(k3)
    _distinct(k1, k2, k3)
    state = initial_state(fp, fm, k1, k2, k3, angle)
    rebuilt = OperatorSum()
    conditional = {}
    for kind in BELL_KINDS:
        bell = build_labeled_bell(kind, k1, k2).operator
        amps = []
        for s in HELICITY_ORDER:
            elem = multiply(bell, _one_photon(ModeLabel(k3, s)))
            c = inner_product(elem, state)
            amps.append(c)
            rebuilt = rebuilt + elem.scale(c)
        conditional[kind] = np.array(amps)
    residual = state - rebuilt
    if residual.max_abs() > 1e-12:
        raise ConsistencyError(f"decomposition residual {residual.max_abs():.3g}")
    return Decomposition(conditional, residual)


def conditional_matrices(k1=(0, 0, 1), k2=(0, 0, 2), k3=(0, 0, -3)) -> dict:
    """Per channel, the linear map C with conditional state = C (f+, f-)."""
    cols = {kind: [] for kind in BELL_KINDS}
    for basis_in in ((1.0, 0.0), (0.0, 1.0)):
        dec = decompose_initial_state(*basis_in, k1, k2, k3)
        for kind in BELL_KINDS:
            cols[kind].append(dec.conditional[kind])
    return {kind: np.column_stack(c) for kind, c in cols.items()}


def corrective_unitary_table() -> dict:
    """Bell kind -> BellChannel with U = C^-1 rescaled to unit determinant modulus."""
    out = {}
    for kind, C in conditional_matrices().items():
        U = np.linalg.inv(C)
        U = U / math.sqrt(abs(np.linalg.det(U)))
        # drop the global phase so real tables print as real
        ref = U.flat[np.flatnonzero(np.abs(U) > 1e-12)[0]]
        U = U * (abs(ref) / ref)
        U[np.abs(U) < 1e-15] = 0.0
        U = np.where(np.abs(U.imag) < 1e-15, U.real, U)
        if not np.allclose(U.conj().T @ U, np.eye(2), atol=1e-12):
            raise ConsistencyError(f"corrective map for {kind} is not unitary")
        out[kind] = BellChannel(kind, U)
    return out


def two_photon_basis(p, q) -> list:
    """Orthonormal basis of the two-photon polarization space on momenta p, q.

    Distinct momenta: the four labeled Bell states. Equal momenta: the three
    symmetric states (Psi+ and Phi+-; Psi- vanishes identically).
    """
    p, q = _idx(p), _idx(q)
    if p != q:
        return [build_labeled_bell(kind, p, q) for kind in BELL_KINDS]
    h = 0.5
    mp, mm = ModeLabel(p, 1), ModeLabel(p, -1)
    w = lambda c, a, b: OperatorWord(c, (create(a), create(b)))  # noqa: E731
    return [
        TwoPhotonOperator("Psi+", (w(1.0, mp, mm),), {"k2": p, "k3": p}),
        TwoPhotonOperator("Phi+", (w(h, mp, mp), w(h, mm, mm)), {"k2": p, "k3": p}),
        TwoPhotonOperator("Phi-", (w(h, mp, mp), w(-h, mm, mm)), {"k2": p, "k3": p}),
    ]


def enumerate_outcomes(state: OperatorSum, momenta, angle: float = 0.0) -> list:
    """All outcome records of the three-photon resolution over ``momenta``.

    ``state`` is a normalized three-photon state supported on those momenta.
    Bell elements are built in the labels of ``angle`` (they are the same
    constructors; the state carries the relabelling).
    """
    momenta = [_idx(k) for k in momenta]
    records = []
    for p, q in combinations_with_replacement(momenta, 2):
        for b in two_photon_basis(p, q):
            bell = b.operator
            for k in momenta:
                for s in HELICITY_ORDER:
                    elem = multiply(bell, _one_photon(ModeLabel(k, s)))
                    amp = inner_product(elem, state) / math.sqrt(3)
                    records.append(
                        OutcomeRecord(b.kind, ((k, s), (p, q)), amp, abs(amp) ** 2)
                    )
    return records


def run_polarization_teleport(fp, fm, k1, k2, k3, angle: float = 0.0) -> TeleportationReport:
    """Known momenta, unknown helicity state (f+, f-) on k1; EPR Psi-(k2, k3).

    All outcomes of the three-photon resolution over {k1, k2, k3} are
    enumerated; post-selection keeps pair total k1 + k2 and detector at k3.
    """
    _check_unit(fp, fm)
    k1, k2, k3 = _idx(k1), _idx(k2), _idx(k3)
    _distinct(k1, k2, k3)
    target = np.array([fp, fm]) * np.array([_uniform_gauge_phase(angle, s) for s in HELICITY_ORDER])
    state = initial_state(fp, fm, k1, k2, k3, angle)
    records = enumerate_outcomes(state, (k1, k2, k3), angle)
    total = sum(r.probability for r in records)
    rule = PostSelectionRule(tuple(a + b for a, b in zip(k1, k2)), k3)
    kept = [r for r in records if rule.keeps(r.detected_modes[1], r.detected_modes[0][0])]
    kept_p = sum(r.probability for r in kept)
    table = corrective_unitary_table()
    channels = {}
    for kind in BELL_KINDS:
        amps = {}
        for r in kept:
            # pairs are enumerated in (k1, k2, k3) order, so slot 1 is k1
            if r.channel == kind and r.detected_modes[1] == (k1, k2):
                s = r.detected_modes[0][1]
                amps[s] = amps.get(s, 0) + r.amplitude
        raw = np.array([amps.get(s, 0j) for s in HELICITY_ORDER])
        prob = sum(r.probability for r in kept if r.channel == kind) / kept_p
        corrected = table[kind].corrective_unitary @ raw
        nrm = np.linalg.norm(corrected)
        corrected = corrected / nrm if nrm else corrected
        channels[kind] = ChannelResult(raw, corrected, fidelity(target, corrected), prob)
    return TeleportationReport(
        channels,
        retained_fraction=kept_p,
        extras={"total_probability": total, "n_outcomes": len(records), "n_retained": len(kept)},
    )


def nonorthogonality_witness(k1=(0, 0, 1), k2=(0, 0, 2), k3=(0, 0, -3)) -> dict:
    """Overlap of two distinct three-photon resolution elements.

    (detect k3, Bell on {k1, k2}) and (detect k1, Bell on {k3, k2}) share the
    occupation pattern, so their vectors overlap although the two-photon Bell
    elements on fixed momenta are orthonormal.
    """
    a = multiply(build_labeled_bell("Psi+", k1, k2).operator, _one_photon(ModeLabel(k3, 1)))
    b = multiply(build_labeled_bell("Psi+", k3, k2).operator, _one_photon(ModeLabel(k1, 1)))
    bells = [build_labeled_bell(kind, k1, k2).operator for kind in BELL_KINDS]
    gram = np.array([[inner_product(x, y) for y in bells] for x in bells])
    return {
        "three_particle_overlap": abs(inner_product(a, b)),
        "two_particle_gram_offdiag": float(np.max(np.abs(gram - np.eye(4)))),
    }


# -- full (wave-packet) protocol ---------------------------------------------------

def _ordered_ket(f: PhotonWaveFunction, epr: TwoPhotonOperator, angle: float):
    """Ordered (f, leg 2, leg 3) words of psi+(f) EPR, and the f support."""
    fsum = _regauge_uniform(smear_unknown_photon(f), angle)
    eprw = [
        OperatorWord(
            w.coefficient
            * _uniform_gauge_phase(angle, w.factors[0].mode.helicity)
            * _uniform_gauge_phase(angle, w.factors[1].mode.helicity),
            w.factors,
        )
        for w in epr.words
    ]
    words = []
    for key, c in fsum.terms.items():
        for w in eprw:
            words.append((c * w.coefficient, key[0].mode, w.factors[0].mode, w.factors[1].mode))
    return words


def _key2(a: ModeLabel, b: ModeLabel) -> tuple:
    return (a, b) if a <= b else (b, a)


def _occ2(key) -> float:
    return 2.0 if key[0] == key[1] else 1.0


@dataclass
class FullOutcomes:
    """Outcome-indexed arrays of the full and factorized amplitudes."""

    labels: list  # (bell kind, slot momenta (p, q), detector mode)
    full: np.ndarray
    direct: np.ndarray
    exchange: np.ndarray
    norm_sq: float  # <psi|psi> before normalization
    fact_norm_sq: float  # sum |direct + exchange|^2 before normalization

    @property
    def factorized(self) -> np.ndarray:
        return self.direct + self.exchange


def _full_outcomes(f: PhotonWaveFunction, epr: TwoPhotonOperator, angle: float = 0.0) -> FullOutcomes:
    _check_same_grid(epr, f.grid)
    words = _ordered_ket(f, epr, angle)
    fsupp = {m.momentum_index for m in f.amplitudes}
    # canonical ket and its norm
    ket3: dict = {}
    for c, a, b, d in words:
        key = tuple(sorted((a, b, d)))
        ket3[key] = ket3.get(key, 0j) + c
    ket_state = OperatorSum({tuple(create(m) for m in k): c for k, c in ket3.items()})
    nsq = inner_product(ket_state, ket_state).real
    scale = 1 / math.sqrt(nsq)
    # a-(d) psi (full) and the ordered conditional pair state given leg 3 in d
    removed: dict = {}
    cond: dict = {}
    for key, c in ket3.items():
        for d in set(key):
            rest = list(key)
            rest.remove(d)
            n_d = key.count(d)
            slot = removed.setdefault(d, {})
            k2 = tuple(rest)
            slot[k2] = slot.get(k2, 0j) + c * n_d * scale
    for c, a, b, d in words:
        slot = cond.setdefault(d, {})
        slot[(a, b)] = slot.get((a, b), 0j) + c * scale
    modes = sorted({m for key in ket3 for m in key})
    momenta = sorted({m.momentum_index for m in modes})
    labels, full, direct, exchange = [], [], [], []
    for p, q in combinations_with_replacement(momenta, 2):
        if p != q and q in fsupp and p not in fsupp:
            p, q = q, p  # slot 1 carries the momentum in f's support
        for b in two_photon_basis(p, q):
            for d in modes:
                rem = removed.get(d, {})
                cd = cond.get(d, {})
                a_full = 0j
                for key, c in b.operator.terms.items():
                    k2 = (key[0].mode, key[1].mode)
                    a_full += c.conjugate() * rem.get(k2, 0j) * _occ2(k2)
                a_dir = a_ex = 0j
                for w in b.words:
                    x1, x2 = w.factors[0].mode, w.factors[1].mode
                    cb = w.coefficient.conjugate()
                    a_dir += cb * cd.get((x1, x2), 0j)
                    a_ex += cb * cd.get((x2, x1), 0j)
                labels.append((b.kind, (p, q), d))
                full.append(a_full / math.sqrt(3))
                direct.append(a_dir)
                exchange.append(a_ex)
    full = np.array(full)
    direct = np.array(direct)
    exchange = np.array(exchange)
    fact_nsq = float(np.sum(np.abs(direct + exchange) ** 2))
    return FullOutcomes(labels, full, direct, exchange, nsq, fact_nsq)


def _check_same_grid(epr: TwoPhotonOperator, grid: MomentumGrid):
    for w in epr.words:
        for g in w.factors:
            if not grid.contains(g.mode.momentum_index):
                raise TeleportationError("EPR pair has modes outside the packet's grid")


def run_full_teleport(
    f: PhotonWaveFunction, epr: TwoPhotonOperator, angle: float = 0.0
) -> TeleportationReport:
    """Full (all contractions) vs factorized amplitudes over every outcome.

    Outcomes are (two-photon basis element, detected mode) over the modes the
    initial state occupies; modes outside carry zero amplitude in both models.
    Factorized probabilities are normalized by their own total; the raw total
    is reported as ``factorized_raw_norm``.
    """
    out = _full_outcomes(f, epr, angle)
    p_full = np.abs(out.full) ** 2
    fact = out.factorized
    p_fact = np.abs(fact) ** 2 / out.fact_norm_sq
    # the factorized model describes outcomes where the detector caught EPR leg 3
    leg3 = epr.support(1)
    leg3_only = np.array([lab[2].momentum_index in leg3 for lab in out.labels])
    scaled = math.sqrt(3) * out.full
    rel = np.abs(scaled - fact) / max(float(np.max(np.abs(scaled[leg3_only]), initial=0.0)), 1e-300)
    channels = {}
    for kind in BELL_KINDS:
        sel = np.array([lab[0] == kind for lab in out.labels])
        channels[kind] = ChannelResult(
            np.zeros(2), np.zeros(2), float("nan"), float(np.sum(p_full[sel]))
        )
    max_ratio, exchange_only = outcome_exchange_ratios(out)
    return TeleportationReport(
        channels,
        exchange_ratio=exchange_ratio(out),
        extras={
            "n_outcomes": len(out.labels),
            "outcome_labels": out.labels,
            "full_probability_sum": float(np.sum(p_full)),
            "factorized_probability_sum": float(np.sum(p_fact)),
            "factorized_raw_norm": out.fact_norm_sq,
            "initial_norm_sq": out.norm_sq,
            "max_rel_full_vs_factorized_leg3_outcomes": float(np.max(rel[leg3_only], initial=0.0)),
            "n_leg3_outcomes": int(np.sum(leg3_only)),
            "max_outcome_exchange_ratio": max_ratio,
            "exchange_only_outcomes": exchange_only,
            "probabilities_full": p_full,
            "probabilities_factorized": p_fact,
        },
    )


def exchange_ratio(out: FullOutcomes) -> float:
    """Aggregate sqrt(sum |exchange|^2 / sum |direct|^2)."""
    d = float(np.sum(np.abs(out.direct) ** 2))
    e = float(np.sum(np.abs(out.exchange) ** 2))
    return math.sqrt(e / d) if d > 0 else 0.0


def outcome_exchange_ratios(out: FullOutcomes, rel_floor: float = 1e-12) -> tuple:
    """(max |exchange|/|direct| over outcomes with a non-negligible direct part,
    number of outcomes with exchange but no direct part)."""
    d, e = np.abs(out.direct), np.abs(out.exchange)
    floor = rel_floor * max(float(np.max(d, initial=0.0)), float(np.max(e, initial=0.0)), 1e-300)
    has_d = d > floor
    ratio = float(np.max(e[has_d] / d[has_d], initial=0.0))
    return ratio, int(np.sum(~has_d & (e > floor)))


def exchange_term(f: PhotonWaveFunction, epr: TwoPhotonOperator, outcome) -> tuple:
    """(direct, exchange) parts of the two-pair contraction for one outcome.

    ``outcome = (bell, detector)``: ``bell`` a TwoPhotonOperator whose ordered
    words give the slot assignment, ``detector`` the detected ModeLabel. Direct
    pairs slot 1 with the input photon and slot 2 with EPR leg 2; exchange
    swaps them. Leg 3 must sit in the detected mode.
    """
    bell, detector = outcome
    direct = exchange = 0j
    for c, a, b, d in _ordered_ket(f, epr, 0.0):
        if d != detector:
            continue
        for w in bell.words:
            x1, x2 = w.factors[0].mode, w.factors[1].mode
            cb = w.coefficient.conjugate() * c
            if (x1, x2) == (a, b):
                direct += cb
            if (x1, x2) == (b, a):
                exchange += cb
    return direct, exchange


def two_pair_vev(f: PhotonWaveFunction, epr: TwoPhotonOperator, outcome) -> complex:
    """Unrestricted contraction of the Bell bra with (input, leg 2), leg 3 fixed
    to the detector; evaluated by explicit Wick pairing enumeration."""
    bell, detector = outcome
    total = 0j
    for c, a, b, d in _ordered_ket(f, epr, 0.0):
        if d != detector:
            continue
        ket = OperatorWord(c, (create(a), create(b)))
        for w in bell.words:
            total += vev_wick(w.adjoint() * ket)
    return total


def exchange_sweep(
    grid: MomentumGrid, epr_support, width: int, steps: int = 5, sigma_sites: float = 1.0
) -> list:
    """Slide a packet window from full overlap with EPR leg 2 to disjoint.

    Returns (offset, aggregate exchange ratio) pairs.
    """
    epr = build_epr_pair(grid, support=epr_support)
    leg2 = sorted(epr.support(0), key=lambda n: n[2])
    start = leg2[0][2]
    out = []
    offsets = np.linspace(0, width, steps).round().astype(int)
    for off in offsets:
        idx = [(0, 0, start + off + j) for j in range(width)]
        if not all(grid.contains(n) for n in idx):
            raise TeleportationError("sweep window leaves the grid")
        centre = start + off + (width - 1) / 2
        amps = {
            ModeLabel(n, s): math.exp(-((n[2] - centre) ** 2) / (4 * sigma_sites**2)) * a
            for n in idx for s, a in zip(HELICITY_ORDER, (1.0, 0.5j))
        }
        f = PhotonWaveFunction(grid, amps).normalized()
        out.append((int(off), exchange_ratio(_full_outcomes(f, epr))))
    return out


# -- galilean limit -------------------------------------------------------------

@dataclass
class NonrelResult:
    amplitudes: np.ndarray  # shape (sites, 2): columns (+, -)
    expected: np.ndarray
    fidelity: float
    max_deviation: float
    sites: list


def _position_input(f_coeffs: dict, grid: MomentumGrid) -> np.ndarray:
    """F(site, s) = <psi+(site, s)|f> with unit (orthonormal) position states."""
    p = grid.sites_per_axis
    sites = grid.positions
    out = np.zeros((len(sites), 2), dtype=complex)
    for (n, s), c in f_coeffs.items():
        col = HELICITY_ORDER.index(s)
        for i, site in enumerate(sites):
            ph = -2 * math.pi * sum(a * b for a, b in zip(n, site)) / p
            out[i, col] += c * complex(math.cos(ph), math.sin(ph))
    return out / math.sqrt(grid.n_sites)


def _state_coeffs(f: PhotonWaveFunction) -> dict:
    s = smear_unknown_photon(f)
    return {(k[0].mode.momentum_index, k[0].mode.helicity): c for k, c in s.terms.items()}


def direct_amplitude_table(grid, f_coeffs, Y, P, X, Q, angle: float = 0.0) -> np.ndarray:
    """A(site, s) = sum <slot1|f> <slot2|EPR leg 1> <psi(site, s)|EPR leg 2>.

    EPR = Psi-(Y, P) and the Bell bra Psi-(X, Q), both on ``grid`` with its
    own measure; the detector uses the grid's position operators.
    """
    epr = build_bell_operator("Psi-", grid, Y, P)
    bell = build_bell_operator("Psi-", grid, X, Q)
    ph = lambda m: _uniform_gauge_phase(angle, m.helicity)  # noqa: E731
    by_leg1: dict = {}
    for w in epr.words:
        m1, m2 = w.factors[0].mode, w.factors[1].mode
        by_leg1.setdefault(m1, []).append((w.coefficient * ph(m1) * ph(m2), m2))
    fmap = {ModeLabel(n, s): c * _uniform_gauge_phase(angle, s) for (n, s), c in f_coeffs.items()}
    T: dict = {}
    for w in bell.words:
        b1, b2 = w.factors[0].mode, w.factors[1].mode
        fv = fmap.get(b1)
        if fv is None:
            continue
        for ce, m2 in by_leg1.get(b2, ()):
            T[m2] = T.get(m2, 0j) + w.coefficient.conjugate() * fv * ce
    sites = grid.positions
    out = np.zeros((len(sites), 2), dtype=complex)
    for i, site in enumerate(sites):
        u = position_coefficients(grid, site)
        for m2, t in T.items():
            out[i, HELICITY_ORDER.index(m2.helicity)] += u[m2.momentum_index].conjugate() * t
    return out


def expected_nonrel_table(grid, F, Y, P, X, Q) -> np.ndarray:
    """-1/2 exp(i (x+X+Y) Q - i (x+Y) P) F(x+X+Y, s), periodic on the lattice."""
    p = grid.sites_per_axis
    sites = grid.positions
    index = {site: i for i, site in enumerate(sites)}
    out = np.zeros_like(F)
    for i, site in enumerate(sites):
        src = grid.wrap(tuple(a + b + c for a, b, c in zip(site, X, Y)))
        shifted = tuple(a + b for a, b in zip(site, Y))
        phase = 2 * math.pi * (
            sum(a * b for a, b in zip(src, Q)) - sum(a * b for a, b in zip(shifted, P))
        ) / p
        out[i] = -0.5 * cmath.exp(1j * phase) * F[index[src]]
    return out


def _aligned_deviation(a: np.ndarray, b: np.ndarray) -> tuple:
    an = a / np.linalg.norm(a)
    bn = b / np.linalg.norm(b)
    ov = np.vdot(bn, an)
    phase = ov / abs(ov) if abs(ov) > 0 else 1.0
    return float(abs(ov) ** 2), float(np.max(np.abs(an - phase * bn)))


def run_nonrel_limit(f: PhotonWaveFunction, Y, P, X, Q, angle: float = 0.0) -> NonrelResult:
    """Teleported packet under the galilean measure vs the shifted, phased input."""
    grid = f.grid
    if grid.convention != GALILEAN:
        raise TeleportationError("the non-relativistic limit requires the galilean measure")
    Y, P, X, Q = (tuple(int(v) for v in t) for t in (Y, P, X, Q))
    coeffs = _state_coeffs(f)
    A = direct_amplitude_table(grid, coeffs, Y, P, X, Q, angle)
    F = _position_input({k: c * _uniform_gauge_phase(angle, k[1]) for k, c in coeffs.items()}, grid)
    E = expected_nonrel_table(grid, F, Y, P, X, Q)
    fid, dev = _aligned_deviation(A, E)
    return NonrelResult(A, E, fid, dev, list(grid.positions))


def relativistic_contrast(f: PhotonWaveFunction, Y, P, X, Q) -> NonrelResult:
    """Same input state vector on the relativistic measure, same oracle."""
    gal = f.grid
    rel = MomentumGrid(gal.spacing, gal.half_extent, RELATIVISTIC, gal.collinear)
    coeffs = _state_coeffs(f)
    if any(not any(n) and abs(c) > 0 for (n, s), c in coeffs.items()):
        raise TeleportationError("contrast input must vanish at k = 0")
    Y, P, X, Q = (tuple(int(v) for v in t) for t in (Y, P, X, Q))
    A = direct_amplitude_table(rel, coeffs, Y, P, X, Q)
    F = _position_input(coeffs, gal)
    E = expected_nonrel_table(gal, F, Y, P, X, Q)
    fid, dev = _aligned_deviation(A, E)
    return NonrelResult(A, E, fid, dev, list(gal.positions))
