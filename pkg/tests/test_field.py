import math

import numpy as np
import pytest

from photeleport.algebra import ModeLabel, OperatorSum, create, inner_product, norm
from photeleport.field import (
    BELL_KINDS,
    FieldError,
    HELICITIES,
    MomentumGrid,
    PhotonWaveFunction,
    build_bell_operator,
    build_bell_operator_bruteforce,
    build_epr_pair,
    build_labeled_bell,
    build_polarization_basis,
    check_one_particle_resolution,
    field_operator,
    fourier_to_position,
    gaussian_packet,
    helicity_vectors,
    plane_wave,
    polarization_variation,
    position_table_csv,
    smear_unknown_photon,
)

TOL = 1e-12


def _random_unit(rng):
    v = rng.normal(size=3)
    return v / np.linalg.norm(v)


# -- polarization geometry ----------------------------------------------------

def test_basis_degenerate_axis():
    b = build_polarization_basis([0, 0, 1])
    assert np.allclose(b.e1, [1, 0, 0]) and np.allclose(b.e2, [0, 1, 0])
    b = build_polarization_basis([0, 0, -2])
    assert np.allclose(b.e1, [1, 0, 0])
    assert np.allclose(np.cross(b.e1, b.e2), b.khat)


def test_basis_x_axis():
    b = build_polarization_basis([1, 0, 0])
    assert np.allclose(b.e1, [0, 1, 0])
    assert np.allclose(b.e2, [0, 0, 1])


def test_basis_zero_momentum():
    with pytest.raises(FieldError):
        build_polarization_basis([0, 0, 0])


@pytest.mark.parametrize("angle", [0.0, 0.7])
def test_basis_and_helicity_invariants(angle):
    rng = np.random.default_rng(5)
    for _ in range(100):
        k = _random_unit(rng) * rng.uniform(0.1, 5)
        b = build_polarization_basis(k, angle)
        assert abs(b.e1 @ b.e2) < TOL and abs(b.e1 @ b.khat) < TOL and abs(b.e2 @ b.khat) < TOL
        assert np.allclose(np.cross(b.e1, b.e2), b.khat, atol=TOL)
        w = helicity_vectors(b)
        for s in HELICITIES:
            for t in HELICITIES:
                assert abs(np.vdot(w[s], w[t]) - (s == t)) < TOL
            assert abs(b.khat @ w[s]) < TOL
            assert np.allclose(np.cross(b.khat, w[s]), -1j * s * w[s], atol=TOL)


def test_helicity_z():
    w = helicity_vectors(build_polarization_basis([0, 0, 1]))
    assert np.allclose(w.plus, np.array([1, 1j, 0]) / math.sqrt(2))


def test_non_factorization_witness():
    g = MomentumGrid(1.0, 1)
    assert polarization_variation(g) > 0.1
    # on one axis the helicity vectors are constant per direction sign only
    assert polarization_variation(MomentumGrid(1.0, 2, collinear=True)) > 0


# -- grid ---------------------------------------------------------------------

def test_grid_conventions():
    rel = MomentumGrid(0.5, 2)
    assert (0, 0, 0) not in rel.index_set and len(rel.indices) == 124
    gal = MomentumGrid(0.5, 2, "galilean", collinear=True)
    assert (0, 0, 0) in gal.index_set and len(gal.indices) == 5
    assert rel.weight((0, 0, 2)) == pytest.approx(0.125 / 2)
    assert gal.weight((0, 0, 2)) == pytest.approx(0.5)
    assert gal.wrap((0, 0, 3)) == (0, 0, -2)
    with pytest.raises(FieldError):
        MomentumGrid(0.0, 2)


# -- wave packets -------------------------------------------------------------

def test_smear_single_mode():
    g = MomentumGrid(0.5, 3, collinear=True)
    f = plane_wave(g, (0, 0, 1))
    s = smear_unknown_photon(f)
    assert len(s) == 1 and abs(norm(s) - 1) < 1e-12


def test_smear_equal_helicities():
    g = MomentumGrid(0.5, 3, collinear=True)
    f = plane_wave(g, (0, 0, 1), (1 / math.sqrt(2), 1 / math.sqrt(2)))
    s = smear_unknown_photon(f)
    assert len(s) == 2 and abs(inner_product(s, s) - 1) < 1e-12


def test_smear_rejects_unnormalized():
    g = MomentumGrid(0.5, 3, collinear=True)
    f = PhotonWaveFunction(g, {ModeLabel((0, 0, 1), 1): 3.0})
    with pytest.raises(FieldError):
        smear_unknown_photon(f)


def test_wavefunction_rejects_origin_on_relativistic_grid():
    g = MomentumGrid(0.5, 3, collinear=True)
    with pytest.raises(FieldError):
        PhotonWaveFunction(g, {ModeLabel((0, 0, 0), 1): 1.0})


def test_gaussian_packet_norm_and_peak():
    g = MomentumGrid(0.25, 12, collinear=True)
    f = gaussian_packet(g, (0, 0, 6), 2 * g.spacing, (1, 0.5j), x_center=(0, 0, 5), reference_time=0.0)
    assert abs(norm(smear_unknown_photon(f)) - 1) < 1e-10
    table = fourier_to_position(f)
    peak = max(table, key=lambda key: abs(table[key]))
    assert peak == ((0, 0, 5), 1)


def test_plane_wave_position_magnitude_constant():
    g = MomentumGrid(0.5, 4, collinear=True)
    table = fourier_to_position(plane_wave(g, (0, 0, 2)))
    mags = [abs(v) for (site, s), v in table.items() if s == 1]
    assert max(mags) - min(mags) < 1e-12


def test_gaussian_position_width_reciprocal():
    # galilean measure: |F(x)|^2 is a sampled Gaussian of variance 1/(4 sigma^2)
    g = MomentumGrid(0.2, 40, "galilean", collinear=True)
    sigma = 1.0
    f = gaussian_packet(g, (0, 0, 0), sigma)
    table = fourier_to_position(f)
    xs = np.array([site[2] * g.dx for (site, s) in table if s == 1])
    ps = np.array([abs(v) ** 2 for (site, s), v in table.items() if s == 1])
    var = float(np.sum(ps * xs**2) / np.sum(ps))
    assert var == pytest.approx(1 / (4 * sigma**2), rel=1e-6)


def test_parseval_random_packets():
    rng = np.random.default_rng(3)
    for conv in ("relativistic", "galilean"):
        g = MomentumGrid(0.4, 3, conv)
        for _ in range(10):
            amps = {m: complex(*rng.normal(size=2)) for m in g.modes() if rng.random() < 0.3}
            f = PhotonWaveFunction(g, amps)
            pos = sum(abs(v) ** 2 for v in fourier_to_position(f).values())
            assert abs(pos - f.norm_sq()) < 1e-10 * max(1, f.norm_sq())


def test_position_csv():
    g = MomentumGrid(0.5, 1, collinear=True)
    text = position_table_csv(fourier_to_position(plane_wave(g, (0, 0, 1))))
    lines = text.splitlines()
    assert lines[0] == "nx,ny,nz,helicity,re,im" and len(lines) == 1 + 3 * 2


# -- EPR and Bell operators ---------------------------------------------------

def test_epr_single_pair():
    g = MomentumGrid(1.0, 1, collinear=True)
    e = build_epr_pair(g, x0=0.3, support=[(0, 0, 1)])
    assert len(e.operator) == 1 and abs(e.norm() - 1) < 1e-12


def test_epr_zero_total_momentum_and_norm():
    g = MomentumGrid(0.5, 2)
    e = build_epr_pair(g, x0=0.7)
    assert abs(e.norm() - 1) < 1e-12
    for key in e.operator.terms:
        tot = np.sum([gen.mode.momentum_index for gen in key], axis=0)
        assert tuple(tot) == (0, 0, 0)


def test_epr_rejects_asymmetric_grid():
    g = MomentumGrid(0.5, 2, lower_extent=-1, collinear=True)
    with pytest.raises(FieldError):
        build_epr_pair(g)


def test_epr_matches_symmetric_bell_at_origin():
    # Psi-(Y=0, P=0) vanishes by bosonic symmetry; the EPR state is Psi+(0, 0)
    g = MomentumGrid(0.5, 2, collinear=True)
    e = build_epr_pair(g)
    assert build_bell_operator("Psi-", g).operator.max_abs() < 1e-15
    plus = build_bell_operator("Psi+", g).normalized()
    assert abs(abs(inner_product(plus.operator, e.operator)) - 1) < 1e-12
    for kind in ("Phi+", "Phi-"):
        assert abs(inner_product(build_bell_operator(kind, g).operator, e.operator)) < 1e-12


def test_bell_rejects_out_of_range_P():
    g = MomentumGrid(0.5, 2, collinear=True)
    with pytest.raises(FieldError):
        build_bell_operator("Psi+", g, P=(0, 0, 3))


@pytest.mark.parametrize("conv", ["galilean", "relativistic"])
def test_bell_matches_position_space_construction(conv):
    g = MomentumGrid(0.7, 1, conv, collinear=True)
    for kind in BELL_KINDS:
        for Y in g.positions:
            for P in g.indices:
                a = build_bell_operator(kind, g, Y, P, x0=0.2).operator
                b = build_bell_operator_bruteforce(kind, g, Y, P, x0=0.2)
                assert (a - b).max_abs() < 1e-12


def test_bell_plus_minus_orthogonal_and_gram():
    g = MomentumGrid(0.5, 3, collinear=True)
    rng = np.random.default_rng(8)
    count = 0
    while count < 5:
        Y = (0, 0, int(rng.integers(1, 4)))
        P = (0, 0, int(rng.integers(-3, 4)))
        ops = [build_bell_operator(k, g, Y, P) for k in BELL_KINDS]
        assert abs(inner_product(ops[1].operator, ops[0].operator)) < 1e-12
        ops = [o.normalized().operator for o in ops]
        gram = np.array([[inner_product(a, b) for b in ops] for a in ops])
        assert np.allclose(gram, np.eye(4), atol=1e-10)
        count += 1


def test_bell_bosonic_symmetry():
    g = MomentumGrid(0.5, 2, collinear=True)
    for kind in BELL_KINDS:
        op = build_bell_operator(kind, g, (0, 0, 1), (0, 0, 1))
        assert op.swapped().operator == op.operator
    e = build_epr_pair(g)
    assert e.swapped().operator == e.operator


def _random_two_photon(g, rng):
    modes = g.modes()
    terms = {}
    for i, a in enumerate(modes):
        for b in modes[i:]:
            terms[tuple(sorted((create(a), create(b))))] = complex(*rng.normal(size=2))
    return OperatorSum(terms)


def _weighted(state, g):
    # apply the one-particle density rho(k) = w(k) / spacing**d to each photon
    out = {}
    for key, c in state.terms.items():
        for gen in key:
            c *= g.weight(gen.mode.momentum_index) / g.spacing**g.dim
        out[key] = c
    return OperatorSum(out)


@pytest.mark.parametrize("conv", ["galilean", "relativistic"])
def test_two_particle_completeness(conv):
    g = MomentumGrid(1.0, 1, conv, collinear=True)
    bells = [
        build_bell_operator(kind, g, Y, P).operator
        for kind in BELL_KINDS for Y in g.positions for P in g.positions
    ]
    rng = np.random.default_rng(2)
    for _ in range(10):
        u, v = _random_two_photon(g, rng), _random_two_photon(g, rng)
        recon = sum(inner_product(u, b) * inner_product(b, v) for b in bells) / (2 * g.n_sites)
        want = inner_product(u, _weighted(v, g)) if conv == "relativistic" else inner_product(u, v)
        assert abs(recon - want) < 1e-8


def test_labeled_bell_gram_and_completeness():
    k2, k3 = (0, 0, 1), (0, 0, -2)
    ops = [build_labeled_bell(kind, k2, k3).operator for kind in BELL_KINDS]
    gram = np.array([[inner_product(a, b) for b in ops] for a in ops])
    assert np.allclose(gram, np.eye(4), atol=1e-12)
    basis = [
        OperatorSum({tuple(sorted((create(ModeLabel(k2, s)), create(ModeLabel(k3, t))))): 1.0})
        for s in HELICITIES for t in HELICITIES
    ]
    proj = np.zeros((4, 4), dtype=complex)
    for b in ops:
        col = np.array([inner_product(e, b) for e in basis])
        proj += np.outer(col, col.conj())
    assert np.allclose(proj, np.eye(4), atol=1e-12)
    same_hel = basis[0]
    assert abs(inner_product(ops[0], same_hel)) < 1e-15


def test_labeled_bell_rejects_equal_momenta():
    with pytest.raises(FieldError):
        build_labeled_bell("Psi-", (0, 0, 1), (0, 0, 1))


# -- one-particle resolution --------------------------------------------------

def test_one_particle_resolution_momentum():
    for g in (MomentumGrid(0.5, 2), MomentumGrid(0.5, 4, "galilean", collinear=True)):
        assert check_one_particle_resolution(g, rng=np.random.default_rng(1)) < 1e-10


def test_one_particle_resolution_position_galilean():
    g = MomentumGrid(0.5, 3, "galilean", collinear=True)
    assert check_one_particle_resolution(g, representation="position") < 1e-10


def test_resolution_trivial_cases():
    g = MomentumGrid(0.5, 2, collinear=True)
    m_plus = OperatorSum({(create(ModeLabel((0, 0, 1), 1)),): 1.0})
    m_minus = OperatorSum({(create(ModeLabel((0, 0, 1), -1)),): 1.0})
    basis = [OperatorSum({(create(m),): 1.0}) for m in g.modes()]
    same = sum(inner_product(m_plus, b) * inner_product(b, m_plus) for b in basis)
    cross = sum(inner_product(m_plus, b) * inner_product(b, m_minus) for b in basis)
    assert same == 1 and abs(cross) < 1e-12


def test_position_operators_unit_norm_galilean():
    g = MomentumGrid(0.5, 3, "galilean", collinear=True)
    psi = field_operator(g, (0, 0, 2), 1)
    assert abs(norm(psi) - 1) < 1e-12
