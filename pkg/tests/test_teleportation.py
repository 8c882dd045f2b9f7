import math

import numpy as np
import pytest

from photeleport.algebra import ModeLabel
from photeleport.field import (
    BELL_KINDS,
    MomentumGrid,
    PhotonWaveFunction,
    build_epr_pair,
    gaussian_packet,
)
from photeleport.teleportation import (
    TeleportationError,
    conditional_matrices,
    corrective_unitary_table,
    decompose_initial_state,
    exchange_sweep,
    exchange_term,
    nonorthogonality_witness,
    relativistic_contrast,
    run_full_teleport,
    run_nonrel_limit,
    run_polarization_teleport,
    two_pair_vev,
    two_photon_basis,
)

K1, K2, K3 = (0, 0, 1), (0, 0, 2), (0, 0, -3)

# conditional state = C (f+, f-), frozen from the exact expansion
SIGN_TABLE = {
    "Psi-": [[-0.5, 0], [0, -0.5]],
    "Psi+": [[-0.5, 0], [0, 0.5]],
    "Phi-": [[0, 0.5], [0.5, 0]],
    "Phi+": [[0, -0.5], [0.5, 0]],
}


def haar_qubit(rng):
    z = rng.normal(size=2) + 1j * rng.normal(size=2)
    return z / np.linalg.norm(z)


TOMO = [
    (1, 0), (0, 1),
    (1 / math.sqrt(2), 1 / math.sqrt(2)), (1 / math.sqrt(2), -1 / math.sqrt(2)),
    (1 / math.sqrt(2), 1j / math.sqrt(2)), (1 / math.sqrt(2), -1j / math.sqrt(2)),
]


# -- decomposition ------------------------------------------------------------

def test_sign_table_frozen():
    mats = conditional_matrices(K1, K2, K3)
    for kind, C in mats.items():
        assert np.array_equal(np.round(C, 14), np.array(SIGN_TABLE[kind], dtype=complex))


def test_decomposition_examples():
    dec = decompose_initial_state(1, 0, K1, K2, K3)
    c = dec.conditional
    assert abs(c["Psi-"][1]) == 0 and abs(c["Psi-"][0]) > 0
    assert abs(c["Phi-"][0]) == 0 and abs(c["Phi-"][1]) > 0
    mags = {abs(np.linalg.norm(v)) for v in c.values()}
    assert max(mags) - min(mags) < 1e-15


def test_decomposition_residual_random():
    rng = np.random.default_rng(11)
    for _ in range(100):
        fp, fm = haar_qubit(rng)
        dec = decompose_initial_state(fp, fm, K1, K2, K3)
        assert dec.residual_max < 1e-12
        for kind, C in SIGN_TABLE.items():
            assert np.allclose(dec.conditional[kind], np.array(C) @ [fp, fm], atol=1e-14)


def test_decomposition_rejects_coincident_momenta():
    with pytest.raises(TeleportationError):
        decompose_initial_state(1, 0, K1, K1, K3)


def test_corrective_table():
    table = corrective_unitary_table()
    U = {k: v.corrective_unitary for k, v in table.items()}
    assert np.allclose(U["Psi-"], np.eye(2))
    assert np.allclose(U["Psi+"], np.diag([1, -1])) or np.allclose(U["Psi+"], np.diag([-1, 1]))
    for kind in ("Phi-", "Phi+"):
        assert abs(U[kind][0, 0]) == 0 and abs(U[kind][1, 1]) == 0
    for u in U.values():
        assert np.allclose(u.conj().T @ u, np.eye(2), atol=1e-12)
    # one fixed unitary per channel restores every tomographic input
    mats = conditional_matrices()
    for kind, C in mats.items():
        for f in TOMO:
            out = U[kind] @ C @ np.array(f)
            assert abs(abs(np.vdot(out / np.linalg.norm(out), f)) - 1) < 1e-12


# -- polarization protocol ----------------------------------------------------

def test_polarization_basis_input():
    r = run_polarization_teleport(1, 0, K1, K2, K3)
    for ch in r.channels.values():
        assert abs(ch.fidelity - 1) < 1e-10 and abs(ch.probability - 0.25) < 1e-10
    assert abs(r.extras["total_probability"] - 1) < 1e-12
    assert abs(r.retained_fraction - 1 / 3) < 1e-12


def test_polarization_psi_minus_raw_is_input():
    f = np.array([1, 1]) / math.sqrt(2)
    r = run_polarization_teleport(*f, K1, K2, K3)
    raw = r.channels["Psi-"].raw
    assert abs(abs(np.vdot(raw / np.linalg.norm(raw), f)) - 1) < 1e-12


def test_polarization_haar_random():
    rng = np.random.default_rng(4)
    fids, probs = [], []
    for _ in range(100):
        r = run_polarization_teleport(*haar_qubit(rng), K1, K2, K3)
        fids += [c.fidelity for c in r.channels.values()]
        probs += [c.probability for c in r.channels.values()]
    assert min(fids) >= 1 - 1e-10 and max(fids) <= 1 + 1e-10
    assert max(abs(p - 0.25) for p in probs) < 1e-10


def test_polarization_3d_momenta():
    r = run_polarization_teleport(0.6, 0.8j, (1, 0, 0), (0, 1, 1), (-1, -1, 0))
    for ch in r.channels.values():
        assert abs(ch.fidelity - 1) < 1e-10 and abs(ch.probability - 0.25) < 1e-10


def test_polarization_errors():
    with pytest.raises(TeleportationError):
        run_polarization_teleport(1, 1, K1, K2, K3)
    with pytest.raises(TeleportationError):
        run_polarization_teleport(1, 0, K1, K2, K2)


def test_two_photon_basis_sizes():
    assert len(two_photon_basis(K1, K2)) == 4
    diag = two_photon_basis(K1, K1)
    assert len(diag) == 3
    for b in diag:
        assert abs(b.norm() - 1) < 1e-12


def test_nonorthogonality():
    w = nonorthogonality_witness()
    assert w["three_particle_overlap"] > 1e-6
    assert w["two_particle_gram_offdiag"] < 1e-12


# -- full protocol ------------------------------------------------------------

@pytest.fixture(scope="module")
def grid():
    return MomentumGrid(0.5, 9, collinear=True)


LEG2 = [(0, 0, n) for n in range(1, 5)]


def _window(grid, ns, centre):
    amps = {
        ModeLabel((0, 0, n), s): math.exp(-((n - centre) ** 2) / 4) * a
        for n in ns for s, a in ((1, 1.0), (-1, 0.5j))
    }
    return PhotonWaveFunction(grid, amps).normalized()


def test_full_disjoint_supports(grid):
    epr = build_epr_pair(grid, support=LEG2)
    f = _window(grid, range(5, 10), 7)
    r = run_full_teleport(f, epr)
    assert r.extras["max_rel_full_vs_factorized_leg3_outcomes"] < 1e-10
    assert r.extras["n_leg3_outcomes"] > 0
    assert r.extras["max_outcome_exchange_ratio"] < 1e-10
    assert r.exchange_ratio == 0
    assert abs(r.extras["full_probability_sum"] - 1) < 1e-8
    assert abs(r.extras["factorized_probability_sum"] - 1) < 1e-8


def test_full_overlap_contrast(grid):
    epr = build_epr_pair(grid, support=LEG2)
    on_leg3 = _window(grid, range(-4, 0), -2.5)
    r = run_full_teleport(on_leg3, epr)
    assert r.extras["max_rel_full_vs_factorized_leg3_outcomes"] > 0.1
    on_leg2 = _window(grid, range(1, 5), 2.5)
    r = run_full_teleport(on_leg2, epr)
    assert r.exchange_ratio > 0.1
    assert abs(r.extras["full_probability_sum"] - 1) < 1e-8


def test_full_whole_grid_epr(grid):
    f = gaussian_packet(grid, (0, 0, 4), 1.0, (1, 0))
    r = run_full_teleport(f, build_epr_pair(grid))
    assert abs(r.extras["full_probability_sum"] - 1) < 1e-8
    assert sum(c.probability for c in r.channels.values()) <= 1 + 1e-12


def test_full_grid_mismatch(grid):
    other = MomentumGrid(0.5, 12, collinear=True)
    epr = build_epr_pair(other, support=[(0, 0, 11)])
    with pytest.raises(TeleportationError):
        run_full_teleport(_window(grid, range(5, 10), 7), epr)


def test_exchange_identical_single_mode(grid):
    p = (0, 0, 2)
    epr = build_epr_pair(grid, support=[p])
    f = PhotonWaveFunction(grid, {ModeLabel(p, 1): 1.0}).normalized()
    bell = two_photon_basis(p, p)[1]  # (a+(p,+)^2 + a+(p,-)^2) / 2
    d, e = exchange_term(f, epr, (bell, ModeLabel((0, 0, -2), -1)))
    assert abs(d) > 0 and abs(abs(e) - abs(d)) < 1e-15


def test_exchange_sum_matches_wick(grid):
    rng = np.random.default_rng(21)
    modes = [ModeLabel((0, 0, n), s) for n in range(-4, 5) if n for s in (1, -1)]
    nonzero = 0
    for _ in range(50):
        support = [(0, 0, int(n)) for n in rng.choice([1, 2, 3, 4], size=2, replace=False)]
        epr = build_epr_pair(grid, support=support)
        amps = {m: complex(*rng.normal(size=2)) for m in modes if rng.random() < 0.4}
        amps[modes[0]] = 1.0
        f = PhotonWaveFunction(grid, amps).normalized()
        p, q = (int(x) for x in rng.choice([1, 2, 3, 4, -1, -2], size=2))
        bell = two_photon_basis((0, 0, p), (0, 0, q))[int(rng.integers(0, 3))]
        det = ModeLabel(sorted(epr.support(1))[0], -1)
        d, e = exchange_term(f, epr, (bell, det))
        assert abs((d + e) - two_pair_vev(f, epr, (bell, det))) < 1e-12
        nonzero += abs(d + e) > 1e-6
    assert nonzero >= 5


def test_exchange_sweep_monotone(grid):
    sweep = exchange_sweep(grid, LEG2, width=4, steps=5)
    ratios = [r for _, r in sweep]
    assert ratios[0] > 0.1 and ratios[-1] < 1e-10
    assert all(b < a for a, b in zip(ratios, ratios[1:]))


# -- non-relativistic limit ---------------------------------------------------

@pytest.fixture(scope="module")
def gal_packet():
    g = MomentumGrid(0.4, 16, "galilean", collinear=True)
    f = gaussian_packet(g, (0, 0, 5), 0.8, (0.6, 0.8j), x_center=(0, 0, 3))
    amps = {m: c for m, c in f.amplitudes.items() if any(m.momentum_index)}
    return PhotonWaveFunction(g, amps).normalized()


def test_nonrel_trivial_shift(gal_packet):
    r = run_nonrel_limit(gal_packet, (0, 0, 0), (0, 0, 2), (0, 0, 0), (0, 0, 2))
    assert r.max_deviation < 1e-8 and r.fidelity >= 1 - 1e-8
    # amplitude equals -1/2 times the input packet, no phase left
    assert np.allclose(r.amplitudes, r.expected, atol=1e-12)


@pytest.mark.parametrize(
    "Y,P,X,Q",
    [((0, 0, 4), (0, 0, -3), (0, 0, -6), (0, 0, 5)), ((0, 0, 1), (0, 0, 7), (0, 0, 11), (0, 0, -9))],
)
def test_nonrel_generic(gal_packet, Y, P, X, Q):
    r = run_nonrel_limit(gal_packet, Y, P, X, Q)
    assert r.max_deviation < 1e-8 and r.fidelity >= 1 - 1e-8
    c = relativistic_contrast(gal_packet, Y, P, X, Q)
    assert c.fidelity < r.fidelity - 1e-3


def test_nonrel_requires_galilean():
    g = MomentumGrid(0.4, 8, collinear=True)
    f = gaussian_packet(g, (0, 0, 3), 0.5)
    with pytest.raises(TeleportationError):
        run_nonrel_limit(f, (0, 0, 1), (0, 0, 0), (0, 0, 0), (0, 0, 0))


# -- gauge convention ---------------------------------------------------------

def test_gauge_invariance_polarization():
    a = run_polarization_teleport(0.6, 0.8j, K1, K2, K3)
    b = run_polarization_teleport(0.6, 0.8j, K1, K2, K3, angle=0.83)
    for kind in BELL_KINDS:
        assert abs(a.channels[kind].fidelity - b.channels[kind].fidelity) < 1e-10
        assert abs(a.channels[kind].probability - b.channels[kind].probability) < 1e-10


def test_gauge_invariance_full(grid):
    epr = build_epr_pair(grid, support=LEG2)
    f = _window(grid, range(1, 5), 2.5)
    a = run_full_teleport(f, epr)
    b = run_full_teleport(f, epr, angle=0.83)
    assert np.max(np.abs(a.extras["probabilities_full"] - b.extras["probabilities_full"])) < 1e-10
    assert abs(a.exchange_ratio - b.exchange_ratio) < 1e-10


def test_gauge_invariance_nonrel(gal_packet):
    args = ((0, 0, 4), (0, 0, -3), (0, 0, -6), (0, 0, 5))
    a = run_nonrel_limit(gal_packet, *args)
    b = run_nonrel_limit(gal_packet, *args, angle=0.83)
    assert abs(a.fidelity - b.fidelity) < 1e-10
