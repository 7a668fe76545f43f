from __future__ import annotations

import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from mmqubit import units
from mmqubit.circuit import Branch, CircuitNetlist, build_matrices
from mmqubit.quantize import (
    FAST_CUTOFFS,
    REFERENCE_CUTOFFS,
    BasisError,
    Cutoffs,
    DimensionError,
    charge_ops,
    eigensolve,
    export_triplets,
    flux_op_via_commutator,
    load_triplets,
    oscillator_ops,
    quantize,
    quantize_with,
    single_electron_ops,
    trig_terms,
)
from mmqubit.spectrum import TRANSMON, charge_dispersion


def comm(a, b):
    return a @ b - b @ a


# -- single-mode stencils --------------------------------------------------------


def test_charge_ops_small():
    o = charge_ops(1)
    assert np.allclose(o["n"], np.diag([-1, 0, 1]))
    assert np.allclose(o["cos"], 0.5 * (np.eye(3, k=1) + np.eye(3, k=-1)))
    assert np.allclose(o["sin"], o["sin"].conj().T)


def test_charge_commutator_interior():
    o = charge_ops(5)
    lhs = comm(o["n"], o["cos"])
    # [n, cos phi] = i sin phi; equivalently [cos phi, n] = -i sin phi
    assert np.allclose(lhs[1:-1, 1:-1], 1j * o["sin"][1:-1, 1:-1], atol=1e-14)


def test_single_electron_half_sine():
    o = single_electron_ops(1)
    ket = {-1: 0, 0: 1, 1: 2}
    expected = np.zeros((3, 3), complex)
    for a, b in ((0, -1), (1, 0)):
        expected[ket[a], ket[b]] += 1 / 2j
        expected[ket[b], ket[a]] -= 1 / 2j
    assert np.allclose(o["sin_half"], expected)


def test_half_phase_pythagoras_interior():
    o = single_electron_ops(4)
    s = o["cos_half"] @ o["cos_half"] + o["sin_half"] @ o["sin_half"]
    assert np.allclose(s[1:-1, 1:-1], np.eye(7))


def test_even_parity_restriction_matches_cooper_pair_basis():
    se, cp = single_electron_ops(4), charge_ops(2)
    even = np.arange(0, 9, 2)  # electron numbers -4, -2, 0, 2, 4
    for name in ("cos", "sin"):
        assert np.allclose(se[name][np.ix_(even, even)], cp[name])
    assert np.allclose(se["n"][np.ix_(even, even)] / 2, cp["n"])


def test_oscillator_symmetric_width():
    o = oscillator_ops(1.0, 8.0, 6, pad=0)
    assert abs(o["phi"][0, 1]) == pytest.approx(1 / np.sqrt(2))


def test_oscillator_commutator_ground_state():
    o = oscillator_ops(0.7, 3.1, 10, pad=0)
    assert comm(o["phi"], o["n"])[0, 0] == pytest.approx(1j)


def test_oscillator_needs_inductance():
    with pytest.raises(BasisError):
        oscillator_ops(1.0, 0.0, 10)


@settings(max_examples=20, deadline=None)
@given(st.floats(0.05, 5.0), st.floats(0.05, 50.0))
def test_harmonic_ladder(EC, EL):
    o = oscillator_ops(EC, EL, 12)
    H = 4 * EC * o["n2"] + 0.5 * EL * o["phi2"]
    w = np.linalg.eigvalsh(H)[:6]
    assert np.allclose(w, np.sqrt(8 * EC * EL) * (np.arange(6) + 0.5), rtol=1e-9)


def test_trig_expansion_of_difference():
    # cos(p0 - p1) = cos p0 cos p1 + sin p0 sin p1
    terms = trig_terms([1, -1], "cos")
    as_dict = {fs: c for c, fs in terms}
    assert as_dict[((0, "cos"), (1, "cos"))] == 1
    assert as_dict[((0, "sin"), (1, "sin"))] == 1
    with pytest.raises(ValueError):
        trig_terms([2, 0])


# -- assembly --------------------------------------------------------------------


def test_hamiltonian_hermitian(device):
    H = quantize_with(device, FAST_CUTOFFS).H
    dev = abs(H - H.getH()).max()
    assert dev <= 1e-12 * abs(H).max()


def test_node_operators_hermitian(device):
    s = quantize_with(device, FAST_CUTOFFS)
    for op in s.node_ops.values():
        assert abs(op - op.getH()).max() < 1e-12


def test_dimension_guard(device):
    with pytest.raises(DimensionError):
        quantize(device, 6, 24, max_dim=1000)


def uncoupled(C1=40.0, L1=15.0, C2=70.0, L2=25.0, Cc=0.0):
    br = [Branch("a", 0, 1, C1, L1), Branch("b", 0, 2, C2, L2)]
    if Cc:
        br.append(Branch("c", 1, 2, Cc))
    return CircuitNetlist((0, 1, 2), tuple(br))


def ladder_sums(w1, w2, n):
    return np.sort([i * w1 + j * w2 for i in range(n) for j in range(n)])[:n]


def test_uncoupled_modes_add():
    s = quantize(uncoupled(), 3, 12)
    f = eigensolve(s.H, 6).frequencies
    m = build_matrices(uncoupled())
    w = [np.sqrt(8 * m.E_C[i, i] * m.E_L[i, i]) for i in range(2)]
    assert np.allclose(f, ladder_sums(*w, 6), atol=1e-10)


def test_capacitively_coupled_normal_modes():
    net = uncoupled(Cc=8.0)
    m = build_matrices(net)
    # classical normal modes: omega^2 = eig(C^-1 L^-1), converted to GHz
    w2 = np.linalg.eigvals(np.linalg.inv(m.C_matrix * 1e-15) @ (m.L_inv * 1e9))
    w = np.sort(np.sqrt(w2.real)) / (2 * np.pi) / 1e9
    f = eigensolve(quantize(net, 3, 24).H, 6).frequencies
    assert np.allclose(f, ladder_sums(*w, 6), rtol=1e-7)


def test_transmon_charge_dispersion_small():
    net = TRANSMON.netlist()
    d = charge_dispersion(net, TRANSMON.cutoffs, points=5, k=3)
    assert 0 < d < 1e-3 * TRANSMON.EC


# -- eigensolver -------------------------------------------------------------------


def test_diagonal_toy():
    sol = eigensolve(np.diag([3.0, 1.0, 2.0]), 2)
    assert np.allclose(sol.energies, [1, 2])


@pytest.mark.parametrize("dense_below", [0, 1000])
def test_sparse_random_matches_dense(dense_below):
    rng = np.random.default_rng(7)
    A = sp.random(200, 200, density=0.05, random_state=rng) + 1j * sp.random(200, 200, density=0.05, random_state=rng)
    H = (A + A.getH()).tocsr()
    sol = eigensolve(H, 6, dense_below=dense_below)
    ref = np.linalg.eigvalsh(H.toarray())[:6]
    assert np.allclose(sol.energies, ref, atol=1e-8)


def test_eigenvectors_orthonormal_and_phase_fixed(reference):
    _, sol, _ = reference
    V = sol.vectors
    assert np.allclose(V.conj().T @ V, np.eye(sol.k), atol=1e-10)
    # largest component, lowest index among near-ties
    mag = np.abs(V)
    idx = np.argmax(mag >= mag.max(axis=0) - 1e-12, axis=0)
    big = V[idx, np.arange(sol.k)]
    assert np.allclose(big.imag, 0, atol=1e-12) and np.all(big.real > 0)
    assert np.all(sol.residuals <= 1e-10 * 100)


def test_reproducible(device):
    s = quantize_with(device, FAST_CUTOFFS)
    a, b = eigensolve(s.H, 4), eigensolve(s.H, 4)
    assert np.array_equal(a.energies, b.energies)
    assert np.array_equal(a.vectors, b.vectors)


def test_reference_gap(reference):
    assert reference[2].omega10 == pytest.approx(2.5, rel=0.03)


def test_modest_cutoffs_within_two_percent(device):
    s = quantize(device, 10, 15)
    f = eigensolve(s.H, 2).frequencies
    assert f[1] == pytest.approx(2.5, rel=0.02)


@pytest.mark.slow
def test_cutoff_convergence(device, reference):
    f0 = reference[1].frequencies[1:5]
    c = REFERENCE_CUTOFFS
    big = Cutoffs(int(c.charge * 1.5), int(c.flux * 1.5))
    f1 = eigensolve(quantize_with(device, big).H, 5).frequencies[1:5]
    assert np.all(np.abs(f1 - f0) / f0 < 1e-3)


# -- commutator flux elements ----------------------------------------------------------


def test_commutator_phase_matches_oscillator():
    net = CircuitNetlist((0, 1), (Branch("a", 0, 1, 30.0, 12.0),))
    s = quantize(net, 3, 30)
    sol = eigensolve(s.H, 5)
    direct = sol.matrix_elements(s.phi_op(0))
    via, bad = flux_op_via_commutator(sol, [s.n_op(0)], s.spec.E_C, 0)
    assert bad.diagonal().all()
    assert np.isnan(via.diagonal()).all()
    off = ~bad
    assert np.allclose(via[off], direct[off], atol=1e-8)


def test_triplet_export_round_trip(tmp_path, device):
    H = quantize_with(device, Cutoffs(2, 4)).H
    p = tmp_path / "H.txt"
    export_triplets(H, p)
    assert abs(load_triplets(p) - H).max() == 0


def test_units_constants():
    assert units.charging_energy(units.capacitance_from_ec(0.3)) == pytest.approx(0.3)
    assert units.inductive_energy(1.0) == pytest.approx(163.4615, rel=1e-5)
