"""Dense register linear algebra: states, embeddings, traces, exponentials."""

import numpy as np
import pytest
from scipy.linalg import expm

from dfslab.tensor import (DenseOperator, DensityMatrix, DimensionError, Ket,
                           MAX_QUBITS, SWAP2, X, Y, Z, basis_ket, bloch_ket,
                           cnot, embed, expm_hermitian, kron, kron_all,
                           partial_trace, phase_aligned_distance,
                           schmidt_decompose, state_fidelity, swap)


def random_ket(rng, n):
    v = rng.normal(size=1 << n) + 1j * rng.normal(size=1 << n)
    return Ket(v / np.linalg.norm(v))


def test_basis_ket_is_big_endian():
    # qubit 0 is the most significant bit of the index
    assert np.argmax(np.abs(basis_ket("10").amplitudes)) == 0b10
    assert np.argmax(np.abs(basis_ket("011").amplitudes)) == 0b011


def test_bloch_ket_poles_and_equator():
    assert np.allclose(bloch_ket(0.0).amplitudes, [1, 0])
    assert np.allclose(bloch_ket(np.pi).amplitudes, [0, 1], atol=1e-15)
    plus = bloch_ket(np.pi / 2, 0.0)
    assert np.allclose(plus.amplitudes, [1 / np.sqrt(2), 1 / np.sqrt(2)])


def test_ket_normalization_enforced():
    with pytest.raises(ValueError):
        Ket(np.array([1.0, 1.0]))
    k = Ket.normalized([1.0, 1.0])
    assert abs(np.linalg.norm(k.amplitudes) - 1) < 1e-12


def test_dimension_cap_and_power_of_two():
    with pytest.raises(DimensionError):
        Ket(np.ones(3) / np.sqrt(3))
    with pytest.raises(DimensionError):
        Ket(np.zeros(1 << (MAX_QUBITS + 1)))


def test_unitary_and_hermitian_flags_validated():
    with pytest.raises(ValueError):
        DenseOperator(np.array([[1, 1], [0, 1]], dtype=complex), unitary=True)
    with pytest.raises(ValueError):
        DenseOperator(np.array([[0, 1], [0, 0]], dtype=complex), hermitian=True)
    DenseOperator(X, unitary=True, hermitian=True)  # Pauli is both


def test_density_matrix_validation():
    with pytest.raises(ValueError):
        DensityMatrix(np.array([[0.5, 0.6], [0.6, 0.5]]) * 2)  # trace 2
    rho = bloch_ket(0.7, 0.3).density()
    assert abs(np.trace(rho.entries) - 1) < 1e-12


def test_embed_matches_explicit_kron():
    rng = np.random.default_rng(7)
    for _ in range(20):
        u = np.linalg.qr(rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2)))[0]
        # single-qubit gate on each slot of a 3-qubit register
        for q, ref in [(0, kron_all(u, np.eye(2), np.eye(2))),
                       (1, kron_all(np.eye(2), u, np.eye(2))),
                       (2, kron_all(np.eye(2), np.eye(2), u))]:
            assert np.allclose(embed(u, [q], 3), ref)


def test_embed_two_qubit_reversed_targets():
    # placing CNOT on (1, 0) must equal SWAP . CNOT(0,1) . SWAP
    c = cnot(0, 1, 2)
    c_rev = cnot(1, 0, 2)
    s = SWAP2
    assert np.allclose(c_rev, s @ c @ s)


def test_cnot_truth_table():
    c = cnot(0, 1, 2)
    for a in "01":
        for b in "01":
            out = c @ basis_ket(a + b).amplitudes
            want = a + str(int(a) ^ int(b))
            assert np.allclose(out, basis_ket(want).amplitudes)


def test_swap_exchanges_qubits():
    psi = kron(bloch_ket(0.4).amplitudes.reshape(2, 1),
               bloch_ket(1.3, 0.5).amplitudes.reshape(2, 1)).reshape(-1)
    flipped = swap(0, 1, 2) @ psi
    want = kron(bloch_ket(1.3, 0.5).amplitudes.reshape(2, 1),
                bloch_ket(0.4).amplitudes.reshape(2, 1)).reshape(-1)
    assert np.allclose(flipped, want)


def test_partial_trace_bell_state_is_maximally_mixed():
    bell = Ket(np.array([1, 0, 0, 1]) / np.sqrt(2))
    for keep in ({0}, {1}):
        red = partial_trace(bell.density(), keep)
        assert np.allclose(red.entries, np.eye(2) / 2)


def test_partial_trace_product_state_factorizes():
    rng = np.random.default_rng(3)
    for _ in range(10):
        a, b = random_ket(rng, 1), random_ket(rng, 2)
        joint = Ket(np.kron(a.amplitudes, b.amplitudes)).density()
        assert np.allclose(partial_trace(joint, {0}).entries, a.density().entries)
        assert np.allclose(partial_trace(joint, {1, 2}).entries, b.density().entries)


def test_expm_hermitian_matches_scipy():
    rng = np.random.default_rng(11)
    for _ in range(10):
        a = rng.normal(size=(8, 8)) + 1j * rng.normal(size=(8, 8))
        h = (a + a.conj().T) / 2
        t = rng.uniform(0.1, 2.0)
        assert np.max(np.abs(expm_hermitian(h, t).entries - expm(-1j * h * t))) < 1e-10


def test_expm_hermitian_rejects_non_hermitian():
    with pytest.raises(ValueError):
        expm_hermitian(np.array([[0, 1], [0, 0]], dtype=complex), 1.0)


def test_schmidt_decompose_reconstructs_state():
    rng = np.random.default_rng(5)
    for _ in range(10):
        psi = random_ket(rng, 3)
        s, left, right = schmidt_decompose(psi, 1)
        rebuilt = sum(c * np.kron(l.amplitudes, r.amplitudes)
                      for c, l, r in zip(s, left, right))
        assert np.allclose(rebuilt, psi.amplitudes)
        assert abs(np.sum(s ** 2) - 1) < 1e-12
        assert all(x >= y - 1e-15 for x, y in zip(s, s[1:]))


def test_schmidt_rank_one_for_product_states():
    a, b = bloch_ket(0.9, 0.2), bloch_ket(2.0, 1.0)
    s, _, _ = schmidt_decompose(Ket(np.kron(a.amplitudes, b.amplitudes)), 1)
    assert s[0] > 1 - 1e-12 and (s.size == 1 or s[1] < 1e-8)


def test_phase_aligned_distance_ignores_global_phase():
    rng = np.random.default_rng(9)
    for _ in range(10):
        psi = random_ket(rng, 2)
        phase = np.exp(1j * rng.uniform(0, 2 * np.pi))
        assert phase_aligned_distance(psi.amplitudes, phase * psi.amplitudes) < 1e-12


def test_state_fidelity_pure_states():
    psi = bloch_ket(0.8, 0.1)
    assert abs(state_fidelity(psi.density(), psi) - 1) < 1e-12
    orth = Ket(np.array([-np.conj(psi.amplitudes[1]), np.conj(psi.amplitudes[0])]))
    assert abs(state_fidelity(psi.density(), orth)) < 1e-12
