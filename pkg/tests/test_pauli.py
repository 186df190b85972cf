"""Pauli-string algebra, toggling-frame averaging, operator subspace bases."""

import numpy as np
import pytest

from dfslab.pauli import (OperatorSum, PauliString, SubspaceBasis,
                          collective_basis, collective_residual, conjugate,
                          dfs_basis, first_order_average, leak_basis,
                          logi_basis, project, toggling_frames)
from dfslab.sequences import dfs2_sequence, xy4
from dfslab.tensor import X, Y, Z


def random_opsum(rng, n, n_terms=6):
    terms = {}
    for _ in range(n_terms):
        key = tuple(rng.choice(list("IXYZ"), size=n))
        terms[key] = terms.get(key, 0) + rng.normal() + 1j * rng.normal()
    return OperatorSum(n, terms)


def test_pauli_string_products():
    x, y, z = (PauliString.from_label(a) for a in "XYZ")
    assert (x * y).axes == ("Z",) and (x * y).phase == 1j
    assert (y * x).phase == -1j
    assert (x * x).axes == ("I",) and (x * x).phase == 1
    assert np.allclose(x.to_dense(), X)
    assert np.allclose((x * y).to_dense(), X @ Y)


def test_pauli_string_commutation():
    assert PauliString.from_label("XX").commutes_with(PauliString.from_label("YY"))
    assert not PauliString.from_label("XI").commutes_with(PauliString.from_label("ZI"))


def test_opsum_dense_roundtrip():
    rng = np.random.default_rng(2)
    for _ in range(10):
        op = random_opsum(rng, 2)
        back = OperatorSum.from_dense(op.to_dense(), 2)
        assert np.max(np.abs(op.to_dense() - back.to_dense())) < 1e-12


def test_opsum_matmul_matches_dense():
    rng = np.random.default_rng(4)
    for _ in range(10):
        a, b = random_opsum(rng, 2), random_opsum(rng, 2)
        assert np.max(np.abs((a @ b).to_dense() - a.to_dense() @ b.to_dense())) < 1e-10


def test_hs_inner_orthonormal_strings():
    xx = OperatorSum.single("XX")
    yy = OperatorSum.single("YY")
    assert abs(xx.hs_inner(xx) - 1) < 1e-14
    assert abs(xx.hs_inner(yy)) < 1e-14
    assert abs(OperatorSum.identity(3).hs_norm() - 1) < 1e-14


def test_conjugate_matches_dense_conjugation():
    rng = np.random.default_rng(6)
    for _ in range(10):
        h = random_opsum(rng, 2)
        u = np.linalg.qr(rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4)))[0]
        got = conjugate(h, u).to_dense()
        want = u.conj().T @ h.to_dense() @ u
        assert np.max(np.abs(got - want)) < 1e-10


def test_conjugate_by_pauli_string_stays_symbolic():
    h = OperatorSum.single("XZ", 2.0)
    out = conjugate(h, PauliString.from_label("ZI"))
    assert np.allclose(out.to_dense(), -h.to_dense())


def test_toggling_frames_convention():
    # frames are Q_0 = I, Q_j = P_j ... P_1 for the interval after P_j
    frames = toggling_frames([X, Y, X, Y])
    assert np.allclose(frames[0], np.eye(2))
    assert np.allclose(frames[1], X)
    assert np.allclose(frames[2], Y @ X)
    assert len(frames) == 4


def test_xy4_first_order_average_kills_single_qubit_terms():
    seq = xy4(1e-7)
    for axis in "XYZ":
        avg = first_order_average(seq, OperatorSum.single(axis))
        assert avg.hs_norm() < 1e-14


def test_first_order_average_channel_map_shape():
    seq = xy4(1e-7)
    out = first_order_average(seq, {"a": OperatorSum.single("X"),
                                    "b": OperatorSum.single("Z")})
    assert set(out) == {"a", "b"}
    assert all(v.hs_norm() < 1e-14 for v in out.values())


def test_first_order_average_requires_equal_intervals():
    seq = xy4(1e-7)
    bad = type(seq)(steps=(seq.steps[0],
                           type(seq.steps[0])(seq.steps[1].pulse, 2e-7),
                           *seq.steps[2:]),
                    tau=1e-7, n_qubits=1)
    with pytest.raises(ValueError):
        first_order_average(bad, OperatorSum.single("Z"))


def test_error_operator_bases_are_orthonormal_and_complete():
    bases = [leak_basis(), logi_basis(), dfs_basis()]
    assert [len(b) for b in bases] == [8, 3, 5]
    els = [e for b in bases for e in b.elements]
    gram = np.array([[a.hs_inner(b) for b in els] for a in els])
    assert np.max(np.abs(gram - np.eye(16))) < 1e-12


def test_subspace_basis_rejects_non_orthonormal():
    with pytest.raises(ValueError):
        SubspaceBasis("bad", [OperatorSum.single("XX"),
                              OperatorSum(2, {("X", "X"): 1.0, ("Y", "Y"): 0.5})])


def test_project_recovers_in_span_components():
    rng = np.random.default_rng(8)
    basis = logi_basis()
    for _ in range(10):
        coeffs = rng.normal(size=3)
        h = OperatorSum.zero(2)
        for c, e in zip(coeffs, basis.elements):
            h = h + e * c
        comp, resid = project(h, basis)
        assert resid < 1e-13
        assert np.max(np.abs(comp.to_dense() - h.to_dense())) < 1e-12


def test_collective_residual_zero_for_collective_operators():
    for n in (2, 3):
        total_z = OperatorSum.zero(n)
        for q in range(n):
            total_z = total_z + OperatorSum.site("Z", q, n)
        assert collective_residual(total_z, n) < 1e-14
    assert collective_residual(OperatorSum.site("Z", 0, 3), 3) > 0.5


def test_dfs2_sequence_average_has_no_leak_or_logical_part():
    seq = dfs2_sequence(1e-7)
    rng = np.random.default_rng(13)
    h = random_opsum(rng, 2)
    avg = first_order_average(seq, h)
    for basis in (leak_basis(), logi_basis()):
        _, within = project(avg, basis)
        # all surviving weight must sit in the DFS-trivial sector
        comp, _ = project(avg, basis)
        assert comp.hs_norm() < 1e-12
    _, resid = project(avg, dfs_basis())
    assert resid < 1e-12
