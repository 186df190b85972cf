"""Two- and three-qubit decoherence-free encodings.

DFS2 protects against collective dephasing with logical basis
|0_L> = |01>, |1_L> = |10>.  DFS3 is a noiseless-subsystem encoding of one
qubit into the total-spin-1/2 sector of three qubits; the two-fold
degeneracy of that sector is the gauge degree of freedom (gamma, delta).

Qubit slots: q0 = data, q1 = ancilla, q2 = gauge (DFS3 only).  Encoders are
gate lists; the three-qubit encoder exists in two equivalent forms, a
controlled-gate reference and a Schmidt-optimized variant using a single
CNOT for the data/ancilla stage.
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .circuits import Gate, circuit_unitary, inverse_gates
from .pauli import OperatorSum, PauliString
from .tensor import (DenseOperator, DensityMatrix, Ket, X, basis_ket, bloch_ket,
                     expm_hermitian, partial_trace, schmidt_decompose)

CNOT2 = np.array([[1, 0, 0, 0],
                  [0, 1, 0, 0],
                  [0, 0, 0, 1],
                  [0, 0, 1, 0]], dtype=complex)

G1 = np.array([[1, np.sqrt(2)], [-np.sqrt(2), 1]], dtype=complex) / np.sqrt(3)
G2 = np.array([[1, 1], [-1, 1]], dtype=complex) / np.sqrt(2)


@dataclass(frozen=True)
class GaugeSpec:
    """Gauge amplitudes (gamma, delta) of the noiseless subsystem."""

    gamma: complex = 1.0
    delta: complex = 0.0

    def __post_init__(self):
        nrm = abs(self.gamma) ** 2 + abs(self.delta) ** 2
        if abs(nrm - 1.0) > 1e-12:
            raise ValueError(f"gauge not normalized: |gamma|^2+|delta|^2 = {nrm}")

    @classmethod
    def from_angle(cls, phi: float) -> "GaugeSpec":
        return cls(np.cos(phi / 2), np.sin(phi / 2))

    @property
    def is_zero(self) -> bool:
        return abs(self.delta) < 1e-12

    def preparation(self) -> np.ndarray:
        g, d = self.gamma, self.delta
        return np.array([[g, -np.conj(d)], [d, np.conj(g)]], dtype=complex)


@dataclass(frozen=True)
class CodeSpec:
    """Static description of one of the two supported codes."""

    kind: str  # "DFS2" or "DFS3"
    n_physical: int
    data_slot: int = 0
    ancilla_slots: tuple = ()
    gauge_slot: int | None = None
    stabilizers: tuple = ()

    @property
    def flag_slots(self) -> tuple:
        slots = tuple(self.ancilla_slots)
        if self.gauge_slot is not None:
            slots = slots + (self.gauge_slot,)
        return tuple(sorted(slots))


def dfs2_spec() -> CodeSpec:
    return CodeSpec(kind="DFS2", n_physical=2, data_slot=0, ancilla_slots=(1,),
                    stabilizers=(PauliString(("Z", "Z")),))


def dfs3_spec() -> CodeSpec:
    return CodeSpec(kind="DFS3", n_physical=3, data_slot=0, ancilla_slots=(1,),
                    gauge_slot=2,
                    stabilizers=(PauliString(("X",) * 3), PauliString(("Y",) * 3),
                                 PauliString(("Z",) * 3)))


def code_spec(kind: str) -> CodeSpec:
    if kind == "DFS2":
        return dfs2_spec()
    if kind == "DFS3":
        return dfs3_spec()
    raise ValueError(f"unknown code kind {kind!r}")


# ---------------------------------------------------------------------------
# DFS3 basis states and the fixed completion unitary

def _bar_states() -> np.ndarray:
    """Columns |bar1>..|bar4> of the code isometry, basis order q0 q2 q1...

    Basis strings are q0 q1 q2 with the singlet/triplet pair on (q0, q1)
    and the gauge label on q2.
    """
    s = np.zeros((8, 4), dtype=complex)
    r2, r3, r6 = np.sqrt(2), np.sqrt(3), np.sqrt(6)
    # |bar1> = (|010> - |100>)/sqrt2
    s[0b010, 0], s[0b100, 0] = 1 / r2, -1 / r2
    # |bar2> = (|011> - |101>)/sqrt2
    s[0b011, 1], s[0b101, 1] = 1 / r2, -1 / r2
    # |bar3> = (sqrt2|001> - (|010>+|100>)/sqrt2)/sqrt3
    s[0b001, 2] = r2 / r3
    s[0b010, 2] = s[0b100, 2] = -1 / r6
    # |bar4> = ((|011>+|101>)/sqrt2 - sqrt2|110>)/sqrt3
    s[0b011, 3] = s[0b101, 3] = 1 / r6
    s[0b110, 3] = -r2 / r3
    return s


def _controlled(u: np.ndarray, control_first: bool) -> np.ndarray:
    """Two-qubit controlled-u; control on the first (most significant) qubit
    if control_first, else on the second."""
    out = np.eye(4, dtype=complex)
    if control_first:
        out[2:, 2:] = u
    else:
        out[np.ix_([1, 3], [1, 3])] = u
    return out


def _pair_isometry() -> np.ndarray:
    """Columns M|0>, M|1> of the data/ancilla stage CG2*CG1 (ancilla in |0>)."""
    cg1 = _controlled(G1, control_first=True)    # control q0, target q1
    cg2 = _controlled(G2, control_first=False)   # control q1, target q0
    stage = cg2 @ cg1
    return stage[:, [0, 2]]  # inputs |00>, |10>


@lru_cache(maxsize=1)
def _completion_unitary() -> np.ndarray:
    """Fixed three-qubit unitary mapping stage output (x) gauge to the code.

    Satisfies F (M|l> (x) |g>) = gamma-independent code isometry applied to
    |l,g>; completed to a full unitary on the orthogonal complement.
    """
    m = _pair_isometry()
    a = np.zeros((8, 4), dtype=complex)
    for l in range(2):
        for g in range(2):
            vec = np.kron(m[:, l], np.eye(2)[:, g])
            a[:, 2 * l + g] = vec
    b = _bar_states()

    def complete(cols):
        q, _ = np.linalg.qr(np.hstack([cols, np.eye(8, dtype=complex)]))
        return q[:, 4:8]

    a_perp, b_perp = complete(a), complete(b)
    f = b @ a.conj().T + b_perp @ a_perp.conj().T
    assert np.max(np.abs(f.conj().T @ f - np.eye(8))) < 1e-12
    return f


# ---------------------------------------------------------------------------
# encoder circuits

def data_prep_gate(theta: float, phi: float = 0.0) -> Gate:
    u = np.array([[np.cos(theta / 2), -np.exp(-1j * phi) * np.sin(theta / 2)],
                  [np.exp(1j * phi) * np.sin(theta / 2), np.cos(theta / 2)]],
                 dtype=complex)
    return Gate("U_psi", u, (0,))


def dfs2_encoder_gates() -> list:
    """X on the ancilla followed by CNOT(data -> ancilla)."""
    return [Gate("X", X.copy(), (1,)), Gate("CNOT", CNOT2, (0, 1))]


def dfs3_encoder_gates(gauge: GaugeSpec, optimized: bool = False,
                       psi: Ket | None = None) -> list:
    """Gate list of the three-qubit encoder (data state already on q0).

    The reference form uses the controlled gates CG1 (control q0) and CG2
    (control q1) for the data/ancilla stage.  The optimized form replaces
    that stage, for a known input state, with a Schmidt-derived circuit of
    one CNOT bookended by single-qubit unitaries.  The gauge-preparation
    block on q2 is emitted only when the gauge is not |0>.
    """
    gates = []
    if not gauge.is_zero:
        gates.append(Gate("G_gauge", gauge.preparation(), (2,)))
    if optimized:
        if psi is None:
            raise ValueError("optimized encoder needs the input state for Schmidt synthesis")
        gates.extend(_schmidt_stage(psi))
    else:
        gates.append(Gate("CG1", _controlled(G1, control_first=True), (0, 1)))
        gates.append(Gate("CG2", _controlled(G2, control_first=False), (0, 1)))
    gates.append(Gate("F_code", _completion_unitary(), (0, 1, 2)))
    return gates


def _schmidt_stage(psi: Ket) -> list:
    """One-CNOT realization of the data/ancilla stage for input |psi>.

    Decomposes the stage output into Schmidt form a|psi1>|phi1> +
    b|psi2>|phi2> and synthesizes it as (W2 (x) W3) CNOT (W1 (x) I) |00>,
    with W1 = [[a, b],[b, -a]] built from the Schmidt coefficients.  Since
    the stage acts after U_psi, the synthesized circuit must also undo the
    already-prepared data state, hence the leading U_psi^dag absorption.
    """
    m = _pair_isometry()
    target = Ket(m @ psi.amplitudes)
    coeffs, left, right = schmidt_decompose(target, 1)
    a, b = float(coeffs[0]), float(coeffs[1]) if coeffs.size > 1 else 0.0
    w1 = np.array([[a, b], [b, -a]], dtype=complex)
    w2 = np.column_stack([left[0].amplitudes,
                          left[1].amplitudes if len(left) > 1 else _orth(left[0].amplitudes)])
    w3 = np.column_stack([right[0].amplitudes,
                          right[1].amplitudes if len(right) > 1 else _orth(right[0].amplitudes)])
    undo = np.outer(np.array([1, 0]), psi.amplitudes.conj())
    undo = undo + np.outer(np.array([0, 1]), _orth(psi.amplitudes).conj())
    return [Gate("U_psi^-1", undo, (0,)),
            Gate("W1", w1, (0,)),
            Gate("CNOT", CNOT2, (0, 1)),
            Gate("W2", w2, (0,)),
            Gate("W3", w3, (1,))]


def _orth(v: np.ndarray) -> np.ndarray:
    return np.array([-np.conj(v[1]), np.conj(v[0])], dtype=complex)


def encoder_gates(code: CodeSpec, theta: float, phi: float = 0.0,
                  gauge: GaugeSpec | None = None, optimized: bool = False) -> list:
    """Full preparation circuit from |0...0>: data prep plus encoder."""
    prep = data_prep_gate(theta, phi)
    if code.kind == "DFS2":
        return [prep] + dfs2_encoder_gates()
    gauge = gauge or GaugeSpec()
    psi = bloch_ket(theta, phi)
    return [prep] + dfs3_encoder_gates(gauge, optimized=optimized, psi=psi)


def decoder_gates(code: CodeSpec, gauge: GaugeSpec | None = None) -> list:
    """Exact inverse of the (reference) encoder circuit, data prep excluded."""
    if code.kind == "DFS2":
        return inverse_gates(dfs2_encoder_gates())
    gauge = gauge or GaugeSpec()
    return inverse_gates(dfs3_encoder_gates(gauge, optimized=False))


# ---------------------------------------------------------------------------
# state constructors

def dfs2_encode(psi: Ket) -> Ket:
    """alpha|0> + beta|1>  ->  alpha|01> + beta|10>."""
    u = circuit_unitary(dfs2_encoder_gates(), 2)
    return Ket(u @ np.kron(psi.amplitudes, np.array([1, 0])))


def dfs3_encode(psi: Ket, gauge: GaugeSpec | None = None,
                method: str = "reference") -> Ket:
    """Encode a single-qubit state into the three-qubit code at a gauge.

    method "reference" builds the state directly from the code basis;
    "circuit" runs the reference controlled-gate circuit; "optimized" runs
    the Schmidt-synthesized circuit.
    """
    gauge = gauge or GaugeSpec()
    if method == "reference":
        bars = _bar_states()
        zero_l = gauge.gamma * bars[:, 0] + gauge.delta * bars[:, 1]
        one_l = gauge.gamma * bars[:, 2] + gauge.delta * bars[:, 3]
        return Ket(psi.amplitudes[0] * zero_l + psi.amplitudes[1] * one_l)
    if method in ("circuit", "optimized"):
        gates = dfs3_encoder_gates(gauge, optimized=(method == "optimized"), psi=psi)
        u = circuit_unitary(gates, 3)
        init = np.kron(psi.amplitudes, basis_ket("00").amplitudes)
        return Ket(u @ init)
    raise ValueError(f"unknown encode method {method!r}")


def logical_state(code: CodeSpec, theta: float, phi: float = 0.0,
                  gauge: GaugeSpec | None = None) -> Ket:
    psi = bloch_ket(theta, phi)
    if code.kind == "DFS2":
        return dfs2_encode(psi)
    return dfs3_encode(psi, gauge)


def code_projector(code: CodeSpec, gauge: GaugeSpec | None = None) -> np.ndarray:
    """Projector onto the code space (all gauges for DFS3)."""
    if code.kind == "DFS2":
        p = np.zeros((4, 4), dtype=complex)
        p[1, 1] = p[2, 2] = 1
        return p
    bars = _bar_states()
    return bars @ bars.conj().T


# ---------------------------------------------------------------------------
# logical operators and rotations

def _swap_opsum(i: int, j: int, n: int) -> OperatorSum:
    acc = OperatorSum.identity(n) * 0.5
    for axis in "XYZ":
        term = OperatorSum.site(axis, i, n) @ OperatorSum.site(axis, j, n)
        acc = acc + term * 0.5
    return acc


def logical_operator(code: CodeSpec, axis: str) -> OperatorSum:
    """Encoded Pauli operator; acts as sigma^axis on the code space."""
    axis = axis.lower()
    if axis not in "xyz":
        raise ValueError(f"axis must be x, y or z, got {axis!r}")
    if code.kind == "DFS2":
        if axis == "x":
            return OperatorSum(2, {("X", "X"): 0.5, ("Y", "Y"): 0.5})
        if axis == "y":
            return OperatorSum(2, {("Y", "X"): 0.5, ("X", "Y"): -0.5})
        return OperatorSum(2, {("Z", "I"): 0.5, ("I", "Z"): -0.5})
    e01 = _swap_opsum(0, 1, 3)
    e02 = _swap_opsum(0, 2, 3)
    e12 = _swap_opsum(1, 2, 3)
    sx = (e12 - e02) * (1 / np.sqrt(3))
    sz = (e02 + e12 - e01 * 2.0) * (1 / 3)
    if axis == "x":
        return sx
    if axis == "z":
        return sz
    return (sx @ sz) * 1j


def logical_rotation(code: CodeSpec, axis: str, angle: float) -> DenseOperator:
    """exp(-i angle/2 sigma-bar^axis); acts as a Bloch rotation on the code
    space and as identity on every other invariant subspace."""
    gen = logical_operator(code, axis).to_dense()
    return expm_hermitian(DenseOperator(gen, hermitian=True), angle / 2)


# ---------------------------------------------------------------------------
# decoding and post-selection

def decode(code: CodeSpec, state, gauge: GaugeSpec | None = None):
    """Apply the inverse encoder circuit; return (data state, flag stats).

    ``state`` is a Ket or DensityMatrix over the physical register.  The
    returned flags map bit strings of the non-data qubits (ascending slot
    order) to probabilities.
    """
    n = code.n_physical
    u = circuit_unitary(decoder_gates(code, gauge), n)
    if isinstance(state, Ket):
        rho = Ket(u @ state.amplitudes).density()
    else:
        m = state.entries if isinstance(state, DensityMatrix) else np.asarray(state)
        rho = DensityMatrix(u @ m @ u.conj().T)
    data = partial_trace(rho, {code.data_slot})
    probs = np.real(np.diag(rho.entries))
    flags = {}
    for idx, p in enumerate(probs):
        bits = format(idx, f"0{n}b")
        key = "".join(bits[q] for q in code.flag_slots)
        flags[key] = flags.get(key, 0.0) + float(p)
    return data, flags


def accepted_flag(code: CodeSpec, flag_bits: str) -> bool:
    """Post-selection predicate on the decoded flag bits.

    DFS2 accepts ancilla |0>; DFS3 conditions only on the gauge qubit
    returning to its prepared value (|0> after the inverse gauge block),
    the ancilla outcome is recorded but not conditioned on.
    """
    if code.kind == "DFS2":
        return flag_bits[0] == "0"
    return flag_bits[-1] == "0"


def postselect(outcomes: dict, code: CodeSpec):
    """Condition a measured outcome distribution on flag acceptance.

    ``outcomes`` maps full bit strings (one bit per physical qubit, slot
    order) to probabilities.  Returns (accept_probability, conditioned
    distribution over the data bit).  With zero acceptance the conditioned
    distribution is None.
    """
    total = sum(outcomes.values())
    if abs(total - 1.0) > 1e-9:
        raise ValueError(f"outcome distribution not normalized (sum {total})")
    p_acc = 0.0
    data = {"0": 0.0, "1": 0.0}
    for bits, p in outcomes.items():
        flag = "".join(bits[q] for q in code.flag_slots)
        if accepted_flag(code, flag):
            p_acc += p
            data[bits[code.data_slot]] += p
    if p_acc <= 0.0:
        return 0.0, None
    return p_acc, {k: v / p_acc for k, v in data.items()}
