"""Dense complex linear algebra for qubit registers.

States and operators are plain numpy arrays wrapped in thin validated
containers.  Qubit ordering is big-endian throughout: qubit 0 is the most
significant axis of the state index, so ``|q0 q1 ... q_{n-1}>`` maps to
integer index ``q0*2^{n-1} + ... + q_{n-1}``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

MAX_QUBITS = 12

ATOL_NORM = 1e-12
ATOL_UNITARY = 1e-10
ATOL_HERMITIAN = 1e-12
ATOL_TRACE = 1e-10


class DimensionError(ValueError):
    """Register dimension is invalid or exceeds the configured cap."""


def _require_power_of_two(dim: int) -> int:
    n = int(dim).bit_length() - 1
    if dim <= 0 or (1 << n) != dim:
        raise DimensionError(f"dimension {dim} is not a power of two")
    if n > MAX_QUBITS:
        raise DimensionError(f"register of {n} qubits exceeds cap of {MAX_QUBITS}")
    return n


@dataclass(frozen=True)
class Ket:
    """Normalized pure state over a qubit register."""

    amplitudes: np.ndarray
    n_qubits: int = field(init=False)

    def __post_init__(self):
        amp = np.asarray(self.amplitudes, dtype=complex).reshape(-1)
        object.__setattr__(self, "amplitudes", amp)
        object.__setattr__(self, "n_qubits", _require_power_of_two(amp.size))
        nrm = np.linalg.norm(amp)
        if abs(nrm - 1.0) > 1e-10:
            raise ValueError(f"ket is not normalized (|norm-1| = {abs(nrm - 1.0):.2e})")

    @classmethod
    def normalized(cls, amplitudes) -> "Ket":
        amp = np.asarray(amplitudes, dtype=complex).reshape(-1)
        nrm = np.linalg.norm(amp)
        if nrm == 0:
            raise ValueError("cannot normalize the zero vector")
        return cls(amp / nrm)

    @property
    def dim(self) -> int:
        return self.amplitudes.size

    def density(self) -> "DensityMatrix":
        return DensityMatrix(np.outer(self.amplitudes, self.amplitudes.conj()))


@dataclass(frozen=True)
class DenseOperator:
    """Dense square operator, optionally flagged unitary and/or Hermitian."""

    entries: np.ndarray
    unitary: bool = False
    hermitian: bool = False
    n_qubits: int = field(init=False)

    def __post_init__(self):
        m = np.asarray(self.entries, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise DimensionError(f"operator must be square, got shape {m.shape}")
        object.__setattr__(self, "entries", m)
        object.__setattr__(self, "n_qubits", _require_power_of_two(m.shape[0]))
        if self.unitary:
            err = np.max(np.abs(m.conj().T @ m - np.eye(m.shape[0])))
            if err > ATOL_UNITARY:
                raise ValueError(f"operator flagged unitary but ||U^dag U - I|| = {err:.2e}")
        if self.hermitian:
            err = np.max(np.abs(m - m.conj().T))
            if err > ATOL_HERMITIAN:
                raise ValueError(f"operator flagged Hermitian but ||A - A^dag|| = {err:.2e}")

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def dagger(self) -> "DenseOperator":
        return DenseOperator(self.entries.conj().T, unitary=self.unitary, hermitian=self.hermitian)

    def __matmul__(self, other):
        if isinstance(other, DenseOperator):
            return DenseOperator(self.entries @ other.entries,
                                 unitary=self.unitary and other.unitary)
        if isinstance(other, Ket):
            return Ket.normalized(self.entries @ other.amplitudes) if not self.unitary \
                else Ket(self.entries @ other.amplitudes)
        return NotImplemented


@dataclass(frozen=True)
class DensityMatrix:
    """Hermitian, unit-trace, positive-semidefinite operator."""

    entries: np.ndarray
    n_qubits: int = field(init=False)

    def __post_init__(self):
        m = np.asarray(self.entries, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise DimensionError(f"density matrix must be square, got shape {m.shape}")
        object.__setattr__(self, "entries", m)
        object.__setattr__(self, "n_qubits", _require_power_of_two(m.shape[0]))
        if np.max(np.abs(m - m.conj().T)) > 1e-9:
            raise ValueError("density matrix is not Hermitian")
        if abs(np.trace(m).real - 1.0) > 1e-8:
            raise ValueError(f"density matrix trace {np.trace(m):.6g} != 1")
        if np.min(np.linalg.eigvalsh((m + m.conj().T) / 2)) < -1e-8:
            raise ValueError("density matrix has a significantly negative eigenvalue")

    @property
    def dim(self) -> int:
        return self.entries.shape[0]


# ---------------------------------------------------------------------------
# constructors and elementary gates

I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)
H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
PAULI = {"I": I2, "X": X, "Y": Y, "Z": Z}


def basis_ket(bits: str) -> Ket:
    """Computational basis state from a bit string, qubit 0 first."""
    n = len(bits)
    idx = int(bits, 2)
    amp = np.zeros(1 << n, dtype=complex)
    amp[idx] = 1.0
    return Ket(amp)


def bloch_ket(theta: float, phi: float = 0.0) -> Ket:
    """Single-qubit state cos(theta/2)|0> + e^{i phi} sin(theta/2)|1>."""
    return Ket(np.array([np.cos(theta / 2), np.exp(1j * phi) * np.sin(theta / 2)]))


def kron(a, b):
    """Kronecker product; leftmost factor is the most significant qubit."""
    am = a.entries if isinstance(a, DenseOperator) else np.asarray(a, dtype=complex)
    bm = b.entries if isinstance(b, DenseOperator) else np.asarray(b, dtype=complex)
    _require_power_of_two(am.shape[0] * bm.shape[0])
    out = np.kron(am, bm)
    if isinstance(a, DenseOperator) and isinstance(b, DenseOperator):
        return DenseOperator(out, unitary=a.unitary and b.unitary,
                             hermitian=a.hermitian and b.hermitian)
    return out


def kron_all(*mats) -> np.ndarray:
    out = np.asarray(mats[0], dtype=complex)
    for m in mats[1:]:
        out = np.kron(out, np.asarray(m, dtype=complex))
    return out


def embed(gate, targets, n_qubits: int) -> np.ndarray:
    """Place a k-qubit gate on the given target qubits of an n-qubit register.

    ``targets`` lists the register qubits corresponding to the gate's own
    qubits in order (gate qubit 0 = most significant gate axis).
    """
    g = gate.entries if isinstance(gate, DenseOperator) else np.asarray(gate, dtype=complex)
    targets = list(targets)
    k = len(targets)
    if g.shape != (1 << k, 1 << k):
        raise DimensionError(f"gate shape {g.shape} does not match {k} targets")
    if len(set(targets)) != k or any(t < 0 or t >= n_qubits for t in targets):
        raise IndexError(f"invalid target qubits {targets} for {n_qubits}-qubit register")
    rest = [q for q in range(n_qubits) if q not in targets]
    perm = targets + rest
    full = np.kron(g, np.eye(1 << (n_qubits - k), dtype=complex))
    t = full.reshape([2] * (2 * n_qubits))
    # axis j of the raw product carries register qubit perm[j]; move it home
    src = list(range(n_qubits))
    t = np.moveaxis(t, src, perm)
    t = np.moveaxis(t, [n_qubits + s for s in src], [n_qubits + p for p in perm])
    return t.reshape(1 << n_qubits, 1 << n_qubits)


def cnot(control: int, target: int, n_qubits: int = 2) -> np.ndarray:
    g = np.zeros((4, 4), dtype=complex)
    g[0, 0] = g[1, 1] = 1
    g[2, 3] = g[3, 2] = 1
    return embed(g, [control, target], n_qubits)


SWAP2 = np.array([[1, 0, 0, 0],
                  [0, 0, 1, 0],
                  [0, 1, 0, 0],
                  [0, 0, 0, 1]], dtype=complex)


def swap(i: int, j: int, n_qubits: int) -> np.ndarray:
    return embed(SWAP2, [i, j], n_qubits)


# ---------------------------------------------------------------------------
# core operations

def partial_trace(rho, keep) -> DensityMatrix:
    """Trace out all qubits not in ``keep``; preserves trace exactly."""
    m = rho.entries if isinstance(rho, (DensityMatrix, DenseOperator)) else np.asarray(rho)
    n = _require_power_of_two(m.shape[0])
    keep = sorted(set(keep))
    if not keep:
        raise IndexError("keep set must be nonempty")
    if keep[0] < 0 or keep[-1] >= n:
        raise IndexError(f"keep qubits {keep} out of range for {n}-qubit register")
    drop = [q for q in range(n) if q not in keep]
    t = m.reshape([2] * (2 * n))
    for q in reversed(drop):
        t = np.trace(t, axis1=q, axis2=q + (t.ndim // 2))
    d = 1 << len(keep)
    out = t.reshape(d, d)
    if isinstance(rho, DensityMatrix):
        return DensityMatrix(out)
    return out


def expm_hermitian(h, t: float) -> DenseOperator:
    """Unitary exp(-i h t) via eigendecomposition of a Hermitian generator."""
    hm = h.entries if isinstance(h, DenseOperator) else np.asarray(h, dtype=complex)
    if isinstance(h, DenseOperator) and not h.hermitian:
        if np.max(np.abs(hm - hm.conj().T)) > ATOL_HERMITIAN:
            raise ValueError("expm_hermitian requires a Hermitian generator")
    elif np.max(np.abs(hm - hm.conj().T)) > 1e-10:
        raise ValueError("expm_hermitian requires a Hermitian generator")
    w, v = np.linalg.eigh(hm)
    u = (v * np.exp(-1j * w * t)) @ v.conj().T
    return DenseOperator(u, unitary=True)


def schmidt_decompose(psi: Ket, n_left: int):
    """Schmidt decomposition across the cut (first n_left qubits | rest).

    Returns (coefficients, left_kets, right_kets) with coefficients real,
    non-negative, descending, and sum of squares 1.
    """
    n = psi.n_qubits
    if not 0 < n_left < n:
        raise DimensionError(f"cut {n_left} invalid for {n}-qubit state")
    mat = psi.amplitudes.reshape(1 << n_left, 1 << (n - n_left))
    u, s, vh = np.linalg.svd(mat, full_matrices=False)
    left = [Ket(u[:, i] / np.linalg.norm(u[:, i])) for i in range(s.size)]
    right = [Ket(vh[i, :] / np.linalg.norm(vh[i, :])) for i in range(s.size)]
    return s, left, right


def phase_aligned_distance(a, b) -> float:
    """Max-entry distance between two arrays after optimal global phase."""
    am = a.entries if isinstance(a, DenseOperator) else (
        a.amplitudes if isinstance(a, Ket) else np.asarray(a))
    bm = b.entries if isinstance(b, DenseOperator) else (
        b.amplitudes if isinstance(b, Ket) else np.asarray(b))
    inner = np.vdot(am.reshape(-1), bm.reshape(-1))
    phase = inner / abs(inner) if abs(inner) > 1e-300 else 1.0
    return float(np.max(np.abs(bm - phase * am)))


def state_fidelity(rho, psi: Ket) -> float:
    m = rho.entries if isinstance(rho, DensityMatrix) else np.asarray(rho)
    return float(np.real(psi.amplitudes.conj() @ m @ psi.amplitudes))
