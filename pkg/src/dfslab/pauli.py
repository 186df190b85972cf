"""Symbolic-numeric algebra over Pauli strings.

Operators are linear combinations of multi-qubit Pauli strings.  The
Hilbert-Schmidt inner product is normalized as Tr(A^dag B)/dim, so the
identity string has unit norm and distinct Pauli strings are orthonormal.

System-bath interactions with abstract bath factors are handled as
channel maps {label: system OperatorSum}; first-order averaging is linear
in each bath factor, so every channel can be analyzed independently.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .tensor import DenseOperator, PAULI, kron_all

_MUL = {
    ("I", "I"): (1, "I"), ("I", "X"): (1, "X"), ("I", "Y"): (1, "Y"), ("I", "Z"): (1, "Z"),
    ("X", "I"): (1, "X"), ("X", "X"): (1, "I"), ("X", "Y"): (1j, "Z"), ("X", "Z"): (-1j, "Y"),
    ("Y", "I"): (1, "Y"), ("Y", "X"): (-1j, "Z"), ("Y", "Y"): (1, "I"), ("Y", "Z"): (1j, "X"),
    ("Z", "I"): (1, "Z"), ("Z", "X"): (1j, "Y"), ("Z", "Y"): (-1j, "X"), ("Z", "Z"): (1, "I"),
}

_PHASES = (1, -1, 1j, -1j)

PRUNE_TOL = 1e-14


@dataclass(frozen=True)
class PauliString:
    """Tensor product of single-qubit Paulis with a discrete phase."""

    axes: tuple
    phase: complex = 1

    def __post_init__(self):
        if any(a not in "IXYZ" for a in self.axes):
            raise ValueError(f"invalid Pauli axes {self.axes}")
        if self.phase not in _PHASES:
            raise ValueError(f"phase must be one of +-1, +-i, got {self.phase}")
        object.__setattr__(self, "axes", tuple(self.axes))

    @classmethod
    def from_label(cls, label: str, phase: complex = 1) -> "PauliString":
        return cls(tuple(label), phase)

    @property
    def n_qubits(self) -> int:
        return len(self.axes)

    @property
    def label(self) -> str:
        return "".join(self.axes)

    def __mul__(self, other: "PauliString") -> "PauliString":
        if len(self.axes) != len(other.axes):
            raise ValueError("qubit count mismatch in Pauli product")
        phase = self.phase * other.phase
        axes = []
        for a, b in zip(self.axes, other.axes):
            p, c = _MUL[(a, b)]
            phase *= p
            axes.append(c)
        return PauliString(tuple(axes), phase)

    def dagger(self) -> "PauliString":
        return PauliString(self.axes, np.conj(self.phase))

    def to_dense(self) -> np.ndarray:
        return self.phase * kron_all(*[PAULI[a] for a in self.axes])

    def commutes_with(self, other: "PauliString") -> bool:
        sign = 1
        for a, b in zip(self.axes, other.axes):
            if a != "I" and b != "I" and a != b:
                sign = -sign
        return sign == 1


class OperatorSum:
    """Weighted sum of Pauli strings over a fixed qubit register."""

    def __init__(self, n_qubits: int, terms=None):
        self.n_qubits = n_qubits
        self.terms: dict = {}
        if terms:
            for key, coeff in (terms.items() if isinstance(terms, dict) else terms):
                self._accumulate(key, coeff)
        self._prune()

    def _accumulate(self, key, coeff):
        if isinstance(key, PauliString):
            coeff = coeff * key.phase
            key = key.axes
        key = tuple(key)
        if len(key) != self.n_qubits:
            raise ValueError(f"term {key} does not act on {self.n_qubits} qubits")
        self.terms[key] = self.terms.get(key, 0.0) + complex(coeff)

    def _prune(self):
        self.terms = {k: c for k, c in self.terms.items() if abs(c) > PRUNE_TOL}

    # -- constructors ------------------------------------------------------
    @classmethod
    def zero(cls, n_qubits: int) -> "OperatorSum":
        return cls(n_qubits)

    @classmethod
    def identity(cls, n_qubits: int) -> "OperatorSum":
        return cls(n_qubits, {tuple("I" * n_qubits): 1.0})

    @classmethod
    def single(cls, label: str, coeff: complex = 1.0) -> "OperatorSum":
        return cls(len(label), {tuple(label): coeff})

    @classmethod
    def site(cls, axis: str, qubit: int, n_qubits: int, coeff: complex = 1.0) -> "OperatorSum":
        axes = ["I"] * n_qubits
        axes[qubit] = axis
        return cls(n_qubits, {tuple(axes): coeff})

    @classmethod
    def from_dense(cls, mat, n_qubits: int, tol: float = PRUNE_TOL) -> "OperatorSum":
        m = mat.entries if isinstance(mat, DenseOperator) else np.asarray(mat, dtype=complex)
        dim = 1 << n_qubits
        if m.shape != (dim, dim):
            raise ValueError(f"matrix shape {m.shape} does not match {n_qubits} qubits")
        terms = {}
        for key in _iter_labels(n_qubits):
            basis = kron_all(*[PAULI[a] for a in key])
            c = np.trace(basis.conj().T @ m) / dim
            if abs(c) > tol:
                terms[key] = c
        return cls(n_qubits, terms)

    # -- algebra -----------------------------------------------------------
    def __add__(self, other: "OperatorSum") -> "OperatorSum":
        out = OperatorSum(self.n_qubits, dict(self.terms))
        for k, c in other.terms.items():
            out._accumulate(k, c)
        out._prune()
        return out

    def __sub__(self, other: "OperatorSum") -> "OperatorSum":
        return self + (other * -1.0)

    def __mul__(self, scalar: complex) -> "OperatorSum":
        return OperatorSum(self.n_qubits, {k: c * scalar for k, c in self.terms.items()})

    __rmul__ = __mul__

    def __matmul__(self, other: "OperatorSum") -> "OperatorSum":
        out = OperatorSum(self.n_qubits)
        for ka, ca in self.terms.items():
            for kb, cb in other.terms.items():
                p = PauliString(ka) * PauliString(kb)
                out._accumulate(p.axes, ca * cb * p.phase)
        out._prune()
        return out

    def dagger(self) -> "OperatorSum":
        return OperatorSum(self.n_qubits, {k: np.conj(c) for k, c in self.terms.items()})

    def to_dense(self) -> np.ndarray:
        dim = 1 << self.n_qubits
        out = np.zeros((dim, dim), dtype=complex)
        for k, c in self.terms.items():
            out += c * kron_all(*[PAULI[a] for a in k])
        return out

    def hs_inner(self, other: "OperatorSum") -> complex:
        # strings are orthonormal under Tr(A^dag B)/dim
        acc = 0.0
        for k, c in self.terms.items():
            if k in other.terms:
                acc += np.conj(c) * other.terms[k]
        return complex(acc)

    def hs_norm(self) -> float:
        return float(np.sqrt(sum(abs(c) ** 2 for c in self.terms.values())))

    def is_hermitian(self, tol: float = 1e-12) -> bool:
        return all(abs(c.imag) < tol for c in self.terms.values())

    def __repr__(self):
        parts = [f"({c:.4g})*{''.join(k)}" for k, c in sorted(self.terms.items())]
        return " + ".join(parts) if parts else "0"


def _iter_labels(n_qubits: int):
    if n_qubits == 0:
        yield ()
        return
    for rest in _iter_labels(n_qubits - 1):
        for a in "IXYZ":
            yield (a,) + rest


# ---------------------------------------------------------------------------
# conjugation and toggling-frame averaging

def conjugate(h: OperatorSum, p) -> OperatorSum:
    """Return p^dag h p re-expressed in the Pauli basis."""
    if isinstance(p, PauliString):
        out = OperatorSum(h.n_qubits)
        for k, c in h.terms.items():
            prod = p.dagger() * PauliString(k) * p
            out._accumulate(prod.axes, c * prod.phase)
        out._prune()
        return out
    m = p.entries if isinstance(p, DenseOperator) else np.asarray(p, dtype=complex)
    if np.max(np.abs(m.conj().T @ m - np.eye(m.shape[0]))) > 1e-10:
        raise ValueError("conjugator must be unitary")
    dense = m.conj().T @ h.to_dense() @ m
    return OperatorSum.from_dense(dense, h.n_qubits)


def toggling_frames(pulses) -> list:
    """Cumulative products of pulses, one frame per free-evolution interval.

    For the evolution P_K f P_{K-1} f ... P_1 f, the frame in force during
    interval j is Q_{j-1} = P_{j-1} ... P_1 with Q_0 = I, and the
    first-order average Hamiltonian is (1/K) sum_j Q_j^dag H Q_j.
    ``pulses`` lists P_1 ... P_K in time order as dense matrices.
    """
    mats = [p.entries if isinstance(p, DenseOperator) else np.asarray(p, dtype=complex)
            for p in pulses]
    if not mats:
        raise ValueError("empty pulse sequence")
    frames = [np.eye(mats[0].shape[0], dtype=complex)]
    for p in mats[:-1]:
        frames.append(p @ frames[-1])
    return frames


def first_order_average(seq, h_sb):
    """First-order (average-Hamiltonian) term of a pulse sequence.

    ``seq`` may be a PulseSequence (equal intervals required) or an explicit
    list of dense pulse unitaries P_1..P_K in time order.  ``h_sb`` is either
    an OperatorSum on the system register or a channel map
    {label: OperatorSum}; the result has the same shape.
    """
    pulses = _extract_pulses(seq)
    frames = toggling_frames(pulses)
    if isinstance(h_sb, dict):
        return {lbl: _average_one(frames, op) for lbl, op in h_sb.items()}
    return _average_one(frames, h_sb)


def _extract_pulses(seq):
    if isinstance(seq, (list, tuple)):
        return list(seq)
    # duck-typed PulseSequence from dfslab.sequences
    steps = getattr(seq, "steps", None)
    if steps is None:
        raise TypeError(f"cannot extract pulses from {type(seq)!r}")
    durations = {round(s.free_duration_after, 15) for s in steps}
    if len(durations) > 1:
        raise ValueError("first-order analyzer requires equal free intervals")
    return [s.unitary() for s in steps]


def _average_one(frames, h: OperatorSum) -> OperatorSum:
    acc = OperatorSum.zero(h.n_qubits)
    for q in frames:
        acc = acc + conjugate(h, q)
    return acc * (1.0 / len(frames))


# ---------------------------------------------------------------------------
# subspace bases (two-qubit error-operator sectors and collective spans)

class SubspaceBasis:
    """Orthonormal (Hilbert-Schmidt) family of OperatorSums."""

    def __init__(self, name: str, elements):
        self.name = name
        self.elements = [e * (1.0 / e.hs_norm()) for e in elements]
        gram = np.array([[a.hs_inner(b) for b in self.elements] for a in self.elements])
        if np.max(np.abs(gram - np.eye(len(self.elements)))) > 1e-12:
            raise ValueError(f"basis {name} is not orthonormal")

    def __len__(self):
        return len(self.elements)


def _two_qubit(label_pairs):
    return [OperatorSum(2, {tuple(k): c for k, c in pairs}) for pairs in label_pairs]


def leak_basis() -> SubspaceBasis:
    """Operators mediating transitions into/out of the two-qubit DFS."""
    labels = ["XI", "IX", "YI", "IY", "XZ", "ZX", "YZ", "ZY"]
    return SubspaceBasis("P_Leak", [OperatorSum.single(l) for l in labels])


def logi_basis() -> SubspaceBasis:
    """Logical operators of the two-qubit code (act as Paulis on the DFS)."""
    sx = OperatorSum(2, {("X", "X"): 0.5, ("Y", "Y"): 0.5})
    sy = OperatorSum(2, {("Y", "X"): 0.5, ("X", "Y"): -0.5})
    sz = OperatorSum(2, {("Z", "I"): 0.5, ("I", "Z"): -0.5})
    return SubspaceBasis("P_Logi", [sx, sy, sz])


def dfs_basis() -> SubspaceBasis:
    """Operators acting trivially (vanishing or uniformly) on the DFS.

    Together with P_Leak and P_Logi this spans all 16 two-qubit Pauli
    directions; the (XX - YY)/2 element vanishes on the DFS and maps
    |00> <-> |11|, completing the span.
    """
    els = [
        OperatorSum(2, {("Z", "I"): 0.5, ("I", "Z"): 0.5}),
        OperatorSum(2, {("X", "Y"): 0.5, ("Y", "X"): 0.5}),
        OperatorSum(2, {("X", "X"): 0.5, ("Y", "Y"): -0.5}),
        OperatorSum.identity(2),
        OperatorSum.single("ZZ"),
    ]
    return SubspaceBasis("P_DFS", els)


def collective_basis(n_qubits: int) -> SubspaceBasis:
    """Span of identity and the total-spin operators sum_i sigma_i^alpha."""
    els = [OperatorSum.identity(n_qubits)]
    for axis in "XYZ":
        acc = OperatorSum.zero(n_qubits)
        for q in range(n_qubits):
            acc = acc + OperatorSum.site(axis, q, n_qubits)
        els.append(acc)
    return SubspaceBasis("Collective", els)


def project(h: OperatorSum, basis: SubspaceBasis):
    """Orthogonal projection of h onto the basis span.

    Returns (component, residual_norm) with residual measured in the
    Hilbert-Schmidt norm.
    """
    if basis.elements and basis.elements[0].n_qubits != h.n_qubits:
        raise ValueError("basis and operator act on different registers")
    comp = OperatorSum.zero(h.n_qubits)
    for e in basis.elements:
        comp = comp + e * e.hs_inner(h)
    return comp, (h - comp).hs_norm()


def collective_residual(h, n_qubits: int) -> float:
    """Hilbert-Schmidt distance of h from the collective span.

    Channel maps are treated channel-by-channel with independent bath
    factors; the residuals add in quadrature.
    """
    basis = collective_basis(n_qubits)
    if isinstance(h, dict):
        return float(np.sqrt(sum(project(op, basis)[1] ** 2 for op in h.values())))
    return project(h, basis)[1]
