"""System-bath interaction models and gate-level error channels.

Baths are small explicit qubit registers with random Hermitian operators, so
total evolution stays exactly unitary and tracing the bath out produces
genuine (non-Markovian) decoherence that pulse sequences can suppress.
Coupling strengths are angular frequencies (rad/s).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .pauli import OperatorSum, collective_residual
from .tensor import DenseOperator, DensityMatrix, embed

DEFAULT_STRENGTH = 1e5  # rad/s; perturbative for tau ~ 1e-7 s


def random_hermitian(n_qubits: int, rng, norm: float = 1.0) -> np.ndarray:
    """Random Hermitian matrix with unit (then rescaled) spectral norm."""
    d = 1 << n_qubits
    a = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    h = (a + a.conj().T) / 2
    s = np.max(np.abs(np.linalg.eigvalsh(h)))
    return h * (norm / s) if s > 0 else h


@dataclass(frozen=True)
class SystemBathModel:
    """H = H_S + H_B + sum_k strength_k * S_k (x) B_k."""

    n_sys: int
    n_bath: int
    h_s: OperatorSum
    h_b: np.ndarray  # dense Hermitian on the bath register (may be 1x1 for no bath)
    couplings: tuple  # of (system OperatorSum, bath dense Hermitian, strength rad/s)
    collective: bool = False

    def __post_init__(self):
        hb = np.asarray(self.h_b, dtype=complex)
        object.__setattr__(self, "h_b", hb)
        if hb.shape != (1 << self.n_bath, 1 << self.n_bath):
            raise ValueError("h_b dimension does not match n_bath")
        object.__setattr__(self, "couplings", tuple(self.couplings))

    @property
    def n_total(self) -> int:
        return self.n_sys + self.n_bath

    def interaction_channels(self) -> dict:
        """Map {label: system OperatorSum} with strengths folded in; each
        channel has an independent bath factor, which is all the first-order
        averaging analysis needs."""
        out = {}
        for k, (sys_op, _bath, strength) in enumerate(self.couplings):
            out[f"ch{k}"] = sys_op * strength
        return out

    def total_hamiltonian(self) -> DenseOperator:
        """Dense Hermitian H on system (x) bath."""
        db = 1 << self.n_bath
        h = np.kron(self.h_s.to_dense(), np.eye(db))
        h = h + np.kron(np.eye(1 << self.n_sys), self.h_b)
        for sys_op, bath_op, strength in self.couplings:
            h = h + strength * np.kron(sys_op.to_dense(), np.asarray(bath_op))
        return DenseOperator(h, hermitian=True)

    def interaction_residual(self) -> float:
        """Relative distance of the interaction from the collective
        (permutation symmetric) span; zero for collective-flagged models.
        Channels are normalized first so the result is scale-free."""
        channels = {}
        for lbl, op in self.interaction_channels().items():
            nrm = op.hs_norm()
            if nrm > 0:
                channels[lbl] = op * (1.0 / nrm)
        if not channels:
            return 0.0
        return collective_residual(channels, self.n_sys) / np.sqrt(len(channels))


def _bath_ops(n_bath: int, count: int, rng):
    if n_bath == 0:
        raise ValueError("a coupled model needs at least one bath qubit")
    return [random_hermitian(n_bath, rng) for _ in range(count)]


def _free_parts(n_sys: int, n_bath: int, rng, bath_norm: float):
    h_s = OperatorSum.zero(n_sys)
    h_b = random_hermitian(n_bath, rng, bath_norm) if n_bath else np.zeros((1, 1))
    return h_s, h_b


def _collective_sum(axis: str, n_sys: int) -> OperatorSum:
    acc = OperatorSum.zero(n_sys)
    for i in range(n_sys):
        acc = acc + OperatorSum.site(axis, i, n_sys)
    return acc


def collective_dephasing(n_sys: int, n_bath: int = 1,
                         strength: float = DEFAULT_STRENGTH,
                         seed: int = 0, bath_strength: float | None = None) -> SystemBathModel:
    """Coupling (sum_i Z_i) (x) B_z with a single random bath operator."""
    if n_sys < 2:
        raise ValueError("collective dephasing model needs n_sys >= 2")
    rng = np.random.default_rng(seed)
    if bath_strength is None:
        bath_strength = strength
    if strength == 0:
        h_s, h_b = _free_parts(n_sys, n_bath, rng, bath_strength)
        return SystemBathModel(n_sys, n_bath, h_s, h_b, (), collective=True)
    (b_z,) = _bath_ops(n_bath, 1, rng)
    h_s, h_b = _free_parts(n_sys, n_bath, rng, bath_strength)
    coupling = (_collective_sum("Z", n_sys), b_z, strength)
    return SystemBathModel(n_sys, n_bath, h_s, h_b, (coupling,), collective=True)


def collective_decoherence(n_sys: int, n_bath: int = 1,
                           strength: float = DEFAULT_STRENGTH,
                           seed: int = 0, bath_strength: float | None = None) -> SystemBathModel:
    """Couplings (sum_i sigma_i^a) (x) B_a for a in {x, y, z}."""
    if n_sys < 2:
        raise ValueError("collective decoherence model needs n_sys >= 2")
    rng = np.random.default_rng(seed)
    if bath_strength is None:
        bath_strength = strength
    if strength == 0:
        h_s, h_b = _free_parts(n_sys, n_bath, rng, bath_strength)
        return SystemBathModel(n_sys, n_bath, h_s, h_b, (), collective=True)
    baths = _bath_ops(n_bath, 3, rng)
    h_s, h_b = _free_parts(n_sys, n_bath, rng, bath_strength)
    couplings = tuple((_collective_sum(ax, n_sys), b, strength)
                      for ax, b in zip("XYZ", baths))
    return SystemBathModel(n_sys, n_bath, h_s, h_b, couplings, collective=True)


def generic_two_qubit(n_bath: int = 1, strength_scale: float = DEFAULT_STRENGTH,
                      seed: int = 0, bath_strength: float | None = None) -> SystemBathModel:
    """All 15 nontrivial two-qubit Pauli couplings, independent bath factors,
    Gaussian coefficients scaled by strength_scale."""
    rng = np.random.default_rng(seed)
    if bath_strength is None:
        bath_strength = strength_scale
    if strength_scale == 0:
        h_s, h_b = _free_parts(2, n_bath, rng, bath_strength)
        return SystemBathModel(2, n_bath, h_s, h_b, ())
    labels = [a + b for a in "IXYZ" for b in "IXYZ" if a + b != "II"]
    baths = _bath_ops(n_bath, len(labels), rng)
    coeffs = rng.normal(size=len(labels)) * strength_scale
    h_s, h_b = _free_parts(2, n_bath, rng, bath_strength)
    couplings = tuple(
        (OperatorSum(2, {tuple(lbl): 1.0}), b, float(c))
        for lbl, b, c in zip(labels, baths, coeffs))
    return SystemBathModel(2, n_bath, h_s, h_b, couplings)


def linear_per_qubit(n_sys: int, n_bath: int = 1,
                     strength_scale: float = DEFAULT_STRENGTH,
                     seed: int = 0, bath_strength: float | None = None) -> SystemBathModel:
    """Independent vector coupling sigma_i . B_i on every system qubit."""
    if n_sys < 1:
        raise ValueError("need at least one system qubit")
    rng = np.random.default_rng(seed)
    if bath_strength is None:
        bath_strength = strength_scale
    if strength_scale == 0:
        h_s, h_b = _free_parts(n_sys, n_bath, rng, bath_strength)
        return SystemBathModel(n_sys, n_bath, h_s, h_b, ())
    couplings = []
    baths = _bath_ops(n_bath, 3 * n_sys, rng)
    coeffs = rng.normal(size=3 * n_sys) * strength_scale
    k = 0
    for i in range(n_sys):
        for ax in "XYZ":
            couplings.append((OperatorSum.site(ax, i, n_sys), baths[k], float(coeffs[k])))
            k += 1
    h_s, h_b = _free_parts(n_sys, n_bath, rng, bath_strength)
    return SystemBathModel(n_sys, n_bath, h_s, h_b, tuple(couplings))


def pairwise_zz(n_sys: int, strength: float) -> OperatorSum:
    """Nearest-neighbor ZZ crosstalk term on the system register (no bath)."""
    acc = OperatorSum.zero(n_sys)
    for i in range(n_sys - 1):
        acc = acc + (OperatorSum.site("Z", i, n_sys) @ OperatorSum.site("Z", i + 1, n_sys)) * strength
    return acc


# ---------------------------------------------------------------------------
# gate-level noise

@dataclass(frozen=True)
class GateNoiseModel:
    """Scalar depolarizing error rates and durations per gate type."""

    cnot_error: float = 0.0
    oneq_error: float = 0.0
    cnot_duration: float = 0.0
    oneq_duration: float = 0.0
    readout_error: float = 0.0

    def __post_init__(self):
        for name in ("cnot_error", "oneq_error", "readout_error"):
            p = getattr(self, name)
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"{name} = {p} outside [0, 1]")
        for name in ("cnot_duration", "oneq_duration"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be nonnegative")

    @classmethod
    def from_device(cls, defaults, pair: tuple | None = None,
                    oneq_duration: float = 35.55e-9) -> "GateNoiseModel":
        """Build from bundled calibration averages; ``pair`` picks one CNOT
        record, otherwise device-wide means are used."""
        if pair is not None:
            rec = defaults.cnot_record(*pair)
            err_cx, dur_cx = rec.err_cx, rec.dur_cx_ns * 1e-9
        else:
            err_cx, dur_cx = defaults.mean_err_cx(), defaults.mean_dur_cx_ns() * 1e-9
        return cls(cnot_error=err_cx, oneq_error=defaults.mean_err_1q(),
                   cnot_duration=dur_cx, oneq_duration=oneq_duration,
                   readout_error=defaults.mean_err_ro())


def depolarize(rho: DensityMatrix, targets, p: float) -> DensityMatrix:
    """rho -> (1-p) rho + p (I/d (x) tr_targets rho) on the target qubits."""
    if p == 0:
        return rho
    n = rho.n_qubits
    targets = list(targets)
    rest = [q for q in range(n) if q not in targets]
    d = 1 << len(targets)
    m = rho.entries.reshape([2] * (2 * n))
    for q in reversed(targets):
        m = np.trace(m, axis1=q, axis2=q + m.ndim // 2)
    rho_rest = m.reshape(1 << len(rest), 1 << len(rest)) if rest else np.array([[1.0]])
    mixed = np.kron(np.eye(d) / d, rho_rest)
    # raw ordering is targets + rest; permute axes back to register order
    perm = targets + rest
    t = mixed.reshape([2] * (2 * n))
    src = list(range(n))
    t = np.moveaxis(t, src, perm)
    t = np.moveaxis(t, [n + s for s in src], [n + x for x in perm])
    mixed = t.reshape(1 << n, 1 << n)
    return DensityMatrix((1 - p) * rho.entries + p * mixed)


def apply_gate_noise(state: DensityMatrix, gate, targets,
                     model: GateNoiseModel) -> DensityMatrix:
    """Ideal gate followed by the model's depolarizing channel on its targets."""
    g = gate.entries if isinstance(gate, DenseOperator) else np.asarray(gate, dtype=complex)
    u = embed(g, targets, state.n_qubits)
    rho = DensityMatrix(u @ state.entries @ u.conj().T)
    p = model.cnot_error if len(tuple(targets)) == 2 else model.oneq_error
    return depolarize(rho, targets, p)
