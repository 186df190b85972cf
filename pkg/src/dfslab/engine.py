"""Experiment execution: prepare, evolve over system+bath, decode, sample.

A plan runs one initial state through either matched free evolution or
repeated pulse-sequence cycles, with the bath traced out before measurement.
Ideal (delta-pulse) evolution uses pure states; composite mode switches to
density matrices so per-gate depolarizing noise can be applied.  All
randomness flows from one seeded generator per plan, so identical plans
replay bit-exactly.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .codes import (CodeSpec, GaugeSpec, accepted_flag, data_prep_gate,
                    decoder_gates, dfs2_encoder_gates, dfs3_encoder_gates)
from .noise import GateNoiseModel, SystemBathModel, depolarize
from .sequences import PulseSequence, compile_pulse
from .tensor import (DensityMatrix, DimensionError, Ket, basis_ket, bloch_ket,
                     embed, expm_hermitian, partial_trace, state_fidelity)


@dataclass(frozen=True)
class ExperimentPlan:
    """Everything needed to reproduce one experiment deterministically."""

    model: SystemBathModel
    sequence: PulseSequence
    protocol: str = "dd"  # "dd" or "free" (matched duration, no pulses)
    code: CodeSpec | None = None
    theta: float = 0.0
    phi: float = 0.0
    gauge: GaugeSpec | None = None
    gate_noise: GateNoiseModel | None = None
    repetitions: tuple = (1,)
    shots: int = 1000
    seed: int = 0
    plan_id: str = ""

    def __post_init__(self):
        if self.protocol not in ("dd", "free"):
            raise ValueError(f"protocol must be 'dd' or 'free', got {self.protocol!r}")
        if self.shots < 1:
            raise ValueError("shots must be >= 1")
        reps = tuple(self.repetitions)
        if not reps or any(b <= a for a, b in zip(reps, reps[1:])) or reps[0] < 1:
            raise ValueError("repetitions must be a nonempty increasing list of positive ints")
        object.__setattr__(self, "repetitions", reps)
        if self.code is not None and self.code.n_physical != self.model.n_sys:
            raise DimensionError(
                f"code needs {self.code.n_physical} system qubits, model has {self.model.n_sys}")
        if self.sequence.n_qubits != self.model.n_sys:
            raise DimensionError("sequence register does not match the system size")


@dataclass(frozen=True)
class ShotRecord:
    m: int
    t_total: float
    data_outcome: int
    flag_outcomes: str
    accepted: bool


# ---------------------------------------------------------------------------
# state preparation and decoding circuits

def _prep_gates(plan: ExperimentPlan):
    prep = data_prep_gate(plan.theta, plan.phi)
    if plan.code is None:
        # every physical qubit carries a copy of the state
        return [type(prep)(prep.name, prep.matrix, (q,))
                for q in range(plan.model.n_sys)]
    if plan.code.kind == "DFS2":
        return [prep] + dfs2_encoder_gates()
    gauge = plan.gauge or GaugeSpec()
    return [prep] + dfs3_encoder_gates(gauge, optimized=False)


def _unprep_gates(plan: ExperimentPlan):
    """Inverse of decode-and-unrotate: after these, the ideal outcome is
    the all-zeros string on the measured data qubit(s)."""
    prep = data_prep_gate(plan.theta, plan.phi)
    inv_prep = [type(prep)(prep.name + "^-1", prep.matrix.conj().T, (q,))
                for q in range(plan.model.n_sys if plan.code is None else 1)]
    if plan.code is None:
        return inv_prep
    return decoder_gates(plan.code, plan.gauge) + inv_prep


def _bath_ground(model: SystemBathModel) -> np.ndarray:
    if model.n_bath == 0:
        return np.array([1.0 + 0j])
    hb = model.h_b
    if np.max(np.abs(hb)) == 0:
        return basis_ket("0" * model.n_bath).amplitudes
    _, v = np.linalg.eigh(hb)
    return v[:, 0]


# ---------------------------------------------------------------------------
# evolution

class _Propagators:
    """Caches dense matrix exponentials of one plan's total Hamiltonian."""

    def __init__(self, model: SystemBathModel, extra_h: np.ndarray | None = None):
        self.h = model.total_hamiltonian().entries
        if extra_h is not None:
            self.h = self.h + extra_h
        self.n_sys = model.n_sys
        self.n_tot = model.n_total
        self._cache = {}

    def free(self, t: float) -> np.ndarray:
        key = round(t, 18)
        if key not in self._cache:
            self._cache[key] = expm_hermitian(self.h, t).entries if t > 0 else \
                np.eye(self.h.shape[0], dtype=complex)
        return self._cache[key]


def _embed_sys(matrix: np.ndarray, targets, n_sys: int, n_bath: int) -> np.ndarray:
    return embed(matrix, list(targets), n_sys + n_bath)


def _cycle_unitary(plan: ExperimentPlan, prop: _Propagators) -> np.ndarray:
    """Ideal-pulse propagator of one sequence cycle (pulse, then interval)."""
    n_sys, n_bath = plan.model.n_sys, plan.model.n_bath
    u = np.eye(1 << (n_sys + n_bath), dtype=complex)
    u_tau = prop.free(plan.sequence.tau)
    for step in plan.sequence.steps:
        p = _embed_sys(step.pulse.matrix, range(n_sys), n_sys, n_bath)
        u = u_tau @ p @ u
    return u


def _evolved_state(plan: ExperimentPlan, m: int):
    """Dense output density matrix on the full register plus total time."""
    if plan.gate_noise is not None and plan.sequence.mode == "composite_noisy":
        return _evolved_composite(plan, m)
    n_sys, n_bath = plan.model.n_sys, plan.model.n_bath
    prop = _Propagators(plan.model)
    psi = _initial_ket(plan)
    t_cycle = plan.sequence.free_time
    t_total = m * t_cycle
    if plan.protocol == "free":
        u = prop.free(t_total)
        out = u @ psi
    else:
        u_cycle = _cycle_unitary(plan, prop)
        out = np.linalg.matrix_power(u_cycle, m) @ psi
    rho = np.outer(out, out.conj())
    rho = _apply_sys_circuit(rho, _unprep_gates(plan), n_sys, n_bath, None)
    return DensityMatrix(rho), t_total


def _initial_ket(plan: ExperimentPlan) -> np.ndarray:
    n_sys, n_bath = plan.model.n_sys, plan.model.n_bath
    sys0 = basis_ket("0" * n_sys).amplitudes
    psi = np.kron(sys0, _bath_ground(plan.model))
    for g in _prep_gates(plan):
        psi = _embed_sys(g.matrix, g.targets, n_sys, n_bath) @ psi
    return psi


def _apply_sys_circuit(rho: np.ndarray, gates, n_sys: int, n_bath: int,
                       gate_noise: GateNoiseModel | None) -> np.ndarray:
    for g in gates:
        u = _embed_sys(g.matrix, g.targets, n_sys, n_bath)
        rho = u @ rho @ u.conj().T
        if gate_noise is not None:
            p = gate_noise.cnot_error if len(g.targets) == 2 else gate_noise.oneq_error
            if len(g.targets) <= 2 and p > 0 and not g.name.startswith("Rz"):
                rho = depolarize(DensityMatrix(rho), list(g.targets), p).entries
    return rho


def _evolved_composite(plan: ExperimentPlan, m: int):
    """Density-matrix evolution with compiled noisy pulses.

    Each compiled gate is applied instantaneously at the midpoint of its
    declared duration, with Hamiltonian evolution filling the two halves;
    preparation and decoding circuits are noisy but take no wall time.
    """
    n_sys, n_bath = plan.model.n_sys, plan.model.n_bath
    gn = plan.gate_noise
    prop = _Propagators(plan.model)
    psi = basis_ket("0" * n_sys).amplitudes
    psi = np.kron(psi, _bath_ground(plan.model))
    rho = np.outer(psi, psi.conj())
    rho = _apply_sys_circuit(rho, _prep_gates(plan), n_sys, n_bath, gn)

    steps = []  # (kind, payload) executed once per cycle
    t_cycle = 0.0
    for step in plan.sequence.steps:
        comp = compile_pulse(step.pulse.label)
        for g in comp.gates:
            dur = gn.cnot_duration if g.name == "CNOT" else (
                0.0 if g.name.startswith("Rz") else gn.oneq_duration)
            steps.append(("gate", (g, dur)))
            t_cycle += dur
        steps.append(("wait", step.free_duration_after))
        t_cycle += step.free_duration_after
    t_total = m * t_cycle

    if plan.protocol == "free":
        u = prop.free(t_total)
        rho = u @ rho @ u.conj().T
    else:
        for _ in range(m):
            for kind, payload in steps:
                if kind == "wait":
                    u = prop.free(payload)
                    rho = u @ rho @ u.conj().T
                else:
                    g, dur = payload
                    if dur > 0:
                        u = prop.free(dur / 2)
                        rho = u @ rho @ u.conj().T
                    rho = _apply_sys_circuit(rho, [g], n_sys, n_bath, gn)
                    if dur > 0:
                        u = prop.free(dur / 2)
                        rho = u @ rho @ u.conj().T
    rho = _apply_sys_circuit(rho, _unprep_gates(plan), n_sys, n_bath, gn)
    return DensityMatrix(rho), t_total


# ---------------------------------------------------------------------------
# outcome distributions, sampling, exact fidelities

def _system_probs(rho_full: DensityMatrix, n_sys: int, n_bath: int) -> np.ndarray:
    rho_sys = partial_trace(rho_full, set(range(n_sys))) if n_bath else rho_full
    p = np.real(np.diag(rho_sys.entries)).clip(min=0.0)
    return p / p.sum()


def _record_from_bits(plan: ExperimentPlan, m: int, t_total: float, bits: str) -> ShotRecord:
    if plan.code is None:
        return ShotRecord(m, t_total, int(bits[0]), bits[1:], True)
    flags = "".join(bits[q] for q in plan.code.flag_slots)
    return ShotRecord(m, t_total, int(bits[plan.code.data_slot]), flags,
                      accepted_flag(plan.code, flags))


def run(plan: ExperimentPlan) -> list:
    """Sample shot records for every repetition count in the plan."""
    n_sys, n_bath = plan.model.n_sys, plan.model.n_bath
    rng = np.random.default_rng(plan.seed)
    ro = plan.gate_noise.readout_error if plan.gate_noise else 0.0
    records = []
    for m in plan.repetitions:
        rho, t_total = _evolved_state(plan, m)
        probs = _system_probs(rho, n_sys, n_bath)
        draws = rng.choice(probs.size, size=plan.shots, p=probs)
        for idx in draws:
            bits = format(int(idx), f"0{n_sys}b")
            if ro > 0:
                flips = rng.random(n_sys) < ro
                bits = "".join(str(int(b) ^ int(f)) for b, f in zip(bits, flips))
            records.append(_record_from_bits(plan, m, t_total, bits))
    return records


def exact_fidelity(plan: ExperimentPlan, m: int) -> float:
    """Noiseless-measurement post-selected fidelity from the dense output.

    For encoded plans: probability of data bit 0 conditioned on flag
    acceptance (the decoder maps the ideal outcome to |0> on the data
    qubit).  For unencoded plans: best single-qubit fidelity across the
    register.
    """
    n_sys, n_bath = plan.model.n_sys, plan.model.n_bath
    rho, _ = _evolved_state(plan, m)
    rho_sys = partial_trace(rho, set(range(n_sys))) if n_bath else rho
    if plan.code is None:
        best = 0.0
        for q in range(n_sys):
            rq = partial_trace(rho_sys, {q})
            best = max(best, float(np.real(rq.entries[0, 0])))
        return best
    probs = np.real(np.diag(rho_sys.entries)).clip(min=0.0)
    p_acc = 0.0
    p_good = 0.0
    for idx, p in enumerate(probs):
        bits = format(idx, f"0{n_sys}b")
        flags = "".join(bits[q] for q in plan.code.flag_slots)
        if accepted_flag(plan.code, flags):
            p_acc += p
            if bits[plan.code.data_slot] == "0":
                p_good += p
    if p_acc <= 0:
        raise ValueError("acceptance probability is zero; nothing to post-select")
    return p_good / p_acc


def acceptance_probability(plan: ExperimentPlan, m: int) -> float:
    n_sys, n_bath = plan.model.n_sys, plan.model.n_bath
    if plan.code is None:
        return 1.0
    rho, _ = _evolved_state(plan, m)
    rho_sys = partial_trace(rho, set(range(n_sys))) if n_bath else rho
    probs = np.real(np.diag(rho_sys.entries)).clip(min=0.0)
    p_acc = 0.0
    for idx, p in enumerate(probs):
        bits = format(idx, f"0{n_sys}b")
        flags = "".join(bits[q] for q in plan.code.flag_slots)
        if accepted_flag(plan.code, flags):
            p_acc += p
    return float(p_acc)


def free_equivalent(seq: PulseSequence, m: int, gate_noise: GateNoiseModel | None = None) -> float:
    """Total duration of m cycles in the sequence's active mode."""
    return m * seq.cycle_time(gate_noise)


# ---------------------------------------------------------------------------
# multi-block runs (several logical/physical blocks, optional ZZ crosstalk)

def run_blocks(plans, coupling: float | None = None):
    """Simulate a list of block plans; optionally couple adjacent blocks.

    Without coupling every block runs independently.  With a nonzero ZZ
    coupling, blocks are co-simulated in adjacent pairs (boundary system
    qubit of one block to the first system qubit of the next); odd final
    blocks run alone.  Returns one record list per block.
    """
    if coupling is None or coupling == 0:
        return [run(p) for p in plans]
    out = [None] * len(plans)
    for i in range(0, len(plans) - 1, 2):
        ra, rb = _run_coupled_pair(plans[i], plans[i + 1], coupling)
        out[i], out[i + 1] = ra, rb
    if len(plans) % 2:
        out[-1] = run(plans[-1])
    return out


def exact_fidelity_blocks(plans, coupling: float | None, m: int):
    """Exact per-block post-selected fidelities (same pairing as run_blocks)."""
    if coupling is None or coupling == 0:
        return [exact_fidelity(p, m) for p in plans]
    out = [None] * len(plans)
    for i in range(0, len(plans) - 1, 2):
        fa, fb = _coupled_pair_fidelities(plans[i], plans[i + 1], coupling, m)
        out[i], out[i + 1] = fa, fb
    if len(plans) % 2:
        out[-1] = exact_fidelity(plans[-1], m)
    return out


def _pair_setup(pa: ExperimentPlan, pb: ExperimentPlan, coupling: float):
    """Joint register [A_sys, A_bath, B_sys, B_bath] with boundary ZZ."""
    na, nb = pa.model.n_total, pb.model.n_total
    n = na + nb
    if n > 12:
        raise DimensionError(f"co-simulated pair needs {n} qubits, exceeds cap of 12")
    if len(pa.sequence.steps) != len(pb.sequence.steps) or \
            abs(pa.sequence.tau - pb.sequence.tau) > 1e-18:
        raise ValueError("co-simulated blocks need aligned sequence steps")
    ha = pa.model.total_hamiltonian().entries
    hb = pb.model.total_hamiltonian().entries
    h = np.kron(ha, np.eye(1 << nb)) + np.kron(np.eye(1 << na), hb)
    zq = np.diag([1.0, -1.0]).astype(complex)
    zz = embed(zq, [pa.model.n_sys - 1], n) @ embed(zq, [na], n)
    h = h + coupling * zz
    return h, na, nb


def _pair_evolved(pa, pb, coupling, m):
    h, na, nb = _pair_setup(pa, pb, coupling)
    psi = np.kron(_initial_ket(pa), _initial_ket(pb))
    u_tau = expm_hermitian(h, pa.sequence.tau).entries
    n = na + nb
    u_cycle = np.eye(1 << n, dtype=complex)
    for sa, sb in zip(pa.sequence.steps, pb.sequence.steps):
        p = embed(sa.pulse.matrix, list(range(pa.model.n_sys)), n) @ \
            embed(sb.pulse.matrix, [na + q for q in range(pb.model.n_sys)], n)
        u_cycle = u_tau @ p @ u_cycle
    out = np.linalg.matrix_power(u_cycle, m) @ psi
    rho = np.outer(out, out.conj())
    t_total = m * pa.sequence.free_time
    halves = []
    for offset, plan, ntot in ((0, pa, na), (na, pb, nb)):
        keep = set(range(offset, offset + ntot))
        rho_block = partial_trace(DensityMatrix(rho), keep)
        rb = _apply_sys_circuit(rho_block.entries, _unprep_gates(plan),
                                plan.model.n_sys, plan.model.n_bath, None)
        halves.append((DensityMatrix(rb), t_total))
    return halves


def _run_coupled_pair(pa, pb, coupling):
    results = []
    for plan, _other in ((pa, pb), (pb, pa)):
        results.append([])
    for m in pa.repetitions:
        halves = _pair_evolved(pa, pb, coupling, m)
        for k, (plan, (rho, t_total)) in enumerate(zip((pa, pb), halves)):
            rng = np.random.default_rng((plan.seed, m))
            probs = _system_probs(rho, plan.model.n_sys, plan.model.n_bath)
            draws = rng.choice(probs.size, size=plan.shots, p=probs)
            for idx in draws:
                bits = format(int(idx), f"0{plan.model.n_sys}b")
                results[k].append(_record_from_bits(plan, m, t_total, bits))
    return results


def _coupled_pair_fidelities(pa, pb, coupling, m):
    halves = _pair_evolved(pa, pb, coupling, m)
    fids = []
    for plan, (rho, _t) in zip((pa, pb), halves):
        rho_sys = partial_trace(rho, set(range(plan.model.n_sys))) \
            if plan.model.n_bath else rho
        if plan.code is None:
            best = 0.0
            for q in range(plan.model.n_sys):
                rq = partial_trace(rho_sys, {q})
                best = max(best, float(np.real(rq.entries[0, 0])))
            fids.append(best)
            continue
        probs = np.real(np.diag(rho_sys.entries)).clip(min=0.0)
        p_acc = p_good = 0.0
        for idx, p in enumerate(probs):
            bits = format(idx, f"0{plan.model.n_sys}b")
            flags = "".join(bits[q] for q in plan.code.flag_slots)
            if accepted_flag(plan.code, flags):
                p_acc += p
                if bits[plan.code.data_slot] == "0":
                    p_good += p
        fids.append(p_good / p_acc if p_acc > 0 else 0.0)
    return fids


def best_subset_fidelities(fidelities, k: int) -> list:
    """Mean fidelity of the best k blocks, for k = 1..k (order statistics)."""
    ordered = sorted(fidelities, reverse=True)
    return [float(np.mean(ordered[:j])) for j in range(1, k + 1)]


# ---------------------------------------------------------------------------
# record streaming

def write_records(path, plan_id: str, records) -> None:
    with open(path, "a") as fh:
        for r in records:
            fh.write(json.dumps({"plan_id": plan_id, "m": r.m, "t_total": r.t_total,
                                 "data_bit": r.data_outcome, "flags": r.flag_outcomes,
                                 "accepted": r.accepted}, sort_keys=True) + "\n")


def read_records(path) -> list:
    out = []
    with open(path) as fh:
        for line in fh:
            if line.strip():
                out.append(json.loads(line))
    return out
