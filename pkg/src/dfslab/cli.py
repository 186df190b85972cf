"""Configuration-driven experiment runner.

Four experiment families are exposed as subcommands:

  theta-scan   fidelity vs initial-state elevation angle at fixed duration
  gauge-scan   2-D (theta, gauge-angle) grid with a gauge-invariance statistic
  decay        fidelity vs time over a state ensemble, with decay fits
  scaling      multi-block runs with best-K adjacent-subset curves

Each run reads a YAML config, validates it strictly (unknown keys are
rejected), executes deterministically from a single master seed, and writes
one self-describing JSON result file embedding the resolved config, seed,
and package version.  Exit codes: 0 success, 2 config error, 3 numeric
failure.
"""

from __future__ import annotations

import argparse
import json
import pathlib
import sys

import numpy as np
import yaml

from . import __version__
from .analysis import (DecayRecord, bootstrap, decay_record_from_realizations,
                       default_state_ensemble, empirical_fidelity,
                       accepted_fraction, fit_decay, time_averaged_fidelity)
from .codes import GaugeSpec, dfs2_spec, dfs3_spec
from .devices import DeviceDefaults
from .engine import (ExperimentPlan, acceptance_probability, exact_fidelity,
                     exact_fidelity_blocks, run, run_blocks,
                     best_subset_fidelities)
from .noise import (GateNoiseModel, collective_decoherence,
                    collective_dephasing, generic_two_qubit, linear_per_qubit)
from .sequences import (PulseSequence, Pulse, PulseStep, dfs2_sequence,
                        dfs3_sequence, free_sequence, xy4)
from .tensor import DimensionError


class ConfigError(Exception):
    """Invalid or inconsistent experiment configuration."""


PROTOCOLS = ("free", "xy4", "dfs2", "dfs2_dd", "dfs3", "dfs3_dd")
NOISE_KINDS = ("collective_dephasing", "collective_decoherence",
               "generic_two_qubit", "linear_per_qubit")

# reference cycle: one dfs2_dd symmetrization cycle has 8 free intervals
_SPAN_INTERVALS = 8


# ---------------------------------------------------------------------------
# config schema

_COMMON_KEYS = {
    "experiment": str,
    "protocols": list,
    "noise": dict,
    "mode": str,
    "tau": (int, float),
    "shots": int,
    "seed": int,
    "realizations": int,
    "output": str,
    "exact": bool,
    "physical_qubits": int,
    "gate_noise": dict,
}

_EXPERIMENT_KEYS = {
    "theta_scan": {"theta_points": int},
    "gauge_scan": {"theta_points": int, "gauge_points": int},
    "decay": {"repetitions": list, "ensemble_seed": int, "ensemble_haar": int},
    "scaling": {"blocks": int, "coupling_zz": (int, float),
                "repetitions": list, "window_cycles": (int, float)},
}

_NOISE_KEYS = {"kind": str, "strength": (int, float), "n_bath": int,
               "seed": int, "bath_strength": (int, float)}
_GATE_NOISE_KEYS = {"device": str, "pair": list, "cnot_error": (int, float),
                    "oneq_error": (int, float), "cnot_duration": (int, float),
                    "oneq_duration": (int, float), "readout_error": (int, float)}


def _check_keys(mapping: dict, allowed: dict, where: str) -> None:
    for key, value in mapping.items():
        if key not in allowed:
            raise ConfigError(f"{where}: unknown key {key!r} "
                              f"(allowed: {sorted(allowed)})")
        want = allowed[key]
        # YAML 1.1 reads exponent literals without a sign ("2.0e5") as
        # strings; coerce those where a number is expected
        if isinstance(value, str) and want in ((int, float), float):
            try:
                mapping[key] = value = float(value)
            except ValueError:
                pass
        if not isinstance(value, want):
            raise ConfigError(f"{where}.{key}: expected "
                              f"{want}, got {type(value).__name__}")


def _normalize_protocols(raw) -> list:
    """Return [(name, postselect_bool), ...]."""
    out = []
    for item in raw:
        if isinstance(item, str):
            name, ps = item, True
        elif isinstance(item, dict):
            extra = set(item) - {"name", "ps"}
            if extra:
                raise ConfigError(f"protocols entry: unknown keys {sorted(extra)}")
            name, ps = item.get("name"), bool(item.get("ps", True))
        else:
            raise ConfigError("protocols entries must be strings or "
                              "{name, ps} mappings")
        if name not in PROTOCOLS:
            raise ConfigError(f"unknown protocol {name!r} (allowed: {PROTOCOLS})")
        out.append((name, ps))
    if not out:
        raise ConfigError("protocols must not be empty")
    if len({n for n, _ in out}) != len(out):
        raise ConfigError("duplicate protocol names")
    return out


def load_config(path, experiment: str, overrides: dict) -> dict:
    try:
        with open(path) as fh:
            raw = yaml.safe_load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}")
    except yaml.YAMLError as exc:
        raise ConfigError(f"config {path} is not valid YAML: {exc}")
    if not isinstance(raw, dict):
        raise ConfigError("config root must be a mapping")

    allowed = dict(_COMMON_KEYS)
    allowed.update(_EXPERIMENT_KEYS[experiment])
    _check_keys(raw, allowed, "config")
    if "experiment" in raw and raw["experiment"] != experiment:
        raise ConfigError(f"config declares experiment {raw['experiment']!r} "
                          f"but the {experiment.replace('_', '-')} subcommand was invoked")

    cfg = {
        "experiment": experiment,
        "mode": "ideal_delta",
        "tau": 1e-7,
        "shots": 8000,
        "seed": 0,
        "realizations": 5,
        "exact": False,
        "output": f"{experiment}.json",
    }
    cfg.update(raw)
    for key, value in overrides.items():
        if value is not None:
            cfg[key] = value

    if cfg["mode"] not in ("ideal_delta", "composite_noisy"):
        raise ConfigError(f"mode must be ideal_delta or composite_noisy, "
                          f"got {cfg['mode']!r}")
    if cfg["tau"] <= 0:
        raise ConfigError("tau must be positive")
    if cfg["shots"] < 1:
        raise ConfigError("shots must be >= 1")
    if cfg["realizations"] < 1:
        raise ConfigError("realizations must be >= 1")

    if "noise" not in cfg:
        raise ConfigError("config: missing required key 'noise'")
    _check_keys(cfg["noise"], _NOISE_KEYS, "noise")
    noise = {"n_bath": 1, "seed": 0}
    noise.update(cfg["noise"])
    if "kind" not in noise:
        raise ConfigError("noise: missing required key 'kind'")
    if noise["kind"] not in NOISE_KINDS:
        raise ConfigError(f"noise.kind must be one of {NOISE_KINDS}, "
                          f"got {noise['kind']!r}")
    if "strength" not in noise:
        raise ConfigError("noise: missing required key 'strength'")
    if not 0 <= noise["n_bath"] <= 2:
        raise ConfigError("noise.n_bath must be 0, 1 or 2 (desk-scale cap)")
    cfg["noise"] = noise

    if "protocols" not in cfg:
        raise ConfigError("config: missing required key 'protocols'")
    cfg["protocols"] = _normalize_protocols(cfg["protocols"])
    if experiment == "gauge_scan":
        bad = [n for n, _ in cfg["protocols"] if not n.startswith("dfs3")]
        if bad:
            raise ConfigError(f"gauge_scan only supports dfs3 protocols, got {bad}")

    if "gate_noise" in cfg:
        _check_keys(cfg["gate_noise"], _GATE_NOISE_KEYS, "gate_noise")
        try:
            _build_gate_noise(cfg)
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"gate_noise: {exc}")
    if cfg["mode"] == "composite_noisy" and "gate_noise" not in cfg:
        raise ConfigError("composite_noisy mode requires a gate_noise section")

    cfg["physical_qubits"] = _physical_qubits(cfg)
    if noise["kind"] == "generic_two_qubit":
        sizes = {_protocol_n_sys(n, cfg["physical_qubits"]) for n, _ in cfg["protocols"]}
        if sizes != {2}:
            raise ConfigError("generic_two_qubit noise requires every protocol "
                              "to run on exactly 2 system qubits")
    if noise["kind"].startswith("collective") and \
            min(_protocol_n_sys(n, cfg["physical_qubits"]) for n, _ in cfg["protocols"]) < 2:
        raise ConfigError("collective noise models need >= 2 system qubits; "
                          "set physical_qubits >= 2")

    if experiment == "theta_scan":
        cfg.setdefault("theta_points", 13)
        if cfg["theta_points"] < 2:
            raise ConfigError("theta_points must be >= 2")
    elif experiment == "gauge_scan":
        cfg.setdefault("theta_points", 5)
        cfg.setdefault("gauge_points", 5)
        if cfg["theta_points"] < 2 or cfg["gauge_points"] < 2:
            raise ConfigError("theta_points and gauge_points must be >= 2")
    elif experiment == "decay":
        cfg.setdefault("repetitions", [1, 2, 3, 4, 5, 6, 8, 10])
        cfg.setdefault("ensemble_seed", 2022)
        cfg.setdefault("ensemble_haar", 14)
        _check_repetitions(cfg["repetitions"], minimum=5)
        if cfg["ensemble_haar"] < 0:
            raise ConfigError("ensemble_haar must be >= 0")
    elif experiment == "scaling":
        cfg.setdefault("blocks", 4)
        cfg.setdefault("coupling_zz", 0.0)
        cfg.setdefault("repetitions", [1, 2, 3, 4])
        cfg.setdefault("window_cycles", 3)
        if not 1 <= cfg["blocks"] <= 8:
            raise ConfigError("blocks must be between 1 and 8")
        _check_repetitions(cfg["repetitions"], minimum=2)
        if cfg["window_cycles"] <= 0:
            raise ConfigError("window_cycles must be positive")
    return cfg


def _check_repetitions(reps, minimum: int) -> None:
    if not all(isinstance(m, int) and m >= 1 for m in reps):
        raise ConfigError("repetitions must be positive integers")
    if any(b <= a for a, b in zip(reps, reps[1:])):
        raise ConfigError("repetitions must be strictly increasing")
    if len(reps) < minimum:
        raise ConfigError(f"repetitions needs at least {minimum} entries")


def _physical_qubits(cfg: dict) -> int:
    if "physical_qubits" in cfg:
        n = cfg["physical_qubits"]
        if not 1 <= n <= 3:
            raise ConfigError("physical_qubits must be 1, 2 or 3")
        return n
    names = [n for n, _ in cfg["protocols"]]
    if any(n.startswith("dfs3") for n in names):
        return 3
    if any(n.startswith("dfs2") for n in names):
        return 2
    return 1


# ---------------------------------------------------------------------------
# plan construction

def _protocol_n_sys(name: str, physical_qubits: int) -> int:
    if name.startswith("dfs2"):
        return 2
    if name.startswith("dfs3"):
        return 3
    return physical_qubits


def _build_noise_model(cfg: dict, n_sys: int, realization: int):
    noise = cfg["noise"]
    seed = noise["seed"] + realization
    kw = dict(n_bath=noise["n_bath"], seed=seed)
    if "bath_strength" in noise:
        kw["bath_strength"] = noise["bath_strength"]
    kind = noise["kind"]
    if kind == "collective_dephasing":
        return collective_dephasing(n_sys, strength=noise["strength"], **kw)
    if kind == "collective_decoherence":
        return collective_decoherence(n_sys, strength=noise["strength"], **kw)
    if kind == "generic_two_qubit":
        return generic_two_qubit(strength_scale=noise["strength"], **kw)
    return linear_per_qubit(n_sys, strength_scale=noise["strength"], **kw)


def _build_gate_noise(cfg: dict) -> GateNoiseModel | None:
    if "gate_noise" not in cfg:
        return None
    gn = dict(cfg["gate_noise"])
    if "device" in gn:
        defaults = DeviceDefaults.load(gn.pop("device"))
        pair = tuple(gn.pop("pair")) if "pair" in gn else None
        model = GateNoiseModel.from_device(defaults, pair=pair)
        if gn:
            model = GateNoiseModel(**{**model.__dict__, **gn})
        return model
    return GateNoiseModel(**gn)


def _build_sequence(name: str, cfg: dict) -> PulseSequence:
    """Sequence for one protocol, scaled so every protocol's cycle spans the
    same total free time (one dfs2_dd cycle, 8 intervals of tau)."""
    span = _SPAN_INTERVALS * cfg["tau"]
    n_phys = cfg["physical_qubits"]
    if name == "free":
        seq = free_sequence(span / 4, n_phys, n_intervals=4)
    elif name == "xy4":
        seq = xy4(span / 4, n_qubits=n_phys)
    elif name == "dfs2":
        seq = free_sequence(span / 8, 2, n_intervals=8)
    elif name == "dfs2_dd":
        seq = dfs2_sequence(span / 8)
    elif name == "dfs3":
        seq = free_sequence(span / 6, 3, n_intervals=6)
    else:  # dfs3_dd
        seq = dfs3_sequence(span / 6)
    if cfg["mode"] == "composite_noisy":
        seq = seq.with_mode("composite_noisy")
    return seq


def _plan_seed(master: int, *indices) -> int:
    ss = np.random.SeedSequence([int(master)] + [int(i) for i in indices])
    return int(ss.generate_state(1)[0])


def _make_plan(cfg: dict, name: str, theta: float, phi: float,
               gauge: GaugeSpec | None, realization: int,
               repetitions, seed_indices) -> ExperimentPlan:
    n_sys = _protocol_n_sys(name, cfg["physical_qubits"])
    model = _build_noise_model(cfg, n_sys, realization)
    seq = _build_sequence(name, cfg)
    code = None
    if name.startswith("dfs2"):
        code = dfs2_spec()
    elif name.startswith("dfs3"):
        code = dfs3_spec()
    return ExperimentPlan(
        model=model,
        sequence=seq,
        protocol="dd" if name.endswith("_dd") or name == "xy4" else "free",
        code=code,
        theta=theta,
        phi=phi,
        gauge=gauge,
        gate_noise=_build_gate_noise(cfg),
        repetitions=tuple(repetitions),
        shots=cfg["shots"],
        seed=_plan_seed(cfg["seed"], realization, *seed_indices),
        plan_id=name,
    )


def _point_estimates(plan: ExperimentPlan, cfg: dict, postselect: bool):
    """(fidelity, accepted fraction) per repetition count, exact or sampled."""
    if cfg["exact"]:
        fids, accs = [], []
        for m in plan.repetitions:
            accs.append(acceptance_probability(plan, m))
            fids.append(exact_fidelity(plan, m) if postselect
                        else exact_fidelity(plan, m) * accs[-1])
        return fids, accs
    records = run(plan)
    fids, accs = [], []
    for m in plan.repetitions:
        sub = [r for r in records if r.m == m]
        fids.append(empirical_fidelity(sub, postselect=postselect))
        accs.append(accepted_fraction(sub))
    return fids, accs


def _mean_ci(samples, seed: int):
    """Bootstrap mean and CI; degenerate zero-width CI for one sample."""
    samples = list(samples)
    if len(samples) < 2:
        v = float(samples[0])
        return v, (v, v)
    return bootstrap(samples, k_resamples=2000, seed=seed)


def _group_order(cfg: dict, names) -> list:
    """Seed-randomized execution order for equal-duration protocol groups.

    All protocols in one run share the same cycle span by construction, so
    they form a single group; the order is physically a no-op here but is
    recorded for hardware portability."""
    rng = np.random.default_rng(cfg["seed"])
    names = list(names)
    rng.shuffle(names)
    return names


# ---------------------------------------------------------------------------
# experiment commands

def cmd_theta_scan(cfg: dict) -> dict:
    thetas = np.linspace(0.0, np.pi, cfg["theta_points"])
    order = _group_order(cfg, [n for n, _ in cfg["protocols"]])
    ps_map = dict(cfg["protocols"])
    curves = {}
    for name in order:
        points = []
        for j, theta in enumerate(thetas):
            per_real = []
            for r in range(cfg["realizations"]):
                plan = _make_plan(cfg, name, float(theta), 0.0, None, r,
                                  (1,), (j,))
                fids, _ = _point_estimates(plan, cfg, ps_map[name])
                per_real.append(fids[0])
            mean, ci = _mean_ci(per_real, _plan_seed(cfg["seed"], 10_000, j))
            points.append({"theta": float(theta), "fidelity_mean": mean,
                           "fidelity_ci": list(ci)})
        fvals = [p["fidelity_mean"] for p in points]
        curves[name] = {
            "postselected": ps_map[name],
            "points": points,
            "flatness_range": float(max(fvals) - min(fvals)),
            "flatness_std": float(np.std(fvals)),
        }
    return {"thetas": [float(t) for t in thetas], "curves": curves,
            "group_order": order}


def cmd_gauge_scan(cfg: dict) -> dict:
    thetas = np.linspace(0.0, np.pi, cfg["theta_points"])
    gauges = np.linspace(0.0, np.pi, cfg["gauge_points"])
    order = _group_order(cfg, [n for n, _ in cfg["protocols"]])
    ps_map = dict(cfg["protocols"])
    curves = {}
    for name in order:
        grid = []
        stds = []
        for j, theta in enumerate(thetas):
            row = []
            for k, phi_g in enumerate(gauges):
                per_real = []
                for r in range(cfg["realizations"]):
                    plan = _make_plan(cfg, name, float(theta), 0.0,
                                      GaugeSpec.from_angle(float(phi_g)), r,
                                      (1,), (j, k))
                    fids, _ = _point_estimates(plan, cfg, ps_map[name])
                    per_real.append(fids[0])
                row.append(float(np.mean(per_real)))
            grid.append(row)
            stds.append(float(np.std(row)))
        curves[name] = {
            "postselected": ps_map[name],
            "fidelity_grid": grid,
            "per_theta_gauge_std": stds,
            # gauge-invariance statistic: std over gauge states, averaged
            # over initial logical states
            "gauge_std": float(np.mean(stds)),
        }
    return {"thetas": [float(t) for t in thetas],
            "gauge_angles": [float(g) for g in gauges],
            "curves": curves, "group_order": order}


def _decay_windows(times) -> dict:
    t1 = times[0]
    return {"short": (t1, 3 * t1), "long": (t1, times[-1])}


def cmd_decay(cfg: dict) -> dict:
    ensemble = default_state_ensemble(cfg["ensemble_seed"], cfg["ensemble_haar"])
    reps = tuple(cfg["repetitions"])
    order = _group_order(cfg, [n for n, _ in cfg["protocols"]])
    ps_map = dict(cfg["protocols"])
    curves = {}
    for name in order:
        n_t = len(reps)
        fmat = np.zeros((cfg["realizations"], n_t))
        rmat = np.zeros((cfg["realizations"], n_t))  # raw (no post-selection)
        amat = np.zeros((cfg["realizations"], n_t))
        times = None
        for r in range(cfg["realizations"]):
            per_state_ps = np.zeros((len(ensemble), n_t))
            per_state_raw = np.zeros((len(ensemble), n_t))
            per_state_acc = np.zeros((len(ensemble), n_t))
            for s, (theta, phi) in enumerate(ensemble.states):
                plan = _make_plan(cfg, name, theta, phi, None, r, reps, (s,))
                fids_ps, accs = _point_estimates(plan, cfg, True)
                fids_raw = [f * a for f, a in zip(fids_ps, accs)] \
                    if plan.code is not None else list(fids_ps)
                per_state_ps[s] = fids_ps
                per_state_raw[s] = fids_raw
                per_state_acc[s] = accs
                if times is None:
                    times = [m * plan.sequence.free_time for m in reps]
            fmat[r] = per_state_ps.mean(axis=0)
            rmat[r] = per_state_raw.mean(axis=0)
            amat[r] = per_state_acc.mean(axis=0)
        record = _aggregate_decay(times, fmat, amat,
                                  _plan_seed(cfg["seed"], 20_000))
        raw_record = _aggregate_decay(times, rmat, amat,
                                      _plan_seed(cfg["seed"], 20_001))
        windows = _decay_windows(times)
        fit = fit_decay(record, seed=cfg["seed"])
        curves[name] = {
            "postselected": ps_map[name],
            "times": list(record.times),
            "fidelity_mean": list(record.fidelity_mean),
            "fidelity_ci": [list(c) for c in record.fidelity_ci],
            "fidelity_raw_mean": list(raw_record.fidelity_mean),
            "fidelity_raw_ci": [list(c) for c in raw_record.fidelity_ci],
            "accepted_fraction": list(record.accepted_fraction),
            "fit": {"variant": fit.variant, "c1": fit.c1, "c2": fit.c2,
                    "tau1": fit.tau1, "tau2": fit.tau2, "omega": fit.omega,
                    "aic": fit.aic, "converged": fit.converged,
                    "units_note": fit.units_note},
            "time_averaged_fidelity": {
                label: time_averaged_fidelity(record, lo, hi)
                for label, (lo, hi) in windows.items()},
        }
    return {"repetitions": list(reps), "curves": curves, "group_order": order,
            "ensemble_provenance": list(ensemble.provenance)}


def _aggregate_decay(times, fmat, amat, seed: int) -> DecayRecord:
    if fmat.shape[0] < 2:  # single realization: no bootstrap possible
        row = fmat[0]
        return DecayRecord(times, row, [(v, v) for v in row], amat[0])
    return decay_record_from_realizations(times, fmat, amat,
                                          k_resamples=2000, seed=seed)


def _staggered_pair(seq: PulseSequence):
    """Split one cycle into two time-aligned staggered versions: version A
    pulses on even half-steps, version B on odd half-steps, both with the
    same step count so coupled blocks can be co-simulated."""
    ident = Pulse("I", np.eye(1 << seq.n_qubits, dtype=complex), seq.n_qubits)
    half = seq.tau / 2
    steps_a, steps_b = [], []
    for step in seq.steps:
        steps_a += [PulseStep(step.pulse, half), PulseStep(ident, half)]
        steps_b += [PulseStep(ident, half), PulseStep(step.pulse, half)]
    make = lambda steps, tag: PulseSequence(
        steps=tuple(steps), tau=half, n_qubits=seq.n_qubits,
        mode=seq.mode, name=f"{seq.name}-stagger-{tag}")
    return make(steps_a, "a"), make(steps_b, "b")


def cmd_scaling(cfg: dict) -> dict:
    reps = tuple(cfg["repetitions"])
    order = _group_order(cfg, [n for n, _ in cfg["protocols"]])
    ps_map = dict(cfg["protocols"])
    coupling = float(cfg["coupling_zz"])
    n_blocks = cfg["blocks"]
    curves = {}
    for name in order:
        base = _build_sequence(name, cfg)
        seq_a, seq_b = _staggered_pair(base)
        plans = []
        for b in range(n_blocks):
            n_sys = _protocol_n_sys(name, cfg["physical_qubits"])
            model = _build_noise_model(cfg, n_sys, b)  # heterogeneous blocks
            code = dfs2_spec() if name.startswith("dfs2") else (
                dfs3_spec() if name.startswith("dfs3") else None)
            plans.append(ExperimentPlan(
                model=model, sequence=seq_a if b % 2 == 0 else seq_b,
                protocol="dd" if name.endswith("_dd") or name == "xy4" else "free",
                code=code, theta=np.pi / 2, phi=0.0, gauge=None,
                gate_noise=_build_gate_noise(cfg), repetitions=reps,
                shots=cfg["shots"], seed=_plan_seed(cfg["seed"], 30_000, b),
                plan_id=f"{name}-block{b}"))
        # per-block fidelity decay, then window-averaged F_T per block
        block_curves = []
        for j, m in enumerate(reps):
            if cfg["exact"]:
                fids = exact_fidelity_blocks(plans, coupling, m)
            else:
                one_shot = [
                    ExperimentPlan(**{**p.__dict__, "repetitions": (m,)})
                    for p in plans]
                results = run_blocks(one_shot, coupling)
                fids = [empirical_fidelity(recs, postselect=ps_map[name])
                        for recs in results]
            block_curves.append(fids)
        block_curves = np.asarray(block_curves)  # (n_times, n_blocks)
        cycle_t = plans[0].sequence.free_time
        times = [m * cycle_t for m in reps]
        window = (times[0], min(times[-1], cfg["window_cycles"] * cycle_t))
        f_t = []
        for b in range(n_blocks):
            if len(times) >= 4 and window[1] > window[0]:
                rec = DecayRecord(times, block_curves[:, b],
                                  [(v, v) for v in block_curves[:, b]],
                                  [1.0] * len(times))
                f_t.append(time_averaged_fidelity(rec, *window))
            else:
                f_t.append(float(np.mean(block_curves[:, b])))
        curves[name] = {
            "postselected": ps_map[name],
            "times": times,
            "per_block_fidelity": block_curves.tolist(),
            "per_block_f_t": f_t,
            "best_k_curve": best_subset_fidelities(f_t, n_blocks),
            "window": list(window),
        }
    return {"repetitions": list(reps), "blocks": n_blocks,
            "coupling_zz": coupling, "curves": curves, "group_order": order}


_COMMANDS = {
    "theta_scan": cmd_theta_scan,
    "gauge_scan": cmd_gauge_scan,
    "decay": cmd_decay,
    "scaling": cmd_scaling,
}


# ---------------------------------------------------------------------------
# entry point

def _write_result(cfg: dict, payload: dict, out_dir) -> pathlib.Path:
    out_dir = pathlib.Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / cfg["output"]
    doc = {
        "experiment": cfg["experiment"],
        "version": __version__,
        "seed": cfg["seed"],
        "config": {k: (list(map(list, v)) if k == "protocols" else v)
                   for k, v in sorted(cfg.items())},
        "provenance": {
            "fidelity_mean": "post_selected where the curve's 'postselected' "
                             "flag is true, raw otherwise",
            "fidelity_raw_mean": "raw (acceptance folded in)",
            "accepted_fraction": "raw shot statistics",
        },
        "results": payload,
    }
    with open(path, "w") as fh:
        json.dump(doc, fh, sort_keys=True, indent=2)
        fh.write("\n")
    return path


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dfs-lab",
        description="Decoherence-free-subspace experiment simulator")
    sub = parser.add_subparsers(dest="command", required=True)
    for cmd in ("theta-scan", "gauge-scan", "decay", "scaling"):
        p = sub.add_parser(cmd, help=f"run the {cmd} experiment")
        p.add_argument("--config", required=True, help="YAML config file")
        p.add_argument("--out", default=".", help="output directory")
        p.add_argument("--seed", type=int, default=None,
                       help="override the master seed")
        p.add_argument("--exact", action="store_true", default=None,
                       help="use dense exact fidelities instead of sampling")
        p.add_argument("--shots", type=int, default=None,
                       help="override the shot count")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    experiment = args.command.replace("-", "_")
    overrides = {"seed": args.seed, "shots": args.shots,
                 "exact": True if args.exact else None}
    try:
        cfg = load_config(args.config, experiment, overrides)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    try:
        payload = _COMMANDS[experiment](cfg)
        path = _write_result(cfg, payload, args.out)
    except (ValueError, FloatingPointError, DimensionError,
            np.linalg.LinAlgError, KeyError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return 3
    print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
