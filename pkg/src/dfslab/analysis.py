"""Fidelity statistics: ensembles, estimators, decay fits, bootstrap.

The decay model is F(t) = C1 * f(t) + C2 with
f(t) = exp(-t/tau1) * cos(omega * t) + exp(-t/tau2); C1 and C2 are pinned
to the data's endpoint values, leaving (tau1, tau2, omega) for the
nonlinear solver.  Reduced variants (omega = 0 and/or tau2 = infinity) are
fitted alongside the full model and ranked by small-sample-corrected AIC.

Note on units: omega is an angular frequency in rad/s everywhere in this
module; reported cycle frequencies (Hz) must be divided by 2*pi on input.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.optimize import least_squares

OMEGA_UNITS_NOTE = "omega is angular (rad/s); divide Hz values by 2*pi on input"


# ---------------------------------------------------------------------------
# state ensembles

PAULI_POLES = (
    (0.0, 0.0),              # +Z
    (np.pi, 0.0),            # -Z
    (np.pi / 2, 0.0),        # +X
    (np.pi / 2, np.pi),      # -X
    (np.pi / 2, np.pi / 2),  # +Y
    (np.pi / 2, 3 * np.pi / 2),  # -Y
)


@dataclass(frozen=True)
class StateEnsemble:
    """Bloch angles (theta, phi) with per-state provenance tags."""

    states: tuple
    provenance: tuple

    def __post_init__(self):
        if len(self.states) != len(self.provenance):
            raise ValueError("states and provenance must align")
        object.__setattr__(self, "states", tuple(self.states))
        object.__setattr__(self, "provenance", tuple(self.provenance))

    def __len__(self):
        return len(self.states)


def default_state_ensemble(seed: int = 2022, n_haar: int = 14) -> StateEnsemble:
    """Six Pauli-eigenstate poles plus seeded Haar-random states (20 total
    by default)."""
    rng = np.random.default_rng(seed)
    states = list(PAULI_POLES)
    prov = ["pauli_pole"] * len(PAULI_POLES)
    for _ in range(n_haar):
        theta = float(np.arccos(1 - 2 * rng.random()))
        phi = float(2 * np.pi * rng.random())
        states.append((theta, phi))
        prov.append("haar")
    return StateEnsemble(tuple(states), tuple(prov))


# ---------------------------------------------------------------------------
# fidelity estimators

def empirical_fidelity(records, postselect: bool = True) -> float:
    """Fraction of (accepted) shots whose decoded data bit is the ideal 0."""
    if not records:
        raise ValueError("no shot records")
    pool = [r for r in records if r.accepted] if postselect else list(records)
    if not pool:
        raise ValueError("no accepted shots to post-select on")
    return sum(1 for r in pool if r.data_outcome == 0) / len(pool)


def accepted_fraction(records) -> float:
    if not records:
        raise ValueError("no shot records")
    return sum(1 for r in records if r.accepted) / len(records)


def state_averaged_fidelity(per_state) -> float:
    per_state = list(per_state)
    if not per_state:
        raise ValueError("need at least one per-state fidelity")
    return float(np.mean(per_state))


# ---------------------------------------------------------------------------
# decay records

@dataclass(frozen=True)
class DecayRecord:
    """Fidelity vs time with confidence intervals and acceptance fractions."""

    times: tuple
    fidelity_mean: tuple
    fidelity_ci: tuple  # of (lo, hi)
    accepted_fraction: tuple

    def __post_init__(self):
        t = tuple(float(x) for x in self.times)
        if any(b <= a for a, b in zip(t, t[1:])):
            raise ValueError("times must be strictly increasing")
        fm = tuple(float(x) for x in self.fidelity_mean)
        ci = tuple((float(lo), float(hi)) for lo, hi in self.fidelity_ci)
        af = tuple(float(x) for x in self.accepted_fraction)
        if not len(t) == len(fm) == len(ci) == len(af):
            raise ValueError("decay record columns must have equal length")
        for m, (lo, hi) in zip(fm, ci):
            if not lo - 1e-12 <= m <= hi + 1e-12:
                raise ValueError(f"confidence interval ({lo}, {hi}) does not bracket mean {m}")
        for name, val in (("times", t), ("fidelity_mean", fm),
                          ("fidelity_ci", ci), ("accepted_fraction", af)):
            object.__setattr__(self, name, val)

    def __len__(self):
        return len(self.times)


def decay_record_from_realizations(times, per_realization_fidelities,
                                   per_realization_acceptance=None,
                                   k_resamples: int = 10000,
                                   ci_level: float = 0.95, seed: int = 0) -> DecayRecord:
    """Aggregate per-realization fidelities (rows = realizations, columns =
    times) into a decay record with bootstrap confidence intervals."""
    fmat = np.asarray(per_realization_fidelities, dtype=float)
    times = tuple(float(t) for t in times)
    if fmat.ndim != 2 or fmat.shape[1] != len(times):
        raise ValueError("fidelity matrix must be (n_realizations, n_times)")
    if per_realization_acceptance is None:
        acc = np.ones_like(fmat)
    else:
        acc = np.asarray(per_realization_acceptance, dtype=float)
    means, cis = [], []
    master = np.random.SeedSequence(seed)
    for j, child in enumerate(master.spawn(len(times))):
        mean, ci = bootstrap(fmat[:, j], k_resamples=k_resamples,
                             ci_level=ci_level, seed=child)
        # clamp: resampled-mean center stays inside the percentile interval,
        # but guard against floating roundoff at zero-width intervals
        means.append(min(max(mean, ci[0]), ci[1]))
        cis.append(ci)
    return DecayRecord(times, tuple(means), tuple(cis),
                       tuple(float(np.mean(acc[:, j])) for j in range(len(times))))


# ---------------------------------------------------------------------------
# time-averaged fidelity (cubic-spline quadrature)

def time_averaged_fidelity(record: DecayRecord, t_start: float, t_end: float) -> float:
    """Window average of the spline through (times, fidelity_mean).

    Uses the not-a-knot cubic spline: unlike the natural end condition it
    integrates polynomials up to cubic exactly, which the calibration
    checks rely on.
    """
    t = np.asarray(record.times)
    if len(t) < 4:
        raise ValueError("spline integration needs at least 4 points")
    if t_start < t[0] - 1e-15 or t_end > t[-1] + 1e-15 or t_end <= t_start:
        raise ValueError("integration window must lie within the record range")
    spline = CubicSpline(t, np.asarray(record.fidelity_mean))
    return float(spline.integrate(t_start, t_end) / (t_end - t_start))


# ---------------------------------------------------------------------------
# decay fitting

FIT_VARIANTS = ("full", "omega0", "tau2inf", "omega0_tau2inf")


@dataclass(frozen=True)
class FitResult:
    c1: float
    c2: float
    tau1: float
    tau2: float  # math.inf for the tau2 = infinity variants
    omega: float  # rad/s; 0.0 for the omega = 0 variants
    aic: float
    variant: str
    rss: float
    n_points: int
    converged: bool
    aic_table: dict = field(default_factory=dict)
    units_note: str = OMEGA_UNITS_NOTE


def decay_shape(t, tau1: float, tau2: float, omega: float):
    """f(t) = exp(-t/tau1) cos(omega t) + exp(-t/tau2), tau2 may be inf."""
    t = np.asarray(t, dtype=float)
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        if np.isfinite(tau2):
            ratio = np.where(t > 0, t / max(tau2, 1e-300), 0.0)
            second = np.exp(-ratio)
        else:
            second = np.ones_like(t)
        return np.exp(-t / tau1) * np.cos(omega * t) + second


def _pinned_coefficients(times, values, tau1, tau2, omega):
    """C1, C2 from the boundary conditions at the window edges.

    The edge values F(T0), F(Tmax) are estimated from a short window of
    points at each end (a single point for sparse series), so dense noisy
    data does not funnel two individual noise draws into a global offset.
    """
    f = decay_shape(times, tau1, tau2, omega)
    k = max(1, len(times) // 40)
    f0, f1 = float(np.mean(f[:k])), float(np.mean(f[-k:]))
    v0, v1 = float(np.mean(values[:k])), float(np.mean(values[-k:]))
    df = f1 - f0
    if abs(df) < 1e-14:
        return 0.0, v0, f
    c1 = (v1 - v0) / df
    c2 = v0 - c1 * f0
    return float(c1), c2, f


def _aicc(rss: float, n: int, k: int, floor: float) -> float:
    # RSS below the numerical floor means "perfect fit"; clamping there keeps
    # AIC comparisons between machine-noise residuals from being meaningful
    rss = max(rss, floor)
    aic = n * math.log(rss / n) + 2 * k
    if n < 40 and n - k - 1 > 0:
        aic += 2 * k * (k + 1) / (n - k - 1)
    return aic


def _fit_variant(times, values, variant: str, seed: int):
    span = times[-1] - times[0]
    has_tau2 = variant in ("full", "omega0")
    has_omega = variant in ("full", "tau2inf")
    rng = np.random.default_rng(seed)
    tau_starts = np.exp(np.linspace(np.log(span / 30), np.log(3 * span), 4))
    # sweep omega starts well below one cycle per window: slow modulations
    # enter the data mostly through their quadratic term and create wide,
    # shallow basins that a single start misses
    omega_scale = 2 * np.pi / span
    omega_starts = omega_scale * np.array([0.05, 0.15, 0.4, 1.0, 2.5]) \
        if has_omega else np.array([0.0])

    def unpack(x):
        tau1 = math.exp(x[0])
        i = 1
        tau2 = math.inf
        if has_tau2:
            tau2 = math.exp(x[i])
            i += 1
        omega = x[i] if has_omega else 0.0
        return tau1, tau2, omega

    def resid(x):
        tau1, tau2, omega = unpack(x)
        c1, c2, f = _pinned_coefficients(times, values, tau1, tau2, omega)
        return c1 * f + c2 - values

    best = None
    for t1 in tau_starts:
        for om0 in omega_starts:
            x0 = [math.log(t1)]
            if has_tau2:
                x0.append(math.log(t1 * (1 + 9 * rng.random())))
            if has_omega:
                x0.append(om0)
            try:
                sol = least_squares(resid, x0, method="lm", max_nfev=2000)
            except Exception:
                continue
            rss = float(np.sum(sol.fun ** 2))
            if best is None or rss < best[0]:
                best = (rss, sol)
    if best is None:
        return None
    rss, sol = best
    tau1, tau2, omega = unpack(sol.x)
    c1, c2, _ = _pinned_coefficients(times, values, tau1, tau2, omega)
    k = 3 + int(has_tau2) + int(has_omega)  # c1, c2, tau1 (+tau2) (+omega)
    scale = max(1.0, float(np.max(np.abs(values))))
    floor = len(times) * (1e-9 * scale) ** 2
    aic = _aicc(rss, len(times), k, floor)
    return FitResult(c1, c2, tau1, tau2, abs(omega), aic, variant, rss,
                     len(times), bool(sol.success))


def fit_decay(record: DecayRecord, t0: float | None = None,
              t_max: float | None = None, seed: int = 0,
              variants=FIT_VARIANTS) -> FitResult:
    """Least-squares decay fit with endpoint-pinned C1, C2 and AIC model
    selection over the reduced variants; ties go to fewer parameters."""
    times = np.asarray(record.times, dtype=float)
    values = np.asarray(record.fidelity_mean, dtype=float)
    mask = np.ones(len(times), dtype=bool)
    if t0 is not None:
        mask &= times >= t0 - 1e-15
    if t_max is not None:
        mask &= times <= t_max + 1e-15
    times, values = times[mask], values[mask]
    if len(times) < 5:
        raise ValueError("decay fit needs at least 5 points in the window")
    # fit on a window-relative clock so shifting the time axis (and the
    # window with it) leaves the recovered parameters unchanged
    times = times - times[0]
    results = []
    for variant in variants:
        r = _fit_variant(times, values, variant, seed)
        if r is not None:
            results.append(r)
    if not results:
        raise RuntimeError("no fit variant converged")
    order = {"omega0_tau2inf": 0, "omega0": 1, "tau2inf": 1, "full": 2}
    results.sort(key=lambda r: (r.aic, order[r.variant]))
    table = {r.variant: r.aic for r in results}
    best = results[0]
    return FitResult(best.c1, best.c2, best.tau1, best.tau2, best.omega,
                     best.aic, best.variant, best.rss, best.n_points,
                     best.converged, aic_table=table)


# ---------------------------------------------------------------------------
# bootstrap

def bootstrap(samples, k_resamples: int = 10000, ci_level: float = 0.95,
              seed=0):
    """Percentile bootstrap of the mean: (center, (lo, hi)).

    The center is the mean of the resampled means; ``seed`` may be an int
    or a numpy SeedSequence.
    """
    x = np.asarray(list(samples), dtype=float)
    if x.size < 2:
        raise ValueError("bootstrap needs at least 2 samples")
    if not 0 < ci_level < 1:
        raise ValueError("ci_level must be in (0, 1)")
    rng = np.random.default_rng(seed)
    idx = rng.integers(0, x.size, size=(k_resamples, x.size))
    means = x[idx].mean(axis=1)
    alpha = (1 - ci_level) / 2
    lo, hi = np.quantile(means, [alpha, 1 - alpha])
    return float(means.mean()), (float(lo), float(hi))
