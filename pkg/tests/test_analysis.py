"""Fidelity statistics: ensembles, decay records, spline windows, fits."""

import math

import numpy as np
import pytest

from dfslab.analysis import (DecayRecord, FIT_VARIANTS, PAULI_POLES,
                             StateEnsemble, accepted_fraction, bootstrap,
                             decay_record_from_realizations, decay_shape,
                             default_state_ensemble, empirical_fidelity,
                             fit_decay, state_averaged_fidelity,
                             time_averaged_fidelity)
from dfslab.engine import ShotRecord


def make_record(times, values):
    return DecayRecord(tuple(times), tuple(values),
                       tuple((v, v) for v in values),
                       tuple(1.0 for _ in values))


def shot(data, accepted, m=1):
    return ShotRecord(m, m * 1e-6, data, "0" if accepted else "1", accepted)


def test_default_ensemble_composition():
    ens = default_state_ensemble()
    assert len(ens) == 20
    assert ens.provenance[:6] == ("pauli_pole",) * 6
    assert ens.provenance.count("haar") == 14
    assert ens.states[:6] == PAULI_POLES
    # deterministic in the seed
    assert default_state_ensemble(seed=7).states == \
        default_state_ensemble(seed=7).states


def test_state_ensemble_validation():
    with pytest.raises(ValueError):
        StateEnsemble(((0.0, 0.0),), ())


def test_empirical_fidelity_and_acceptance():
    records = [shot(0, True)] * 6 + [shot(1, True)] * 2 + [shot(0, False)] * 2
    assert empirical_fidelity(records) == pytest.approx(6 / 8)
    assert empirical_fidelity(records, postselect=False) == pytest.approx(8 / 10)
    assert accepted_fraction(records) == pytest.approx(0.8)
    with pytest.raises(ValueError):
        empirical_fidelity([])
    with pytest.raises(ValueError):
        empirical_fidelity([shot(0, False)], postselect=True)


def test_state_averaged_fidelity():
    assert state_averaged_fidelity([1.0, 0.5, 0.75]) == pytest.approx(0.75)
    with pytest.raises(ValueError):
        state_averaged_fidelity([])


def test_decay_record_validation():
    with pytest.raises(ValueError):
        DecayRecord((1.0, 0.5), (1, 1), ((1, 1), (1, 1)), (1, 1))  # non-increasing
    with pytest.raises(ValueError):
        DecayRecord((0.0, 1.0), (0.5, 0.5), ((0.6, 0.7), (0.4, 0.6)), (1, 1))


def test_decay_record_from_realizations_brackets_means():
    rng = np.random.default_rng(3)
    times = [1e-6 * (i + 1) for i in range(6)]
    fmat = 0.9 + 0.05 * rng.standard_normal((8, 6))
    rec = decay_record_from_realizations(times, fmat, seed=5)
    for m, (lo, hi) in zip(rec.fidelity_mean, rec.fidelity_ci):
        assert lo <= m <= hi
    again = decay_record_from_realizations(times, fmat, seed=5)
    assert rec.fidelity_mean == again.fidelity_mean


def test_time_averaged_fidelity_exact_on_cubics():
    t = np.linspace(0.0, 1.0, 9)
    poly = lambda x: 0.2 * x ** 3 - 0.5 * x ** 2 + 0.1 * x + 0.7
    rec = make_record(t, poly(t))
    got = time_averaged_fidelity(rec, 0.1, 0.9)
    # analytic window average of the cubic
    anti = lambda x: 0.05 * x ** 4 - 0.5 / 3 * x ** 3 + 0.05 * x ** 2 + 0.7 * x
    want = (anti(0.9) - anti(0.1)) / 0.8
    assert abs(got - want) < 1e-14


def test_time_averaged_fidelity_window_validation():
    rec = make_record(np.linspace(0, 1, 5), np.ones(5))
    with pytest.raises(ValueError):
        time_averaged_fidelity(rec, -0.5, 0.5)
    with pytest.raises(ValueError):
        time_averaged_fidelity(rec, 0.6, 0.4)
    with pytest.raises(ValueError):
        time_averaged_fidelity(make_record([0, 1, 2], [1, 1, 1]), 0, 1)


def test_decay_shape_limits():
    t = np.array([0.0, 1.0, 2.0])
    flat = decay_shape(t, 1.0, math.inf, 0.0)
    assert np.allclose(flat, np.exp(-t) + 1.0)
    tiny = decay_shape(t, 1.0, 1e-200, 0.0)
    assert np.isfinite(tiny).all()


def test_fit_recovers_pure_exponential_and_selects_reduced_variant():
    tau1 = 5e-6
    t = np.linspace(0, 2e-5, 30)
    vals = 0.4 * np.exp(-t / tau1) + 0.55
    fit = fit_decay(make_record(t[1:], vals[1:]))
    assert fit.variant == "omega0_tau2inf"
    assert abs(fit.tau1 - tau1) / tau1 < 1e-4
    assert fit.omega == 0.0 and math.isinf(fit.tau2)
    assert set(fit.aic_table) == set(FIT_VARIANTS)


def test_fit_recovers_oscillating_decay():
    tau1, omega = 4e-6, 2 * np.pi * 1.5e5
    t = np.linspace(0, 2e-5, 400)
    vals = 0.45 * (np.exp(-t / tau1) * np.cos(omega * t) + 1.0) + 0.05
    fit = fit_decay(make_record(t, vals))
    assert fit.variant == "tau2inf"
    assert abs(fit.tau1 - tau1) / tau1 < 1e-3
    assert abs(fit.omega - omega) / omega < 1e-3


def test_fit_is_shift_invariant():
    tau1 = 5e-6
    t = np.linspace(1e-6, 2e-5, 40)
    vals = 0.4 * np.exp(-(t - t[0]) / tau1) + 0.55
    a = fit_decay(make_record(t, vals))
    b = fit_decay(make_record(t + 3e-5, vals))
    assert abs(a.tau1 - b.tau1) < 1e-12 * a.tau1
    assert a.variant == b.variant


def test_fit_window_selection_and_minimum_points():
    t = np.linspace(0, 1e-5, 20)
    vals = 0.5 * np.exp(-t / 3e-6) + 0.5
    rec = make_record(t, vals)
    fit = fit_decay(rec, t0=t[4], t_max=t[15])
    assert fit.n_points == 12
    with pytest.raises(ValueError):
        fit_decay(rec, t0=t[17])


def test_bootstrap_determinism_and_interval():
    rng = np.random.default_rng(17)
    x = rng.normal(loc=0.8, scale=0.05, size=40)
    m1, ci1 = bootstrap(x, k_resamples=2000, seed=3)
    m2, ci2 = bootstrap(x, k_resamples=2000, seed=3)
    assert (m1, ci1) == (m2, ci2)
    assert ci1[0] < np.mean(x) < ci1[1]
    # interval shrinks roughly like 1/sqrt(n)
    _, wide = bootstrap(x[:10], k_resamples=2000, seed=3)
    assert (wide[1] - wide[0]) > (ci1[1] - ci1[0])


def test_bootstrap_validation():
    with pytest.raises(ValueError):
        bootstrap([1.0])
    with pytest.raises(ValueError):
        bootstrap([1.0, 2.0], ci_level=1.5)
