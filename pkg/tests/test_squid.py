import math

import numpy as np
import pytest

from qmacro import squid
from qmacro.errors import ArgumentError, ModelRegimeError
from qmacro.qcore import DensityMatrix


def test_eigenstates_orthonormal(spectrum):
    psi = spectrum.wavefunctions
    gram = psi @ psi.T * spectrum.dphi
    assert np.allclose(gram, np.eye(len(psi)), atol=1e-8)
    assert abs(gram[0, 1]) < 1e-8


def test_double_well_shape(spectrum):
    assert spectrum.mean_flux_L < 0.5 < spectrum.mean_flux_R
    assert abs((spectrum.mean_flux_L + spectrum.mean_flux_R) / 2 - 0.5) < 1e-6
    assert spectrum.energies[1] < spectrum.barrier
    assert spectrum.boundary_weight < 1e-4
    assert abs(spectrum.L_state.norm() - 1) < 1e-12


def test_grid_convergence():
    coarse = squid.solve_spectrum(squid.SquidParams(n_points=1024), 2).delta_E
    fine = squid.solve_spectrum(squid.SquidParams(n_points=2048), 2).delta_E
    assert abs(coarse - fine) / fine < 1e-3


def test_splitting_decreases_with_C():
    fit = squid.splitting_scaling([50, 100, 200, 400, 800])
    assert np.all(np.diff(fit["delta_E"]) < 0)
    assert fit["slope"] < 0 and fit["r2"] > 0.99


def test_parallel_and_serial_agree(monkeypatch):
    Cs = [60, 120, 240]
    par = squid.splitting_scaling(Cs)
    monkeypatch.setenv("QMACRO_NO_PARALLEL", "1")
    ser = squid.splitting_scaling(Cs)
    assert np.array_equal(par["delta_E"], ser["delta_E"])


def test_regime_and_argument_errors():
    with pytest.raises(ModelRegimeError):
        squid.SquidParams(i_c=0.1)
    with pytest.raises(ArgumentError):
        squid.SquidParams(n_points=10)
    with pytest.raises(ArgumentError):
        squid.SquidParams(C=-1)


def test_from_si_round_trip():
    L, C = 200e-12, 100e-15
    p = squid.SquidParams.from_si(C=C, L=L, I_c=1.5 * squid.CONSTANTS.Phi_0 / L, Phi_ext=0.5 * squid.CONSTANTS.Phi_0)
    assert abs(p.i_c - 1.5) < 1e-12 and abs(p.phi_ext - 0.5) < 1e-12
    assert abs(p.beta_L - 3 * math.pi) < 1e-12


def test_tunneling_probability_values():
    dE = 0.3
    assert squid.tunneling_probability(dE, 0.0) == 1.0
    assert abs(squid.tunneling_probability(dE, math.pi / dE)) < 1e-15
    assert abs(squid.tunneling_probability(dE, math.pi / (2 * dE)) - 0.5) < 1e-15


def test_ground_state_stationary(spectrum):
    t = np.linspace(0, 4 * math.pi / spectrum.delta_E, 9)
    g = spectrum.mode(0)
    for s in squid.evolve_full(spectrum, g, t):
        assert abs(abs(np.vdot(g.amplitudes, s.amplitudes)) ** 2 - 1) < 1e-10


def test_full_evolution_matches_two_level(spectrum):
    dE = spectrum.delta_E
    t = np.linspace(0, 2 * math.pi / dE, 101)
    states = squid.evolve_full(spectrum, spectrum.L_state, t)
    p = np.array([abs(np.vdot(spectrum.L_state.amplitudes, s.amplitudes)) ** 2 for s in states])
    rms = math.sqrt(np.mean((p - squid.tunneling_probability(dE, t)) ** 2))
    assert rms < 0.02
    assert p[-1] > 0.99


def test_closed_two_level_limit():
    dE = 0.02
    t = np.linspace(0, 3 * math.pi / dE, 200)
    traj = squid.evolve_two_level(dE, squid.DephasingModel(0.0), DensityMatrix(np.diag([1.0, 0.0])), t)
    assert np.max(np.abs(traj.p_L - np.cos(dE * t / 2) ** 2)) < 1e-6


def test_pure_dephasing_closed_form():
    g = 0.7
    t = np.linspace(0, 4, 50)
    traj = squid.evolve_two_level(0.0, squid.DephasingModel(g), DensityMatrix(np.full((2, 2), 0.5)), t)
    assert np.max(np.abs(traj.coherence() - 0.5 * np.exp(-2 * g * t))) < 1e-8
    assert np.allclose(traj.p_L, 0.5, atol=1e-14)


def test_zeno_freezing():
    dE = 0.01
    t = np.linspace(0, 10 / dE, 200)
    traj = squid.evolve_two_level(dE, squid.DephasingModel(100 * dE), DensityMatrix(np.diag([1.0, 0.0])), t)
    assert traj.p_L.min() > 0.9


def test_evolve_two_level_input_checks():
    rho = DensityMatrix(np.diag([1.0, 0.0]))
    with pytest.raises(ArgumentError):
        squid.evolve_two_level(0.1, squid.DephasingModel(0.1), rho, [1.0, 0.5])
    with pytest.raises(ArgumentError):
        squid.DephasingModel(-1.0)


def test_wigner_cat_decoheres_with_fixed_peaks(deep_spectrum):
    sp = deep_spectrum
    gamma = sp.delta_E
    gt = np.array([0.0, 0.5, 1, 2, 3, 5])
    traj = squid.evolve_two_level(sp.delta_E, squid.DephasingModel(gamma), DensityMatrix(np.full((2, 2), 0.5)), gt / gamma)
    snaps = squid.wigner_snapshots(sp, traj)
    assert snaps[0].values.min() < 0
    for w in snaps:
        assert abs(w.total() - 1) < 1e-6
    assert squid.interference_ratio(sp, snaps[-1]) <= 0.01
    ratios = [squid.interference_ratio(sp, w) for w in snaps]
    assert all(a >= b for a, b in zip(ratios, ratios[1:]))
    dx = snaps[0].x[1] - snaps[0].x[0]
    ref = squid.peak_positions(sp, snaps[0])
    for w in snaps[1:]:
        pos = squid.peak_positions(sp, w)
        assert abs(pos[0] - ref[0]) <= dx + 1e-12 and abs(pos[1] - ref[1]) <= dx + 1e-12
