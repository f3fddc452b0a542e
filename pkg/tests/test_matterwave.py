import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qmacro import matterwave as mw
from qmacro.errors import ArgumentError, ContractViolation, ResolutionError
from qmacro.qcore import DensityMatrix, StateVector

AMU = mw.CONSTANTS.amu
ONE_ANGLE = mw.Incoherence(n_angles=1)


def test_de_broglie_c70():
    lam = mw.de_broglie(840 * AMU, 100.0)
    assert abs(lam - 4.75e-12) / 4.75e-12 < 2e-3
    assert abs(mw.de_broglie(2 * 840 * AMU, 100.0) - lam / 2) < 1e-25


def test_de_broglie_band():
    lo, hi = mw.de_broglie(840 * AMU, 220.0), mw.de_broglie(840 * AMU, 80.0)
    assert abs(lo - 2.16e-12) / 2.16e-12 < 5e-3
    assert abs(hi - 5.93e-12) / 5.93e-12 < 5e-3


def test_talbot_length():
    assert abs(mw.talbot_length(1e-6, 4.75e-12) - 0.2105) < 1e-4
    assert math.isclose(mw.talbot_length(2e-6, 4.75e-12), 4 * mw.talbot_length(1e-6, 4.75e-12))
    # 16x heavier at equal velocity: same Talbot length needs a quarter of the period
    lam16 = 4.75e-12 / 16
    assert math.isclose(math.sqrt(0.2105 * lam16), 0.25 * math.sqrt(0.2105 * 4.75e-12))


def test_coherent_self_image():
    beam = mw.BeamParams.from_amu(840, 100.0)
    scan = mw.simulate_fringe_scan(beam, mw.GratingStack(), incoherence=ONE_ANGLE)
    assert scan.visibility > 0.5
    assert abs(scan.period - 1e-6) / 1e-6 < 0.02
    assert math.isclose(scan.count_at_period, scan.counts[0], rel_tol=1e-12)


def test_half_talbot_collapse():
    beam = mw.BeamParams.from_amu(840, 100.0)
    full = mw.simulate_fringe_scan(beam, mw.GratingStack(), incoherence=ONE_ANGLE)
    half = mw.simulate_fringe_scan(
        beam, mw.GratingStack(L=full.separation / 2), incoherence=ONE_ANGLE
    )
    assert half.visibility < 0.1 * full.visibility


def test_aperture_convergence():
    beam = mw.BeamParams.from_amu(840, 100.0)
    a = mw.simulate_fringe_scan(beam, mw.GratingStack(n_slits=32)).visibility
    b = mw.simulate_fringe_scan(beam, mw.GratingStack(n_slits=64)).visibility
    assert abs(a - b) < 0.02


def test_moire_discriminator():
    b1, b2 = mw.BeamParams.from_amu(840, 100.0), mw.BeamParams.from_amu(840, 200.0)
    stack = mw.GratingStack(L=mw.talbot_length(1e-6, b1.lambda_dB))
    wave = [mw.simulate_fringe_scan(b, stack).visibility for b in (b1, b2)]
    ray = [mw.simulate_fringe_scan(b, stack, model="ray").visibility for b in (b1, b2)]
    assert abs(wave[0] - wave[1]) > 5 * abs(ray[0] - ray[1])


def test_scan_is_deterministic():
    beam = mw.BeamParams.from_amu(840, 100.0)
    a = mw.simulate_fringe_scan(beam, mw.GratingStack())
    b = mw.simulate_fringe_scan(beam, mw.GratingStack())
    assert np.array_equal(a.counts, b.counts)


def test_resolution_guard():
    beam = mw.BeamParams.from_amu(840, 100.0)
    with pytest.raises(ResolutionError):
        mw.simulate_fringe_scan(beam, mw.GratingStack(L=1e-9), n_scan=4, points_per_period=8)


def test_decoherence_pressure():
    env = mw.GasEnvironment(temperature=300.0, sigma_eff=1e-17)
    p0 = mw.decoherence_pressure(env, 0.38)
    assert abs(p0 - 5.45e-4) / 5.45e-4 < 1e-3
    hot = mw.GasEnvironment(temperature=600.0, sigma_eff=1e-17)
    assert math.isclose(mw.decoherence_pressure(hot, 0.38), 2 * p0, rel_tol=1e-14)
    assert math.isclose(mw.decoherence_pressure(env, 0.76), p0 / 2, rel_tol=1e-14)


def test_visibility_law():
    p0 = 3e-4
    assert mw.visibility_with_gas(0.8, 0.0, p0) == 0.8
    assert abs(mw.visibility_with_gas(1.0, p0, p0) - math.exp(-1)) < 1e-12
    assert abs(mw.visibility_with_gas(0.8, p0 * math.log(2), p0) - 0.4) < 1e-12
    with pytest.raises(ArgumentError):
        mw.visibility_with_gas(1.0, -1.0, p0)


@settings(max_examples=50, deadline=None)
@given(st.floats(0, 1e3), st.floats(0, 1e3), st.floats(1e-6, 1e2))
def test_visibility_monotone(p1, p2, p0):
    lo, hi = sorted((p1, p2))
    assert mw.visibility_with_gas(1.0, hi, p0) <= mw.visibility_with_gas(1.0, lo, p0)


def _wavepacket(n=64):
    x = np.linspace(-1, 1, n)
    psi = np.exp(-((x - 0.4) ** 2) / 0.02) + np.exp(-((x + 0.4) ** 2) / 0.02)
    return x, StateVector(psi / np.linalg.norm(psi)).density()


def test_which_path_limits():
    x, rho = _wavepacket()
    same = mw.which_path_dephase(rho, x, lambda a, b: np.ones(np.broadcast(a, b).shape))
    assert np.array_equal(same.entries, rho.entries)
    diag = mw.which_path_dephase(rho, x, mw.delta_overlap)
    off = diag.entries - np.diag(np.diag(diag.entries))
    assert np.max(np.abs(off)) < 1e-14
    assert np.array_equal(np.diag(diag.entries), np.diag(rho.entries))


def test_which_path_exponential():
    x, rho = _wavepacket()
    ell = x[5] - x[0]
    out = mw.which_path_dephase(rho, x, lambda a, b: np.exp(-np.abs(a - b) / ell))
    assert abs(out.entries[0, 5] - rho.entries[0, 5] * math.exp(-1)) < 1e-14


def test_which_path_contract():
    x, rho = _wavepacket(8)
    with pytest.raises(ContractViolation):
        mw.which_path_dephase(rho, x, lambda a, b: 2.0 * np.ones(np.broadcast(a, b).shape))
    with pytest.raises(ContractViolation):
        mw.which_path_dephase(rho, x, lambda a, b: 0.5 * np.ones(np.broadcast(a, b).shape))


def test_extrapolation():
    same = mw.extrapolate_required_pressure(840, 840, 1e-4)
    assert same["p0"] == 1e-4
    heavy = mw.extrapolate_required_pressure(8 * 840, 840, 1e-4)
    assert abs(heavy["p0_ratio"] - 0.25) < 1e-12
    assert heavy["assumptions"]
    ps = [mw.extrapolate_required_pressure(m, 840, 1e-4)["p0"] for m in (840, 1e3, 1e4, 1e5)]
    assert all(a >= b for a, b in zip(ps, ps[1:]))
