"""rf-SQUID flux double well: spectrum, coherent tunneling and pure dephasing.

Reduced units throughout: hbar = 1, flux in units of Phi_0, energy in units
of Phi_0**2 / L.  The Hamiltonian on the flux coordinate phi is

    H = -(1 / 2C) d^2/dphi^2 + (phi - phi_ext)^2 / 2 - (i_c / 2 pi) cos(2 pi phi)

where ``C`` is the reduced capacitance (the particle mass) and ``i_c`` the
reduced critical current, ``I_c L / Phi_0``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.linalg import LinAlgError, eigh_tridiagonal

from ._parallel import parallel_map
from .errors import ArgumentError, ModelRegimeError, NumericError, TruncationError
from .qcore import SIGMA_X as _SX, SIGMA_Z as _SZ
from .qcore import CONSTANTS, DensityMatrix, GridSpec, StateVector, WignerGrid, wigner

SIGMA_X = _SX.entries
SIGMA_Z = _SZ.entries
MIN_POINTS = 256


@dataclass(frozen=True)
class SquidParams:
    C: float = 100.0
    i_c: float = 1.0
    phi_ext: float = 0.5
    phi_min: float | None = None
    phi_max: float | None = None
    n_points: int = 1024

    def __post_init__(self):
        if self.phi_min is None:
            object.__setattr__(self, "phi_min", self.phi_ext - 1.5)
        if self.phi_max is None:
            object.__setattr__(self, "phi_max", self.phi_ext + 1.5)
        if self.C <= 0:
            raise ArgumentError(f"C must be positive, got {self.C}")
        if self.n_points < MIN_POINTS:
            raise ArgumentError(f"n_points must be >= {MIN_POINTS}, got {self.n_points}")
        if not self.phi_min < self.phi_ext < self.phi_max:
            raise ArgumentError("phi_ext must lie strictly inside [phi_min, phi_max]")
        if abs(self.phi_ext - 0.5) < 1e-12 and len(_local_minima(self.potential(self.grid()))) < 2:
            raise ModelRegimeError(
                f"i_c={self.i_c} gives no double well at phi_ext=0.5 (need i_c > 1/(2 pi))"
            )

    @property
    def beta_L(self) -> float:
        """Screening parameter 2 pi L I_c / Phi_0."""
        return 2 * math.pi * self.i_c

    def grid(self) -> np.ndarray:
        # interior points only; the wavefunction vanishes on both end points
        return np.linspace(self.phi_min, self.phi_max, self.n_points + 2)[1:-1]

    def potential(self, phi) -> np.ndarray:
        phi = np.asarray(phi, dtype=float)
        return (phi - self.phi_ext) ** 2 / 2 - self.i_c / (2 * math.pi) * np.cos(2 * math.pi * phi)

    @classmethod
    def from_si(cls, C: float, L: float, I_c: float, Phi_ext: float, **grid) -> SquidParams:
        """Map device values (farad, henry, ampere, weber) onto reduced units."""
        phi0, hbar = CONSTANTS.Phi_0, CONSTANTS.hbar
        return cls(
            C=C * phi0**4 / (hbar**2 * L),
            i_c=I_c * L / phi0,
            phi_ext=Phi_ext / phi0,
            **grid,
        )

    @staticmethod
    def energy_unit_si(L: float) -> float:
        """Joules per reduced energy unit for loop inductance ``L``."""
        return CONSTANTS.Phi_0**2 / L


@dataclass(frozen=True)
class SquidSpectrum:
    params: SquidParams
    phi: np.ndarray
    energies: np.ndarray
    wavefunctions: np.ndarray  # (n_levels, n_points), sum(psi**2) * dphi == 1
    delta_E: float
    L_state: StateVector
    R_state: StateVector
    mean_flux_L: float
    mean_flux_R: float
    barrier: float
    boundary_weight: float

    @property
    def dphi(self) -> float:
        return float(self.phi[1] - self.phi[0])

    def mode(self, k: int) -> StateVector:
        """Eigenstate ``k`` as a unit-norm amplitude vector on the grid."""
        return StateVector(self.wavefunctions[k] * math.sqrt(self.dphi), basis="flux")


@dataclass(frozen=True)
class DephasingModel:
    gamma: float = 0.0

    def __post_init__(self):
        if self.gamma < 0:
            raise ArgumentError(f"gamma must be >= 0, got {self.gamma}")


@dataclass(frozen=True)
class TwoLevelTrajectory:
    times: np.ndarray
    rho_t: tuple  # DensityMatrix per time, basis (|L>, |R>)
    p_L: np.ndarray

    def coherence(self) -> np.ndarray:
        return np.array([abs(r.entries[0, 1]) for r in self.rho_t])


def _local_minima(u: np.ndarray) -> np.ndarray:
    return np.flatnonzero((u[1:-1] < u[:-2]) & (u[1:-1] < u[2:])) + 1


def solve_spectrum(params: SquidParams, n_levels: int = 4) -> SquidSpectrum:
    if n_levels < 2:
        raise ArgumentError("n_levels must be at least 2")
    phi = params.grid()
    dphi = phi[1] - phi[0]
    u = params.potential(phi)
    kin = 1.0 / (2 * params.C * dphi**2)
    diag = u + 2 * kin
    off = np.full(phi.size - 1, -kin)
    try:
        energies, vecs = eigh_tridiagonal(diag, off, select="i", select_range=(0, n_levels - 1))
    except (LinAlgError, ValueError) as exc:
        raise NumericError(f"eigensolver failed: {exc}") from exc
    if energies.size < n_levels or not np.all(np.isfinite(energies)):
        raise NumericError("eigensolver returned too few or non-finite eigenvalues")

    psi = vecs.T / math.sqrt(dphi)
    left = phi < params.phi_ext
    for k in range(n_levels):
        ref = psi[k].sum() if k == 0 else psi[k][left].sum()
        if ref < 0:
            psi[k] = -psi[k]

    minima = _local_minima(u)
    deepest = minima[np.argsort(u[minima])[:2]] if minima.size >= 2 else minima
    if deepest.size < 2:
        raise ModelRegimeError("potential has fewer than two wells on the grid")
    lo, hi = sorted(deepest)
    barrier = float(u[lo:hi + 1].max())
    if energies[1] >= barrier:
        raise ModelRegimeError(
            f"fewer than two states below the barrier (E_1={energies[1]:.6g}, barrier={barrier:.6g})"
        )

    amp0 = psi[0] * math.sqrt(dphi)
    amp1 = psi[1] * math.sqrt(dphi)
    L_amp = (amp0 + amp1) / math.sqrt(2)
    R_amp = (amp0 - amp1) / math.sqrt(2)
    mean_L = float(np.sum(phi * L_amp**2))
    mean_R = float(np.sum(phi * R_amp**2))
    if not mean_L < params.phi_ext < mean_R:
        raise ModelRegimeError("ground pair does not split into left and right localized states")

    edge = max(1, int(0.1 * phi.size))
    boundary_weight = float(max(
        np.sum(a[:edge] ** 2) + np.sum(a[-edge:] ** 2) for a in (amp0, amp1)
    ))

    return SquidSpectrum(
        params=params,
        phi=phi,
        energies=energies,
        wavefunctions=psi,
        delta_E=float(energies[1] - energies[0]),
        L_state=StateVector(L_amp, basis="flux"),
        R_state=StateVector(R_amp, basis="flux"),
        mean_flux_L=mean_L,
        mean_flux_R=mean_R,
        barrier=barrier,
        boundary_weight=boundary_weight,
    )


def tunneling_probability(delta_E: float, t):
    """Probability of still finding the left-prepared state in the left well."""
    if delta_E <= 0:
        raise ArgumentError("delta_E must be positive")
    return np.cos(delta_E * np.asarray(t) / 2) ** 2


def retained_weight(spectrum: SquidSpectrum, initial: StateVector) -> float:
    c = spectrum.wavefunctions @ initial.amplitudes * math.sqrt(spectrum.dphi)
    return float(np.sum(np.abs(c) ** 2))


def evolve_full(spectrum: SquidSpectrum, initial: StateVector, times: Sequence[float]) -> list[StateVector]:
    """Propagate ``initial`` with the retained eigenmodes.

    The projected initial state is renormalized, so every returned state has
    unit norm; more than 1% weight outside the retained modes is an error.
    """
    if initial.dim != spectrum.phi.size:
        raise ArgumentError("initial state is not on the spectrum's flux grid")
    if abs(initial.norm() - 1) > 1e-8:
        raise ArgumentError("initial state must be normalized")
    modes = spectrum.wavefunctions * math.sqrt(spectrum.dphi)
    c = modes @ initial.amplitudes
    kept = float(np.sum(np.abs(c) ** 2))
    if 1 - kept > 0.01:
        raise TruncationError(f"{1 - kept:.3%} of the initial weight lies outside the retained modes")
    c = c / math.sqrt(kept)
    out = []
    for t in np.asarray(times, dtype=float):
        amp = (c * np.exp(-1j * spectrum.energies * t)) @ modes
        out.append(StateVector(amp, basis="flux"))
    return out


def _liouvillian(delta_E: float, gamma: float) -> np.ndarray:
    # row-major vec: vec(A rho B) = kron(A, B.T) vec(rho)
    h = -0.5 * delta_E * SIGMA_X
    eye = np.eye(2)
    comm = -1j * (np.kron(h, eye) - np.kron(eye, h.T))
    deph = gamma * (np.kron(SIGMA_Z, SIGMA_Z.T) - np.eye(4))
    return comm + deph


def evolve_two_level(
    delta_E: float,
    model: DephasingModel,
    initial: DensityMatrix,
    times: Sequence[float],
) -> TwoLevelTrajectory:
    """Fixed-step RK4 integration of the dephasing master equation.

    drho/dt = -i[H, rho] + gamma (sz rho sz - rho),  H = -(delta_E/2) sx,
    in the (|L>, |R>) basis.  For this linear, time-independent generator one
    RK4 step is the degree-4 Taylor polynomial of h*Liouvillian, which is
    applied as a 4x4 matrix.
    """
    if initial.dim != 2:
        raise ArgumentError("two-level evolution needs a 2x2 initial state")
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or times.size == 0 or np.any(np.diff(times) < 0) or times[0] < 0:
        raise ArgumentError("times must be non-negative and ascending")
    if delta_E < 0:
        raise ArgumentError("delta_E must be non-negative")

    rate = max(delta_E, model.gamma)
    h_max = math.inf if rate == 0 else 1.0 / (50 * rate)
    lv = _liouvillian(delta_E, model.gamma)

    vec = initial.entries.reshape(4).copy()
    t_now = 0.0
    rhos, p_L = [], []
    for t in times:
        span = t - t_now
        if span > 0 and rate > 0:
            n = math.ceil(span / h_max)
            a = lv * (span / n)
            a2 = a @ a
            step = np.eye(4) + a + a2 / 2 + a2 @ a / 6 + a2 @ a2 / 24
            vec = np.linalg.matrix_power(step, n) @ vec
        t_now = t
        rho = vec.reshape(2, 2)
        drift = abs(np.trace(rho) - 1)
        if drift > 1e-6:
            raise NumericError(f"trace drifted by {drift:.3g} at t={t}")
        rho = (rho + rho.conj().T) / 2
        rho = rho / np.trace(rho).real
        rhos.append(DensityMatrix(rho, basis="LR"))
        p_L.append(float(rho[0, 0].real))
    return TwoLevelTrajectory(times=times, rho_t=tuple(rhos), p_L=np.array(p_L))


def lift(spectrum: SquidSpectrum, rho2: DensityMatrix) -> DensityMatrix:
    """Embed a state on span{|L>, |R>} into the flux grid."""
    basis = np.stack([spectrum.L_state.amplitudes, spectrum.R_state.amplitudes], axis=1)
    rho = basis @ rho2.entries @ basis.conj().T
    rho = (rho + rho.conj().T) / 2
    return DensityMatrix(rho / np.trace(rho).real, basis="flux", check_psd=False)


def default_wigner_grid(spectrum: SquidSpectrum, nx: int = 256, np_: int = 201) -> GridSpec:
    """Whole flux grid, and about eight momentum widths of |L>."""
    amp = spectrum.L_state.amplitudes.real
    p2 = np.sum(np.diff(amp) ** 2) / spectrum.dphi**2
    p_max = min(8 * math.sqrt(p2), 0.95 * math.pi / (2 * spectrum.dphi))
    return GridSpec(
        x_min=float(spectrum.phi[0]), x_max=float(spectrum.phi[-1]), nx=nx,
        p_min=-p_max, p_max=p_max, np=np_,
    )


def wigner_snapshots(spectrum: SquidSpectrum, states, grid: GridSpec | None = None) -> list[WignerGrid]:
    """Wigner functions for a two-level trajectory or a list of grid states."""
    grid = grid or default_wigner_grid(spectrum)
    if isinstance(states, TwoLevelTrajectory):
        rhos = [lift(spectrum, r) for r in states.rho_t]
    else:
        rhos = [s.density() if isinstance(s, StateVector) else s for s in states]
    return [wigner(r, spectrum.phi, grid) for r in rhos]


def interference_ratio(spectrum: SquidSpectrum, wg: WignerGrid) -> float:
    """Largest |W| near the midpoint between the wells, relative to max |W|.

    The band is the central eighth of the well separation on either side of
    phi_ext, where a coherent superposition puts its fringes.
    """
    mid = spectrum.params.phi_ext
    half = (spectrum.mean_flux_R - spectrum.mean_flux_L) / 8
    band = np.abs(wg.x - mid) <= half
    return float(np.abs(wg.values[band]).max() / np.abs(wg.values).max())


def peak_positions(spectrum: SquidSpectrum, wg: WignerGrid) -> tuple[float, float]:
    """Flux positions of the Wigner maxima in the left and right wells.

    Rows inside the central interference band are excluded.
    """
    mid = spectrum.params.phi_ext
    half = (spectrum.mean_flux_R - spectrum.mean_flux_L) / 8
    marginal = wg.values.max(axis=1)
    left = wg.x < mid - half
    right = wg.x > mid + half
    xl = wg.x[left][np.argmax(marginal[left])]
    xr = wg.x[right][np.argmax(marginal[right])]
    return float(xl), float(xr)


def splitting_scaling(C_values: Sequence[float], **param_kw) -> dict:
    """Fit ln(delta_E) against sqrt(C); returns slope, intercept and R^2."""
    C_values = np.asarray(C_values, dtype=float)
    dE = np.array(parallel_map(lambda c: solve_spectrum(SquidParams(C=c, **param_kw), 2).delta_E, C_values))
    x, y = np.sqrt(C_values), np.log(dE)
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    r2 = 1 - resid @ resid / np.sum((y - y.mean()) ** 2)
    return {"C": C_values, "delta_E": dE, "slope": float(slope), "intercept": float(intercept), "r2": float(r2)}
