"""Two-mode condensate cat states, phase damping, single-atom loss and tau_d scaling.

States live on the basis {|n, N-n> : n = 0..N}; basis index equals the
occupation of the first mode.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ArgumentError
from .qcore import CONSTANTS, DensityMatrix, StateVector, as_density

MAX_ATOMS = 10_000


@dataclass(frozen=True)
class TwoModeState:
    N: int
    amplitudes: np.ndarray

    def __post_init__(self):
        if self.N < 1 or self.N > MAX_ATOMS:
            raise ArgumentError(f"N must lie in [1, {MAX_ATOMS}], got {self.N}")
        amps = np.array(self.amplitudes, dtype=complex)
        if amps.shape != (self.N + 1,):
            raise ArgumentError(f"expected {self.N + 1} amplitudes, got shape {amps.shape}")
        if abs(np.linalg.norm(amps) - 1) > 1e-12:
            raise ArgumentError("two-mode state must be normalized")
        amps.flags.writeable = False
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def fock(cls, n1: int, n2: int) -> TwoModeState:
        amps = np.zeros(n1 + n2 + 1, dtype=complex)
        amps[n1] = 1.0
        return cls(n1 + n2, amps)

    def as_vector(self) -> StateVector:
        return StateVector(self.amplitudes, basis="two-mode")

    def density(self) -> DensityMatrix:
        return self.as_vector().density()


@dataclass(frozen=True)
class PhaseDampingParams:
    kappa: float
    omega: float = 0.0

    def __post_init__(self):
        if self.kappa < 0:
            raise ArgumentError("kappa must be >= 0")


@dataclass(frozen=True)
class LossCalibration:
    c: float
    a: float
    N_nc: float
    N: float
    tau_d: float

    def predict(self, N_nc: float, N: float, a: float | None = None) -> float:
        a = self.a if a is None else a
        return 1.0 / (self.c * a * a * N_nc * N * N)


@dataclass(frozen=True)
class CondensationCheck:
    mass: float  # kg
    temperature: float  # K
    density: float  # m^-3

    def __post_init__(self):
        if min(self.mass, self.temperature, self.density) <= 0:
            raise ArgumentError("mass, temperature and density must be positive")

    @property
    def lambda_dB_thermal(self) -> float:
        return math.sqrt(2 * math.pi * CONSTANTS.hbar**2 / (self.mass * CONSTANTS.k_B * self.temperature))

    @property
    def interparticle(self) -> float:
        return self.density ** (-1.0 / 3.0)


def make_cat(N: int, n: int = 0, phi: float = 0.0) -> TwoModeState:
    """(|n, N-n> + e^{i phi} |N-n, n>) / sqrt(2), or |N/2, N/2> when n == N/2."""
    if n < 0 or 2 * n > N:
        raise ArgumentError(f"need 0 <= n <= N/2, got n={n}, N={N}")
    amps = np.zeros(N + 1, dtype=complex)
    if 2 * n == N:
        amps[n] = 1.0
    else:
        amps[n] = 1 / math.sqrt(2)
        amps[N - n] = np.exp(1j * phi) / math.sqrt(2)
    return TwoModeState(N, amps)


def phase_damp(state, params: PhaseDampingParams, t: float) -> DensityMatrix:
    """Apply exp(-(m-n)^2 kappa t) exp(-i omega (m-n) t) to every element <m|rho|n>."""
    if t < 0:
        raise ArgumentError("t must be >= 0")
    rho = state.density() if isinstance(state, TwoModeState) else as_density(state)
    m = np.arange(rho.dim)
    diff = m[:, None] - m[None, :]
    factor = np.exp(-(diff**2) * params.kappa * t) * np.exp(-1j * params.omega * diff * t)
    out = rho.entries * factor
    np.fill_diagonal(out, np.diag(rho.entries))
    return DensityMatrix(out, basis=rho.basis, check_psd=False)


def coherence_half_life(N: int, kappa: float) -> float:
    """Time for the |N,0><0,N| element of the extreme cat to halve."""
    return math.log(2) / (N * N * kappa)


@dataclass(frozen=True)
class LossResult:
    state: TwoModeState | None
    norm: float
    annihilated: bool


def annihilate(state: TwoModeState, mode: int) -> LossResult:
    """Remove one atom from ``mode`` (1 or 2); returns the normalized image and its norm."""
    if mode not in (1, 2):
        raise ArgumentError("mode must be 1 or 2")
    N = state.N
    n = np.arange(N + 1)
    occ = n if mode == 1 else N - n
    image = state.amplitudes * np.sqrt(occ)
    # a1 maps index n to n-1 on N-1 atoms; a2 keeps index n
    new = image[1:] if mode == 1 else image[:-1]
    norm = float(np.linalg.norm(new))
    if norm == 0.0:
        return LossResult(None, 0.0, True)
    if N == 1:
        # nothing left but the vacuum, which has no two-mode amplitude vector here
        return LossResult(None, norm, False)
    return LossResult(TwoModeState(N - 1, new / norm), norm, False)


def calibrate_tau(a: float, N_nc: float, N: float, tau_d: float) -> LossCalibration:
    """Fix the constant c in 1/tau_d = c a^2 N_nc N^2 from one reference point."""
    if min(a, N_nc, N, tau_d) <= 0:
        raise ArgumentError("calibration values must be positive")
    c = 1.0 / (tau_d * a * a * N_nc * N * N)
    return LossCalibration(c=c, a=a, N_nc=N_nc, N=N, tau_d=tau_d)


def condensation_regime(check: CondensationCheck) -> dict:
    ratio = check.lambda_dB_thermal / check.interparticle
    return {
        "lambda_dB_thermal": check.lambda_dB_thermal,
        "interparticle": check.interparticle,
        "ratio": ratio,
        "condensed_hint": bool(ratio > 1),
        "note": "heuristic: thermal wavelength exceeds mean spacing",
    }
