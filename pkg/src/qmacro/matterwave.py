"""Talbot-Lau near-field interferometry and collisional decoherence of the fringes.

The fringe simulator is scalar 1-D paraxial optics: binary amplitude
gratings, angular-spectrum free propagation, and an incoherent sum over a
fan of incidence angles standing in for the uncollimated source behind the
first grating.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import ArgumentError, ContractViolation, ResolutionError
from .qcore import CONSTANTS, DensityMatrix

C70_MASS_AMU = 840.0


def de_broglie(mass: float, velocity: float) -> float:
    """h / (m v); mass in kg, velocity in m/s."""
    if mass <= 0 or velocity <= 0:
        raise ArgumentError("mass and velocity must be positive")
    return CONSTANTS.h / (mass * velocity)


def talbot_length(d: float, wavelength: float) -> float:
    if d <= 0 or wavelength <= 0:
        raise ArgumentError("period and wavelength must be positive")
    return d * d / wavelength


@dataclass(frozen=True)
class BeamParams:
    mass: float  # kg
    velocity: float  # m/s

    @classmethod
    def from_amu(cls, mass_amu: float, velocity: float) -> BeamParams:
        return cls(mass_amu * CONSTANTS.amu, velocity)

    @property
    def lambda_dB(self) -> float:
        return de_broglie(self.mass, self.velocity)


@dataclass(frozen=True)
class GratingStack:
    d: float = 1e-6
    open_fraction: float = 0.5
    L: float | None = None  # None: one Talbot length for the beam
    n_slits: int = 32

    def __post_init__(self):
        if self.d <= 0:
            raise ArgumentError("grating period must be positive")
        if not 0 < self.open_fraction < 1:
            raise ArgumentError("open fraction must lie in (0, 1)")
        if self.L is not None and self.L <= 0:
            raise ArgumentError("grating separation must be positive")
        if self.n_slits < 16:
            raise ArgumentError("n_slits must be >= 16")

    def separation(self, beam: BeamParams) -> float:
        return self.L if self.L is not None else talbot_length(self.d, beam.lambda_dB)


@dataclass(frozen=True)
class GasEnvironment:
    pressure: float = 0.0  # Pa
    temperature: float = 300.0  # K
    sigma_eff: float = 1e-17  # m^2

    def __post_init__(self):
        if min(self.pressure, self.temperature, self.sigma_eff) < 0:
            raise ArgumentError("pressure, temperature and cross section must be >= 0")


@dataclass(frozen=True)
class Incoherence:
    n_angles: int = 32
    angular_spread: float | None = None  # rad; None: open_fraction * d / L

    def spread(self, stack: GratingStack, L: float) -> float:
        if self.angular_spread is not None:
            return self.angular_spread
        return stack.open_fraction * stack.d / L


@dataclass(frozen=True)
class FringeScan:
    shifts: np.ndarray
    counts: np.ndarray
    visibility: float
    x: np.ndarray = field(repr=False)
    intensity: np.ndarray = field(repr=False)
    period: float = 0.0
    separation: float = 0.0
    count_at_period: float = 0.0  # counts at shift == d, equal to counts[0]


def fringe_visibility(counts) -> float:
    counts = np.asarray(counts, dtype=float)
    hi, lo = counts.max(), counts.min()
    return 0.0 if hi + lo == 0 else float((hi - lo) / (hi + lo))


def _transmission(x: np.ndarray, d: float, f: float, shift: float = 0.0) -> np.ndarray:
    return (np.mod(x - shift, d) < f * d).astype(float)


class _Layout:
    """Sampling shared by the wave and ray models of one configuration."""

    def __init__(self, stack: GratingStack, L: float, wavelength: float, points_per_period: int, n_scan: int):
        d = stack.d
        if points_per_period % n_scan:
            raise ArgumentError("points_per_period must be a multiple of n_scan")
        self.dx = d / points_per_period
        feature = min(wavelength * L / d, d)
        if self.dx > feature / 8:
            raise ResolutionError(
                f"sampling step {self.dx:.3g} m does not resolve the {feature:.3g} m diffraction scale"
            )
        # padding keeps the first few diffraction orders inside the FFT window
        pad = max(4, math.ceil(6 * wavelength * L / d**2))
        self.n_periods = stack.n_slits + 2 * pad
        n = self.n_periods * points_per_period
        self.x = (np.arange(n) - n // 2) * self.dx
        half = stack.n_slits * d / 2
        self.aperture = np.abs(self.x + self.dx / 2) < half
        # detector integrates the central half of the aperture, away from edge waves
        self.detect = np.abs(self.x + self.dx / 2) < half / 2
        self.m = points_per_period
        self.step = points_per_period // n_scan


def _scan(layout: _Layout, intensity: np.ndarray, stack: GratingStack, n_scan: int):
    idx = np.arange(layout.x.size)
    open_len = stack.open_fraction * layout.m
    weights = intensity * layout.detect
    counts = np.empty(n_scan + 1)
    for j in range(n_scan + 1):
        # shifting the third grating by j*step samples; integer arithmetic keeps it exactly periodic
        mask = np.mod(idx - j * layout.step, layout.m) < open_len
        counts[j] = weights[mask].sum() * layout.dx
    return counts


def _fresnel(field_in: np.ndarray, dx: float, wavelength: float, L: float) -> np.ndarray:
    freqs = np.fft.fftfreq(field_in.size, dx)
    kernel = np.exp(-1j * math.pi * wavelength * L * freqs**2)
    return np.fft.ifft(np.fft.fft(field_in) * kernel)


def _angles(incoherence: Incoherence, spread: float) -> np.ndarray:
    n = incoherence.n_angles
    if n < 1:
        raise ArgumentError("n_angles must be >= 1")
    if n == 1:
        return np.zeros(1)
    return (np.arange(n) + 0.5) / n * spread - spread / 2


def simulate_fringe_scan(
    beam: BeamParams,
    stack: GratingStack,
    n_scan: int = 16,
    incoherence: Incoherence = Incoherence(),
    points_per_period: int = 64,
    model: str = "wave",
) -> FringeScan:
    """Counts behind the third grating as it is stepped across one period.

    ``model="ray"`` replaces diffraction by geometric shadows (the classical
    moire pattern), which carries no dependence on the wavelength.
    """
    wavelength = beam.lambda_dB
    L = stack.separation(beam)
    layout = _Layout(stack, L, wavelength, points_per_period, n_scan)
    t2 = _transmission(layout.x, stack.d, stack.open_fraction) * layout.aperture
    angles = _angles(incoherence, incoherence.spread(stack, L))

    intensity = np.zeros(layout.x.size)
    for theta in angles:  # fixed order keeps the sum bit-reproducible
        if model == "wave":
            u0 = t2 * np.exp(2j * math.pi * theta * layout.x / wavelength)
            intensity += np.abs(_fresnel(u0, layout.dx, wavelength, L)) ** 2
        elif model == "ray":
            shifted = _transmission(layout.x - theta * L, stack.d, stack.open_fraction)
            intensity += shifted * (np.abs(layout.x - theta * L) < stack.n_slits * stack.d / 2)
        else:
            raise ArgumentError(f"unknown fringe model {model!r}")
    intensity /= angles.size

    counts = _scan(layout, intensity, stack, n_scan)
    shifts = np.arange(n_scan) * layout.step * layout.dx
    return FringeScan(
        shifts=shifts,
        counts=counts[:-1],
        visibility=fringe_visibility(counts[:-1]),
        x=layout.x[layout.detect],
        intensity=intensity[layout.detect],
        period=dominant_period(layout.x[layout.detect], intensity[layout.detect]),
        separation=L,
        count_at_period=float(counts[-1]),
    )


def dominant_period(x: np.ndarray, intensity: np.ndarray, oversample: int = 16) -> float:
    """Period of the strongest non-DC Fourier component, refined by zero padding."""
    y = intensity - intensity.mean()
    n = y.size * oversample
    spec = np.abs(np.fft.rfft(y * np.hanning(y.size), n))
    freqs = np.fft.rfftfreq(n, x[1] - x[0])
    k = int(np.argmax(spec[1:])) + 1
    if 1 <= k < spec.size - 1:
        a, b, c = spec[k - 1], spec[k], spec[k + 1]
        denom = a - 2 * b + c
        k = k + (0.5 * (a - c) / denom if denom != 0 else 0.0)
    f = k * (freqs[1] - freqs[0])
    return float(1 / f) if f > 0 else math.inf


def decoherence_pressure(env: GasEnvironment, L: float) -> float:
    """k_B T / (2 L sigma_eff)."""
    if env.temperature <= 0 or env.sigma_eff <= 0 or L <= 0:
        raise ArgumentError("temperature, cross section and separation must be positive")
    return CONSTANTS.k_B * env.temperature / (2 * L * env.sigma_eff)


def visibility_with_gas(V0: float, p, p0: float):
    if p0 <= 0:
        raise ArgumentError("p0 must be positive")
    p = np.asarray(p, dtype=float)
    if np.any(p < 0):
        raise ArgumentError("pressure must be non-negative")
    out = V0 * np.exp(-p / p0)
    return float(out) if out.ndim == 0 else out


def which_path_dephase(rho: DensityMatrix, x: np.ndarray, overlap: Callable) -> DensityMatrix:
    """Multiply rho(x, x') by the overlap of the environment states the two positions leave behind.

    ``overlap(x, x_prime)`` is evaluated on broadcast grids and must satisfy
    |overlap| <= 1 with overlap(x, x) == 1.
    """
    x = np.asarray(x, dtype=float)
    if x.size != rho.dim:
        raise ArgumentError("position grid does not match the state dimension")
    o = np.asarray(overlap(x[:, None], x[None, :]), dtype=complex)
    o = np.broadcast_to(o, rho.entries.shape)
    if np.max(np.abs(o)) > 1 + 1e-12:
        raise ContractViolation("environment overlap exceeds 1 in magnitude")
    if np.max(np.abs(np.diag(o) - 1)) > 1e-12:
        raise ContractViolation("environment overlap must be 1 on the diagonal")
    out = rho.entries * o
    np.fill_diagonal(out, np.diag(rho.entries))
    return DensityMatrix(out, basis=rho.basis)


def delta_overlap(x, x_prime):
    return (x == x_prime).astype(float)


def geometric_cross_section(mass_amu: float) -> float:
    """Default cross-section model: area growing as mass**(2/3), in units of the reference."""
    return mass_amu ** (2.0 / 3.0)


def extrapolate_required_pressure(
    target_mass: float,
    reference_mass: float,
    reference_p0: float,
    sigma_model: Callable[[float], float] = geometric_cross_section,
    sigma_model_name: str = "geometric m^(2/3)",
) -> dict:
    """Decoherence pressure for a heavier particle, with the modelling assumptions.

    At fixed velocity the wavelength falls as 1/m, the grating period is
    rescaled as sqrt(wavelength) and the separation kept at one Talbot length,
    so L = d^2/lambda does not change with mass.  Only the cross section
    changes p0.
    """
    if target_mass <= 0 or reference_mass <= 0 or reference_p0 <= 0:
        raise ArgumentError("masses and reference pressure must be positive")
    ratio = sigma_model(reference_mass) / sigma_model(target_mass)
    mass_ratio = target_mass / reference_mass
    return {
        "p0": reference_p0 * ratio,
        "p0_ratio": ratio,
        "mass_ratio": mass_ratio,
        "wavelength_ratio": 1 / mass_ratio,
        "grating_period_ratio": mass_ratio ** -0.5,
        "separation_ratio": 1.0,
        "assumptions": [
            "fixed velocity: wavelength proportional to 1/mass",
            "grating period rescaled proportional to sqrt(wavelength)",
            "separation held at one Talbot length d^2/lambda (mass independent)",
            f"effective cross section model: {sigma_model_name}",
            "temperature of the residual gas unchanged",
        ],
    }
