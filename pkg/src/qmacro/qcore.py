"""Finite-dimensional quantum states and the linear algebra the other modules share.

Composite systems always use a-major ordering: in ``tensor(a, b)`` the basis
index is ``i_a * dim(b) + i_b``, which is what :func:`numpy.kron` produces.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy import constants as _sc

from .errors import NumericError, ShapeError, SizeError, UnsupportedBasisError

MAX_DIM = 2**20
HERMITIAN_TOL = 1e-12
TRACE_TOL = 1e-12
PSD_TOL = 1e-10
ENTROPY_CUTOFF = 1e-14


def _frozen(a, dtype=complex) -> np.ndarray:
    out = np.array(a, dtype=dtype, copy=True)
    out.flags.writeable = False
    return out


@dataclass(frozen=True)
class PhysicalConstants:
    h: float = _sc.h
    hbar: float = _sc.hbar
    k_B: float = _sc.k
    amu: float = _sc.physical_constants["atomic mass constant"][0]
    mu_B: float = _sc.physical_constants["Bohr magneton"][0]
    e: float = _sc.e
    Phi_0: float = _sc.h / (2 * _sc.e)


CONSTANTS = PhysicalConstants()


@dataclass(frozen=True)
class StateVector:
    """Pure state given by its amplitudes in a declared orthonormal basis."""

    amplitudes: np.ndarray
    basis: str = "computational"

    def __post_init__(self):
        amps = _frozen(self.amplitudes)
        if amps.ndim != 1 or amps.size == 0:
            raise ShapeError("state vector needs a non-empty 1-D amplitude array")
        if amps.size > MAX_DIM:
            raise SizeError(f"dimension {amps.size} exceeds maximum {MAX_DIM}")
        object.__setattr__(self, "amplitudes", amps)

    @property
    def dim(self) -> int:
        return self.amplitudes.size

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def normalize(self) -> StateVector:
        n = self.norm()
        if n == 0.0:
            raise NumericError("cannot normalize the zero vector")
        return StateVector(self.amplitudes / n, self.basis)

    def density(self) -> DensityMatrix:
        psi = self.amplitudes
        return DensityMatrix(np.outer(psi, psi.conj()), basis=self.basis, check_psd=False)


@dataclass(frozen=True)
class DensityMatrix:
    """Hermitian, unit-trace, positive semidefinite matrix.

    The positivity check costs an eigendecomposition; callers that build the
    matrix from a construction known to be positive may pass
    ``check_psd=False``.
    """

    entries: np.ndarray
    basis: str = "computational"
    check_psd: bool = field(default=True, repr=False, compare=False)

    def __post_init__(self):
        rho = _frozen(self.entries)
        if rho.ndim != 2 or rho.shape[0] != rho.shape[1] or rho.shape[0] == 0:
            raise ShapeError(f"density matrix must be square, got shape {rho.shape}")
        if rho.shape[0] > MAX_DIM:
            raise SizeError(f"dimension {rho.shape[0]} exceeds maximum {MAX_DIM}")
        if np.max(np.abs(rho - rho.conj().T)) > HERMITIAN_TOL:
            raise NumericError("density matrix is not Hermitian")
        tr = np.trace(rho)
        if abs(tr - 1.0) > TRACE_TOL:
            raise NumericError(f"density matrix trace {tr.real:.15g} differs from 1")
        if self.check_psd and np.linalg.eigvalsh(rho)[0] < -PSD_TOL:
            raise NumericError("density matrix has a negative eigenvalue")
        object.__setattr__(self, "entries", rho)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def purity(self) -> float:
        rho = self.entries
        return float(np.real(np.vdot(rho, rho)))


@dataclass(frozen=True)
class HermitianOperator:
    """Hamiltonians, Pauli matrices and projectors."""

    entries: np.ndarray

    def __post_init__(self):
        op = _frozen(self.entries)
        if op.ndim != 2 or op.shape[0] != op.shape[1] or op.shape[0] == 0:
            raise ShapeError(f"operator must be square, got shape {op.shape}")
        if np.max(np.abs(op - op.conj().T)) > HERMITIAN_TOL:
            raise NumericError("operator is not Hermitian")
        object.__setattr__(self, "entries", op)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def expectation(self, state) -> float:
        rho = as_density(state).entries
        return float(np.real(np.trace(self.entries @ rho)))


SIGMA_X = HermitianOperator(np.array([[0, 1], [1, 0]]))
SIGMA_Z = HermitianOperator(np.array([[1, 0], [0, -1]]))


@dataclass(frozen=True)
class GridSpec:
    """Requested phase-space window for a Wigner transform."""

    x_min: float
    x_max: float
    nx: int
    p_min: float
    p_max: float
    np: int


@dataclass(frozen=True)
class WignerGrid:
    x_min: float
    x_max: float
    p_min: float
    p_max: float
    nx: int
    np: int
    x: np.ndarray
    p: np.ndarray
    values: np.ndarray  # shape (nx, np)

    @property
    def cell_area(self) -> float:
        dx = self.x[1] - self.x[0] if self.nx > 1 else 1.0
        dp = self.p[1] - self.p[0] if self.np > 1 else 1.0
        return float(dx * dp)

    def total(self) -> float:
        return float(self.values.sum() * self.cell_area)


def ket(dim: int, index: int) -> StateVector:
    v = np.zeros(dim, dtype=complex)
    v[index] = 1.0
    return StateVector(v)


def maximally_mixed(dim: int) -> DensityMatrix:
    return DensityMatrix(np.eye(dim) / dim, check_psd=False)


def as_density(state) -> DensityMatrix:
    if isinstance(state, DensityMatrix):
        return state
    if isinstance(state, StateVector):
        return state.density()
    raise TypeError(f"expected StateVector or DensityMatrix, got {type(state).__name__}")


def tensor(a, b, max_dim: int = MAX_DIM):
    """Kronecker product of two states of the same kind, a-major ordering."""
    if a.dim * b.dim > max_dim:
        raise SizeError(f"product dimension {a.dim * b.dim} exceeds maximum {max_dim}")
    if isinstance(a, StateVector) and isinstance(b, StateVector):
        return StateVector(np.kron(a.amplitudes, b.amplitudes))
    if isinstance(a, DensityMatrix) and isinstance(b, DensityMatrix):
        return DensityMatrix(np.kron(a.entries, b.entries), check_psd=False)
    raise TypeError("tensor operands must both be StateVector or both DensityMatrix")


def partial_trace(rho: DensityMatrix, dims: Sequence[int], keep) -> DensityMatrix:
    """Reduced state on the subsystem(s) ``keep``.

    ``keep`` is a single factor index or a sequence of them; the kept factors
    stay in their original order.
    """
    dims = [int(d) for d in dims]
    if int(np.prod(dims)) != rho.dim:
        raise ShapeError(f"factor dimensions {dims} do not multiply to {rho.dim}")
    keep = [keep] if np.isscalar(keep) else sorted(int(k) for k in keep)
    if not keep or any(k < 0 or k >= len(dims) for k in keep) or len(set(keep)) != len(keep):
        raise ShapeError(f"invalid subsystem selection {keep} for {len(dims)} factors")
    n = len(dims)
    drop = [k for k in range(n) if k not in keep]
    t = rho.entries.reshape(dims + dims)
    # contract each dropped factor's row index with its column index
    letters = "abcdefghijklmnopqrstuvwxyz"
    rows = list(letters[:n])
    cols = list(letters[n:2 * n]) if 2 * n <= 26 else None
    if cols is None:
        raise SizeError("too many tensor factors for partial_trace")
    for k in drop:
        cols[k] = rows[k]
    out = "".join(rows[k] for k in keep) + "".join(cols[k] for k in keep)
    red = np.einsum("".join(rows) + "".join(cols) + "->" + out, t)
    dk = int(np.prod([dims[k] for k in keep]))
    red = red.reshape(dk, dk)
    red = (red + red.conj().T) / 2
    return DensityMatrix(red, check_psd=False)


def von_neumann_entropy(rho: DensityMatrix, base: float = 2) -> float:
    """-Tr(rho log rho); ``base`` is 2 (bits) or ``np.e`` (nats)."""
    w = np.linalg.eigvalsh(rho.entries)
    if w[0] < -PSD_TOL:
        raise NumericError(f"eigenvalue {w[0]:.3g} below PSD tolerance")
    w = w[w > ENTROPY_CUTOFF]
    h = -float(np.sum(w * np.log(w)))
    return max(h / np.log(base), 0.0)


def fidelity_pure(a: StateVector, b: StateVector) -> float:
    return float(abs(np.vdot(a.amplitudes, b.amplitudes)) ** 2)


def _uniform_spacing(x: np.ndarray) -> float:
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or x.size < 2:
        raise UnsupportedBasisError("Wigner transform needs at least two basis points")
    steps = np.diff(x)
    dx = float(steps.mean())
    if dx <= 0 or np.max(np.abs(steps - dx)) > 1e-9 * abs(dx):
        raise UnsupportedBasisError("Wigner transform requires a uniform position basis")
    return dx


def wigner(rho: DensityMatrix, x: np.ndarray, grid: GridSpec) -> WignerGrid:
    """Discrete Wigner function of a state on the uniform position basis ``x``.

    W(x_i, p) = (1/pi) sum_k rho[i+k, i-k] exp(-2 i p k dx), with hbar = 1 and
    rho holding grid amplitudes (trace 1).  Rows are the basis points inside
    [x_min, x_max], thinned to at most ``nx`` rows; W is a density per unit
    x and p, so ``values.sum() * cell_area`` approximates the trace.
    """
    dx = _uniform_spacing(x)
    if rho.dim != len(x):
        raise ShapeError(f"state dimension {rho.dim} does not match {len(x)} basis points")
    x = np.asarray(x, dtype=float)
    inside = np.flatnonzero((x >= grid.x_min - 1e-12) & (x <= grid.x_max + 1e-12))
    if inside.size == 0:
        raise ShapeError("Wigner window contains no basis points")
    stride = max(1, int(np.ceil(inside.size / grid.nx)))
    rows = inside[::stride]
    p = np.linspace(grid.p_min, grid.p_max, grid.np)
    if max(abs(grid.p_min), abs(grid.p_max)) > np.pi / (2 * dx):
        raise UnsupportedBasisError("momentum window exceeds the grid's Nyquist range")

    n = rho.dim
    r = rho.entries
    ks = np.arange(-(n - 1), n)
    corr = np.zeros((rows.size, ks.size), dtype=complex)
    for j, k in enumerate(ks):
        a, b = rows + k, rows - k
        ok = (a >= 0) & (a < n) & (b >= 0) & (b < n)
        if ok.any():
            corr[ok, j] = r[a[ok], b[ok]]
    # columns carrying nothing (far off-diagonal tails) are dropped
    live = np.abs(corr).max(axis=0) > 1e-16 * np.abs(corr).max()
    corr, ks = corr[:, live], ks[live]
    phase = np.exp(-2j * np.outer(ks * dx, p))
    values = np.real(corr @ phase) / np.pi
    xs = x[rows]
    return WignerGrid(
        x_min=float(xs[0]), x_max=float(xs[-1]), p_min=float(p[0]), p_max=float(p[-1]),
        nx=rows.size, np=p.size, x=_frozen(xs, float), p=_frozen(p, float),
        values=_frozen(values, float),
    )


def reduced_state(state: StateVector, dims: Sequence[int], keep) -> DensityMatrix:
    """Reduced density matrix of a pure composite state, without forming |psi><psi|."""
    dims = [int(d) for d in dims]
    if int(np.prod(dims)) != state.dim:
        raise ShapeError(f"factor dimensions {dims} do not multiply to {state.dim}")
    keep = [keep] if np.isscalar(keep) else sorted(int(k) for k in keep)
    rest = [k for k in range(len(dims)) if k not in keep]
    psi = state.amplitudes.reshape(dims).transpose(keep + rest)
    dk = int(np.prod([dims[k] for k in keep]))
    a = psi.reshape(dk, -1)
    red = a @ a.conj().T
    red = (red + red.conj().T) / 2
    return DensityMatrix(red / np.trace(red).real, check_psd=False)
