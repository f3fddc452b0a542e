"""Relative states: Schmidt form, envariance, fine-graining, redundancy and the perception chain.

A bipartite pure state is stored as its d1 x d2 amplitude matrix, the
coefficient of |i>_1 |j>_2.  "Labels" are the declared Schmidt partners
|alpha_k>_1, |beta_k>_2 (matrix columns); when none are declared the first
computational basis vectors on each side are used.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .errors import ArgumentError, PreconditionError
from .qcore import DensityMatrix, StateVector, as_density, partial_trace, reduced_state, von_neumann_entropy

EQUAL_TOL = 1e-10
MAX_EXHAUSTIVE = 10_000
SAMPLED_SUBSETS = 256
NEURON_TAU = 1e-20  # s, ion-collision estimate for a firing/resting superposition
MAX_EXPLICIT_BRANCHES = 64


@dataclass(frozen=True)
class Schmidt:
    coefficients: np.ndarray  # non-negative, descending
    basis1: np.ndarray  # d1 x r, orthonormal columns
    basis2: np.ndarray  # d2 x r
    degenerate: bool


@dataclass(frozen=True)
class BipartiteState:
    amplitudes: np.ndarray
    labels: tuple | None = None
    schmidt: Schmidt | None = field(default=None, compare=False)

    def __post_init__(self):
        amps = np.array(self.amplitudes, dtype=complex)
        if amps.ndim != 2:
            raise ArgumentError("bipartite amplitudes must form a d1 x d2 matrix")
        if abs(np.linalg.norm(amps) - 1) > 1e-12:
            raise ArgumentError("bipartite state must be normalized")
        amps.flags.writeable = False
        object.__setattr__(self, "amplitudes", amps)

    @property
    def dims(self) -> tuple[int, int]:
        return self.amplitudes.shape

    def vector(self) -> StateVector:
        return StateVector(self.amplitudes.reshape(-1))

    def reduced(self, side: int) -> DensityMatrix:
        return reduced_state(self.vector(), self.dims, side - 1)

    def label_bases(self, n: int | None = None) -> tuple[np.ndarray, np.ndarray]:
        if self.labels is not None:
            return self.labels
        d1, d2 = self.dims
        n = n or min(d1, d2)
        return np.eye(d1, n, dtype=complex), np.eye(d2, n, dtype=complex)

    def branch_amplitudes(self) -> np.ndarray:
        """<alpha_k beta_k | psi> for each declared label pair."""
        b1, b2 = self.label_bases()
        return np.einsum("ik,ij,jk->k", b1.conj(), self.amplitudes, b2.conj())


def schmidt_state(weights, phases=None, basis1=None, basis2=None) -> BipartiteState:
    """sum_k sqrt(w_k) e^{i phi_k} |alpha_k>|beta_k> with the given (or computational) labels."""
    w = np.asarray(weights, dtype=float)
    phases = np.zeros(w.size) if phases is None else np.asarray(phases, dtype=float)
    n = w.size
    b1 = np.eye(n, dtype=complex) if basis1 is None else np.asarray(basis1, dtype=complex)
    b2 = np.eye(n, dtype=complex) if basis2 is None else np.asarray(basis2, dtype=complex)
    c = np.sqrt(w / w.sum()) * np.exp(1j * phases)
    amps = b1 @ np.diag(c) @ b2.T
    return BipartiteState(amps, labels=(b1, b2))


def schmidt_decompose(state: BipartiteState) -> BipartiteState:
    u, s, vh = np.linalg.svd(state.amplitudes, full_matrices=False)
    keep = s > 1e-14
    s, u, v = s[keep], u[:, keep], vh[keep].T
    degenerate = bool(s.size > 1 and np.any(np.abs(np.diff(s)) < EQUAL_TOL))
    return BipartiteState(
        state.amplitudes, labels=state.labels,
        schmidt=Schmidt(coefficients=s, basis1=u, basis2=v, degenerate=degenerate),
    )


def reconstruction_error(state: BipartiteState) -> float:
    sc = state.schmidt
    return float(np.max(np.abs(sc.basis1 @ np.diag(sc.coefficients) @ sc.basis2.T - state.amplitudes)))


@dataclass(frozen=True)
class PhaseRemoval:
    state: BipartiteState
    unitary: np.ndarray  # acts on side 2
    phases: np.ndarray
    degenerate: bool


def apply_local_phase_removal(state: BipartiteState) -> PhaseRemoval:
    """Absorb every branch phase into a diagonal unitary on side 2.

    The unitary is diagonal in the declared beta labels and the identity on
    their orthogonal complement.  Equal moduli make the Schmidt basis
    non-unique; the result then carries ``degenerate=True`` and the declared
    labels decide.
    """
    b1, b2 = state.label_bases()
    c = state.branch_amplitudes()
    phases = np.angle(c)
    d2 = state.dims[1]
    u2 = np.eye(d2, dtype=complex) + b2 @ np.diag(np.exp(-1j * phases) - 1) @ b2.conj().T
    amps = state.amplitudes @ u2.T
    mods = np.abs(c)
    degenerate = bool(mods.size > 1 and np.any(np.abs(mods[:, None] - mods[None, :])[np.triu_indices(mods.size, 1)] < EQUAL_TOL))
    return PhaseRemoval(BipartiteState(amps, labels=state.labels), u2, phases, degenerate)


def _swap_unitary(basis: np.ndarray, i: int, j: int) -> np.ndarray:
    a, b = basis[:, i:i + 1], basis[:, j:j + 1]
    d = basis.shape[0]
    return np.eye(d, dtype=complex) - a @ a.conj().T - b @ b.conj().T + a @ b.conj().T + b @ a.conj().T


def swap(state: BipartiteState, side: int, pair: tuple[int, int] = (0, 1)) -> BipartiteState:
    """Exchange two Schmidt labels on one side only."""
    b1, b2 = state.label_bases()
    i, j = pair
    if side == 1:
        amps = _swap_unitary(b1, i, j) @ state.amplitudes
    elif side == 2:
        amps = state.amplitudes @ _swap_unitary(b2, i, j).T
    else:
        raise ArgumentError("side must be 1 or 2")
    return BipartiteState(amps, labels=state.labels)


def state_fidelity(a: BipartiteState, b: BipartiteState) -> float:
    return float(abs(np.vdot(a.amplitudes, b.amplitudes)) ** 2)


def envariant_probabilities(state: BipartiteState) -> list[Fraction]:
    """Uniform outcome probabilities certified by swap/counterswap invariance.

    Raises PreconditionError unless all branch moduli agree within 1e-10;
    unequal weights go through :func:`fine_grain`.
    """
    c = state.branch_amplitudes()
    n = c.size
    mods = np.abs(c)
    if abs(np.sum(mods**2) - 1) > EQUAL_TOL:
        raise PreconditionError("declared labels do not span the state")
    if np.max(mods) - np.min(mods) > EQUAL_TOL:
        raise PreconditionError("branch amplitudes differ; use fine_grain for unequal weights")
    plain = apply_local_phase_removal(state).state
    rho1 = plain.reduced(1).entries
    for i, j in itertools.combinations(range(n), 2):
        swapped = swap(plain, 1, (i, j))
        if np.max(np.abs(swapped.reduced(1).entries - rho1)) > 1e-12:
            raise PreconditionError(f"side-1 state changed under swap {i}<->{j}")
        restored = swap(swapped, 2, (i, j))
        if abs(1 - state_fidelity(restored, plain)) > 1e-12:
            raise PreconditionError(f"counterswap {i}<->{j} failed to restore the state")
    return [Fraction(1, n)] * n


@dataclass(frozen=True)
class FineGrained:
    probabilities: list[Fraction]
    counts: list[int]
    denominator: int
    branch_of: np.ndarray  # fine-grained label -> original branch
    expanded: BipartiteState | None  # None when the denominator is too large to store


def _as_fraction(w) -> Fraction:
    if isinstance(w, Fraction):
        return w
    if isinstance(w, (int, str)):
        return Fraction(w)
    f = Fraction(float(w)).limit_denominator(10**6)
    if abs(float(f) - float(w)) > 1e-12:
        raise ArgumentError(f"weight {w!r} is not a rational with denominator <= 10^6")
    return f


def fine_grain(weights: Sequence) -> FineGrained:
    """Born weights m_i/M from envariance over M equal-amplitude sub-branches.

    Branch i is split into m_i orthogonal ancilla branches of amplitude
    1/sqrt(M); the expanded state has equal Schmidt coefficients, so each
    fine-grained branch has probability 1/M and branch i collects m_i of them.
    """
    fr = [_as_fraction(w) for w in weights]
    if any(f <= 0 for f in fr) or sum(fr) != 1:
        raise ArgumentError("weights must be positive rationals summing to 1")
    M = math.lcm(*(f.denominator for f in fr))
    if M > 10**6:
        raise ArgumentError(f"common denominator {M} exceeds 10^6")
    counts = [int(f * M) for f in fr]
    branch_of = np.repeat(np.arange(len(fr)), counts)

    expanded = None
    if M <= MAX_EXPLICIT_BRANCHES:
        # side 1 is system (x) ancilla with label |i, k>; side 2 is the environment |e_k>
        n = len(fr)
        b1 = np.zeros((n * M, M), dtype=complex)
        b1[branch_of * M + np.arange(M), np.arange(M)] = 1.0
        b2 = np.eye(M, dtype=complex)
        expanded = schmidt_state(np.ones(M), basis1=b1, basis2=b2)
        per_label = envariant_probabilities(expanded)
    else:
        per_label = [Fraction(1, M)] * M

    probs = [Fraction(0)] * len(fr)
    for k, i in enumerate(branch_of):
        probs[i] += per_label[k]
    return FineGrained(probabilities=probs, counts=counts, denominator=M, branch_of=branch_of, expanded=expanded)


def mutual_information(state, dims: Sequence[int], system: Sequence[int], fragment: Sequence[int]) -> float:
    """I(S:F) = H(S) + H(F) - H(SF) in bits, for a pure or mixed global state."""
    system, fragment = list(system), list(fragment)
    if set(system) & set(fragment):
        raise ArgumentError("system and fragment must be disjoint")

    if isinstance(state, StateVector):
        def red(keep):
            return reduced_state(state, dims, keep)
    else:
        rho = as_density(state)

        def red(keep):
            return partial_trace(rho, dims, keep)

    h_s = von_neumann_entropy(red(system))
    h_f = von_neumann_entropy(red(fragment))
    h_sf = von_neumann_entropy(red(system + fragment))
    return h_s + h_f - h_sf


@dataclass(frozen=True)
class BranchingState:
    system_dim: int
    fragments: tuple[int, ...]
    amplitudes: np.ndarray
    record_overlaps: np.ndarray  # (n_fragments, n_branches, n_branches)

    @property
    def dims(self) -> list[int]:
        return [self.system_dim, *self.fragments]

    def vector(self) -> StateVector:
        return StateVector(self.amplitudes)


def branching_state(weights: Sequence[float], records: Sequence[Sequence[np.ndarray]]) -> BranchingState:
    """sum_b sqrt(w_b) |b>_S (x)_j |r_{j,b}>.

    ``records[j][b]`` is the (normalized) state fragment j holds in branch b.
    """
    w = np.asarray(weights, dtype=float)
    w = w / w.sum()
    nb = w.size
    frag_dims = []
    overlaps = []
    for rec in records:
        vecs = [np.asarray(v, dtype=complex) / np.linalg.norm(v) for v in rec]
        if len(vecs) != nb:
            raise ArgumentError("every fragment needs one record per branch")
        frag_dims.append(vecs[0].size)
        overlaps.append([[np.vdot(a, b) for b in vecs] for a in vecs])
    total = None
    for b in range(nb):
        term = np.zeros(nb, dtype=complex)
        term[b] = math.sqrt(w[b])
        for rec in records:
            v = np.asarray(rec[b], dtype=complex)
            term = np.kron(term, v / np.linalg.norm(v))
        total = term if total is None else total + term
    psi = total / np.linalg.norm(total)
    return BranchingState(nb, tuple(frag_dims), psi, np.array(overlaps))


def record_state(overlap: float) -> tuple[np.ndarray, np.ndarray]:
    """Two qubit records with real overlap ``overlap`` (0: perfect, 1: none)."""
    if not 0 <= overlap <= 1:
        raise ArgumentError("overlap must lie in [0, 1]")
    return np.array([1.0, 0.0]), np.array([overlap, math.sqrt(1 - overlap**2)])


def perfect_records(n_fragments: int, weights=(0.5, 0.5), overlap: float = 0.0) -> BranchingState:
    r0, r1 = record_state(overlap)
    return branching_state(weights, [[r0, r1]] * n_fragments)


@dataclass(frozen=True)
class RedundancyProfile:
    fragment_sizes: np.ndarray
    mutual_information: np.ndarray
    system_entropy: float
    deficit: np.ndarray  # H(S) - I per size
    subsets_used: np.ndarray


def _subsets(n: int, k: int, rng: np.random.Generator):
    if math.comb(n, k) <= MAX_EXHAUSTIVE:
        return list(itertools.combinations(range(n), k))
    seen = []
    for _ in range(SAMPLED_SUBSETS):
        seen.append(tuple(sorted(rng.choice(n, size=k, replace=False).tolist())))
    return seen


def redundancy_profile(
    state: BranchingState,
    sizes: Sequence[int] | None = None,
    seed: int = 0,
    accessible: Sequence[int] | None = None,
) -> RedundancyProfile:
    """Average I(S:F) over fragments F of each size.

    ``accessible`` restricts F to the listed fragment indices (default: all);
    the remaining fragments act as environment no observer intercepts.
    """
    pool = list(range(len(state.fragments))) if accessible is None else list(accessible)
    n = len(pool)
    sizes = list(range(1, n + 1)) if sizes is None else list(sizes)
    if any(k < 1 or k > n for k in sizes):
        raise ArgumentError(f"fragment sizes must lie in [1, {n}]")
    psi, dims = state.vector(), state.dims
    h_s = von_neumann_entropy(reduced_state(psi, dims, 0))
    rng = np.random.default_rng(seed)
    mi, used = [], []
    for k in sizes:
        subsets = _subsets(n, k, rng)
        vals = [mutual_information(psi, dims, [0], [pool[j] + 1 for j in sub]) for sub in subsets]
        mi.append(math.fsum(vals) / len(vals))
        used.append(len(subsets))
    mi = np.array(mi)
    return RedundancyProfile(np.array(sizes), mi, h_s, h_s - mi, np.array(used))


FIRING_PATTERNS = ((1, 0, 1), (0, 1, 1))


def build_chain(eps_P: float, eps_R: float, eps_N: float, patterns=FIRING_PATTERNS) -> BranchingState:
    """Object, photon, rhodopsin and neuron array in two branches.

    Stage states of the two branches overlap by eps_P (photon), eps_R
    (rhodopsin) and eps_N (whole neuron array).  The neuron overlap is shared
    equally among the neurons whose firing bit differs between the patterns;
    at eps_N = 0 the branches hold exactly the two firing patterns.
    """
    for e in (eps_P, eps_R, eps_N):
        if not 0 <= e <= 1:
            raise ArgumentError("overlaps must lie in [0, 1]")
    p1, p2 = (tuple(int(b) for b in p) for p in patterns)
    if len(p1) != len(p2) or p1 == p2 and eps_N < 1:
        raise ArgumentError("patterns must have equal length and differ unless eps_N == 1")
    photon = list(record_state(eps_P))
    rhodopsin = list(record_state(eps_R))
    differing = [i for i in range(len(p1)) if p1[i] != p2[i]]
    per = eps_N ** (1 / len(differing)) if differing else 1.0
    neurons = []
    for i in range(len(p1)):
        first = np.eye(2)[p1[i]]
        if p1[i] == p2[i]:
            second = first
        else:
            second = per * first + math.sqrt(1 - per**2) * np.eye(2)[p2[i]]
        neurons.append([first, second])
    # the object is the system factor, |omega_b> being the branch label |b>
    return branching_state([0.5, 0.5], [photon, rhodopsin, *neurons])


def object_coherence(chain: BranchingState) -> float:
    """|<omega_1|rho_O|omega_2>| after tracing out every later stage."""
    rho = reduced_state(chain.vector(), chain.dims, 0)
    return float(abs(rho.entries[0, 1]))


def neuron_dephase_estimate(rate: float, t: float) -> float:
    """Remaining coherence exp(-rate t); the preset rate is 1/NEURON_TAU."""
    if rate <= 0:
        raise ArgumentError("rate must be positive")
    return math.exp(-t * rate)
