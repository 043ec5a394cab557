"""Brute-force exact diagonalization for small rings.

Basis states are integers whose bit ``j`` encodes site ``j``: bit 0 is spin
up (``Z = +1``), bit 1 spin down.  ``S^+ = |up><down|`` clears a bit.
Everything here is dense and meant for ``N <= 12``; its job is to certify
the free-fermion pipeline, not to be fast.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import ConfigError
from .model import DEGENERACY_TOL, ModelParams
from .pauli import PauliString

MAX_SITES = 12


@dataclass(frozen=True)
class DenseState:
    n_sites: int
    amplitudes: np.ndarray
    energy: float = float("nan")
    parity: int = 1

    def __post_init__(self):
        norm = np.linalg.norm(self.amplitudes)
        if abs(norm - 1.0) > 1e-12:
            raise ValueError(f"state not normalized: |psi| = {norm}")


def _check_size(n: int) -> None:
    if n > MAX_SITES:
        raise ConfigError(f"exact diagonalization is capped at N={MAX_SITES}, got {n}")


def _bits(n: int) -> np.ndarray:
    idx = np.arange(2**n)
    return (idx[:, None] >> np.arange(n)[None, :]) & 1


def parity_diagonal(n: int) -> np.ndarray:
    """Diagonal of ``prod_j Z_j`` in the computational basis."""
    return np.where(_bits(n).sum(axis=1) % 2 == 0, 1.0, -1.0)


def build_hamiltonian(params: ModelParams) -> np.ndarray:
    """Dense Hamiltonian of the periodic chain.

    Memory is ``16 * 4**N`` bytes (256 MiB at ``N = 12``).
    """
    N = params.N
    _check_size(N)
    dim = 2**N
    bits = _bits(N)
    zval = 1.0 - 2.0 * bits
    idx = np.arange(dim)
    H = np.zeros((dim, dim))
    H[idx, idx] = -params.lam * zval.sum(axis=1)
    for j in range(N):
        l = (j + 1) % N
        flipped = idx ^ ((1 << j) | (1 << l))
        # <f| X_j X_l |s> = 1, <f| Y_j Y_l |s> = -z_j z_l
        yy = -zval[:, j] * zval[:, l]
        amp = -0.5 * ((1 + params.gamma) + (1 - params.gamma) * yy)
        np.add.at(H, (flipped, idx), amp)
    return H


def ground_state(H: np.ndarray, n_sites: int | None = None) -> DenseState:
    """Lowest eigenvector, diagonalizing the two parity blocks separately.

    On degeneracy between the blocks the even-parity state wins.
    """
    dim = H.shape[0]
    n = n_sites if n_sites is not None else int(round(np.log2(dim)))
    par = parity_diagonal(n)
    best = {}
    for p in (1, -1):
        sel = np.flatnonzero(par == p)
        block = H[np.ix_(sel, sel)]
        w, v = scipy.linalg.eigh(block, subset_by_index=[0, 0])
        vec = np.zeros(dim, dtype=complex)
        vec[sel] = v[:, 0]
        best[p] = (float(w[0]), vec)
    p = 1 if best[1][0] <= best[-1][0] + DEGENERACY_TOL else -1
    energy, vec = best[p]
    vec = vec / np.linalg.norm(vec)
    return DenseState(n, vec, energy, p)


def solve(params: ModelParams) -> DenseState:
    return ground_state(build_hamiltonian(params), params.N)


def apply_pauli(vec: np.ndarray, site: int, axis: str) -> np.ndarray:
    n_states = vec.shape[0]
    idx = np.arange(n_states)
    bit = (idx >> site) & 1
    if axis == "Z":
        return vec * (1.0 - 2.0 * bit)
    out = vec[idx ^ (1 << site)]
    if axis == "X":
        return out
    if axis == "Y":
        # Y|up> = i|down>, Y|down> = -i|up>; the target bit of out is 1 - source bit
        return out * np.where(bit == 1, 1j, -1j)
    raise ValueError(f"unknown Pauli axis {axis!r}")


def apply_string(vec: np.ndarray, p: PauliString) -> np.ndarray:
    out = vec
    for site, axis in reversed(p.factors):
        out = apply_pauli(out, site, axis)
    return out


def expectation_ed(state: DenseState, p: PauliString) -> float:
    """``<psi|P|psi>`` for a Hermitian Pauli string."""
    val = np.vdot(state.amplitudes, apply_string(state.amplitudes, p))
    if abs(val.imag) > 1e-12:
        raise ValueError(f"non-real expectation {val} for {p}")
    return float(val.real)


def reduced_density_matrix(state: DenseState, sites) -> np.ndarray:
    """Partial trace onto ``sites``; the first listed site is the most significant qubit."""
    n = state.n_sites
    sites = list(sites)
    if len(set(sites)) != len(sites) or any(not 0 <= s < n for s in sites):
        raise ValueError(f"invalid site set {sites} for N={n}")
    psi = state.amplitudes.reshape([2] * n)  # axis a holds site n-1-a
    keep = [n - 1 - s for s in sites]
    rest = [a for a in range(n) if a not in keep]
    mat = np.transpose(psi, keep + rest).reshape(2 ** len(sites), -1)
    rho = mat @ mat.conj().T
    return 0.5 * (rho + rho.conj().T)


def entropy_and_purity(rho: np.ndarray) -> tuple[float, float]:
    """Von Neumann entropy in bits and purity ``Tr rho^2``."""
    w = np.linalg.eigvalsh(rho)
    if w.min() < -1e-10:
        raise ValueError(f"density matrix has eigenvalue {w.min()}")
    w = np.clip(w, 0.0, None)
    nz = w[w > 0]
    entropy = float(-(nz * np.log2(nz)).sum())
    purity = float(np.real(np.trace(rho @ rho)))
    return max(entropy, 0.0), purity


def purities_by_subset(state: DenseState, k_max: int) -> dict[tuple[int, ...], float]:
    """Purity of every site subset of size ``1..k_max``."""
    out = {}
    for k in range(1, k_max + 1):
        for sub in itertools.combinations(range(state.n_sites), k):
            _, out[sub] = entropy_and_purity(reduced_density_matrix(state, sub))
    return out


def tangle_ed(state: DenseState, k: int, purities=None) -> float:
    """Generalized tangle from brute-force reduced density matrices."""
    import math

    if purities is None:
        purities = purities_by_subset(state, k)
    N = state.n_sites
    d_k = sum(math.perm(N, i + 1) for i in range(k))
    total = sum(math.factorial(len(s)) * p for s, p in purities.items() if len(s) <= k)
    return 2.0 - 2.0 * total / d_k


def lowering(vec: np.ndarray, n: int, phases=None) -> np.ndarray:
    """Apply ``sum_m phase_m S^-_m`` (sets a bit)."""
    idx = np.arange(vec.shape[0])
    out = np.zeros_like(vec, dtype=complex)
    for m in range(n):
        src = ((idx >> m) & 1) == 0
        ph = 1.0 if phases is None else phases[m]
        out[idx[src] | (1 << m)] += ph * vec[src]
    return out


def raising(vec: np.ndarray, n: int, phases=None) -> np.ndarray:
    """Apply ``sum_n phase_n S^+_n`` (clears a bit)."""
    idx = np.arange(vec.shape[0])
    out = np.zeros_like(vec, dtype=complex)
    for m in range(n):
        src = ((idx >> m) & 1) == 1
        ph = 1.0 if phases is None else phases[m]
        out[idx[src] ^ (1 << m)] += ph * vec[src]
    return out


def apply_nq(vec: np.ndarray, n: int, q: int) -> np.ndarray:
    """``n_q = (1/N) sum_{a,b} e^{i 2 pi q (a - b)/N} S^+_a S^-_b``."""
    ph = np.exp(2j * np.pi * q * np.arange(n) / n)
    return raising(lowering(vec, n, ph.conj()), n, ph) / n


def quasimomentum_ed(state: DenseState) -> np.ndarray:
    n = state.n_sites
    psi = state.amplitudes
    return np.array([np.vdot(psi, apply_nq(psi, n, q)).real for q in range(n)])


def noise_correlation_ed(state: DenseState, q1: int = 0, q2: int = 0) -> float:
    n = state.n_sites
    psi = state.amplitudes
    a = apply_nq(psi, n, q1)
    b = apply_nq(psi, n, q2)
    # n_q is Hermitian: <n_q1 n_q2> = <n_q1 psi | n_q2 psi>
    second = np.vdot(a, b).real
    return float(second - np.vdot(psi, a).real * np.vdot(psi, b).real)


def product_state(bloch_angles: np.ndarray) -> DenseState:
    """Dense product state from per-site ``(theta, phi)`` pairs."""
    vec = np.array([1.0 + 0j])
    n = len(bloch_angles)
    for theta, phi in reversed(bloch_angles):
        site = np.array([np.cos(theta / 2), np.exp(1j * phi) * np.sin(theta / 2)])
        vec = np.kron(vec, site)
    # kron built site n-1 as the most significant bit, matching the bit layout
    return DenseState(n, vec / np.linalg.norm(vec))
