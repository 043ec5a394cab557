"""Hard-core boson correlators, quasimomentum occupations and noise correlations.

Spins map to hard-core bosons through ``a_j^dagger = S^+_j = (X_j + iY_j)/2``
and ``n_j = (1 + Z_j)/2``.  With ``S^+ = sum_j S^+_j`` the zero-momentum
occupation is ``n_0 = S^+ S^- / N = (N/2 + Zt + H)/N`` where

    Zt = (1/2) sum_j Z_j,    H = (1/2) sum_{i<j} (X_i X_j + Y_i Y_j).

Its variance only needs translation/reflection classes of 2-, 3- and 4-site
subsets, which is what makes large rings affordable.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .entanglement import enumerate_subset_classes
from .errors import ConfigError, NumericalIntegrityError
from .model import ModelParams, majorana_covariance
from .pauli import PauliString, lowering_op, pauli_expectation, raising_op, sum_expectation
from .subset_engine import SubsetEngine

IMAG_TOL = 1e-9


def _check_sites(cov, *sites):
    for s in sites:
        if not 0 <= s < cov.n_sites:
            raise ConfigError(f"site {s} out of range for N={cov.n_sites}")


def _real(value: complex, what: str) -> float:
    if abs(complex(value).imag) > IMAG_TOL:
        raise NumericalIntegrityError(f"{what}: imaginary residue {complex(value).imag:.3e}")
    return float(complex(value).real)


class _Evaluator:
    """Pauli expectations cached by their translated canonical form."""

    def __init__(self, cov):
        self.cov = cov
        self.N = cov.n_sites
        self._memo: dict[PauliString, float] = {}

    def __call__(self, p: PauliString) -> float:
        key = p.shifted(-p.sites[0], self.N) if p.factors else p
        val = self._memo.get(key)
        if val is None:
            val = self._memo[key] = pauli_expectation(key, self.cov)
        return val


def hcb_two_point(n: int, m: int, cov, evaluate=None) -> float:
    """``<a_n^dagger a_m>``."""
    _check_sites(cov, n, m)
    evaluate = evaluate or (lambda p: pauli_expectation(p, cov))
    if n == m:
        return 0.5 * (1.0 + evaluate(PauliString(((n, "Z"),))))
    val = sum_expectation(raising_op(n) * lowering_op(m), evaluate)
    return _real(val, f"<a+_{n} a_{m}>")


def hcb_four_point(n: int, m: int, k: int, l: int, cov, evaluate=None) -> complex:
    """``<a_n^dagger a_m a_k^dagger a_l>`` from its Pauli expansion (at most 16 strings).

    The value is complex in general; the imaginary part is returned as is.
    """
    _check_sites(cov, n, m, k, l)
    evaluate = evaluate or (lambda p: pauli_expectation(p, cov))
    op = raising_op(n) * lowering_op(m) * raising_op(k) * lowering_op(l)
    return complex(sum_expectation(op, evaluate))


def correlation_function(cov) -> np.ndarray:
    """``C(r) = <a_0^dagger a_r>`` for ``r = 0..N-1`` (complex)."""
    N = cov.n_sites
    subs = np.array([[0, r] for r in range(1, N)], dtype=np.int64)
    vals = SubsetEngine(cov).expectations(subs, ["XX", "YY", "YX", "XY", "ZI"])
    C = np.empty(N, dtype=complex)
    C[1:] = 0.25 * (vals[:, 0] + vals[:, 1] + 1j * (vals[:, 2] - vals[:, 3]))
    C[0] = 0.5 * (1.0 + vals[0, 4])
    return C


def occupations(C: np.ndarray) -> np.ndarray:
    """``n(q) = sum_r e^{-2 pi i q r / N} C(r)`` for ``q = 0..N-1``."""
    nq = np.fft.fft(C)
    if np.max(np.abs(nq.imag)) > IMAG_TOL:
        raise NumericalIntegrityError(f"complex quasimomentum occupation {np.max(np.abs(nq.imag)):.3e}")
    return nq.real


@dataclass(frozen=True)
class NoiseSpectrum:
    params: ModelParams
    n_of_q: np.ndarray = field(repr=False)
    delta: dict = field(default_factory=dict)

    @property
    def delta00(self) -> float:
        return self.delta[(0, 0)]


def quasimomentum_distribution(params: ModelParams, cov=None) -> np.ndarray:
    if cov is None:
        cov = majorana_covariance(params)
    return occupations(correlation_function(cov))


# ---------------------------------------------------------------------------
# Delta(0, 0) from subset classes

_ZH3 = ["ZXX", "ZYY", "XZX", "YZY", "XXZ", "YYZ"]
_HH4 = ["XXXX", "YYYY", "XXYY", "YYXX", "XYXY", "YXYX", "XYYX", "YXXY"]
_HH4_W = np.array([3, 3, 1, 1, 1, 1, 1, 1], dtype=float)


def _class_sums(engine: SubsetEngine, N: int, size: int, patterns, weights) -> float:
    classes = [c for c in enumerate_subset_classes(N, size) if c.size == size]
    subs = np.array([c.sites for c in classes], dtype=np.int64)
    orbit = np.array([c.orbit_weight for c in classes], dtype=float)
    vals = engine.expectations(subs, patterns)
    return float(orbit @ (vals @ weights))


def delta00_moments(cov) -> dict[str, float]:
    """Moments of ``Zt`` and ``H`` entering ``Var(S^+ S^-)``."""
    N = cov.n_sites
    eng = SubsetEngine(cov)
    pair = eng.expectations([[0, r] for r in range(1, N)], ["ZZ", "XX", "YY", "ZI"])
    z1 = pair[0, 3]
    zz_sum = pair[:, 0].sum()
    h_sum = (pair[:, 1] + pair[:, 2]).sum()
    z = 0.5 * N * z1
    h = 0.25 * N * h_sum
    z2 = 0.25 * (N + N * zz_sum)
    # sum over 3-site subsets of <Z_l h_{ij}> with l the remaining site
    zh = 0.5 * _class_sums(eng, N, 3, _ZH3, np.ones(6)) if N >= 3 else 0.0
    hh_disjoint = _class_sums(eng, N, 4, _HH4, _HH4_W) if N >= 4 else 0.0
    h2 = 0.25 * (N * (N - 1) - N * zz_sum + 4 * (N - 2) * h + 2 * hh_disjoint)
    return {"Z": z, "H": h, "Z2": z2, "ZH": zh, "H2": h2}


def delta00(params: ModelParams, cov=None) -> float:
    """Variance of ``n_0``."""
    if cov is None:
        cov = majorana_covariance(params)
    N = cov.n_sites
    m = delta00_moments(cov)
    var = m["Z2"] + m["ZH"] + m["H2"] - (m["Z"] + m["H"]) ** 2
    return float(var / N**2)


def _phase(q: int, N: int) -> np.ndarray:
    return np.exp(2j * np.pi * q * np.arange(N) / N)


def noise_correlation(q1: int, q2: int, params: ModelParams, cov=None) -> float:
    """``Re<n_q1 n_q2> - <n_q1><n_q2>``.

    ``(0, 0)`` uses the class-sum route; other pairs sum the four-point
    function over all ``N^3`` index triples (site ``n`` pinned to 0), so they
    are meant for small rings.
    """
    if cov is None:
        cov = majorana_covariance(params)
    N = cov.n_sites
    q1, q2 = q1 % N, q2 % N
    if q1 == 0 and q2 == 0:
        return delta00(params, cov)
    ev = _Evaluator(cov)
    p1, p2 = _phase(q1, N), _phase(q2, N)
    total = 0j
    for m, k, l in itertools.product(range(N), repeat=3):
        # n_q = (1/N) sum e^{i theta (n - m)} a_n^dagger a_m with n = 0 pinned
        w = p1[m].conjugate() * p2[k] * p2[l].conjugate()
        total += w * hcb_four_point(0, m, k, l, cov, ev)
    second = (total * N / N**2).real
    nq = occupations(correlation_function(cov))
    return float(second - nq[q1] * nq[q2])


def noise_spectrum(params: ModelParams, pairs=((0, 0),), cov=None) -> NoiseSpectrum:
    if cov is None:
        cov = majorana_covariance(params)
    nq = quasimomentum_distribution(params, cov)
    delta = {tuple(p): noise_correlation(p[0], p[1], params, cov) for p in pairs}
    if (0, 0) not in delta:
        delta[(0, 0)] = delta00(params, cov)
    return NoiseSpectrum(params, nq, delta)


# ---------------------------------------------------------------------------
# separability witness


@dataclass(frozen=True)
class WitnessReport:
    delta00: float
    threshold: Fraction
    entangled_flag: bool


def witness_threshold(N: int) -> Fraction:
    """Largest ``Delta(0,0)`` a product state of ``N`` spins can reach."""
    return Fraction(1 + N, 8)


def separability_witness(delta00: float, N: int) -> WitnessReport:
    if N < 1:
        raise ConfigError(f"need N >= 1, got {N}")
    t = witness_threshold(N)
    return WitnessReport(float(delta00), t, bool(delta00 > t))


# ---------------------------------------------------------------------------
# product states

_SP = np.array([[0, 1], [0, 0]], dtype=complex)  # S^+ in the (up, down) basis
_SM = _SP.T.copy()


def _product_moment(amps: np.ndarray, factors) -> np.ndarray:
    """``<F_1 F_2 ... F_r>`` with ``F_i = sum_j f_i(j)`` on product states.

    ``amps`` has shape ``(n_states, N, 2)``.  Expanding the product, every
    term factorizes over sites with the factors placed on a site multiplied
    in their original order, so a transfer over the set of already placed
    factors (``2^r`` states) is exact.
    """
    r = len(factors)
    n_states, N, _ = amps.shape
    subsets = []
    for t in range(1 << r):
        op = np.eye(2, dtype=complex)
        for i in range(r):
            if t >> i & 1:
                op = op @ factors[i]
        if t == 0 or np.any(op):
            subsets.append((t, op))
    acc = np.zeros((n_states, 1 << r), dtype=complex)
    acc[:, 0] = 1.0
    for j in range(N):
        psi = amps[:, j, :]
        local = {t: np.einsum("sa,ab,sb->s", psi.conj(), op, psi) for t, op in subsets}
        new = np.zeros_like(acc)
        for mask in range(1 << r):
            col = acc[:, mask]
            if not np.any(col):
                continue
            for t, val in local.items():
                if t & mask == 0:
                    new[:, mask | t] += col * val
        acc = new
    return acc[:, -1]


def product_state_amplitudes(thetas, phis) -> np.ndarray:
    """Site spinors ``(cos(theta/2), e^{i phi} sin(theta/2))``; inputs shaped ``(n_states, N)``."""
    thetas = np.asarray(thetas, dtype=float)
    phis = np.asarray(phis, dtype=float)
    return np.stack([np.cos(thetas / 2) + 0j, np.exp(1j * phis) * np.sin(thetas / 2)], axis=-1)


def product_state_delta00(thetas, phis) -> np.ndarray:
    """Exact ``Delta(0,0)`` for a batch of product states."""
    amps = product_state_amplitudes(np.atleast_2d(thetas), np.atleast_2d(phis))
    N = amps.shape[1]
    first = _product_moment(amps, [_SP, _SM])
    second = _product_moment(amps, [_SP, _SM, _SP, _SM])
    var = second - first**2
    if np.max(np.abs(var.imag)) > IMAG_TOL * N**2:
        raise NumericalIntegrityError("complex product-state variance")
    return var.real / N**2
