"""Subset purities, generalized tangles and the spaced four-spin entropy.

Purities are translation and reflection invariant on the ring, so they are
computed once per symmetry class of site subsets and weighted by the class
size.  A subset of ``k`` sites is described by its cyclic gap sequence
``(g_1, ..., g_k)`` with ``sum g = N``.
"""

from __future__ import annotations

import itertools
import math
import threading
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import ConfigError, NumericalIntegrityError
from .model import ModelParams, majorana_covariance
from .scaling import Curve
from .subset_engine import SubsetEngine, all_patterns

K_MAX = 4
HALF_PI = math.pi / 2
GAMMA_GUARD = 1e-12
PSD_TOL = 1e-8
TRACE_TOL = 1e-10


@dataclass(frozen=True)
class SubsetClass:
    """Translation/reflection class of ``size``-site subsets of an ``N`` ring."""

    gaps: tuple[int, ...]
    size: int
    orbit_weight: int
    tuple_weight: int

    @property
    def N(self) -> int:
        return sum(self.gaps)

    @property
    def sites(self) -> tuple[int, ...]:
        """Representative subset with the widest gap wrapping around the ring."""
        g = self.gaps
        i = int(np.argmax(g))
        rot = g[i + 1 :] + g[: i + 1]
        return tuple(itertools.accumulate(rot[:-1], initial=0))

    @property
    def extent(self) -> int:
        """Span of the representative, which bounds the Jordan-Wigner string length."""
        return self.N - max(self.gaps)


def _variants(gaps: tuple[int, ...]):
    k = len(gaps)
    rev = gaps[::-1]
    for i in range(k):
        yield gaps[i:] + gaps[:i]
        yield rev[i:] + rev[:i]


def canonical_gaps(gaps) -> tuple[int, ...]:
    """Lexicographically smallest rotation or reflection of a gap sequence."""
    return min(_variants(tuple(int(g) for g in gaps)))


def gaps_of(sites, N: int) -> tuple[int, ...]:
    s = sorted(sites)
    return tuple(b - a for a, b in zip(s, s[1:] + [s[0] + N]))


def d_k(N: int, k: int) -> int:
    """Number of ordered tuples of 1..k pairwise distinct sites."""
    return sum(math.perm(N, i + 1) for i in range(k))


def _compositions(N: int, k: int):
    for cuts in itertools.combinations(range(1, N), k - 1):
        bounds = (0,) + cuts + (N,)
        yield tuple(b - a for a, b in zip(bounds, bounds[1:]))


@lru_cache(maxsize=32)
def enumerate_subset_classes(N: int, k_max: int) -> tuple[SubsetClass, ...]:
    """All subset classes of sizes ``1..k_max``, sorted by size then extent."""
    if N < 3:
        raise ConfigError(f"need N >= 3, got {N}")
    if not 1 <= k_max <= K_MAX:
        raise ConfigError(f"k_max must be in 1..{K_MAX}, got {k_max}")
    out = []
    for k in range(1, min(k_max, N) + 1):
        level = []
        for comp in _compositions(N, k):
            if canonical_gaps(comp) != comp:
                continue
            # each subset appears as k rotations of its gap sequence
            n_seq = len(set(_variants(comp)))
            orbit = N * n_seq // k
            level.append(SubsetClass(comp, k, orbit, orbit * math.factorial(k)))
        level.sort(key=lambda c: (c.extent, c.gaps))
        out.extend(level)
    return tuple(out)


class PurityTable:
    """Memoized subset purities ``Tr rho_S^2`` for one ground state.

    Purities come from the Pauli expansion ``2^{-k} sum_P <P>^2``; only
    magnitudes are needed, so the unsigned engine path is used.
    """

    def __init__(self, cov):
        self.cov = cov
        self._engine = SubsetEngine(cov)
        self._table: dict[tuple[int, ...], float] = {}
        self._lock = threading.Lock()

    def __len__(self) -> int:
        return len(self._table)

    def get(self, cls: SubsetClass) -> float:
        return self.fill([cls])[0]

    def fill(self, classes) -> np.ndarray:
        classes = list(classes)
        missing = [c for c in classes if c.gaps not in self._table]
        by_size: dict[int, list[SubsetClass]] = {}
        for c in missing:
            by_size.setdefault(c.size, []).append(c)
        for k, group in by_size.items():
            subs = np.array([c.sites for c in group], dtype=np.int64)
            vals = self._engine.expectations(subs, all_patterns(k), signed=False)
            pur = (vals**2).sum(axis=1) / 2**k
            lo = 2.0**-k
            if np.any(pur < lo - 1e-9) or np.any(pur > 1 + 1e-9):
                bad = pur[(pur < lo - 1e-9) | (pur > 1 + 1e-9)][0]
                raise NumericalIntegrityError(f"{k}-site purity {bad!r} outside [2^-k, 1]")
            with self._lock:
                for c, p in zip(group, pur):
                    # first writer wins so repeated requests stay bit-identical
                    self._table.setdefault(c.gaps, float(p))
        return np.array([self._table[c.gaps] for c in classes])


@dataclass(frozen=True)
class TangleReport:
    k: int
    value: float
    d_k: int
    params: ModelParams
    truncated: bool = False


def tangle_from_purities(N: int, k: int, classes, purities) -> tuple[float, bool]:
    """``T_k = 2 - (2/D_k) sum tuple_weight * purity`` over classes of size <= k.

    If some classes are missing (extent truncation) the weighted mean purity
    of the classes present stands in for the full sum.
    """
    D = d_k(N, k)
    w = np.array([c.tuple_weight for c in classes if c.size <= k], dtype=float)
    p = np.array([q for c, q in zip(classes, purities) if c.size <= k])
    covered = int(sum(c.tuple_weight for c in classes if c.size <= k))
    if covered == D:
        return float(2.0 - 2.0 * (w @ p) / D), False
    return float(2.0 - 2.0 * (w @ p) / w.sum()), True


def tangles(params: ModelParams, k_max: int = K_MAX, max_extent: int | None = None,
            table: PurityTable | None = None) -> list[TangleReport]:
    """``T_1 .. T_{k_max}`` sharing one purity table."""
    classes = enumerate_subset_classes(params.N, k_max)
    if max_extent is not None:
        classes = tuple(c for c in classes if c.extent <= max_extent)
    if table is None:
        table = PurityTable(majorana_covariance(params))
    pur = table.fill(classes)
    out = []
    for k in range(1, k_max + 1):
        val, trunc = tangle_from_purities(params.N, k, classes, pur)
        out.append(TangleReport(k, val, d_k(params.N, k), params, trunc))
    return out


def tangle(k: int, params: ModelParams, **kw) -> TangleReport:
    if not 1 <= k <= K_MAX:
        raise ConfigError(f"tangle order must be in 1..{K_MAX}, got {k}")
    return tangles(params, k, **kw)[-1]


# ---------------------------------------------------------------------------
# spaced four-spin entropy

_PAULI = {
    "I": np.eye(2),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]]),
    "Z": np.diag([1.0, -1.0]),
}


@dataclass(frozen=True)
class EntropyReport:
    L: int
    value: float
    params: ModelParams


def density_matrix_from_paulis(patterns, values) -> np.ndarray:
    """``rho = 2^{-k} sum_P <P> P``; the first pattern letter is the most significant qubit."""
    k = len(patterns[0])
    rho = np.zeros((2**k, 2**k), dtype=complex)
    for pat, v in zip(patterns, values):
        if v == 0:
            continue
        op = np.array([[1.0 + 0j]])
        for a in pat:
            op = np.kron(op, _PAULI[a])
        rho += v * op
    return rho / 2**k


def von_neumann_bits(rho: np.ndarray) -> float:
    """Entropy in bits after checking trace and positivity."""
    tr = np.trace(rho).real
    if abs(tr - 1.0) > TRACE_TOL:
        raise NumericalIntegrityError(f"reduced density matrix has trace {tr!r}")
    w = np.linalg.eigvalsh(0.5 * (rho + rho.conj().T))
    if w.min() < -PSD_TOL:
        raise NumericalIntegrityError(f"reduced density matrix has eigenvalue {w.min()!r}")
    w = w[w > 0]
    return float(max(0.0, -(w * np.log2(w)).sum()))


def entropy_spaced(L: int, params: ModelParams, cov=None) -> EntropyReport:
    """Entropy of sites ``{0, L, 2L, 3L}`` with the rest of the ring."""
    if L < 1 or 4 * L > params.N:
        raise ConfigError(f"spacing L={L} needs 1 <= L and 4L <= N={params.N}")
    if cov is None:
        cov = majorana_covariance(params)
    pats = all_patterns(4)
    vals = SubsetEngine(cov).expectations([[0, L, 2 * L, 3 * L]], pats)[0]
    rho = density_matrix_from_paulis(pats, vals)
    return EntropyReport(L, von_neumann_bits(rho), params)


def gamma_transform(t4_curve: Curve) -> tuple[Curve, np.ndarray]:
    """Pointwise ``1 / (T_4 - pi/2)``.

    Points within ``GAMMA_GUARD`` of ``pi/2`` are dropped; the returned mask
    flags them.
    """
    diff = t4_curve.values - HALF_PI
    dropped = np.abs(diff) < GAMMA_GUARD
    keep = ~dropped
    out = Curve(t4_curve.N, t4_curve.gamma, "gamma", t4_curve.lambdas[keep], 1.0 / diff[keep])
    return out, dropped
