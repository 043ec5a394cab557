"""Pauli strings, their Jordan-Wigner images, and Wick evaluation.

A Pauli string maps to ``phase * w_{i1} w_{i2} ... w_{in}`` with ascending
distinct Majorana slots (``2j`` for ``A_j``, ``2j+1`` for ``B_j``); its
ground-state expectation is ``phase * Pf(M[I, I])``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NumericalIntegrityError
from .pfaffian import pfaffian

AXES = ("X", "Y", "Z")


@dataclass(frozen=True)
class PauliString:
    """Product of single-site Paulis, canonically ordered by site."""

    factors: tuple[tuple[int, str], ...] = ()

    def __post_init__(self):
        facs = tuple((int(s), str(a).upper()) for s, a in self.factors)
        sites = [s for s, _ in facs]
        if any(a not in AXES for _, a in facs):
            raise ValueError(f"Pauli axes must be X, Y or Z: {facs}")
        if len(set(sites)) != len(sites):
            raise ValueError(f"duplicate site in Pauli string: {facs}")
        if any(s < 0 for s in sites):
            raise ValueError(f"negative site in Pauli string: {facs}")
        object.__setattr__(self, "factors", tuple(sorted(facs)))

    @classmethod
    def from_dict(cls, ops: dict[int, str]) -> "PauliString":
        return cls(tuple((s, a) for s, a in ops.items() if a != "I"))

    @classmethod
    def parse(cls, text: str) -> "PauliString":
        """Parse ``"X0 Z3 Y5"``; the empty string is the identity."""
        facs = []
        for tok in text.split():
            facs.append((int(tok[1:]), tok[0]))
        return cls(tuple(facs))

    @property
    def sites(self) -> tuple[int, ...]:
        return tuple(s for s, _ in self.factors)

    def shifted(self, shift: int, N: int) -> "PauliString":
        return PauliString(tuple(((s + shift) % N, a) for s, a in self.factors))

    def __str__(self) -> str:
        return " ".join(f"{a}{s}" for s, a in self.factors) or "I"


@dataclass(frozen=True)
class MajoranaMonomial:
    phase: complex
    indices: tuple[int, ...]


def canonicalize(slots, phase: complex = 1.0) -> MajoranaMonomial:
    """Sort a product of Majoranas and cancel repeated ones.

    Distinct Majoranas anticommute; ``A^2 = 1`` (even slot) and
    ``B^2 = -1`` (odd slot).
    """
    x = np.asarray(slots, dtype=np.int64)
    if x.size:
        # inversions = swaps of distinct anticommuting operators
        inv = int(np.count_nonzero(np.triu(x[:, None] > x[None, :], 1)))
        if inv % 2:
            phase = -phase
    vals, counts = np.unique(x, return_counts=True)
    pairs = counts // 2
    # each cancelled B pair contributes -1
    n_b_pairs = int(pairs[vals % 2 == 1].sum())
    if n_b_pairs % 2:
        phase = -phase
    keep = tuple(int(v) for v in vals[counts % 2 == 1])
    return MajoranaMonomial(complex(phase), keep)


def jordan_wigner_monomial(p: PauliString, N: int) -> MajoranaMonomial:
    """Majorana image of a Pauli string on an ``N``-site chain.

    ``X_j = (prod_{l<j} A_l B_l) A_j``, ``Y_j = i (prod_{l<j} A_l B_l) B_j``,
    ``Z_j = A_j B_j``.
    """
    slots: list[int] = []
    phase: complex = 1.0
    for site, axis in p.factors:
        if site >= N:
            raise ValueError(f"site {site} out of range for N={N}")
        if axis == "Z":
            slots += [2 * site, 2 * site + 1]
            continue
        slots.extend(range(2 * site))
        if axis == "X":
            slots.append(2 * site)
        else:
            slots.append(2 * site + 1)
            phase *= 1j
    return canonicalize(slots, phase)


def _realify(value: complex, what: str, tol: float = 1e-10) -> float:
    if abs(value.imag) > tol:
        raise NumericalIntegrityError(f"{what}: imaginary residue {value.imag:.3e}")
    return float(value.real)


def clamp_unit(value: float, what: str, tol: float = 1e-9) -> float:
    if abs(value) > 1.0:
        if abs(value) - 1.0 > tol:
            raise NumericalIntegrityError(f"{what}: |value| = {abs(value)!r} exceeds 1")
        return float(np.sign(value))
    return value


def monomial_expectation(mono: MajoranaMonomial, cov) -> complex:
    """``<mono>`` by Wick's theorem; zero for odd length."""
    n = len(mono.indices)
    if n % 2:
        return 0.0
    idx = np.asarray(mono.indices, dtype=np.int64)
    # A-A and B-B contractions vanish, so unbalanced monomials are zero
    if np.count_nonzero(idx % 2) * 2 != n:
        return 0.0
    sub = cov.matrix[np.ix_(idx, idx)]
    return mono.phase * pfaffian(sub)


def pauli_expectation(p: PauliString, cov) -> float:
    """Ground-state expectation of a Pauli string via its Pfaffian."""
    mono = jordan_wigner_monomial(p, cov.n_sites)
    val = monomial_expectation(mono, cov)
    return clamp_unit(_realify(complex(val), str(p)), str(p))


def pauli_expectations(strings, cov) -> np.ndarray:
    """Batch form of :func:`pauli_expectation` against one shared covariance."""
    return np.array([pauli_expectation(p, cov) for p in strings])


# ---------------------------------------------------------------------------
# symbolic sums of Pauli strings

# single-site products: (a, b) -> (phase, c) with sigma_a sigma_b = phase sigma_c
_SITE_PRODUCT = {
    ("I", "I"): (1, "I"), ("I", "X"): (1, "X"), ("I", "Y"): (1, "Y"), ("I", "Z"): (1, "Z"),
    ("X", "I"): (1, "X"), ("Y", "I"): (1, "Y"), ("Z", "I"): (1, "Z"),
    ("X", "X"): (1, "I"), ("Y", "Y"): (1, "I"), ("Z", "Z"): (1, "I"),
    ("X", "Y"): (1j, "Z"), ("Y", "X"): (-1j, "Z"),
    ("Y", "Z"): (1j, "X"), ("Z", "Y"): (-1j, "X"),
    ("Z", "X"): (1j, "Y"), ("X", "Z"): (-1j, "Y"),
}  # fmt: skip


class PauliSum(dict):
    """Linear combination ``{PauliString: complex coefficient}``."""

    @classmethod
    def single(cls, site: int, combo: dict[str, complex]) -> "PauliSum":
        out = cls()
        for axis, c in combo.items():
            key = PauliString() if axis == "I" else PauliString(((site, axis),))
            out[key] = out.get(key, 0) + c
        return out

    def __mul__(self, other: "PauliSum") -> "PauliSum":
        out = PauliSum()
        for p, cp in self.items():
            for q, cq in other.items():
                phase, r = multiply_strings(p, q)
                out[r] = out.get(r, 0) + cp * cq * phase
        return PauliSum({k: v for k, v in out.items() if v != 0})


def multiply_strings(p: PauliString, q: PauliString) -> tuple[complex, PauliString]:
    ops = dict(p.factors)
    phase: complex = 1
    for site, b in q.factors:
        a = ops.get(site, "I")
        ph, c = _SITE_PRODUCT[(a, b)]
        phase *= ph
        ops[site] = c
    return phase, PauliString.from_dict(ops)


def raising_op(site: int) -> PauliSum:
    """``S^+ = (X + iY)/2``, the hard-core boson creation operator."""
    return PauliSum.single(site, {"X": 0.5, "Y": 0.5j})


def lowering_op(site: int) -> PauliSum:
    """``S^- = (X - iY)/2``."""
    return PauliSum.single(site, {"X": 0.5, "Y": -0.5j})


def sum_expectation(op: PauliSum, evaluate) -> complex:
    """``sum_P c_P <P>`` with ``evaluate(P)`` supplying ``<P>``."""
    total: complex = 0
    for p, c in op.items():
        total += c * (1.0 if not p.factors else evaluate(p))
    return total
