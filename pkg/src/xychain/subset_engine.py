"""Batched Pauli expectations on small site subsets.

For sites ``s_1 < ... < s_k`` a Pauli pattern maps to a Majorana monomial
made of (a) up to two slots on each of the ``k`` sites and (b) complete
``A_l B_l`` pairs on the interior of some of the gaps between consecutive
sites (the Jordan-Wigner strings).  Full pairs commute with everything, so

    Pf(M[I, I]) = Pf(M[G + o', G + o'])

with the gap slots ``G`` moved to the front.  The gap block is eliminated by
a Schur complement after an SVD of its A-B block ``K_G = U S V^T``:

    Pf = det(U) det(V) prod(big s) Pf(R[small + o'])

The few smallest singular values are kept explicitly in ``R`` so strings whose
expectation is exponentially small (ordered phase) stay well conditioned.
One SVD per (subset, gap mask) serves every pattern sharing that mask.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.linalg

from .errors import NumericalIntegrityError
from .pauli import PauliString, jordan_wigner_monomial, monomial_expectation, canonicalize
from .pfaffian import pfaffian_batch

DET_TOL = 1e-6  # below this |det K_G| the plain Schur complement is avoided
SMALL_SV = 1e-3  # singular values kept out of the elimination on the SVD path
KEEP_MAX = 8
_CHUNK_FLOATS = 4_000_000

LABELS = "IXYZ"


@dataclass(frozen=True)
class PatternInfo:
    pattern: str
    phase: complex
    mask: int  # bit j-1 set when the gap between s_j and s_{j+1} is covered
    onsite: tuple[int, ...]  # positions in o = (A_s1, B_s1, A_s2, B_s2, ...)
    nonzero: bool


def all_patterns(k: int) -> tuple[str, ...]:
    return tuple("".join(p) for p in itertools.product(LABELS, repeat=k))


@lru_cache(maxsize=None)
def pattern_info(pattern: str) -> PatternInfo:
    """Jordan-Wigner structure of a pattern, independent of the gap lengths.

    Evaluated on a compressed chain where each gap is one site: gap ``j`` sits
    at position ``2j`` and subset site ``j`` (0-based) at ``2j+1``.
    """
    k = len(pattern)
    ops = {2 * j + 1: a for j, a in enumerate(pattern) if a != "I"}
    mono = jordan_wigner_monomial(PauliString.from_dict(ops), 2 * k)
    onsite, gaps = [], set()
    for slot in mono.indices:
        pos = slot // 2
        if pos % 2:
            onsite.append(2 * (pos // 2) + slot % 2)
        else:
            gaps.add(pos // 2)
    n = len(mono.indices)
    n_b = sum(1 for s in mono.indices if s % 2)
    nonzero = n % 2 == 0 and 2 * n_b == n and 0 not in gaps
    mask = sum(1 << (g - 1) for g in gaps if g > 0)
    # gap reps always appear as whole A,B pairs
    return PatternInfo(pattern, mono.phase, mask, tuple(onsite), nonzero)


def _gap_sites(subset: np.ndarray, mask: int) -> np.ndarray:
    parts = []
    for j in range(len(subset) - 1):
        if mask >> j & 1:
            parts.append(np.arange(subset[j] + 1, subset[j + 1]))
    return np.concatenate(parts) if parts else np.zeros(0, dtype=np.int64)


def _gap_site_array(subs: np.ndarray, mask: int, ell: int) -> np.ndarray:
    """Interior sites of the covered gaps, one row per subset (all rows share ``ell``)."""
    n, k = subs.shape
    covered = [j for j in range(k - 1) if mask >> j & 1]
    if ell == 0 or not covered:
        return np.zeros((n, 0), dtype=np.int64)
    starts = np.stack([subs[:, j] + 1 for j in covered], axis=1)
    lens = np.stack([subs[:, j + 1] - subs[:, j] - 1 for j in covered], axis=1)
    cum = np.cumsum(lens, axis=1)
    prev = cum - lens
    pos = np.arange(ell)
    seg = (pos[None, :, None] >= cum[:, None, :]).sum(axis=2)
    rows = np.arange(n)[:, None]
    return starts[rows, seg] + pos[None, :] - prev[rows, seg]


def _svd_batch(a: np.ndarray, compute_uv: bool = True):
    """Batched SVD; matrices on which divide-and-conquer fails are redone with QR iteration."""
    try:
        return np.linalg.svd(a, compute_uv=compute_uv)
    except np.linalg.LinAlgError:
        pass
    parts = [scipy.linalg.svd(m, compute_uv=compute_uv, lapack_driver="gesvd") for m in a]
    if not compute_uv:
        return np.stack(parts)
    return tuple(np.stack(x) for x in zip(*parts))


class SubsetEngine:
    """Evaluate Pauli patterns on many ``k``-site subsets of one ground state."""

    def __init__(self, cov):
        self.cov = cov
        self.K = np.ascontiguousarray(cov.ab_block)
        self.n_fallback = 0  # (subset, mask) items evaluated by plain Pfaffians

    def _onsite_blocks(self, subs: np.ndarray, gs: np.ndarray):
        """Coupling of gap slots and on-site slots, plus the on-site block D."""
        K = self.K
        n, k = subs.shape
        ell = gs.shape[1]
        # X_A[g, o]: <A_g w_o>, nonzero for o = B_s;  X_B[g, o]: <B_g w_o>, nonzero for o = A_s
        XA = np.zeros((n, ell, 2 * k))
        XB = np.zeros((n, ell, 2 * k))
        if ell:
            XA[:, :, 1::2] = K[gs[:, :, None], subs[:, None, :]]
            XB[:, :, 0::2] = -np.swapaxes(K[subs[:, :, None], gs[:, None, :]], 1, 2)
        D = np.zeros((n, 2 * k, 2 * k))
        kab = K[subs[:, :, None], subs[:, None, :]]  # <A_si B_sj>
        D[:, 0::2, 1::2] = kab
        D[:, 1::2, 0::2] = -np.swapaxes(kab, 1, 2)
        return XA, XB, D

    def _reduced_lu(self, Kg, XA, XB, D, signed, sign, logdet):
        """Plain Schur complement: ``Pf = det(K_G) Pf(D + W - W^T)``, ``W = X_B^T K_G^{-1} X_A``."""
        Z = np.linalg.solve(Kg, XA)
        W = np.swapaxes(XB, 1, 2) @ Z
        pref = np.exp(logdet)
        if signed:
            pref = pref * sign
        return D + W - np.swapaxes(W, 1, 2), pref

    def _reduced_svd(self, usv, XA, XB, D, signed, keep):
        """Schur complement over all but the ``keep`` smallest singular directions."""
        U, s, Vh = usv
        n, ell, _ = U.shape
        k2 = D.shape[1]
        nb = ell - keep
        ya = np.swapaxes(U, 1, 2) @ XA
        yb = Vh @ XB
        upd = np.swapaxes(yb[:, :nb] / s[:, :nb, None], 1, 2) @ ya[:, :nb]
        m = 2 * keep + k2
        R = np.zeros((n, m, m))
        for i in range(keep):
            si = s[:, nb + i]
            R[:, 2 * i, 2 * i + 1] = si
            R[:, 2 * i + 1, 2 * i] = -si
            R[:, 2 * i, 2 * keep :] = ya[:, nb + i]
            R[:, 2 * i + 1, 2 * keep :] = yb[:, nb + i]
            R[:, 2 * keep :, 2 * i] = -ya[:, nb + i]
            R[:, 2 * keep :, 2 * i + 1] = -yb[:, nb + i]
        R[:, 2 * keep :, 2 * keep :] = D + upd - np.swapaxes(upd, 1, 2)
        pref = np.prod(s[:, :nb], axis=1)
        if signed:
            pref = pref * np.linalg.det(U) * np.linalg.det(Vh)
        return R, pref

    def _direct(self, sub: np.ndarray, infos) -> np.ndarray:
        out = np.zeros(len(infos))
        for j, info in enumerate(infos):
            gs = _gap_sites(sub, info.mask)
            gslots = np.stack([2 * gs, 2 * gs + 1], axis=1).ravel()
            oslots = np.array([2 * sub[p // 2] + p % 2 for p in info.onsite], dtype=np.int64)
            idx = np.sort(np.concatenate([gslots, oslots]))
            # the ascending monomial on the real chain has the same phase
            mono_val = monomial_expectation(canonicalize(idx, info.phase), self.cov)
            out[j] = np.real(mono_val) if np.isrealobj(mono_val) else complex(mono_val).real
        return out

    def expectations(self, subsets, patterns, signed: bool = True) -> np.ndarray:
        """Expectations ``<P>`` for every subset (rows) and pattern (columns).

        ``subsets`` is an integer array ``(n, k)`` of strictly increasing sites;
        ``patterns`` are strings over ``IXYZ`` of length ``k``.  With
        ``signed=False`` only ``|<P>|`` is guaranteed (cheaper).
        """
        subs = np.atleast_2d(np.asarray(subsets, dtype=np.int64))
        n, k = subs.shape
        if k and np.any(np.diff(subs, axis=1) <= 0):
            raise ValueError("subset sites must be strictly increasing")
        infos = [pattern_info(p) for p in patterns]
        out = np.zeros((n, len(infos)))
        if n == 0:
            return out
        by_mask: dict[int, list[int]] = {}
        for j, info in enumerate(infos):
            if info.nonzero:
                by_mask.setdefault(info.mask, []).append(j)
        for mask, cols in by_mask.items():
            lengths = np.zeros(n, dtype=np.int64)
            for j in range(k - 1):
                if mask >> j & 1:
                    lengths += subs[:, j + 1] - subs[:, j] - 1
            for ell in np.unique(lengths):
                rows = np.flatnonzero(lengths == ell)
                chunk = max(1, _CHUNK_FLOATS // max(1, int(ell) ** 2 + 1))
                for start in range(0, rows.size, chunk):
                    r = rows[start : start + chunk]
                    self._fill(out, r, subs[r], mask, int(ell), cols, infos, signed)
        return out

    def _fill(self, out, rows, subs, mask, ell, cols, infos, signed):
        gs = _gap_site_array(subs, mask, ell)
        XA, XB, D = self._onsite_blocks(subs, gs)
        if ell == 0:
            self._emit(out, rows, D, np.ones(len(rows)), 0, cols, infos, signed)
            return
        Kg = self.K[gs[:, :, None], gs[:, None, :]]
        # singular values of K_G are <= 1, so |det| bounds the smallest one
        sign, logdet = np.linalg.slogdet(Kg)
        good = logdet >= np.log(DET_TOL)
        if good.any():
            g = np.flatnonzero(good)
            R, pref = self._reduced_lu(Kg[g], XA[g], XB[g], D[g], signed, sign[g], logdet[g])
            self._emit(out, rows[g], R, pref, 0, cols, infos, signed)
        bad = np.flatnonzero(~good)
        if bad.size == 0:
            return
        U, s, Vh = _svd_batch(Kg[bad])
        keep = np.maximum(1, np.count_nonzero(s < SMALL_SV, axis=1))
        keep = np.minimum(keep, ell)
        for kk in np.unique(keep):
            sel = np.flatnonzero(keep == kk)
            if kk > KEEP_MAX:
                for b in bad[sel]:
                    self.n_fallback += 1
                    vals = self._direct(subs[b], [infos[j] for j in cols])
                    out[rows[b], cols] = vals if signed else np.abs(vals)
                continue
            b = bad[sel]
            R, pref = self._reduced_svd((U[sel], s[sel], Vh[sel]), XA[b], XB[b], D[b], signed, int(kk))
            self._emit(out, rows[b], R, pref, int(kk), cols, infos, signed)

    def _emit(self, out, rows, R, pref, keep, cols, infos, signed):
        small = list(range(2 * keep))
        by_size: dict[int, list[int]] = {}
        for j in cols:
            by_size.setdefault(len(infos[j].onsite), []).append(j)
        for js in by_size.values():
            idx = np.array([small + [2 * keep + p for p in infos[j].onsite] for j in js], dtype=np.int64)
            sub = R[:, idx[:, :, None], idx[:, None, :]]  # (n, npat, d, d)
            pf = pfaffian_batch(sub)
            phases = np.array([infos[j].phase for j in js])
            vals = pf * pref[:, None] * phases[None, :]
            if signed and np.any(np.abs(vals.imag) > 1e-9):
                raise NumericalIntegrityError("imaginary Pauli expectation in subset engine")
            out[np.ix_(rows, js)] = vals.real if signed else np.abs(vals)
