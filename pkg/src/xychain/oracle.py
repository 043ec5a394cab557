"""Free-fermion pipeline versus exact diagonalization on small rings."""

from __future__ import annotations

import multiprocessing
from dataclasses import dataclass

import numpy as np

from . import ed
from .entanglement import entropy_spaced, tangles, PurityTable
from .model import ModelParams, majorana_covariance
from .noise import delta00, quasimomentum_distribution

DEFAULT_SIZES = (6, 8, 10, 12)
DEFAULT_GAMMAS = (0.5, 1.0)
DEFAULT_LAMBDAS = (0.25, 0.5, 1.0, 1.5, 2.0)
TOL = 1e-8


@dataclass(frozen=True)
class Comparison:
    quantity: str
    N: int
    gamma: float
    lam: float
    fermion: float
    exact: float

    @property
    def error(self) -> float:
        return abs(self.fermion - self.exact)


def compare_point(params: ModelParams) -> list[Comparison]:
    """Every observable at one parameter point, both ways."""
    N, g, lam = params.N, params.gamma, params.lam
    st = ed.solve(params)
    cov = majorana_covariance(params)
    out = []

    def add(name, a, b):
        out.append(Comparison(name, N, g, lam, float(a), float(b)))

    pur = ed.purities_by_subset(st, 4)
    for rep in tangles(params, 4, table=PurityTable(cov)):
        add(f"T{rep.k}", rep.value, ed.tangle_ed(st, rep.k, pur))
    for L in range(1, N // 4 + 1):
        rho = ed.reduced_density_matrix(st, [0, L, 2 * L, 3 * L])
        add(f"S4(L={L})", entropy_spaced(L, params, cov).value, ed.entropy_and_purity(rho)[0])
    nq = quasimomentum_distribution(params, cov)
    for q, (a, b) in enumerate(zip(nq, ed.quasimomentum_ed(st))):
        add(f"n(q={q})", a, b)
    add("delta00", delta00(params, cov), ed.noise_correlation_ed(st))
    return out


def run_suite(sizes=DEFAULT_SIZES, gammas=DEFAULT_GAMMAS, lambdas=DEFAULT_LAMBDAS,
              workers: int = 1) -> list[Comparison]:
    points = [ModelParams(N, g, lam) for N in sizes for g in gammas for lam in lambdas]
    if workers > 1 and len(points) > 1:
        with multiprocessing.get_context("fork").Pool(min(workers, len(points))) as pool:
            per_point = pool.map(compare_point, points, chunksize=1)
    else:
        per_point = [compare_point(p) for p in points]
    return [c for comps in per_point for c in comps]


def worst(comparisons) -> Comparison:
    return max(comparisons, key=lambda c: c.error)


def summarize(comparisons, tol: float = TOL) -> tuple[bool, str]:
    comparisons = list(comparisons)
    w = worst(comparisons)
    bad = [c for c in comparisons if not np.isfinite(c.error) or c.error > tol]
    lines = [
        f"{len(comparisons)} comparisons, worst |diff| = {w.error:.3e} "
        f"({w.quantity} at N={w.N}, gamma={w.gamma}, lambda={w.lam})"
    ]
    for c in bad[:20]:
        lines.append(f"MISMATCH {c.quantity} N={c.N} gamma={c.gamma} lambda={c.lam}: {c.fermion!r} vs {c.exact!r}")
    return not bad, "\n".join(lines)
