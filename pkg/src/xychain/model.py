r"""Free-fermion solution of the periodic anisotropic XY chain.

The Hamiltonian (energies in units of :math:`J`) is

.. math::

    H = -\frac12 \sum_{j} \left[(1+\gamma)\,\sigma^x_j\sigma^x_{j+1}
        + (1-\gamma)\,\sigma^y_j\sigma^y_{j+1}\right] - \lambda \sum_j \sigma^z_j

on a ring of ``N`` sites.  The Jordan-Wigner map used throughout is

* ``A_j = (prod_{l<j} Z_l) X_j``          (slot ``2j``)
* ``B_j = -i (prod_{l<j} Z_l) Y_j``       (slot ``2j+1``)

so that ``Z_j = A_j B_j``, ``X_j X_{j+1} = B_j A_{j+1}`` and
``Y_j Y_{j+1} = -A_j B_{j+1}``.  ``A`` is Hermitian, ``B`` anti-Hermitian,
``A^2 = 1`` and ``B^2 = -1``.  The boundary bond closes with
``A_N = -P A_0`` where ``P = prod_j Z_j`` is the spin parity: the even sector
(``P = +1``) has antiperiodic fermions, the odd sector periodic ones.

The ground state in either sector is Gaussian; the only nonvanishing
connected contraction is ``<B_i A_j> = G(j - i)``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import ConfigError, DegenerateModeError

LAMBDA_C = 1.0
"""Critical reduced field of the Ising universality class."""

# absolute energy window inside which the two parity sectors count as degenerate
DEGENERACY_TOL = 1e-10


@dataclass(frozen=True)
class ModelParams:
    """A physical configuration of the chain.

    Attributes
    ----------
    N : int
        Number of spins on the ring (``N >= 3``).
    gamma : float
        Anisotropy in ``[0, 1]``.
    lam : float
        Reduced field ``h / J >= 0``.
    """

    N: int
    gamma: float
    lam: float

    def __post_init__(self):
        if isinstance(self.N, bool) or int(self.N) != self.N:
            raise ConfigError(f"N must be an integer, got {self.N!r}")
        object.__setattr__(self, "N", int(self.N))
        object.__setattr__(self, "gamma", float(self.gamma))
        object.__setattr__(self, "lam", float(self.lam))
        if self.N < 3:
            raise ConfigError(f"N must be at least 3 on a periodic ring, got {self.N}")
        if not math.isfinite(self.gamma) or not 0.0 <= self.gamma <= 1.0:
            raise ConfigError(f"gamma must lie in [0, 1], got {self.gamma}")
        if not math.isfinite(self.lam) or self.lam < 0.0:
            raise ConfigError(f"lambda must be finite and >= 0, got {self.lam}")

    def with_lambda(self, lam: float) -> "ModelParams":
        return ModelParams(self.N, self.gamma, lam)


class Sector(enum.Enum):
    """Fermionic boundary condition after Jordan-Wigner."""

    ANTIPERIODIC = "antiperiodic"  # even spin parity
    PERIODIC = "periodic"  # odd spin parity

    @property
    def parity(self) -> int:
        return 1 if self is Sector.ANTIPERIODIC else -1


def momentum_grid(params: ModelParams, sector: Sector) -> np.ndarray:
    """Allowed momenta of ``sector``, sorted ascending in ``(-pi, pi]``."""
    N = params.N
    m = np.arange(N)
    if sector is Sector.ANTIPERIODIC:
        k = (2 * m + 1) * np.pi / N
    else:
        k = 2 * m * np.pi / N
    # fold into (-pi, pi]
    k = np.where(k > np.pi * (1 + 1e-15), k - 2 * np.pi, k)
    return np.sort(k)


def dispersion(k, params: ModelParams):
    r"""Bogoliubov dispersion :math:`\varepsilon(k)=\sqrt{(\lambda-\cos k)^2+\gamma^2\sin^2 k}`.

    A single quasiparticle costs ``2 * dispersion(k)``.
    """
    k = np.asarray(k, dtype=float)
    return np.hypot(params.lam - np.cos(k), params.gamma * np.sin(k))


def _unpaired(k: np.ndarray) -> np.ndarray:
    # k = 0 and k = pi have no partner -k on the grid
    return np.isclose(np.sin(k), 0.0, atol=1e-12)


@dataclass(frozen=True)
class FermionSector:
    """Ground state of one parity sector.

    ``mode_sign`` is +1 for every mode sitting in its lower-energy state and
    -1 for a mode flipped to satisfy the sector's parity constraint.
    """

    tag: Sector
    momenta: np.ndarray = field(repr=False)
    ground_energy: float
    mode_sign: np.ndarray = field(repr=False)


def _solve_sector(params: ModelParams, sector: Sector) -> FermionSector:
    k = momentum_grid(params, sector)
    eps = dispersion(k, params)
    energy = -float(np.sum(eps))
    sign = np.ones_like(k)

    lone = _unpaired(k)
    # an unpaired mode is occupied in its low state when cos k > lambda
    occupied = lone & (np.cos(k) - params.lam > 0)
    parity = (-1) ** int(np.count_nonzero(occupied))
    if parity != sector.parity:
        # flip the cheapest unpaired mode; for the periodic sector at
        # lambda >= 1 this is k = 0, which is also the global minimum of eps
        idx = np.flatnonzero(lone)
        flip = idx[np.argmin(eps[idx])]
        sign[flip] = -1.0
        energy += 2.0 * float(eps[flip])
    return FermionSector(sector, k, energy, sign)


def sector_energy(params: ModelParams, sector: Sector) -> float:
    """Lowest energy among states of the correct parity for ``sector``."""
    return _solve_sector(params, sector).ground_energy


def select_ground_sector(params: ModelParams) -> FermionSector:
    """The sector holding the ground state; ties go to the antiperiodic sector."""
    ap = _solve_sector(params, Sector.ANTIPERIODIC)
    p = _solve_sector(params, Sector.PERIODIC)
    if p.ground_energy < ap.ground_energy - DEGENERACY_TOL:
        return p
    return ap


def contraction_function(
    params: ModelParams, sector: FermionSector | None = None, r=None
) -> np.ndarray:
    """``G(r) = <B_0 A_r>`` in the selected ground sector.

    ``r`` defaults to ``0 .. N-1``.  In the antiperiodic sector
    ``G(r + N) = -G(r)``; in the periodic sector ``G`` is N-periodic.

    Raises
    ------
    DegenerateModeError
        If a mode on the sector's grid has exactly zero energy.
    """
    if sector is None:
        sector = select_ground_sector(params)
    k = sector.momenta
    eps = dispersion(k, params)
    if np.any(eps == 0.0):
        raise DegenerateModeError(
            f"zero-energy mode on the {sector.tag.value} grid at N={params.N}, "
            f"gamma={params.gamma}, lambda={params.lam}; perturb lambda"
        )
    if r is None:
        r = np.arange(params.N)
    r = np.asarray(r)
    kr = r[..., None] * k
    terms = (np.cos(kr) * (np.cos(k) - params.lam) + params.gamma * np.sin(kr) * np.sin(k)) / eps
    return (terms * sector.mode_sign).sum(axis=-1) / params.N


@dataclass(frozen=True)
class MajoranaCovariance:
    """Ground-state contractions of the ordered Majorana operators.

    ``matrix[p, q]`` holds ``<w_p w_q>`` for ``p < q`` and is antisymmetric,
    with ``w_{2j} = A_j`` and ``w_{2j+1} = B_j``.  Only A-B entries are
    nonzero: ``matrix[2i+1, 2j] = G(j - i)``.
    """

    params: ModelParams
    sector: FermionSector
    G_signed: np.ndarray = field(repr=False)  # G(r) for r = -(N-1) .. N-1

    @property
    def n_sites(self) -> int:
        return self.params.N

    def G(self, r):
        """Contraction ``<B_i A_{i+r}>`` for ``|r| < N``."""
        return self.G_signed[np.asarray(r) + self.params.N - 1]

    @cached_property
    def ab_block(self) -> np.ndarray:
        """``K[i, j] = <A_i B_j> = -G(i - j)``, the (A rows, B cols) block."""
        N = self.params.N
        K = -self.G(np.arange(N)[:, None] - np.arange(N)[None, :])
        K.setflags(write=False)
        return K

    @cached_property
    def matrix(self) -> np.ndarray:
        N = self.params.N
        M = np.zeros((2 * N, 2 * N))
        K = self.ab_block
        M[0::2, 1::2] = K
        M[1::2, 0::2] = -K.T
        M.setflags(write=False)
        return M


def majorana_covariance(params: ModelParams) -> MajoranaCovariance:
    """Build the ground-state covariance of ``params``."""
    sector = select_ground_sector(params)
    G = contraction_function(params, sector, np.arange(-params.N + 1, params.N))
    G.setflags(write=False)
    return MajoranaCovariance(params, sector, G)
