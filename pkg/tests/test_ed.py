import numpy as np
import pytest

from xychain import ed
from xychain.errors import ConfigError
from xychain.model import ModelParams
from xychain.pauli import PauliString


def test_size_guard():
    with pytest.raises(ConfigError):
        ed.build_hamiltonian(ModelParams(13, 1, 1))


@pytest.mark.parametrize("g,lam", [(1.0, 0.5), (0.4, 1.3)])
def test_hamiltonian_symmetries(g, lam):
    H = ed.build_hamiltonian(ModelParams(6, g, lam))
    assert np.array_equal(H, H.T)
    P = ed.parity_diagonal(6)
    comm = H * P[None, :] - P[:, None] * H
    assert np.abs(comm).max() <= 1e-12


def test_three_site_ising_doublet():
    H = ed.build_hamiltonian(ModelParams(3, 1.0, 0.0))
    w = np.linalg.eigvalsh(H)
    assert w[1] - w[0] <= 1e-12
    assert w[2] - w[1] > 0.5


def test_ground_state_properties():
    st = ed.solve(ModelParams(8, 1.0, 10.0))
    assert abs(st.amplitudes[0]) ** 2 > 0.99  # all spins up
    H = ed.build_hamiltonian(ModelParams(8, 1.0, 10.0))
    assert st.energy <= H.diagonal().min() + 1e-12
    assert ed.expectation_ed(st, PauliString()) == pytest.approx(1.0)
    assert abs(ed.expectation_ed(st, PauliString.parse("X2"))) <= 1e-12


def test_ghz_marginals():
    st = ed.solve(ModelParams(6, 1.0, 0.0))
    assert st.parity == 1
    rho = ed.reduced_density_matrix(st, [2])
    np.testing.assert_allclose(rho, np.eye(2) / 2, atol=1e-12)
    S, pur = ed.entropy_and_purity(rho)
    assert S == pytest.approx(1.0) and pur == pytest.approx(0.5)


def test_rdm_and_entropy_basics(rng):
    st = ed.solve(ModelParams(7, 0.6, 0.8))
    full = ed.reduced_density_matrix(st, range(7))
    S, pur = ed.entropy_and_purity(full)
    assert S == pytest.approx(0.0, abs=1e-9) and pur == pytest.approx(1.0)
    for _ in range(5):
        sites = rng.choice(7, 3, replace=False)
        rho = ed.reduced_density_matrix(st, sites)
        assert np.trace(rho).real == pytest.approx(1.0, abs=1e-12)
        w = np.linalg.eigvalsh(rho)
        assert w.min() >= -1e-10
        S, pur = ed.entropy_and_purity(rho)
        assert 0 <= S <= 3 and 1 / 8 - 1e-12 <= pur <= 1 + 1e-12
    assert ed.entropy_and_purity(np.eye(2) / 2) == pytest.approx((1.0, 0.5))


def test_rdm_site_order_matches_pauli_expansion():
    st = ed.solve(ModelParams(6, 0.5, 0.7))
    rho = ed.reduced_density_matrix(st, [1, 4])
    Z = np.diag([1.0, -1.0])
    X = np.array([[0, 1], [1, 0]])
    for op, s in ((np.kron(Z, np.eye(2)), "Z1"), (np.kron(np.eye(2), Z), "Z4"), (np.kron(X, X), "X1 X4")):
        assert np.trace(rho @ op).real == pytest.approx(ed.expectation_ed(st, PauliString.parse(s)), abs=1e-12)


def test_product_state_layout():
    angles = np.array([[0.0, 0.0], [np.pi, 0.0], [np.pi / 2, 0.3]])
    st = ed.product_state(angles)
    assert ed.expectation_ed(st, PauliString.parse("Z0")) == pytest.approx(1.0)
    assert ed.expectation_ed(st, PauliString.parse("Z1")) == pytest.approx(-1.0)
    assert ed.expectation_ed(st, PauliString.parse("X2")) == pytest.approx(np.cos(0.3))
    assert ed.expectation_ed(st, PauliString.parse("Y2")) == pytest.approx(np.sin(0.3))


def test_occupation_operators():
    st = ed.product_state(np.array([[0.0, 0.0]] * 4))  # all up = all occupied
    np.testing.assert_allclose(ed.quasimomentum_ed(st), [1, 1, 1, 1], atol=1e-12)
    assert ed.noise_correlation_ed(st) == pytest.approx(0.0, abs=1e-12)
