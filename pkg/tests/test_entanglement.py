import itertools
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from xychain import ed
from xychain.entanglement import (
    HALF_PI,
    PurityTable,
    canonical_gaps,
    d_k,
    density_matrix_from_paulis,
    entropy_spaced,
    enumerate_subset_classes,
    gamma_transform,
    gaps_of,
    tangle,
    tangles,
    von_neumann_bits,
)
from xychain.errors import ConfigError, NumericalIntegrityError
from xychain.model import ModelParams, majorana_covariance
from xychain.scaling import Curve, find_peak


def test_single_site_class():
    (c,) = enumerate_subset_classes(6, 1)
    assert c.gaps == (6,) and c.orbit_weight == 6 and c.tuple_weight == 6


def test_pair_weights_total():
    assert sum(c.tuple_weight for c in enumerate_subset_classes(6, 2)) == 36 == d_k(6, 2)


@pytest.mark.parametrize("N", [5, 8, 9])
def test_classes_match_brute_force_orbits(N):
    classes = enumerate_subset_classes(N, 4)
    for k in range(1, 5):
        counts = {}
        for sub in itertools.combinations(range(N), k):
            g = canonical_gaps(gaps_of(sub, N))
            counts[g] = counts.get(g, 0) + 1
        mine = {c.gaps: c.orbit_weight for c in classes if c.size == k}
        assert mine == counts


@given(st.integers(3, 40), st.integers(1, 4))
def test_tuple_weights_sum_to_dk(N, k):
    classes = enumerate_subset_classes(N, k)
    assert sum(c.tuple_weight for c in classes) == d_k(N, k)
    assert d_k(N, k) == sum(math.prod(N - j for j in range(i + 1)) for i in range(k))


@given(st.lists(st.integers(1, 9), min_size=1, max_size=4))
def test_canonical_form_idempotent(gaps):
    c = canonical_gaps(gaps)
    assert canonical_gaps(c) == c
    assert canonical_gaps(tuple(reversed(gaps))) == c
    assert sum(c) == sum(gaps)


def test_representative_puts_widest_gap_outside():
    c = [c for c in enumerate_subset_classes(20, 3) if c.gaps == (1, 2, 17)][0]
    assert c.sites == (0, 1, 3) and c.extent == 3
    assert canonical_gaps(gaps_of(c.sites, 20)) == c.gaps


def test_invalid_requests():
    with pytest.raises(ConfigError):
        enumerate_subset_classes(2, 2)
    with pytest.raises(ConfigError):
        enumerate_subset_classes(10, 5)
    with pytest.raises(ConfigError):
        tangle(5, ModelParams(8, 1, 1))
    with pytest.raises(ConfigError):
        entropy_spaced(3, ModelParams(11, 1, 1))


def test_purity_limits():
    pol = PurityTable(majorana_covariance(ModelParams(10, 1.0, 1e6)))
    ghz = PurityTable(majorana_covariance(ModelParams(10, 1.0, 0.0)))
    classes = enumerate_subset_classes(10, 4)
    np.testing.assert_allclose(pol.fill(classes), 1.0, atol=1e-9)
    np.testing.assert_allclose(ghz.fill(classes), 0.5, atol=1e-12)


def test_purity_matches_ed_on_named_subset(ed_cache):
    p = ModelParams(8, 1.0, 0.5)
    table = PurityTable(majorana_covariance(p))
    g = canonical_gaps(gaps_of((0, 2, 3, 6), 8))
    cls = [c for c in enumerate_subset_classes(8, 4) if c.gaps == g][0]
    _, ref = ed.entropy_and_purity(ed.reduced_density_matrix(ed_cache(8, 1.0, 0.5), [0, 2, 3, 6]))
    assert table.get(cls) == pytest.approx(ref, abs=1e-8)


def test_memoization_is_bit_stable():
    table = PurityTable(majorana_covariance(ModelParams(16, 0.5, 0.9)))
    classes = enumerate_subset_classes(16, 3)
    first = table.fill(classes)
    n = len(table)
    again = table.fill(classes)
    assert len(table) == n
    assert np.array_equal(first, again)
    fresh = PurityTable(majorana_covariance(ModelParams(16, 0.5, 0.9))).fill(classes)
    assert np.array_equal(first, fresh)


@pytest.mark.parametrize("g", [0.5, 1.0])
@pytest.mark.parametrize("lam", [0.25, 0.75, 1.0, 1.5])
def test_tangles_match_ed(g, lam, ed_cache):
    st_ = ed_cache(8, g, lam)
    pur = ed.purities_by_subset(st_, 4)
    reps = tangles(ModelParams(8, g, lam))
    for r in reps:
        assert r.d_k == d_k(8, r.k)
        assert 0 <= r.value <= 2
        assert r.value == pytest.approx(ed.tangle_ed(st_, r.k, pur), abs=1e-8)


def test_tangle_limits():
    for r in tangles(ModelParams(12, 1.0, 0.0)):
        assert r.value == pytest.approx(1.0, abs=1e-12)
    for r in tangles(ModelParams(12, 1.0, 1e6)):
        assert r.value == pytest.approx(0.0, abs=1e-8)


def test_product_states_have_zero_tangle(rng):
    N = 6
    for _ in range(100):
        angles = np.stack([np.arccos(rng.uniform(-1, 1, N)), rng.uniform(0, 2 * np.pi, N)], axis=1)
        st_ = ed.product_state(angles)
        pur = ed.purities_by_subset(st_, 4)
        for k in range(1, 5):
            assert abs(ed.tangle_ed(st_, k, pur)) <= 1e-10


def test_truncation_is_flagged():
    full = tangles(ModelParams(20, 1.0, 0.9))
    cut = tangles(ModelParams(20, 1.0, 0.9), max_extent=6)
    assert not any(r.truncated for r in full)
    assert cut[3].truncated and not cut[0].truncated
    assert cut[0].value == full[0].value


def test_entropy_limits_and_ed(ed_cache):
    for L in (1, 2, 5):
        assert entropy_spaced(L, ModelParams(20, 1.0, 0.0)).value == pytest.approx(1.0, abs=1e-10)
    p = ModelParams(12, 0.5, 1.0)
    rho = ed.reduced_density_matrix(ed_cache(12, 0.5, 1.0), [0, 3, 6, 9])
    assert entropy_spaced(3, p).value == pytest.approx(ed.entropy_and_purity(rho)[0], abs=1e-8)


def test_entropy_grows_with_spacing_at_criticality():
    p = ModelParams(64, 1.0, 1.0)
    s1, s8, s16 = (entropy_spaced(L, p).value for L in (1, 8, 16))
    assert s16 > s8 > s1
    assert s16 <= 4


def test_density_matrix_checks():
    pats = ["IIII", "ZIII"]
    rho = density_matrix_from_paulis(pats, [1.0, 0.3])
    assert np.trace(rho).real == pytest.approx(1.0)
    with pytest.raises(NumericalIntegrityError):
        von_neumann_bits(density_matrix_from_paulis(pats, [1.0, 1.5]))
    with pytest.raises(NumericalIntegrityError):
        von_neumann_bits(density_matrix_from_paulis(pats, [0.9, 0.0]))
    assert von_neumann_bits(density_matrix_from_paulis(["IIII"], [1.0])) == pytest.approx(4.0)


def test_gamma_transform():
    lams = np.linspace(0.5, 1.5, 11)
    t4 = HALF_PI - np.array([1, 0.5, 0.4, 0.3, 0.2, 0.1, 0.15, 0.25, 0.35, 0.45, 0.55])
    g, dropped = gamma_transform(Curve(40, 1.0, "T4", lams, t4))
    assert not dropped.any()
    assert g.values[0] == pytest.approx(-1.0) and g.values[1] == pytest.approx(-2.0)
    assert find_peak(g, mode="min").lambda_m == pytest.approx(find_peak(Curve(40, 1, "T4", lams, t4)).lambda_m, abs=0.1)
    t4[3] = HALF_PI
    g, dropped = gamma_transform(Curve(40, 1.0, "T4", lams, t4))
    assert dropped.tolist() == [i == 3 for i in range(11)] and len(g) == 10
