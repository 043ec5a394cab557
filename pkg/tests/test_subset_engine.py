import numpy as np
import pytest

from xychain.model import ModelParams, majorana_covariance
from xychain.pauli import PauliString, pauli_expectation
from xychain.subset_engine import SubsetEngine, all_patterns, pattern_info


def test_pattern_info():
    assert len(all_patterns(3)) == 64
    info = pattern_info("XIX")
    assert info.nonzero and info.mask == 0b11
    assert not pattern_info("XII").nonzero
    assert pattern_info("ZZ").mask == 0
    assert pattern_info("IIII").onsite == ()


@pytest.mark.parametrize("N,g,lam", [(12, 1.0, 0.5), (30, 0.5, 1.0), (40, 1.0, 0.25), (40, 0.3, 1.6)])
def test_matches_generic_pfaffians(N, g, lam, rng):
    cov = majorana_covariance(ModelParams(N, g, lam))
    eng = SubsetEngine(cov)
    subs = np.array(sorted({tuple(sorted(rng.choice(N, 4, replace=False))) for _ in range(12)}))
    pats = all_patterns(4)
    vals = eng.expectations(subs, pats)
    for i, s in enumerate(subs):
        for j in rng.choice(len(pats), 25, replace=False):
            p = PauliString.from_dict(dict(zip(s.tolist(), pats[j])))
            assert vals[i, j] == pytest.approx(pauli_expectation(p, cov), abs=1e-12)
    unsigned = eng.expectations(subs, pats, signed=False)
    np.testing.assert_allclose(unsigned, np.abs(vals), atol=1e-13)


def test_ordered_phase_long_strings():
    # deep in the ordered phase long strings are tiny; the SVD route must keep them accurate
    N = 60
    cov = majorana_covariance(ModelParams(N, 1.0, 0.2))
    eng = SubsetEngine(cov)
    subs = np.array([[0, 1, 30, 31], [0, 20, 40, 50], [3, 29, 31, 58]])
    pats = ["YYYY", "XYXY", "YXXY", "ZYYZ"]
    vals = eng.expectations(subs, pats)
    for i, s in enumerate(subs):
        for j, pat in enumerate(pats):
            ref = pauli_expectation(PauliString.from_dict(dict(zip(s.tolist(), pat))), cov)
            assert vals[i, j] == pytest.approx(ref, abs=1e-13)


def test_rejects_unsorted_subsets():
    eng = SubsetEngine(majorana_covariance(ModelParams(8, 1, 1)))
    with pytest.raises(ValueError):
        eng.expectations([[3, 1]], ["XX"])
