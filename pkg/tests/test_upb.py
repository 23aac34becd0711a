import numpy as np
import pytest

from qdh.fiveparty import upb_family
from qdh.upb import (
    CapacityError,
    ProductStateSet,
    check_orthogonality,
    check_unextendible,
    local_rank,
    witness_overlaps,
)

ZERO, ONE = np.array([1, 0]), np.array([0, 1])
PLUS, MINUS = np.array([1, 1]) / np.sqrt(2), np.array([1, -1]) / np.sqrt(2)
PLUS_I, MINUS_I = np.array([1, 1j]) / np.sqrt(2), np.array([1, -1j]) / np.sqrt(2)
POOL = [ZERO, ONE, PLUS, MINUS, PLUS_I, MINUS_I]


def test_orthogonality_examples():
    assert check_orthogonality(upb_family(np.pi / 4)).orthogonal
    res = check_orthogonality(ProductStateSet((2, 2), ((ZERO, ZERO), (ZERO, PLUS))))
    assert not res.orthogonal and res.witness == (0, 1)
    assert check_orthogonality(ProductStateSet((2, 2, 2), ((ZERO,) * 3, (ONE,) * 3))).orthogonal


def test_shipped_family_is_unextendible():
    res = check_unextendible(upb_family(np.pi / 4))
    assert res.unextendible and res.witness is None
    assert res.assignments_checked == 81


def test_two_members_are_extendible():
    pset = ProductStateSet((2, 2, 2), ((ZERO,) * 3, (ONE,) * 3))
    res = check_unextendible(pset)
    assert not res.unextendible
    assert np.max(witness_overlaps(pset, res.witness)) <= 1e-10


@pytest.mark.parametrize("k", range(4))
def test_removing_a_member_is_extendible(k):
    pset = upb_family(np.pi / 4).without(k)
    res = check_unextendible(pset)
    assert not res.unextendible
    assert np.max(witness_overlaps(pset, res.witness)) <= 1e-10
    assert np.all(witness_overlaps(upb_family(np.pi / 4), res.witness) >= 0)


def test_verdict_stable_over_theta():
    rng = np.random.default_rng(0)
    for theta in rng.uniform(1e-3, np.pi / 2 - 1e-3, size=100):
        fam = upb_family(theta)
        assert check_orthogonality(fam).orthogonal
        assert check_unextendible(fam).unextendible


def test_capacity_error():
    with pytest.raises(CapacityError):
        check_unextendible(upb_family(np.pi / 4), cap=80)


def test_requires_orthogonal_input():
    with pytest.raises(ValueError):
        check_unextendible(ProductStateSet((2, 2), ((ZERO, ZERO), (ZERO, PLUS))))


def test_local_rank_parallel_detection():
    assert local_rank([ZERO, np.exp(0.3j) * ZERO]) == 1
    assert local_rank([ZERO, PLUS]) == 2
    assert local_rank([]) == 0


def test_product_state_set_validation():
    with pytest.raises(ValueError):
        ProductStateSet((2, 2), ((ZERO, np.array([1, 1])),))
    with pytest.raises(ValueError):
        ProductStateSet((2, 2), ((ZERO,),))


def _bloch_grid(step_deg=5):
    th = np.deg2rad(np.arange(0, 180 + step_deg, step_deg))
    ph = np.deg2rad(np.arange(0, 360, step_deg))
    t, p = np.meshgrid(th, ph, indexing="ij")
    return np.stack([np.cos(t / 2).ravel(), (np.exp(1j * p) * np.sin(t / 2)).ravel()], axis=1)


def test_two_qubit_enumeration_matches_grid_search():
    grid = _bloch_grid()
    rng = np.random.default_rng(12)
    verdicts = []
    for _ in range(20):
        k = int(rng.integers(2, 6))
        members = tuple((POOL[rng.integers(6)], POOL[rng.integers(6)]) for _ in range(k))
        pset = ProductStateSet((2, 2), members)
        res = check_unextendible(pset, require_orthogonal=False)
        worst = np.zeros((len(grid), len(grid)))
        for u, v in members:
            np.maximum(worst, np.outer(np.abs(grid @ u.conj()), np.abs(grid @ v.conj())), out=worst)
        grid_extendible = worst.min() <= 1e-9
        assert res.unextendible == (not grid_extendible)
        if not res.unextendible:
            assert np.max(witness_overlaps(pset, res.witness)) <= 1e-10
        verdicts.append(res.unextendible)
    assert any(verdicts) and not all(verdicts)
