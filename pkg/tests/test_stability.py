import itertools

import numpy as np
import pytest

from services import settings
from services.errors import DimensionCapError, ValidationError
from services.lattice_core import Lattice, block_compose, make_witness
from services.reduction import lll_reduce
from services.stability import (
    alpha,
    alpha_k,
    canonical_filtration,
    complement_is_stable,
    delta_dimension,
    is_stable,
    min_delta,
)


def brute_alpha_k(x: Lattice, k: int, span: int = 3) -> float:
    """Exhaustive minimum over subgroups generated by small coefficient vectors (n = 3)"""
    basis = lll_reduce(x).basis
    coeffs = np.array([c for c in itertools.product(range(-span, span + 1), repeat=3) if any(c)], dtype=float)
    vecs = coeffs @ basis
    if k == 1:
        return float(np.linalg.norm(vecs, axis=1).min())
    if k == 2:
        areas = np.linalg.norm(np.cross(vecs[:, None, :], vecs[None, :, :]), axis=2)
        return float(np.sqrt(areas[areas > 1e-9].min()))
    return abs(np.linalg.det(basis)) ** (1.0 / 3.0)


@pytest.mark.parametrize("n", range(2, 9))
def test_integer_lattice_is_stable(n):
    report = alpha(Lattice.integer(n))
    assert report.alpha == 1.0
    assert report.stable
    assert report.mode == "exact"


def test_squeezed_lattice(squeezed):
    report = alpha(squeezed)
    assert report.alpha == pytest.approx(0.5)
    assert not report.stable
    assert report.witness.rank == 1
    assert not is_stable(squeezed)


def test_hexagonal_is_stable(hexagonal):
    report = alpha(hexagonal)
    assert report.stable
    assert report.alpha == pytest.approx(1.0)
    assert report.alpha_by_rank[0] == pytest.approx((4.0 / 3.0) ** 0.25)
    assert is_stable(hexagonal)


def test_alpha_k_matches_enumeration(random_lattices):
    for x in random_lattices(3, 10, seed=11):
        for k in (1, 2, 3):
            value, witness = alpha_k(x, k)
            assert witness.rank == k
            assert value == pytest.approx(brute_alpha_k(x, k), rel=1e-9, abs=1e-9)


def test_alpha_is_min_over_ranks(random_lattices):
    for x in random_lattices(4, 5, seed=5):
        report = alpha(x)
        assert report.alpha == pytest.approx(min(report.alpha_by_rank))
        assert report.alpha <= 1.0 + 1e-12
        assert report.stable == is_stable(x)


def test_alpha_k_range_check(z3):
    with pytest.raises(ValidationError):
        alpha_k(z3, 0)
    with pytest.raises(ValidationError):
        alpha_k(z3, 4)


def test_alpha_requires_unimodular():
    with pytest.raises(ValidationError):
        alpha(Lattice.rational([[2, 0], [0, 1]]))


def test_alpha_cap(monkeypatch, z3):
    monkeypatch.setattr(settings, "GON_ALPHA_DIM_CAP", 2)
    with pytest.raises(DimensionCapError):
        alpha(z3)


def test_min_delta_spans(z2, squeezed):
    assert min_delta(z2, 0.1).dimension == 2
    span = min_delta(squeezed, 0.5)
    assert span.dimension == 1
    assert [m.rank for m in span.members] == [1]
    with pytest.raises(ValidationError):
        min_delta(z2, 0.0)


def brute_delta_dimension(x: Lattice, delta: float, span: int = 3) -> int:
    """Span of all short vectors and small-area pairs below the Min_delta thresholds (n = 3)"""
    threshold = (1 + delta) * alpha(x).alpha
    if threshold ** 3 > 1:
        return 3
    basis = lll_reduce(x).basis
    coeffs = np.array([c for c in itertools.product(range(-span, span + 1), repeat=3) if any(c)], dtype=float)
    vecs = coeffs @ basis
    short = vecs[np.linalg.norm(vecs, axis=1) < threshold]
    areas = np.linalg.norm(np.cross(vecs[:, None, :], vecs[None, :, :]), axis=2)
    i, j = np.nonzero((areas > 1e-9) & (areas < threshold ** 2))
    pool = np.vstack([short, vecs[i], vecs[j]])
    return int(np.linalg.matrix_rank(pool, tol=1e-9)) if len(pool) else 0


def test_min_delta_matches_brute_force(random_lattices):
    for x in random_lattices(3, 4, seed=17):
        for delta in (0.05, 0.2, 0.6):
            expected = brute_delta_dimension(x, delta)
            assert min_delta(x, delta).dimension == expected
            assert delta_dimension(x, delta) == expected


def test_delta_dimension_grows_with_delta(random_lattices):
    grid = [0.02, 0.1, 0.3, 0.8, 2.0]
    for x in random_lattices(3, 3, seed=5):
        dims = [delta_dimension(x, d) for d in grid]
        assert dims == sorted(dims)


def test_delta_dimension_of_integer_lattice_returns_quickly():
    assert delta_dimension(Lattice.integer(4), 0.5) == 4
    assert delta_dimension(Lattice.integer(6), 0.1) == 6


def test_member_listing_is_capped(z2, monkeypatch):
    monkeypatch.setattr(settings, "GON_DELTA_MEMBER_LIMIT", 1)
    span = min_delta(z2, 0.5)
    assert span.truncated
    assert len(span.members) == 1
    assert span.dimension == 2
    assert span.to_json()["truncated"]


def test_canonical_filtration(z2, squeezed):
    assert [w.rank for w in canonical_filtration(z2)] == [0, 2]
    flag = canonical_filtration(squeezed)
    assert [w.rank for w in flag] == [0, 1, 2]
    assert flag[1].covolume == pytest.approx(0.5)


def test_complement_of_unit_subgroup(z3):
    report = complement_is_stable(z3, make_witness(z3, [[1, 0, 0]]))
    assert report["subgroup_stable"]
    assert report["projection_stable"]
    assert report["subgroup_covolume"] == pytest.approx(1.0)


@pytest.mark.parametrize("fill", [0, "1/3", -2])
def test_block_compose_of_stable_blocks_is_stable(fill):
    x = block_compose([Lattice.integer(2), Lattice.integer(1), Lattice.integer(2)], fill)
    report = alpha(x)
    assert report.stable
    assert report.alpha == 1.0


def test_block_compose_of_float_stable_blocks(hexagonal):
    x = block_compose([hexagonal, Lattice.integer(1)], 0.37)
    report = alpha(x)
    assert report.stable
    assert report.alpha == pytest.approx(1.0, abs=1e-9)
    assert is_stable(x)
