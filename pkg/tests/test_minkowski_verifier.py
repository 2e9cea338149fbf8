import json
import math

import numpy as np
import pytest

from services import settings
from services.covering import default_gamma_table
from services.errors import DeadlineExceeded, DimensionCapError, ValidationError
from services.minkowski_verifier import (
    COVERED,
    INSIDE,
    OUTSIDE,
    OUTSIDE_KZS,
    STRADDLES,
    UNRESOLVED,
    Composition,
    CoverCertificate,
    LogBox,
    check_certificate,
    compositions,
    contract,
    initial_bounds,
    kzs_classify,
    read_certificate,
    region_covers,
    verify_cover,
    write_certificate,
    _blocks,
    _pointwise,
)
from services.reduction import kz_reduce


def zero_box(n: int) -> LogBox:
    return LogBox.from_bounds([(0.0, 0.0)] * (n - 1))


def test_compositions():
    assert [c.parts for c in compositions(1)] == [(1,)]
    assert [c.parts for c in compositions(3)] == [(1, 1, 1), (1, 2), (2, 1), (3,)]
    assert len(compositions(7)) == 64
    with pytest.raises(ValidationError):
        Composition((2, 0))


def test_kzs_classify():
    assert kzs_classify(zero_box(4)) == INSIDE
    assert kzs_classify(LogBox.from_bounds([(-0.5, -0.1)])) == OUTSIDE
    assert kzs_classify(LogBox.from_bounds([(-0.1, 0.1)])) == STRADDLES


def test_contract_trims_to_kzs():
    box = contract(LogBox.from_bounds([(-0.1, 0.1)]))
    assert box.intervals[0].lo >= 0.0
    assert box.intervals[0].hi <= math.log(4 / 3) / 4 + 1e-12
    assert contract(LogBox.from_bounds([(-0.5, -0.1)])) is None


def test_region_covers_at_integer_profile():
    assert region_covers((1, 1, 1, 1), zero_box(4))
    assert not region_covers((4,), zero_box(4))
    with pytest.raises(ValidationError):
        region_covers((1, 2), zero_box(4))


def test_initial_bounds():
    box, derivation = initial_bounds(2)
    assert box.intervals[0].lo == 0.0
    assert box.intervals[0].hi == pytest.approx(math.log(4 / 3) / 4)
    assert derivation
    for n in range(2, 8):
        box, _ = initial_bounds(n)
        assert all(iv.contains(0.0) for iv in box.intervals)


def test_initial_box_holds_random_profiles(random_lattices):
    box, _ = initial_bounds(3)
    for x in random_lattices(3, 30, seed=17):
        ell = kz_reduce(x).log_coefficients()
        if ell[0] >= 0 and ell[0] + ell[1] >= 0:
            assert all(iv.lo - 1e-9 <= v <= iv.hi + 1e-9 for iv, v in zip(box.intervals, ell[:2]))


def test_verify_dim_two_is_covered():
    cert = verify_cover(2, 1e-3)
    assert cert.covered
    assert cert.count(UNRESOLVED) == 0
    assert cert.count(COVERED) >= 1
    report = check_certificate(cert, samples_per_leaf=500, seed=1)
    assert report["valid"]
    assert report["covered"]
    assert report["partition_ok"]


def test_verify_dim_one_is_trivial():
    cert = verify_cover(1)
    assert cert.covered


def test_certificate_round_trip(tmp_path):
    cert = verify_cover(2, 1e-2)
    path = tmp_path / "cert.json"
    write_certificate(cert, path)
    again = read_certificate(path)
    assert again.to_json() == cert.to_json()


def test_tampered_certificate_fails(tmp_path):
    data = verify_cover(2, 1e-2).to_json()
    data["leaves"] = data["leaves"][1:]
    report = check_certificate(CoverCertificate.from_json(data), samples_per_leaf=100)
    assert not report["partition_ok"]
    assert not report["valid"]


def test_bad_certificate_file(tmp_path):
    path = tmp_path / "cert.json"
    path.write_text(json.dumps({"dim": 2}))
    with pytest.raises(ValidationError):
        read_certificate(path)


def test_deadline_returns_partial():
    with pytest.raises(DeadlineExceeded) as info:
        verify_cover(3, 1e-3, deadline=1e-9)
    partial = info.value.partial
    assert not partial.complete
    assert not partial.covered


def test_verify_cap(monkeypatch):
    monkeypatch.setattr(settings, "GON_VERIFY_DIM_CAP", 2)
    with pytest.raises(DimensionCapError):
        verify_cover(3)


@pytest.mark.slow
def test_verify_dim_three_is_covered():
    cert = verify_cover(3, 1e-3)
    assert cert.covered
    assert check_certificate(cert, samples_per_leaf=10_000, seed=0)["valid"]


def test_peel_tiles_the_outer_box():
    outer = LogBox.from_bounds([(0.0, 1.0), (0.0, 1.0)])
    inner = LogBox.from_bounds([(0.2, 0.5), (0.1, 1.0)])
    pieces = outer.peel(inner)
    assert len(pieces) == 3
    assert math.fsum(p.volume for p in pieces) + inner.volume == pytest.approx(outer.volume)
    assert all(outer.contains_box(p) for p in pieces)
    assert outer.peel(outer) == []


def pointwise_failures(cert, per_leaf: int, seed: int) -> int:
    """Sample the full box of every covered leaf and re-test its region point by point"""
    gen = np.random.default_rng(seed)
    gammas = default_gamma_table()
    failures = 0
    for leaf in cert.leaves:
        if leaf.verdict != COVERED:
            continue
        points = leaf.box.sample(gen, per_leaf)
        hyp, total = _pointwise(_blocks(leaf.composition, gammas, cert.variant), points, cert.dim)
        failures += int(np.count_nonzero((hyp < -1e-12) | (total > 1e-12)))
    return failures


def test_covered_leaves_hold_on_their_whole_box():
    cert = verify_cover(3, 2e-2)
    assert cert.count(COVERED) >= 1
    assert cert.count(OUTSIDE_KZS) >= 1
    assert pointwise_failures(cert, 300, seed=3) == 0
    report = check_certificate(cert, samples_per_leaf=300, seed=3)
    assert report["partition_ok"]
    assert report["violations"] == 0


@pytest.mark.slow
def test_covered_leaves_hold_on_their_whole_box_dim_four():
    cert = verify_cover(4, 2e-2)
    assert pointwise_failures(cert, 3000, seed=4) == 0
    assert check_certificate(cert, samples_per_leaf=3000, seed=4)["violations"] == 0
