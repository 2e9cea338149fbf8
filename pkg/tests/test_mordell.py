import itertools

import numpy as np
import pytest

from services.errors import ValidationError
from services.lattice_core import Lattice
from services.mordell import (
    SymmetricBox,
    block_form_bound,
    block_kappa_estimate,
    is_admissible,
    kappa_lower_estimate,
    kappa_n_bounds,
)
from services.reduction import lll_reduce
from services.stability import alpha_k


def brute_admissible(x: Lattice, box: SymmetricBox, span: int = 5) -> bool:
    a = np.asarray(box.half_widths)
    basis = lll_reduce(x).basis
    for c in itertools.product(range(-span, span + 1), repeat=x.dim):
        if any(c):
            v = np.asarray(c, dtype=float) @ basis
            if np.all(np.abs(v) < a):
                return False
    return True


def test_admissible_boundary_points(z2):
    assert is_admissible(z2, SymmetricBox((1.0, 1.0)))
    assert not is_admissible(z2, SymmetricBox((1.01, 1.0)))


def test_admissible_matches_brute_force(random_lattices):
    gen = np.random.default_rng(3)
    for x in random_lattices(3, 10, seed=9):
        box = SymmetricBox(tuple(gen.uniform(0.3, 1.5, size=3)))
        assert is_admissible(x, box) == brute_admissible(x, box)


def test_admissibility_is_diagonal_invariant():
    x = Lattice.rational([[1, 0, 0], [2, 1, 0], [1, 3, 1]])
    box = SymmetricBox((1.0, 1.0, 0.5))
    a = np.array([2.0, 0.25, 2.0])
    moved = Lattice(x.basis * a[None, :])
    assert is_admissible(moved, box.scaled(a)) == is_admissible(x, box)
    assert box.scaled(a).volume == pytest.approx(box.volume, rel=1e-12)


def test_box_validation():
    with pytest.raises(ValidationError):
        SymmetricBox((1.0, 0.0))
    with pytest.raises(ValidationError):
        is_admissible(Lattice.integer(3), SymmetricBox((1.0, 1.0)))


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_kappa_of_integer_lattice(n):
    est = kappa_lower_estimate(Lattice.integer(n), budget=40, seed=0)
    assert est.value == pytest.approx(1.0)
    assert est.box.half_widths == pytest.approx((1.0,) * n)


def test_kappa_above_inscribed_cube(random_lattices):
    for x in random_lattices(3, 10, seed=13):
        est = kappa_lower_estimate(x, budget=80, seed=1)
        a1, _ = alpha_k(x, 1)
        assert est.value >= (a1 / np.sqrt(3.0)) ** 3 - 1e-9
        assert is_admissible(x, est.box)


def test_kappa_estimate_is_seed_stable(random_lattices):
    x = random_lattices(2, 1)[0]
    a = kappa_lower_estimate(x, budget=80, seed=4)
    b = kappa_lower_estimate(x, budget=80, seed=4)
    assert a.value == b.value
    assert a.box == b.box


def test_block_estimate_dominates_product():
    sheared = Lattice.rational([[1, 0], ["1/2", 1]])
    result = block_kappa_estimate([sheared, Lattice.integer(1)], fill="1/3", budget=80, seed=2)
    assert result["lattice"].is_rational
    assert result["estimate"].value >= result["product"] - 1e-9
    assert len(result["block_values"]) == 2


def test_kappa_n_bounds():
    assert kappa_n_bounds(2)["general"] == pytest.approx(0.5)
    five = kappa_n_bounds(5)
    assert five["mod4_1"] == pytest.approx(1 / 48)
    assert five["mod4_1"] > five["general"]
    assert five["best"] == five["mod4_1"]
    four = kappa_n_bounds(4)
    assert four["mod4_1"] is None
    assert four["general"] == pytest.approx(1 / 16)
    six = kappa_n_bounds(6)
    assert six["mod4_2"] is not None
    assert six["hadamard_refined"] <= six["hadamard"]
    with pytest.raises(ValidationError):
        kappa_n_bounds(1)


def test_block_form_bound():
    report = block_form_bound([2, 2])
    assert report["product"] == pytest.approx(0.25)
    assert report["unbounded_orbit"] == pytest.approx(3 ** -1.5)
    assert report["dominates"]
