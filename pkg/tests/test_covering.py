import json
import math
from fractions import Fraction

import numpy as np
import pytest

from services import settings
from services.covering import (
    INAPPLICABLE,
    GammaTable,
    composition_bound,
    covering_radius,
    decomposition_check,
    default_gamma_table,
    minkowski_covrad_check,
    minkowski_gamma,
    product_form_bound,
    woods_bound,
    woods_formula,
)
from services.errors import DimensionCapError, ValidationError
from services.lattice_core import Lattice, make_witness
from services.reduction import closest_vector, kz_reduce

GAMMA_2 = (4.0 / 3.0) ** 0.25
TOL = 1e-5


@pytest.mark.parametrize("n", [1, 2, 3])
def test_covrad_of_integer_lattice(n):
    cov = covering_radius(Lattice.integer(n), TOL)
    assert cov.value == pytest.approx(math.sqrt(n) / 2, abs=TOL)
    assert cov.value <= cov.upper <= cov.value + TOL + 1e-12
    assert closest_vector(Lattice.integer(n), cov.deep_hole).distance == pytest.approx(cov.value, abs=1e-9)


def test_covrad_of_squeezed(squeezed):
    cov = covering_radius(squeezed, TOL)
    assert cov.value == pytest.approx(math.sqrt(17) / 4, abs=TOL)


def test_covrad_of_hexagonal(hexagonal):
    side = (4.0 / 3.0) ** 0.25
    cov = covering_radius(hexagonal, TOL)
    assert cov.value == pytest.approx(side / math.sqrt(3.0), abs=TOL)
    # dense grid over the fundamental cell as an oracle
    grid = np.linspace(0.0, 1.0, 61)
    points = np.array([[a, b] for a in grid for b in grid]) @ hexagonal.basis
    far = max(closest_vector(hexagonal, p).distance for p in points)
    assert far <= cov.upper + 1e-9


def test_covrad_rejects_tiny_tol(z2):
    with pytest.raises(ValidationError):
        covering_radius(z2, 1e-9)


def test_covrad_cap(monkeypatch, z3):
    monkeypatch.setattr(settings, "GON_COVRAD_DIM_CAP", 2)
    with pytest.raises(DimensionCapError):
        covering_radius(z3, TOL)


def test_woods_bound_tight_on_integers():
    assert woods_bound(1.0, 1.0, 1, GAMMA_2) == pytest.approx(0.25)
    assert woods_bound(1.0, 1.0, 1, GAMMA_2, variant="literal") == pytest.approx(1.0 - 1.0 / math.sqrt(4.0 / 3.0))


def test_woods_formula_without_hypothesis():
    assert woods_formula(1.0, 2.0, 1, GAMMA_2) == pytest.approx(13 / 16)
    assert woods_bound(1.0, 2.0, 1, GAMMA_2) == INAPPLICABLE


def test_woods_bound_inapplicable_in_dim_four():
    assert woods_bound(1.0, 1.0, 4, 8.0 ** 0.1) == INAPPLICABLE


def test_woods_bound_rejects_bad_input():
    with pytest.raises(ValidationError):
        woods_bound(-1.0, 1.0, 1, GAMMA_2)
    with pytest.raises(ValidationError):
        woods_bound(1.0, 1.0, 1, GAMMA_2, variant="other")


def test_composition_bound_on_z4():
    profile = [1.0, 1.0, 1.0, 1.0]
    assert composition_bound(profile, (1, 1, 1, 1)) == pytest.approx(1.0)
    assert composition_bound(profile, (4,)) == INAPPLICABLE
    with pytest.raises(ValidationError):
        composition_bound(profile, (1, 2))


def test_composition_bound_dominates_covrad(random_lattices):
    for x in random_lattices(3, 10, seed=21):
        profile = kz_reduce(x)
        cov_sq = covering_radius(x, TOL).value_sq
        for parts in [(1, 1, 1), (1, 2), (2, 1), (3,)]:
            bound = composition_bound(profile, parts)
            if bound != INAPPLICABLE:
                assert cov_sq <= bound + 1e-6


def test_decomposition_on_squeezed(squeezed):
    check = decomposition_check(squeezed, make_witness(squeezed, [[1, 0]]), TOL)
    assert check.lhs == pytest.approx(17 / 16, abs=1e-4)
    assert check.rhs == pytest.approx(1 / 16 + 1, abs=1e-4)
    assert check.holds


def test_product_form(z2, squeezed):
    assert product_form_bound(z2, TOL)["bound"] == pytest.approx(0.25, abs=1e-4)
    report = product_form_bound(squeezed, TOL)
    assert report["bound"] == pytest.approx(17 / 32, abs=1e-4)
    assert not report["below_threshold"]


def test_minkowski_covrad_check(z2, squeezed):
    assert minkowski_covrad_check(z2, TOL)["verdict"] in ("holds", "holds_within_tol")
    assert minkowski_covrad_check(squeezed, TOL)["verdict"] == "violated"


def test_default_gamma_table_is_exact_in_low_dims():
    table = default_gamma_table()
    assert table.hermite_power(2) == Fraction(4, 3)
    assert table.gamma(2) == pytest.approx(GAMMA_2)
    assert table.provenance[2].startswith("known_exact")
    for d in range(1, table.dim_max + 1):
        assert table.gamma(d) <= minkowski_gamma(d) * (1 + 1e-12)


def test_gamma_table_fallback_for_missing_entries(tmp_path):
    path = tmp_path / "gamma.json"
    path.write_text(json.dumps({"dim_max": 3, "exact": {"1": 1.0}}))
    table = GammaTable.load(path)
    assert table.provenance[3] == "minkowski_fallback"
    assert table.gamma(3) == pytest.approx(minkowski_gamma(3))


def test_gamma_table_missing_file(tmp_path):
    with pytest.raises(ValidationError):
        GammaTable.load(tmp_path / "missing.json")


def test_decomposition_on_random_splits(random_lattices):
    for x in random_lattices(4, 2, seed=31):
        for rows in ([[1, 0, 0, 0]], [[1, 0, 0, 0], [0, 1, 0, 0]], [[0, 1, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1]]):
            check = decomposition_check(x, make_witness(x, rows), TOL)
            assert check.holds
            assert check.lhs <= check.rhs + 2 * TOL
