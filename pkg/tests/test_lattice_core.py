from fractions import Fraction

import numpy as np
import pytest

from services.errors import MembershipError, PrimitivityError, RankDeficiencyError, ValidationError
from services.lattice_core import (
    Lattice,
    block_compose,
    coefficients,
    complete_to_unimodular,
    covolume,
    dual_lattice,
    gram_schmidt,
    integer_echelon,
    integer_left_kernel,
    is_primitive,
    make_witness,
    project_complement,
    restrict_to_span,
    saturate,
    subgroup_index,
    sublattice_intersection,
    sublattice_sum,
)


def test_from_json_rational_strings():
    x = Lattice.from_json({"dim": 2, "rational": True, "basis": [["1/2", "0"], ["0", "2"]]})
    assert x.is_rational
    assert x.exact[0][0] == Fraction(1, 2)
    assert x.is_unimodular()


def test_from_json_rejects_non_square():
    with pytest.raises(ValidationError):
        Lattice.from_json({"dim": 2, "basis": [[1, 0, 0], [0, 1, 0]]})


def test_dependent_basis_reports_index():
    with pytest.raises(RankDeficiencyError) as info:
        Lattice([[1.0, 2.0], [2.0, 4.0]])
    assert info.value.index == 1


def test_gram_schmidt_norms_multiply_to_covolume():
    b = np.array([[2.0, 1.0, 0.0], [0.0, 1.0, 3.0], [1.0, 0.0, 1.0]])
    _, norms = gram_schmidt(b)
    assert np.prod(norms) == pytest.approx(abs(np.linalg.det(b)))


def test_covolume_of_planar_pair():
    assert covolume(np.array([[1.0, 0.0, 0.0], [1.0, 1.0, 0.0]])) == pytest.approx(1.0)


def test_coefficients_exact_and_membership(z2):
    assert coefficients(z2, [[3, -2]]) == [[3, -2]]
    with pytest.raises(MembershipError):
        coefficients(Lattice.rational([[2, 0], [0, 1]]), [[1, 0]])


def test_coefficients_float_tolerance():
    x = Lattice([[1.0, 0.0], [0.5, 1.0]])
    assert coefficients(x, [[1.5, 1.0 + 1e-9]]) == [[1, 1]]
    with pytest.raises(MembershipError):
        coefficients(x, [[0.25, 0.0]])


def test_saturate_recovers_primitive_closure(z2):
    w = saturate(z2, [[2, 4]])
    assert w.coeffs == ((1, 2),)
    assert w.covolume == pytest.approx(np.sqrt(5.0))


def test_subgroup_index_and_primitivity(z3):
    assert subgroup_index([[2, 0, 0]], 3) == 2
    assert subgroup_index([[1, 1, 0], [0, 1, 1]], 3) == 1
    assert not is_primitive(z3, make_witness(z3, [[2, 0, 0]]))


def test_complete_to_unimodular():
    m = complete_to_unimodular([[1, 2, 3]], 3)
    assert m[0] == [1, 2, 3]
    det = Lattice.rational(m).determinant()
    assert abs(det) == 1
    with pytest.raises(PrimitivityError):
        complete_to_unimodular([[2, 2, 0]], 3)


def test_integer_echelon_pivots():
    h, u, pivots = integer_echelon([[2, 4], [1, 3]])
    assert pivots == [0, 1]
    assert abs(Lattice.rational(u).determinant()) == 1


def test_left_kernel_annihilates():
    rows = [[1, 2], [2, 4], [0, 1]]
    for y in integer_left_kernel(rows):
        assert [sum(y[i] * rows[i][j] for i in range(3)) for j in range(2)] == [0, 0]


def test_sum_and_intersection(z3):
    a = make_witness(z3, [[1, 0, 0], [0, 1, 0]])
    b = make_witness(z3, [[0, 1, 0], [0, 0, 1]])
    assert sublattice_sum(z3, a, b).rank == 3
    meet = sublattice_intersection(z3, a, b)
    assert meet.rank == 1
    assert meet.covolume == pytest.approx(1.0)


def test_zero_subgroup_has_covolume_one(z3):
    w = make_witness(z3, [])
    assert w.rank == 0
    assert w.covolume == 1.0


def test_projection_and_restriction_multiply_covolume():
    x = Lattice.rational([[1, 0, 0], [1, 2, 0], [0, 1, "1/2"]])
    w = make_witness(x, [[1, 0, 0]])
    inner = restrict_to_span(x, w)
    outer = project_complement(x, w)
    assert inner.dim == 1 and outer.dim == 2
    assert inner.covolume() * outer.covolume() == pytest.approx(x.covolume())


def test_projection_needs_primitive(z2):
    with pytest.raises(PrimitivityError):
        project_complement(z2, make_witness(z2, [[2, 0]]))


def test_dual_lattice_exact():
    x = Lattice.rational([[2, 0], [1, "1/2"]])
    d = dual_lattice(x)
    prod = np.asarray(x.basis) @ np.asarray(d.basis).T
    assert np.allclose(prod, np.eye(2))
    assert d.is_rational


def test_block_compose_rejects_non_unimodular():
    with pytest.raises(ValidationError):
        block_compose([Lattice.rational([[2]]), Lattice.integer(1)])


def test_block_compose_first_block_is_primitive(z2):
    x = block_compose([z2, Lattice.integer(1)], 3)
    assert x.is_rational
    assert x.is_unimodular()
    w = make_witness(x, [[1, 0, 0], [0, 1, 0]])
    assert is_primitive(x, w)
    assert project_complement(x, w).covolume() == pytest.approx(1.0)


def test_random_unimodular_has_covolume_one(random_lattices):
    for x in random_lattices(4, 5):
        assert x.covolume() == pytest.approx(1.0)
