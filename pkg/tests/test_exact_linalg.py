from fractions import Fraction

import pytest

from core.errors import PreconditionError, ResourceCapError, SchemaError
from core.exact_linalg import (
    LatticeBasis,
    QMatrix,
    closest_vector,
    covering_radius_upper,
    determinant,
    dual_lattice,
    enumerate_lattice_points,
    format_fraction,
    hnf,
    invariant_factors,
    lll_reduce,
    nullspace,
    rank,
    rref,
    shortest_vector,
    snf,
    solve,
    sqrt_bounds,
    to_fraction,
)


def lattice(*columns):
    return LatticeBasis.from_columns(columns, len(columns[0]))


def test_to_fraction_accepts_ints_strings_and_fractions():
    assert to_fraction(3) == 3
    assert to_fraction(" 7/2 ") == Fraction(7, 2)
    assert to_fraction(Fraction(1, 3)) == Fraction(1, 3)


@pytest.mark.parametrize("bad", ["x", "1/0", 1.5, True, None])
def test_to_fraction_rejects_other_literals(bad):
    with pytest.raises(SchemaError):
        to_fraction(bad)


def test_format_fraction():
    assert format_fraction(Fraction(4, 2)) == "2"
    assert format_fraction(Fraction(-1, 3)) == "-1/3"


def test_sqrt_bounds_exact_for_squares_and_bracketing_otherwise():
    assert sqrt_bounds(Fraction(9, 4)) == (Fraction(3, 2), Fraction(3, 2))
    lo, hi = sqrt_bounds(Fraction(2))
    assert lo * lo <= 2 <= hi * hi
    assert hi - lo <= Fraction(1, 2**40)


def test_rref_rank_nullspace():
    m = QMatrix.from_rows([[1, 2, 3], [2, 4, 6], [1, 0, 1]])
    reduced, pivots = rref(m)
    assert pivots == (0, 1)
    assert rank(m) == 2
    (kernel,) = nullspace(m)
    assert m.apply(kernel) == (0, 0, 0)


def test_solve_reports_inconsistency():
    m = QMatrix.from_rows([[1, 0], [0, 0]])
    assert solve(m, [Fraction(2), Fraction(0)]) == (2, 0)
    assert solve(m, [Fraction(0), Fraction(1)]) is None


def test_hnf_of_rational_generators():
    m = QMatrix.from_columns([[Fraction(1, 2)], [Fraction(1, 3)]], 1)
    assert hnf(m) == QMatrix.from_columns([[Fraction(1, 6)]], 1)


def test_hnf_of_zero_matrix_has_no_columns():
    assert hnf(QMatrix.zeros(2, 3)).cols == 0


def test_snf_and_invariant_factors():
    m = QMatrix.from_rows([[2, 0], [0, 3]])
    u, diag, v = snf(m)
    assert sorted(abs(d) for d in diag) == [1, 6]
    assert invariant_factors(m) == [1, 6]
    assert abs(determinant(u)) == 1 and abs(determinant(v)) == 1


def test_dependent_basis_rejected():
    with pytest.raises(PreconditionError):
        lattice([1, 2], [2, 4])


def test_dual_lattice_of_diagonal():
    dual = dual_lattice(lattice([2, 0], [0, 3]))
    assert dual.same_lattice(lattice([Fraction(1, 2), 0], [0, Fraction(1, 3)]))


def test_dual_lattice_is_involutive():
    b = lattice([1, 1], [0, 3])
    assert dual_lattice(dual_lattice(b)).same_lattice(b)


def test_dual_pairings_are_integral():
    b = lattice([2, 1], [1, 3])
    d = dual_lattice(b)
    products = b.basis.transpose() @ d.basis
    assert products.is_integral()


def test_enumeration_counts_points_of_z2():
    points = list(enumerate_lattice_points(lattice([1, 0], [0, 1]), Fraction(1)))
    assert len(points) == 5


def test_enumeration_cap():
    with pytest.raises(ResourceCapError):
        list(enumerate_lattice_points(lattice([1, 0], [0, 1]), Fraction(100), cap=10))


@pytest.mark.parametrize("columns, expected", [
    (([1, 0], [0, 1]), 1),
    (([1, 0], [Fraction(1, 2), 1]), 1),
    (([3, 0], [0, 5]), 9),
])
def test_shortest_vector_length(columns, expected):
    _, length_sq = shortest_vector(lattice(*columns))
    assert length_sq == expected


def test_shortest_vector_of_skewed_basis():
    vec, length_sq = shortest_vector(lattice([1, 0], [100, 1]))
    assert length_sq == 1
    # coefficients (-100, 1) are the smallest among the four unit vectors
    assert vec == (0, 1)


def test_trivial_lattice_has_no_shortest_vector():
    with pytest.raises(PreconditionError, match="trivial lattice has no shortest vector"):
        shortest_vector(LatticeBasis(QMatrix.zeros(2, 0)))


def test_closest_vector_includes_orthogonal_part():
    b = lattice([1, 0, 0])
    vec, dist_sq = closest_vector(b, [Fraction(12, 5), 0, 2])
    assert vec == (2, 0, 0)
    assert dist_sq == Fraction(4, 25) + 4


def test_lll_reduces_to_short_basis():
    reduced = lll_reduce(lattice([1, 0], [100, 1]))
    assert reduced.same_lattice(lattice([1, 0], [0, 1]))
    assert max(sum(x * x for x in col) for col in reduced.basis.columns()) == 1


def test_covering_radius_bounds_square_lattice():
    mu = covering_radius_upper(lattice([1, 0], [0, 1]), Fraction(1, 20))
    # true value sqrt(2)/2; the bound adds at most step * sqrt(2) / 2
    assert Fraction(707, 1000) <= mu <= Fraction(707, 1000) + Fraction(1, 20)


def test_covering_radius_requires_full_rank():
    with pytest.raises(PreconditionError):
        covering_radius_upper(lattice([1, 0]), Fraction(1, 10))


def test_covering_radius_refuses_grids_beyond_int64():
    with pytest.raises(ResourceCapError, match="int64"):
        covering_radius_upper(lattice([Fraction(1, 3 ** 40), 0], [0, 1]), Fraction(1, 20))
